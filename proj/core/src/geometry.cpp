#include "rlo/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "rlo/error.hpp"

namespace rlo {
namespace {

void require_same_dim(Index a, Index b, const char* where) {
  if (a != b) {
    throw DimensionMismatch(std::string(where) + ": dimension " +
                            std::to_string(a) + " vs " + std::to_string(b));
  }
}

void require_base(const Point& expected, const Tangent& xi, const char* where) {
  if (!(xi.base() == expected)) {
    throw BasePointMismatch(std::string(where) +
                            ": tangent vector is not based at the given point");
  }
}

Vector project_sphere(const Vector& base, const Vector& ambient) {
  return ambient - ambient.dot(base) * base;
}

}  // namespace

std::string_view to_string(Manifold m) {
  switch (m) {
    case Manifold::kEuclidean:
      return "euclidean";
    case Manifold::kSphere:
      return "sphere";
  }
  return "unknown";
}

std::optional<Manifold> parse_manifold(std::string_view name) {
  if (name == "euclidean") return Manifold::kEuclidean;
  if (name == "sphere") return Manifold::kSphere;
  return std::nullopt;
}

Point Point::euclidean(Vector coords) {
  if (coords.size() < 1) throw PreconditionError("point dimension must be >= 1");
  return Point(std::move(coords), Manifold::kEuclidean);
}

Point Point::sphere(Vector coords) {
  if (coords.size() < 1) throw PreconditionError("point dimension must be >= 1");
  const double n = coords.norm();
  if (!(std::abs(n - 1.0) <= kSphereNormTolerance)) {
    throw PreconditionError("sphere point has norm " + std::to_string(n));
  }
  return Point(std::move(coords), Manifold::kSphere);
}

Point Point::sphere_normalized(const Vector& coords) {
  const double n = coords.norm();
  if (!(n >= kDegenerateRetractionThreshold) || !std::isfinite(n)) {
    throw DegenerateRetraction("cannot normalize a vector of norm " +
                               std::to_string(n) + " onto the sphere");
  }
  return Point(coords / n, Manifold::kSphere);
}

Tangent::Tangent(Point base, Vector coords)
    : base_(std::move(base)), coords_(std::move(coords)) {
  require_same_dim(base_.dim(), coords_.size(), "Tangent");
}

Tangent Tangent::zero(const Point& base) {
  return Tangent(base, Vector::Zero(base.dim()));
}

Tangent Tangent::project(const Point& base, const Vector& ambient) {
  require_same_dim(base.dim(), ambient.size(), "Tangent::project");
  if (base.manifold() == Manifold::kSphere) {
    return Tangent(base, project_sphere(base.coords(), ambient));
  }
  return Tangent(base, ambient);
}

bool Tangent::is_tangent(double tol) const {
  if (base_.manifold() == Manifold::kEuclidean) return true;
  return std::abs(coords_.dot(base_.coords())) <= tol;
}

Metric Metric::diagonal(Vector weights) {
  for (Index i = 0; i < weights.size(); ++i) {
    if (!(weights[i] > 0.0) || !std::isfinite(weights[i])) {
      throw PreconditionError("diagonal metric weight " + std::to_string(i) +
                              " must be finite and positive");
    }
  }
  Metric g;
  g.kind_ = MetricKind::kDiagonal;
  g.weights_ = std::move(weights);
  return g;
}

Point retract(const Point& theta, const Tangent& xi) {
  require_base(theta, xi, "retract");
  Vector moved = theta.coords() + xi.coords();
  if (theta.manifold() == Manifold::kEuclidean) {
    return Point::euclidean(std::move(moved));
  }
  const double n = moved.norm();
  if (!(n >= kDegenerateRetractionThreshold)) {
    throw DegenerateRetraction("sphere retraction: ||theta + xi|| = " +
                               std::to_string(n));
  }
  return Point::sphere_normalized(moved);
}

Tangent transport(const Point& from, const Point& to, const Tangent& xi) {
  require_base(from, xi, "transport");
  require_same_dim(from.dim(), to.dim(), "transport");
  if (to.manifold() == Manifold::kEuclidean) return Tangent(to, xi.coords());
  return Tangent(to, project_sphere(to.coords(), xi.coords()));
}

double inner(const Metric& g, const Vector& xi, const Vector& zeta) {
  require_same_dim(xi.size(), zeta.size(), "inner");
  if (g.kind() == MetricKind::kIdentity) return xi.dot(zeta);
  require_same_dim(g.weights().size(), xi.size(), "inner (metric weights)");
  return (g.weights().array() * xi.array() * zeta.array()).sum();
}

double norm(const Metric& g, const Vector& xi) {
  return std::sqrt(std::max(0.0, inner(g, xi, xi)));
}

double inner(const Metric& g, const Tangent& xi, const Tangent& zeta) {
  require_same_dim(xi.dim(), zeta.dim(), "inner");
  if (!(xi.base() == zeta.base())) {
    throw BasePointMismatch("inner: tangent vectors have different base points");
  }
  return inner(g, xi.coords(), zeta.coords());
}

double norm(const Metric& g, const Tangent& xi) { return norm(g, xi.coords()); }

Tangent riemannian_gradient(const Metric& g, const Tangent& euclid_grad) {
  Vector scaled;
  if (g.kind() == MetricKind::kIdentity) {
    scaled = euclid_grad.coords();
  } else {
    require_same_dim(g.weights().size(), euclid_grad.dim(),
                     "riemannian_gradient (metric weights)");
    scaled = euclid_grad.coords().cwiseQuotient(g.weights());
  }
  return Tangent::project(euclid_grad.base(), scaled);
}

}  // namespace rlo
