#pragma once

#include <Eigen/Core>

#include <optional>
#include <string_view>

namespace rlo {

using Vector = Eigen::VectorXd;
using Index = Eigen::Index;

enum class Manifold { kEuclidean, kSphere };

std::string_view to_string(Manifold m);
std::optional<Manifold> parse_manifold(std::string_view name);

/// Tolerance on ||coords|| - 1 for points constructed on the unit sphere.
inline constexpr double kSphereNormTolerance = 1e-12;
/// Tolerance on <xi, theta> for vectors claimed tangent to the sphere.
inline constexpr double kSphereTangentTolerance = 1e-10;
/// ||theta + xi|| below this makes the sphere retraction undefined.
inline constexpr double kDegenerateRetractionThreshold = 1e-14;

/// A point on the parameter manifold, stored in ambient coordinates.
class Point {
 public:
  static Point euclidean(Vector coords);
  /// Throws PreconditionError unless | ||coords|| - 1 | <= 1e-12.
  static Point sphere(Vector coords);
  /// Normalizes `coords` onto the sphere.
  static Point sphere_normalized(const Vector& coords);

  const Vector& coords() const noexcept { return coords_; }
  Manifold manifold() const noexcept { return manifold_; }
  Index dim() const noexcept { return coords_.size(); }

  friend bool operator==(const Point& a, const Point& b) {
    return a.manifold_ == b.manifold_ && a.coords_.size() == b.coords_.size() &&
           a.coords_ == b.coords_;
  }

 private:
  Point(Vector coords, Manifold m) : coords_(std::move(coords)), manifold_(m) {}

  Vector coords_;
  Manifold manifold_;
};

/// An element of the tangent space at `base()`.
///
/// The constructor only checks dimensions. On the sphere, vectors produced by
/// `project`, `transport` and `riemannian_gradient` are tangent to within
/// kSphereTangentTolerance; raw ambient gradients handed in by callers need not
/// be, and are projected by `riemannian_gradient`.
class Tangent {
 public:
  Tangent(Point base, Vector coords);

  static Tangent zero(const Point& base);
  /// Orthogonal projection of an ambient vector onto T_base.
  static Tangent project(const Point& base, const Vector& ambient);

  const Vector& coords() const noexcept { return coords_; }
  const Point& base() const noexcept { return base_; }
  Index dim() const noexcept { return coords_.size(); }

  bool is_tangent(double tol = kSphereTangentTolerance) const;

 private:
  Point base_;
  Vector coords_;
};

enum class MetricKind { kIdentity, kDiagonal };

/// Riemannian metric g(xi, zeta) = sum_i w_i xi_i zeta_i.
///
/// The diagonal weights are the entries of A^{-1}, the inverse of the
/// preconditioner A. The identity metric has no stored weights.
class Metric {
 public:
  static Metric identity() { return Metric(); }
  /// Throws PreconditionError unless every weight is finite and > 0.
  static Metric diagonal(Vector weights);

  MetricKind kind() const noexcept { return kind_; }
  const Vector& weights() const noexcept { return weights_; }

 private:
  Metric() = default;

  MetricKind kind_ = MetricKind::kIdentity;
  Vector weights_;
};

Point retract(const Point& theta, const Tangent& xi);

Tangent transport(const Point& from, const Point& to, const Tangent& xi);

double inner(const Metric& g, const Tangent& xi, const Tangent& zeta);
double norm(const Metric& g, const Tangent& xi);

/// Coordinate-level inner product for callers that keep vectors unboxed.
double inner(const Metric& g, const Vector& xi, const Vector& zeta);
double norm(const Metric& g, const Vector& xi);

/// grad_g f = A * euclid_grad with A = diag(1 / weights); on the sphere the
/// result is also projected onto the tangent space.
Tangent riemannian_gradient(const Metric& g, const Tangent& euclid_grad);

}  // namespace rlo
