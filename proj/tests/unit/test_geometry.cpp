#include <gtest/gtest.h>

#include <cmath>

#include "rlo/counter_rng.hpp"
#include "rlo/error.hpp"
#include "rlo/geometry.hpp"

namespace rlo {
namespace {

Vector vec(std::initializer_list<double> xs) {
  Vector v(static_cast<Index>(xs.size()));
  Index i = 0;
  for (double x : xs) v[i++] = x;
  return v;
}

Vector random_vec(const CounterRng& rng, std::uint64_t stream, Index n) {
  Vector v(n);
  for (Index i = 0; i < n; ++i) v[i] = rng.normal(stream, static_cast<std::uint64_t>(i));
  return v;
}

TEST(Retract, EuclideanAddsTheStep) {
  const Point p = Point::euclidean(vec({1, 1}));
  const Point q = retract(p, Tangent(p, vec({-0.2, -0.2})));
  EXPECT_DOUBLE_EQ(q.coords()[0], 0.8);
  EXPECT_DOUBLE_EQ(q.coords()[1], 0.8);
}

TEST(Retract, SphereZeroStepIsIdentity) {
  const Point p = Point::sphere(vec({1, 0}));
  EXPECT_EQ(retract(p, Tangent::zero(p)), p);
}

TEST(Retract, SphereNormalizes) {
  const Point p = Point::sphere(vec({1, 0}));
  const Point q = retract(p, Tangent(p, vec({0, 1})));
  EXPECT_NEAR(q.coords()[0], 1.0 / std::sqrt(2.0), 1e-15);
  EXPECT_NEAR(q.coords()[1], 1.0 / std::sqrt(2.0), 1e-15);
}

TEST(Retract, SphereDegenerateStepThrows) {
  const Point p = Point::sphere(vec({1, 0}));
  EXPECT_THROW(retract(p, Tangent(p, vec({-1, 0}))), DegenerateRetraction);
}

TEST(Retract, RejectsForeignTangent) {
  const Point p = Point::euclidean(vec({1, 1}));
  const Point q = Point::euclidean(vec({0, 1}));
  EXPECT_THROW(retract(p, Tangent(q, vec({1, 0}))), BasePointMismatch);
}

TEST(Retract, SphereAgreesToFirstOrder) {
  const CounterRng rng(3);
  for (std::uint64_t t = 0; t < 50; ++t) {
    const Point p = Point::sphere_normalized(random_vec(rng, t, 4));
    Tangent xi = Tangent::project(p, random_vec(rng, 100 + t, 4));
    const Vector step = 1e-6 * xi.coords() / xi.coords().norm();
    const Point q = retract(p, Tangent(p, step));
    EXPECT_LE((q.coords() - (p.coords() + step)).norm(), 10.0 * step.squaredNorm());
    EXPECT_NEAR(q.coords().norm(), 1.0, 1e-12);
  }
}

TEST(Transport, EuclideanIsIdentity) {
  const Point a = Point::euclidean(vec({0, 0}));
  const Point b = Point::euclidean(vec({5, -1}));
  const Tangent t = transport(a, b, Tangent(a, vec({3, 4})));
  EXPECT_EQ(t.coords(), vec({3, 4}));
  EXPECT_EQ(t.base(), b);
}

TEST(Transport, SphereProjectsOntoDestination) {
  const Point a = Point::sphere(vec({1, 0}));
  const Point b = Point::sphere(vec({0, 1}));
  EXPECT_LE(transport(a, b, Tangent(a, vec({0, 0.5}))).coords().norm(), 1e-15);
  EXPECT_EQ(transport(a, b, Tangent(a, vec({0.5, 0}))).coords(), vec({0.5, 0}));
}

TEST(Transport, LinearAndTangentOnSphere) {
  const CounterRng rng(5);
  for (std::uint64_t t = 0; t < 50; ++t) {
    const Point a = Point::sphere_normalized(random_vec(rng, t, 5));
    const Point b = Point::sphere_normalized(random_vec(rng, 200 + t, 5));
    const Tangent x = Tangent::project(a, random_vec(rng, 400 + t, 5));
    const Tangent y = Tangent::project(a, random_vec(rng, 600 + t, 5));
    const double s = rng.normal(800, t), u = rng.normal(801, t);
    const Tangent lhs = transport(a, b, Tangent(a, s * x.coords() + u * y.coords()));
    const Vector rhs = s * transport(a, b, x).coords() + u * transport(a, b, y).coords();
    EXPECT_LE((lhs.coords() - rhs).cwiseAbs().maxCoeff(), 1e-12);
    EXPECT_TRUE(lhs.is_tangent());
    EXPECT_LE(transport(a, b, x).coords().norm(), x.coords().norm() + 1e-15);
  }
}

TEST(Inner, IdentityAndDiagonal) {
  const Point p = Point::euclidean(vec({0, 0}));
  const Tangent xi(p, vec({3, 4}));
  EXPECT_DOUBLE_EQ(inner(Metric::identity(), xi, xi), 25.0);
  const Tangent ones(p, vec({1, 1}));
  EXPECT_DOUBLE_EQ(inner(Metric::diagonal(vec({2, 1})), ones, ones), 3.0);
  EXPECT_DOUBLE_EQ(inner(Metric::diagonal(vec({2, 1})), xi, Tangent::zero(p)), 0.0);
}

TEST(Inner, DimensionMismatchThrows) {
  EXPECT_THROW(inner(Metric::identity(), vec({1, 2}), vec({1, 2, 3})), DimensionMismatch);
}

TEST(Metric, RejectsNonPositiveWeights) {
  EXPECT_THROW(Metric::diagonal(vec({1, 0})), PreconditionError);
  EXPECT_THROW(Metric::diagonal(vec({1, -2})), PreconditionError);
}

TEST(RiemannianGradient, ScalesAndProjects) {
  const Point e = Point::euclidean(vec({0, 0}));
  EXPECT_EQ(riemannian_gradient(Metric::identity(), Tangent(e, vec({1, 2}))).coords(),
            vec({1, 2}));
  const Vector g = riemannian_gradient(Metric::diagonal(vec({0.5, 1})), Tangent(e, vec({1, 1})))
                       .coords();
  EXPECT_DOUBLE_EQ(g[0], 2.0);
  EXPECT_DOUBLE_EQ(g[1], 1.0);
  const Point s = Point::sphere(vec({1, 0}));
  EXPECT_EQ(riemannian_gradient(Metric::identity(), Tangent(s, vec({3, 4}))).coords(),
            vec({0, 4}));
}

TEST(Point, SphereRequiresUnitNorm) {
  EXPECT_THROW(Point::sphere(vec({1, 1})), PreconditionError);
  EXPECT_NO_THROW(Point::sphere(vec({0.6, 0.8})));
}

}  // namespace
}  // namespace rlo
