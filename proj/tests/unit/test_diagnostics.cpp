#include <gtest/gtest.h>

#include <cmath>
#include <vector>

#include <Eigen/Eigenvalues>

#include "../oracles.hpp"
#include "rlo/counter_rng.hpp"
#include "rlo/diagnostics.hpp"
#include "rlo/engine.hpp"
#include "rlo/error.hpp"
#include "rlo/objectives.hpp"

namespace rlo {
namespace {

Vector vec(std::initializer_list<double> xs) {
  Vector v(static_cast<Index>(xs.size()));
  Index i = 0;
  for (double x : xs) v[i++] = x;
  return v;
}

const Point kOrigin2 = Point::euclidean(Vector::Zero(2));

Tangent t2(double a, double b) { return Tangent(kOrigin2, vec({a, b})); }

TEST(Residual, Examples) {
  EXPECT_EQ(residual(t2(1, 2), t2(1, 2)).coords(), Vector::Zero(2));
  EXPECT_EQ(residual(t2(1, 0), t2(0, 1)).coords(), vec({1, -1}));
}

TEST(Residual, VanishesAfterEtaOneStepWithStaticField) {
  const Point p = Point::euclidean(vec({1, 1}));
  const DynamicPhase out = dynamic_phase(p, Tangent(p, vec({4, -3})), vec({1, 2}), 0.1, 1.0);
  EXPECT_EQ(residual(out.v, Tangent(out.theta, vec({1, 2}))).coords(), Vector::Zero(2));
}

TEST(Forcing, Examples) {
  EXPECT_EQ(forcing(t2(2, 3), t2(2, 3)).coords(), Vector::Zero(2));
  EXPECT_EQ(forcing(t2(1, 1), t2(1, 0)).coords(), vec({0, 1}));
  const Vector before = vec({-1, 1});
  const Vector after = vec({1, 1});
  EXPECT_DOUBLE_EQ(std::abs(forcing(t2(after[0], after[1]), t2(before[0], before[1])).coords()[0]),
                   2.0);
}

TEST(Lyapunov, Examples) {
  LyapunovParams p;
  p.f_star = 3.0;
  EXPECT_DOUBLE_EQ(lyapunov_value(3.0, p, t2(0, 0), 0.1, Metric::identity()), 0.0);
  EXPECT_DOUBLE_EQ(lyapunov_value(5.0, p, t2(0, 0), 0.1, Metric::identity()), 2.0);
  p.f_star = 0.0;
  p.alpha = 0.5;
  EXPECT_NEAR(lyapunov_value(1.0, p, t2(0.2, 0), 0.1, Metric::identity()), 1.2, 1e-15);
  EXPECT_NEAR(lyapunov_value(1.0, p, 0.2, 0.1), 1.2, 1e-15);
}

TEST(TubeMetrics, Examples) {
  const TubeMetrics on = tube_metrics(t2(1, 2), t2(1, 2), t2(0, 0), Metric::identity());
  EXPECT_EQ(on.r, 0.0);
  EXPECT_NEAR(on.cos_vd, 1.0, 1e-11);
  EXPECT_NEAR(tube_metrics(t2(1, 0), t2(0, 1), t2(0, 0), Metric::identity()).cos_vd, 0.0,
              1e-15);
  EXPECT_NEAR(tube_metrics(t2(1, 0), t2(0, 1), t2(0, 3), Metric::identity()).q_perp, 0.0,
              1e-15);
  EXPECT_NEAR(tube_metrics(t2(1, 0), t2(0, 1), t2(3, 0), Metric::identity()).q_perp, 1.0,
              1e-11);
}

TEST(TubeMetrics, RangesHold) {
  const TubeMetrics m = tube_metrics(t2(-1, -1), t2(1, 1), t2(0, 0), Metric::identity());
  EXPECT_GE(m.cos_vd, -1.0);
  EXPECT_GE(m.r, 0.0);
  EXPECT_GE(m.q_perp, 0.0);
  EXPECT_LE(m.q_perp, 1.0);
}

DiagnosticsRecord stationary_record() {
  DiagnosticsRecord r;
  r.h = 0.1;
  r.h_next = 0.1;
  r.eta = 0.5;
  r.descent_alignment = 1.0;
  return r;
}

TEST(DescentCertificate, StationaryPointHoldsWithZeroSides) {
  LyapunovParams p;
  const std::vector<DiagnosticsRecord> rs{stationary_record()};
  const CertificateReport rep = check_descent_inequality(rs, p);
  EXPECT_TRUE(rep.holds());
  EXPECT_EQ(rep.fraction, 1.0);
}

TEST(DescentCertificate, FlagsAdversarialRecord) {
  LyapunovParams p;
  DiagnosticsRecord r = stationary_record();
  r.z_next_norm = 1e3;
  const std::vector<DiagnosticsRecord> rs{stationary_record(), r};
  const CertificateReport rep = check_descent_inequality(rs, p);
  EXPECT_FALSE(rep.holds());
  EXPECT_EQ(rep.satisfied, 1u);
  EXPECT_EQ(rep.worst_step, 0);
  EXPECT_LT(rep.worst_slack, 0.0);
}

TEST(DescentCertificate, EmptyInputThrows) {
  EXPECT_THROW(check_descent_inequality({}, LyapunovParams{}), PreconditionError);
}

TEST(DescentCertificate, NoiselessSgdHolds) {
  const QuadraticSpec q = QuadraticSpec::random(8, 1, 10, 12);
  const ObjectiveHandle obj{make_quadratic_objective(q), {}};
  const double h = 0.01;
  const RLOConfig cfg = make_preset("sgd", {{"h", h}});
  RecordCollector sink;
  run_trajectory(cfg, obj, default_initial_point(obj, 5), 400, &sink);
  LyapunovParams p;
  p.mu_phi = 1.0;
  p.alpha = 2.0 * min_admissible_alpha(h, 1.0, 1.0);
  const CertificateReport rep = check_descent_inequality(sink.records(), p);
  EXPECT_TRUE(rep.admissible);
  EXPECT_EQ(rep.fraction, 1.0);
}

TEST(MinAdmissibleAlpha, Formula) {
  EXPECT_DOUBLE_EQ(min_admissible_alpha(0.1, 0.5, 2.0), 0.01 / 2.0);
}

TEST(PlConstant, IdentityIsOne) {
  EXPECT_NEAR(pl_constant({Matrix::Identity(3, 3), Vector::Zero(3), 0.0}), 1.0, 1e-14);
}

TEST(PlConstant, DiagonalMatchesCharacteristicPolynomial) {
  Matrix A(2, 2);
  A << 1, 0, 0, 4;
  EXPECT_NEAR(pl_constant({A, Vector::Zero(2), 0.0}), oracle::eig2_charpoly(1, 0, 4)[0],
              1e-14);
}

TEST(PlConstant, CoupledMatchesCharacteristicPolynomial) {
  Matrix A(2, 2);
  A << 2, 1, 1, 2;
  const auto eig = oracle::eig2_charpoly(2, 1, 2);
  EXPECT_NEAR(eig[0], 1.0, 1e-14);
  EXPECT_NEAR(eig[1], 3.0, 1e-14);
  EXPECT_NEAR(pl_constant({A, Vector::Zero(2), 0.0}), eig[0], 1e-14);
}

// 1/2 ||A (theta - theta*)||^2 - mu f >= 0, with equality along the bottom
// eigenvector.
TEST(PlConstant, InequalityHoldsAndIsTight) {
  const QuadraticSpec q = QuadraticSpec::random(5, 1, 10, 4);
  const double mu = pl_constant(q);
  const CounterRng rng(17);
  for (std::uint64_t t = 0; t < 1000; ++t) {
    Vector x(5);
    for (Index i = 0; i < 5; ++i) x[i] = rng.normal(t, static_cast<std::uint64_t>(i));
    const Evaluation e = quadratic_eval(q, x);
    EXPECT_GE(0.5 * e.grad.squaredNorm() - mu * e.f, -1e-12);
  }
  Eigen::SelfAdjointEigenSolver<Matrix> es(q.A);
  const Evaluation e = quadratic_eval(q, q.theta_star + es.eigenvectors().col(0));
  EXPECT_NEAR(0.5 * e.grad.squaredNorm() - mu * e.f, 0.0, 1e-12);
}

TEST(Lyapunov, NonnegativeAlongTrajectoryWithTrueOptimum) {
  const ObjectiveHandle obj{make_quadratic_objective(QuadraticSpec::random(6, 1, 10, 9)),
                            {NoiseKind::kGaussian, 0.1, 0, 0}};
  for (const char* name : {"sgd", "lion", "rlo", "rlo_lifted"}) {
    RecordCollector sink;
    run_trajectory(make_preset(name, {{"h", 0.01}}), obj, default_initial_point(obj, 2), 300,
                   &sink);
    for (const auto& r : sink.records()) {
      EXPECT_GE(r.V, 0.0) << name;
      EXPECT_GE(r.cos_vd, -1.0);
      EXPECT_LE(r.cos_vd, 1.0);
      EXPECT_GE(r.q_perp, 0.0);
      EXPECT_LE(r.q_perp, 1.0);
      EXPECT_GE(r.r, 0.0);
    }
  }
}

TEST(UubFloor, ShortWindowThrows) {
  LyapunovParams p;
  p.mu_pl = 1.0;
  const std::vector<DiagnosticsRecord> one{stationary_record()};
  EXPECT_THROW(uub_floor(one, p, 0.1, 0.5), PreconditionError);
}

TEST(UubFloor, MissingPlConstantThrows) {
  const std::vector<DiagnosticsRecord> rs(kMinUubWindow, stationary_record());
  EXPECT_THROW(uub_floor(rs, LyapunovParams{}, 0.1, 0.5), PreconditionError);
}

TEST(UubFloor, RhoOutsideUnitIntervalThrows) {
  LyapunovParams p;
  p.mu_pl = 0.0;
  const std::vector<DiagnosticsRecord> rs(kMinUubWindow, stationary_record());
  EXPECT_THROW(uub_floor(rs, p, 0.1, 0.5), InadmissibleParameters);
}

TEST(UubFloor, ConvergedRunSatisfiedWithZeroFloor) {
  LyapunovParams p;
  p.mu_pl = 1.0;
  const std::vector<DiagnosticsRecord> rs(kMinUubWindow, stationary_record());
  const UubReport rep = uub_floor(rs, p, 0.1, 0.5);
  EXPECT_EQ(rep.floor, 0.0);
  EXPECT_TRUE(rep.satisfied);
}

TEST(UubFloor, NoisySgdStaysBelowFloor) {
  const QuadraticSpec q = QuadraticSpec::random(10, 1, 10, 41);
  const ObjectiveHandle obj{make_quadratic_objective(q), {NoiseKind::kGaussian, 0.01, 0, 0}};
  const double h = 0.1 / q.lambda_max();
  const RLOConfig cfg = make_preset("sgd", {{"h", h}});
  LyapunovParams p;
  p.mu_pl = pl_constant(q);
  p.alpha = 2.0 * min_admissible_alpha(h, 1.0, 1.0);
  RecordCollector sink;
  run_trajectory(cfg, obj, default_initial_point(obj, 3), 4000, &sink, {p.alpha, 0.0});
  const auto& rs = sink.records();
  const UubReport rep =
      uub_floor(std::span(rs).subspan(rs.size() * 3 / 4), p, h, 1.0);
  EXPECT_GT(rep.rho, 0.0);
  EXPECT_TRUE(rep.satisfied) << rep.max_tail_V << " vs " << rep.floor;
}

TEST(EstimateMuPhi, MinimumAlignmentClamped) {
  std::vector<DiagnosticsRecord> rs(3, stationary_record());
  for (auto& r : rs) r.grad_norm = 1.0;
  rs[1].descent_alignment = 0.25;
  EXPECT_DOUBLE_EQ(estimate_mu_phi(rs), 0.25);
  rs[2].descent_alignment = -3.0;
  EXPECT_DOUBLE_EQ(estimate_mu_phi(rs), 1e-6);
}

}  // namespace
}  // namespace rlo
