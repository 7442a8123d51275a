#include <gtest/gtest.h>

#include <cmath>
#include <limits>

#include "../oracles.hpp"
#include "rlo/counter_rng.hpp"
#include "rlo/error.hpp"
#include "rlo/fields.hpp"

namespace rlo {
namespace {

Vector vec(std::initializer_list<double> xs) {
  Vector v(static_cast<Index>(xs.size()));
  Index i = 0;
  for (double x : xs) v[i++] = x;
  return v;
}

TEST(EmaUpdate, Examples) {
  EXPECT_DOUBLE_EQ(ema_update(vec({0}), vec({1}), 0.9)[0], 0.1);
  EXPECT_EQ(ema_update(vec({1.5, -2}), vec({1.5, -2}), 0.7), vec({1.5, -2}));
  EXPECT_EQ(ema_update(vec({2, -4}), vec({0, 0}), 0.5), vec({1, -2}));
}

TEST(InterpolatedMoment, Examples) {
  EXPECT_DOUBLE_EQ(interpolated_moment(vec({1}), vec({0}), 0.9)[0], 0.9);
  EXPECT_EQ(interpolated_moment(vec({3, 1}), vec({3, 1}), 0.4), vec({3, 1}));
  EXPECT_EQ(interpolated_moment(vec({0, 2}), vec({2, 0}), 0.5), vec({1, 1}));
}

TEST(SignField, Examples) {
  EXPECT_EQ(sign_field(vec({2, -3, 0})), vec({1, -1, 0}));
  EXPECT_EQ(sign_field(Vector::Zero(4)), Vector::Zero(4));
  EXPECT_EQ(sign_field(vec({1e-300, -1e-300})), vec({1, -1}));
}

TEST(BeliefTerm, Examples) {
  EXPECT_EQ(belief_term(vec({1, 2}), vec({1, 2}), 0.2, 1e-8), Vector::Zero(2));
  EXPECT_EQ(belief_term(vec({5, 2}), vec({1, 2}), 0.0, 1e-8), Vector::Zero(2));
  const Vector b = belief_term(vec({3, 4}), vec({0, 0}), 0.2, 0.0);
  EXPECT_NEAR(b[0], 0.12, 1e-15);
  EXPECT_NEAR(b[1], 0.16, 1e-15);
}

TEST(TanhField, Examples) {
  EXPECT_EQ(tanh_field(Vector::Zero(3), 5.0), Vector::Zero(3));
  const Vector big = tanh_field(vec({1e3, -1e3}), 5.0);
  EXPECT_DOUBLE_EQ(big[0], 1.0);
  EXPECT_DOUBLE_EQ(big[1], -1.0);
  EXPECT_NEAR(tanh_field(vec({0.2}), 5.0)[0], oracle::tanh_series(1.0), 1e-15);
}

TEST(AdaptiveField, Examples) {
  EXPECT_EQ(adaptive_field(Vector::Zero(2), vec({4, 9}), 5.0, 1e-8), Vector::Zero(2));
  const double eps = 1e-3;
  EXPECT_NEAR(adaptive_field(vec({0.2}), vec({0}), 5.0, eps)[0],
              oracle::tanh_series(1.0) / eps, 1e-10);
  EXPECT_NEAR(adaptive_field(vec({0.2}), vec({3}), 5.0, 0.0)[0],
              oracle::tanh_series(1.0) / oracle::sqrt_newton(3.0), 1e-15);
}

TEST(GlobalNormalize, Examples) {
  const Vector d = vec({1, -1, 1, -1});
  EXPECT_EQ(global_normalize(d, 4, 0.0), d);
  EXPECT_EQ(global_normalize(Vector::Zero(4), 4, 1e-8), Vector::Zero(4));
  EXPECT_EQ(global_normalize(vec({3, 0, 0, 0}), 4, 0.0), vec({2, 0, 0, 0}));
}

TEST(GenerateDirection, RawGradient) {
  FieldSpec spec;
  spec.beta2 = 0.0;
  const Direction out = generate_direction(spec, OptimizerState::zero(2, false), vec({1, 2}));
  EXPECT_EQ(out.d, vec({1, 2}));
  EXPECT_EQ(out.next.m, vec({1, 2}));
  EXPECT_EQ(out.next.k, 1);
}

TEST(GenerateDirection, SignWithZeroBeta) {
  FieldSpec spec;
  spec.phi = PhiKind::kSign;
  spec.beta1 = 0.0;
  EXPECT_EQ(generate_direction(spec, OptimizerState::zero(2, false), vec({5, -5})).d,
            vec({1, -1}));
}

TEST(GenerateDirection, TanhAdaptiveComposesSecondMoment) {
  FieldSpec spec;
  spec.phi = PhiKind::kTanhAdaptive;
  spec.beta1 = 0.0;
  spec.beta3 = 0.0;
  spec.gamma = 5.0;
  spec.epsilon = 0.0;
  const Direction out = generate_direction(spec, OptimizerState::zero(1, true), vec({0.2}));
  ASSERT_TRUE(out.next.s.has_value());
  EXPECT_NEAR((*out.next.s)[0], 0.04, 1e-17);
  EXPECT_NEAR(out.d[0], oracle::tanh_series(1.0) / oracle::sqrt_newton(0.04), 1e-14);
  EXPECT_NEAR(out.d[0], 3.80797, 1e-5);
}

TEST(GenerateDirection, BeliefAddedAfterNormalization) {
  FieldSpec spec;
  spec.phi = PhiKind::kSignBelief;
  spec.beta1 = 0.0;
  spec.lambda_b = 0.2;
  spec.epsilon = 0.0;
  spec.global_normalize = true;
  OptimizerState y = OptimizerState::zero(2, false);
  y.m = vec({0, 0});
  const Direction out = generate_direction(spec, y, vec({3, 4}));
  EXPECT_EQ(out.d_pre, vec({1, 1}));
  EXPECT_NEAR(out.d[0], 1.0 + 0.12, 1e-15);
  EXPECT_NEAR(out.d[1], 1.0 + 0.16, 1e-15);
}

TEST(GenerateDirection, AdaptiveWithoutSecondMomentThrows) {
  FieldSpec spec;
  spec.phi = PhiKind::kTanhAdaptive;
  EXPECT_THROW(generate_direction(spec, OptimizerState::zero(2, false), vec({1, 1})),
               StateMismatch);
}

TEST(GenerateDirection, DimensionMismatchThrows) {
  EXPECT_THROW(generate_direction(FieldSpec{}, OptimizerState::zero(3, false), vec({1, 1})),
               DimensionMismatch);
}

TEST(FieldSpec, ValidateNamesField) {
  FieldSpec spec;
  spec.beta1 = 1.0;
  try {
    spec.validate();
    FAIL() << "expected ConfigError";
  } catch (const ConfigError& e) {
    EXPECT_EQ(e.field(), "beta1");
  }
  spec = FieldSpec{};
  spec.gamma = -1.0;
  EXPECT_THROW(spec.validate(), ConfigError);
}

TEST(FieldProperties, TanhIsGammaLipschitzAndSignIsNot) {
  const CounterRng rng(8);
  for (std::uint64_t t = 0; t < 200; ++t) {
    Vector a(4), b(4);
    for (Index i = 0; i < 4; ++i) {
      a[i] = rng.normal(t, static_cast<std::uint64_t>(i));
      b[i] = a[i] + 1e-3 * rng.normal(t + 1000, static_cast<std::uint64_t>(i));
    }
    EXPECT_LE((tanh_field(a, 5.0) - tanh_field(b, 5.0)).norm(), 5.0 * (a - b).norm() + 1e-15);
  }
  const Vector lo = vec({-1e-9}), hi = vec({1e-9});
  EXPECT_GT((sign_field(hi) - sign_field(lo)).norm(), 1e6 * (hi - lo).norm());
}

TEST(FieldProperties, DirectionsAreBounded) {
  const CounterRng rng(4);
  const Index dim = 6;
  for (PhiKind phi : {PhiKind::kSign, PhiKind::kSignBelief, PhiKind::kTanh}) {
    for (bool gn : {false, true}) {
      FieldSpec spec;
      spec.phi = phi;
      spec.lambda_b = phi == PhiKind::kSign ? 0.0 : 0.2;
      spec.global_normalize = gn;
      OptimizerState y = OptimizerState::zero(dim, false);
      for (std::uint64_t k = 0; k < 100; ++k) {
        Vector g(dim);
        for (Index i = 0; i < dim; ++i) g[i] = 10.0 * rng.normal(k, static_cast<std::uint64_t>(i));
        const Direction out = generate_direction(spec, y, g);
        if (gn) {
          EXPECT_LE((out.d - belief_term(g, y.m, spec.lambda_b, spec.epsilon)).norm(),
                    std::sqrt(static_cast<double>(dim)) + 1e-12);
        } else {
          EXPECT_LE(out.d.cwiseAbs().maxCoeff(), 1.0 + spec.lambda_b + 1e-15);
        }
        y = out.next;
      }
    }
  }
}

TEST(PhiKind, RoundTripsNames) {
  for (PhiKind k : {PhiKind::kRawGradient, PhiKind::kMomentum, PhiKind::kSign,
                    PhiKind::kSignBelief, PhiKind::kTanh, PhiKind::kTanhAdaptive}) {
    EXPECT_EQ(parse_phi_kind(to_string(k)), k);
  }
  EXPECT_FALSE(parse_phi_kind("relu").has_value());
}

}  // namespace
}  // namespace rlo
