#include "rlo/fields.hpp"

#include <cmath>
#include <string>

#include "rlo/error.hpp"

namespace rlo {
namespace {

void require_same_dim(const Vector& a, const Vector& b, const char* where) {
  if (a.size() != b.size()) {
    throw DimensionMismatch(std::string(where) + ": dimension " +
                            std::to_string(a.size()) + " vs " +
                            std::to_string(b.size()));
  }
}

void require_unit_interval(double beta, const char* field) {
  if (!(beta >= 0.0 && beta < 1.0)) {
    throw ConfigError(field, "must lie in [0, 1), got " + std::to_string(beta));
  }
}

}  // namespace

std::string_view to_string(PhiKind kind) {
  switch (kind) {
    case PhiKind::kRawGradient:
      return "raw_gradient";
    case PhiKind::kMomentum:
      return "momentum";
    case PhiKind::kSign:
      return "sign";
    case PhiKind::kSignBelief:
      return "sign_belief";
    case PhiKind::kTanh:
      return "tanh";
    case PhiKind::kTanhAdaptive:
      return "tanh_adaptive";
  }
  return "unknown";
}

std::optional<PhiKind> parse_phi_kind(std::string_view name) {
  for (PhiKind k : {PhiKind::kRawGradient, PhiKind::kMomentum, PhiKind::kSign,
                    PhiKind::kSignBelief, PhiKind::kTanh, PhiKind::kTanhAdaptive}) {
    if (to_string(k) == name) return k;
  }
  return std::nullopt;
}

void FieldSpec::validate() const {
  if (!(gamma > 0.0) || !std::isfinite(gamma)) {
    throw ConfigError("gamma", "must be positive");
  }
  if (!(epsilon > 0.0) || !std::isfinite(epsilon)) {
    throw ConfigError("epsilon", "must be positive");
  }
  if (!(lambda_b >= 0.0) || !std::isfinite(lambda_b)) {
    throw ConfigError("lambda_b", "must be nonnegative");
  }
  require_unit_interval(beta1, "beta1");
  require_unit_interval(beta2, "beta2");
  require_unit_interval(beta3, "beta3");
  const bool belief_capable = phi == PhiKind::kSignBelief || phi == PhiKind::kTanh ||
                              phi == PhiKind::kTanhAdaptive;
  if (lambda_b > 0.0 && !belief_capable) {
    throw ConfigError("lambda_b", std::string("belief term is not defined for phi=") +
                                      std::string(to_string(phi)));
  }
}

bool FieldSpec::uses_belief() const {
  return lambda_b > 0.0 && (phi == PhiKind::kSignBelief || phi == PhiKind::kTanh ||
                            phi == PhiKind::kTanhAdaptive);
}

OptimizerState OptimizerState::zero(Index dim, bool with_second_moment) {
  OptimizerState y;
  y.m = Vector::Zero(dim);
  if (with_second_moment) y.s = Vector::Zero(dim);
  return y;
}

Vector ema_update(const Vector& prev, const Vector& g, double beta) {
  require_same_dim(prev, g, "ema_update");
  return beta * prev + (1.0 - beta) * g;
}

Vector interpolated_moment(const Vector& m, const Vector& g, double beta1) {
  require_same_dim(m, g, "interpolated_moment");
  return beta1 * m + (1.0 - beta1) * g;
}

Vector sign_field(const Vector& c) {
  return c.unaryExpr([](double x) { return x > 0.0 ? 1.0 : (x < 0.0 ? -1.0 : 0.0); });
}

Vector belief_term(const Vector& g, const Vector& m, double lambda_b, double eps) {
  require_same_dim(g, m, "belief_term");
  if (lambda_b == 0.0) return Vector::Zero(g.size());
  const Vector delta = g - m;
  const double n = delta.norm();
  if (n == 0.0) return Vector::Zero(g.size());
  return (lambda_b / (n + eps)) * delta;
}

Vector tanh_field(const Vector& c, double gamma) {
  return (gamma * c).array().tanh().matrix();
}

Vector adaptive_field(const Vector& c, const Vector& s, double gamma, double eps) {
  require_same_dim(c, s, "adaptive_field");
  return ((gamma * c).array().tanh() / (s.array().sqrt() + eps)).matrix();
}

Vector global_normalize(const Vector& d, Index total_dim, double eps) {
  const double n = d.norm();
  if (n == 0.0) return Vector::Zero(d.size());
  return (std::sqrt(static_cast<double>(total_dim)) / (n + eps)) * d;
}

Direction generate_direction(const FieldSpec& spec, const OptimizerState& y,
                             const Vector& g) {
  require_same_dim(y.m, g, "generate_direction (m)");
  if (y.s) require_same_dim(*y.s, g, "generate_direction (s)");
  if (spec.phi == PhiKind::kTanhAdaptive && !y.s) {
    throw StateMismatch("phi=tanh_adaptive requires an allocated second moment s");
  }

  OptimizerState next;
  if (y.s) next.s = ema_update(*y.s, g.cwiseAbs2(), spec.beta3);

  Direction out;
  if (spec.phi == PhiKind::kRawGradient) {
    out.d_pre = g;
  } else {
    const Vector c = interpolated_moment(y.m, g, spec.beta1);
    switch (spec.phi) {
      case PhiKind::kMomentum:
        out.d_pre = c;
        break;
      case PhiKind::kSign:
      case PhiKind::kSignBelief:
        out.d_pre = sign_field(c);
        break;
      case PhiKind::kTanh:
        out.d_pre = tanh_field(c, spec.gamma);
        break;
      case PhiKind::kTanhAdaptive:
        out.d_pre = adaptive_field(c, *next.s, spec.gamma, spec.epsilon);
        break;
      case PhiKind::kRawGradient:
        break;
    }
  }

  out.d = spec.global_normalize ? global_normalize(out.d_pre, g.size(), spec.epsilon)
                                : out.d_pre;
  if (spec.uses_belief()) {
    out.d += belief_term(g, y.m, spec.lambda_b, spec.epsilon);
  }

  next.m = ema_update(y.m, g, spec.beta2);
  next.k = y.k + 1;
  out.next = std::move(next);
  return out;
}

}  // namespace rlo
