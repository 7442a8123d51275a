#pragma once

#include <cstdint>
#include <optional>
#include <string_view>

#include "rlo/geometry.hpp"

namespace rlo {

/// Direction field generators. Each kind maps (m, s, g) to a target vector d.
enum class PhiKind {
  kRawGradient,   // d = g
  kMomentum,      // d = c
  kSign,          // d = sign(c)
  kSignBelief,    // d = sign(c) + belief
  kTanh,          // d = tanh(gamma c) (+ belief when lambda_b > 0)
  kTanhAdaptive,  // d = tanh(gamma c) / (sqrt(s) + eps) (+ belief)
};

std::string_view to_string(PhiKind kind);
std::optional<PhiKind> parse_phi_kind(std::string_view name);

/// Declarative description of Phi and Psi.
///
/// c = beta1 * m + (1 - beta1) * g is the look-ahead blend fed to Phi; m itself
/// is advanced with beta2 and s (when allocated) with beta3.
struct FieldSpec {
  PhiKind phi = PhiKind::kRawGradient;
  double gamma = 5.0;
  double lambda_b = 0.0;
  double beta1 = 0.9;
  double beta2 = 0.99;
  double beta3 = 0.999;
  double epsilon = 1e-8;
  bool global_normalize = false;

  /// Throws ConfigError naming the first invalid field.
  void validate() const;
  /// True when the belief term is added to this field.
  bool uses_belief() const;
};

/// Internal optimizer memory y: first moment m, optional second moment s.
struct OptimizerState {
  Vector m;
  std::optional<Vector> s;
  std::int64_t k = 0;

  static OptimizerState zero(Index dim, bool with_second_moment);
};

Vector ema_update(const Vector& prev, const Vector& g, double beta);
Vector interpolated_moment(const Vector& m, const Vector& g, double beta1);
/// Componentwise sign with sign(0) = 0.
Vector sign_field(const Vector& c);
/// lambda_b * (g - m) / (||g - m|| + eps).
Vector belief_term(const Vector& g, const Vector& m, double lambda_b, double eps);
Vector tanh_field(const Vector& c, double gamma);
Vector adaptive_field(const Vector& c, const Vector& s, double gamma, double eps);
/// sqrt(D) * d / (||d|| + eps).
Vector global_normalize(const Vector& d, Index total_dim, double eps);

struct Direction {
  Vector d;
  /// The base field before global normalization and the belief term.
  Vector d_pre;
  OptimizerState next;
};

/// One geometric phase: builds the target direction from (m_k, s_{k+1}, g_k)
/// and returns the advanced state.
///
/// Order of operations: s is advanced first (so adaptive fields see s_{k+1}),
/// c is formed from m_k, the base field is evaluated, global normalization is
/// applied if requested, the belief term is added last, and m is advanced.
Direction generate_direction(const FieldSpec& spec, const OptimizerState& y,
                             const Vector& g);

}  // namespace rlo
