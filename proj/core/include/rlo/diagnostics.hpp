#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "rlo/geometry.hpp"
#include "rlo/objectives.hpp"

namespace rlo {

/// Guard added to every denominator in the tube metrics.
inline constexpr double kDivisionGuard = 1e-12;
/// Per-step slack allowed by the descent certificate.
inline constexpr double kCertificateSlack = 1e-9;

/// Lyapunov and tube quantities for step k.
///
/// The first eleven fields form the trace.csv schema. The rest are carried for
/// certificate evaluation: f_next and h_next describe step k+1 so that
/// V_{k+1} can be recomputed, and descent_alignment is
/// <grad f, d>_g / ||grad f||_g^2.
struct DiagnosticsRecord {
  std::int64_t k = 0;
  double f_val = 0.0;
  double grad_norm = 0.0;
  double z_norm = 0.0;
  double delta_norm = 0.0;
  double V = 0.0;
  double r = 0.0;
  double cos_vd = 0.0;
  double q_perp = 0.0;
  double h = 0.0;
  double eta = 0.0;

  double f_next = 0.0;
  double z_next_norm = 0.0;
  double h_next = 0.0;
  double descent_alignment = 0.0;
};

/// Receives one record per step, in order, from a single trajectory.
class DiagnosticsSink {
 public:
  virtual ~DiagnosticsSink() = default;
  virtual void consume(const DiagnosticsRecord& record) = 0;
};

class RecordCollector final : public DiagnosticsSink {
 public:
  void consume(const DiagnosticsRecord& record) override { records_.push_back(record); }
  const std::vector<DiagnosticsRecord>& records() const noexcept { return records_; }
  std::vector<DiagnosticsRecord> take() { return std::move(records_); }

 private:
  std::vector<DiagnosticsRecord> records_;
};

struct LyapunovParams {
  double alpha = 1.0;
  double f_star = 0.0;
  double mu_phi = 1.0;
  std::optional<double> mu_pl;
};

/// z = v - d.
Tangent residual(const Tangent& v, const Tangent& d);
/// delta = d_next - T(d_prev); both must be based at the same point.
Tangent forcing(const Tangent& d_next, const Tangent& d_prev_transported);
/// V = f - f* + (alpha / h) ||z||_g^2.
double lyapunov_value(double f_val, const LyapunovParams& p, const Tangent& z, double h,
                      const Metric& g);
double lyapunov_value(double f_val, const LyapunovParams& p, double z_norm, double h);

struct TubeMetrics {
  double r = 0.0;
  double cos_vd = 0.0;
  double q_perp = 0.0;
};

/// r = ||v - d|| / (||d|| + e)
/// cos = <v, d> / ((||v|| + e)(||d|| + e))
/// q_perp = ||delta - <delta, d^> d^|| / (||delta|| + e),  d^ = d / ||d||
/// with e = kDivisionGuard; cos clamped to [-1, 1], q_perp to [0, 1].
TubeMetrics tube_metrics(const Tangent& v, const Tangent& d, const Tangent& delta,
                         const Metric& g);

/// alpha must exceed h^2 / (2 mu_phi eta).
double min_admissible_alpha(double h, double eta, double mu_phi);

struct CertificateReport {
  std::size_t steps = 0;
  std::size_t satisfied = 0;
  double fraction = 0.0;
  /// Most negative slack (RHS - LHS); positive when nothing is violated.
  double worst_slack = 0.0;
  std::int64_t worst_step = -1;
  double c1 = 0.0;
  double alpha = 0.0;
  double mu_phi = 0.0;
  /// True when every step's alpha is admissible.
  bool admissible = false;
  /// True when f_star was estimated rather than known.
  bool advisory = false;

  bool holds() const { return steps > 0 && satisfied == steps; }
};

/// Evaluates, per record,
///   V_{k+1} - V_k <= -c1 h ||grad f||^2 - c2 ||z||^2 + c3 / (eta h) ||delta||^2
/// with c1 = mu_phi / 2, c2 = alpha eta / (2 h), c3 = alpha. V is recomputed
/// from f_val and z_norm with p.alpha and p.f_star. Throws PreconditionError on
/// an empty sequence.
CertificateReport check_descent_inequality(std::span<const DiagnosticsRecord> records,
                                           const LyapunovParams& p,
                                           bool f_star_estimated = false);

/// Running minimum of descent_alignment, clamped below at 1e-6.
double estimate_mu_phi(std::span<const DiagnosticsRecord> records);

/// lambda_min(A), the tight PL constant of a quadratic.
double pl_constant(const QuadraticSpec& quadratic);

struct UubReport {
  double rho = 0.0;
  double floor = 0.0;
  double max_tail_V = 0.0;
  bool satisfied = false;
};

inline constexpr std::size_t kMinUubWindow = 100;

/// rho = min(mu_phi h mu_pl, eta / 2); floor = alpha / (rho eta h) max ||delta||^2.
/// Throws PreconditionError for a window shorter than kMinUubWindow or a
/// missing mu_pl, InadmissibleParameters when rho is outside (0, 1).
UubReport uub_floor(std::span<const DiagnosticsRecord> tail, const LyapunovParams& p,
                    double h, double eta);

}  // namespace rlo
