#include "rlo/diagnostics.hpp"

#include <algorithm>
#include <limits>
#include <cmath>
#include <string>

#include "rlo/error.hpp"

namespace rlo {

Tangent residual(const Tangent& v, const Tangent& d) {
  if (!(v.base() == d.base())) throw BasePointMismatch("residual: v and d differ in base");
  return Tangent(v.base(), v.coords() - d.coords());
}

Tangent forcing(const Tangent& d_next, const Tangent& d_prev_transported) {
  if (!(d_next.base() == d_prev_transported.base())) {
    throw BasePointMismatch("forcing: operands differ in base");
  }
  return Tangent(d_next.base(), d_next.coords() - d_prev_transported.coords());
}

double lyapunov_value(double f_val, const LyapunovParams& p, const Tangent& z, double h,
                      const Metric& g) {
  if (!(h > 0.0)) throw PreconditionError("lyapunov_value: h must be > 0");
  return f_val - p.f_star + (p.alpha / h) * inner(g, z, z);
}

double lyapunov_value(double f_val, const LyapunovParams& p, double z_norm, double h) {
  if (!(h > 0.0)) throw PreconditionError("lyapunov_value: h must be > 0");
  return f_val - p.f_star + (p.alpha / h) * z_norm * z_norm;
}

TubeMetrics tube_metrics(const Tangent& v, const Tangent& d, const Tangent& delta,
                         const Metric& g) {
  const double nd = norm(g, d);
  const double nv = norm(g, v);
  const double ndelta = norm(g, delta);
  TubeMetrics t;
  t.r = norm(g, v.coords() - d.coords()) / (nd + kDivisionGuard);
  t.cos_vd = std::clamp(inner(g, v, d) / ((nv + kDivisionGuard) * (nd + kDivisionGuard)),
                        -1.0, 1.0);
  Vector perp = delta.coords();
  if (nd > 0.0) {
    const Vector dhat = d.coords() / nd;
    perp -= inner(g, delta.coords(), dhat) * dhat;
  }
  t.q_perp = std::clamp(norm(g, perp) / (ndelta + kDivisionGuard), 0.0, 1.0);
  return t;
}

double min_admissible_alpha(double h, double eta, double mu_phi) {
  return h * h / (2.0 * mu_phi * eta);
}

CertificateReport check_descent_inequality(std::span<const DiagnosticsRecord> records,
                                           const LyapunovParams& p, bool f_star_estimated) {
  if (records.empty()) throw PreconditionError("check_descent_inequality: no records");
  CertificateReport rep;
  rep.alpha = p.alpha;
  rep.mu_phi = p.mu_phi;
  rep.c1 = p.mu_phi / 2.0;
  rep.advisory = f_star_estimated;
  rep.admissible = true;
  rep.worst_slack = std::numeric_limits<double>::infinity();

  for (const auto& r : records) {
    const double v_now = lyapunov_value(r.f_val, p, r.z_norm, r.h);
    const double v_next = lyapunov_value(r.f_next, p, r.z_next_norm, r.h_next);
    const double c2 = p.alpha * r.eta / (2.0 * r.h);
    const double lhs = v_next - v_now;
    const double rhs = -rep.c1 * r.h * r.grad_norm * r.grad_norm - c2 * r.z_norm * r.z_norm +
                       p.alpha / (r.eta * r.h) * r.delta_norm * r.delta_norm;
    const double slack = rhs - lhs;
    if (slack >= -kCertificateSlack) ++rep.satisfied;
    if (slack < rep.worst_slack) {
      rep.worst_slack = slack;
      rep.worst_step = r.k;
    }
    if (!(p.alpha > min_admissible_alpha(r.h, r.eta, p.mu_phi))) rep.admissible = false;
    ++rep.steps;
  }
  rep.fraction = static_cast<double>(rep.satisfied) / static_cast<double>(rep.steps);
  return rep;
}

double estimate_mu_phi(std::span<const DiagnosticsRecord> records) {
  double mu = std::numeric_limits<double>::infinity();
  for (const auto& r : records) {
    if (r.grad_norm > 0.0) mu = std::min(mu, r.descent_alignment);
  }
  if (!std::isfinite(mu)) return 1.0;
  return std::max(mu, 1e-6);
}

double pl_constant(const QuadraticSpec& quadratic) {
  quadratic.validate();
  return quadratic.lambda_min();
}

UubReport uub_floor(std::span<const DiagnosticsRecord> tail, const LyapunovParams& p,
                    double h, double eta) {
  if (tail.size() < kMinUubWindow) {
    throw PreconditionError("uub_floor: tail window has " + std::to_string(tail.size()) +
                            " records, need at least " + std::to_string(kMinUubWindow));
  }
  if (!p.mu_pl) throw PreconditionError("uub_floor: mu_pl is required");
  UubReport rep;
  rep.rho = std::min(p.mu_phi * h * *p.mu_pl, eta / 2.0);
  if (!(rep.rho > 0.0 && rep.rho < 1.0)) {
    throw InadmissibleParameters("uub_floor: rho = " + std::to_string(rep.rho) +
                                 " is outside (0, 1)");
  }
  double max_delta_sq = 0.0;
  for (const auto& r : tail) {
    max_delta_sq = std::max(max_delta_sq, r.delta_norm * r.delta_norm);
    rep.max_tail_V = std::max(rep.max_tail_V, lyapunov_value(r.f_val, p, r.z_norm, r.h));
  }
  rep.floor = p.alpha / (rep.rho * eta * h) * max_delta_sq;
  rep.satisfied = rep.max_tail_V <= rep.floor * (1.0 + 1e-6);
  return rep;
}

}  // namespace rlo
