#include "rlo/engine.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "rlo/error.hpp"

namespace rlo {
namespace {

void require_unit_interval(double eta, const char* field) {
  if (!(eta > 0.0 && eta <= 1.0)) throw ConfigError(field, "eta must lie in (0, 1]");
}

std::int64_t clamp_step(const Schedule& s, std::int64_t k) {
  const auto last = s.last_step();
  return last ? std::min(k, *last) : k;
}

}  // namespace

void RLOConfig::validate() const {
  field.validate();
  h_schedule.validate("h");
  eta_schedule.validate("eta");
  if (h_schedule.kind == ScheduleKind::kCosineWithWarmup && !(h_schedule.floor > 0.0)) {
    throw ConfigError("h", "cosine floor must be > 0");
  }
  require_unit_interval(eta_schedule.peak, "eta");
  if (eta_schedule.kind == ScheduleKind::kCosineWithWarmup) {
    // The smallest value of a warmup-cosine schedule is at k = 0 or k = T - 1.
    require_unit_interval(schedule_value(eta_schedule, 0), "eta");
    require_unit_interval(schedule_value(eta_schedule, eta_schedule.total_steps - 1), "eta");
  }
  if (!std::isfinite(weight_decay) || weight_decay < 0.0) {
    throw ConfigError("weight_decay", "must be >= 0");
  }
  if (weight_decay > 0.0 && manifold == Manifold::kSphere) {
    throw ConfigError("weight_decay", "not defined on the sphere");
  }
  if (metric_mode == MetricMode::kSecondMoment && metric.kind() != MetricKind::kIdentity) {
    throw ConfigError("metric", "second-moment mode builds its own metric");
  }
}

bool RLOConfig::needs_second_moment() const {
  return field.phi == PhiKind::kTanhAdaptive || metric_mode == MetricMode::kSecondMoment;
}

ExtendedState ExtendedState::initial(const Point& theta0, const RLOConfig& cfg) {
  if (theta0.manifold() != cfg.manifold) {
    throw PreconditionError("initial point lies on " + std::string(to_string(theta0.manifold())) +
                            " but the configuration expects " +
                            std::string(to_string(cfg.manifold)));
  }
  return ExtendedState{theta0, Tangent::zero(theta0),
                       OptimizerState::zero(theta0.dim(), cfg.needs_second_moment()), 0};
}

GeometricPhase geometric_phase(const OptimizerState& y, const Tangent& g,
                               const RLOConfig& cfg) {
  GeometricPhase out;
  if (cfg.metric_mode == MetricMode::kFixed) {
    const Tangent rg = riemannian_gradient(cfg.metric, g);
    Direction dir = generate_direction(cfg.field, y, rg.coords());
    out.d = std::move(dir.d);
    out.d_pre = std::move(dir.d_pre);
    out.next = std::move(dir.next);
    out.metric = cfg.metric;
  } else {
    Direction dir = generate_direction(cfg.field, y, g.coords());
    if (!dir.next.s) throw StateMismatch("second-moment metric needs s in the state");
    Vector w = dir.next.s->cwiseSqrt().array() + cfg.field.epsilon;
    out.metric = Metric::diagonal(std::move(w));
    out.d = riemannian_gradient(out.metric, Tangent(g.base(), dir.d)).coords();
    out.d_pre = std::move(dir.d_pre);
    out.next = std::move(dir.next);
  }
  if (g.base().manifold() == Manifold::kSphere) {
    out.d = Tangent::project(g.base(), out.d).coords();
  }
  return out;
}

DynamicPhase dynamic_phase(const Point& theta, const Tangent& v, const Vector& d, double h,
                           double eta) {
  if (!(v.base() == theta)) throw BasePointMismatch("dynamic_phase: v is not based at theta");
  if (d.size() != theta.dim()) throw DimensionMismatch("dynamic_phase: direction size");
  Vector v_tilde = (1.0 - eta) * v.coords() + eta * d;
  Point next = retract(theta, Tangent(theta, -h * v_tilde));
  Tangent v_next = transport(theta, next, Tangent(theta, v_tilde));
  return {std::move(v_tilde), std::move(next), std::move(v_next)};
}

StepResult rlo_step(const ExtendedState& state, const Tangent& g, const RLOConfig& cfg) {
  if (!g.coords().allFinite()) {
    throw PoisonedGradient("gradient at step " + std::to_string(state.k) +
                           " contains NaN or Inf");
  }
  if (!(g.base() == state.theta)) {
    throw BasePointMismatch("rlo_step: gradient is not based at theta");
  }
  const double h = schedule_value(cfg.h_schedule, state.k);
  const double eta = schedule_value(cfg.eta_schedule, state.k);

  Point theta = state.theta;
  Tangent v = state.v;
  Tangent grad = g;
  if (cfg.weight_decay != 0.0) {
    theta = Point::euclidean(theta.coords() * (1.0 - h * cfg.weight_decay));
    v = Tangent(theta, v.coords());
    grad = Tangent(theta, g.coords());
  }

  GeometricPhase gp = geometric_phase(state.y, grad, cfg);
  StepTrace trace;
  trace.g_norm = norm(gp.metric, riemannian_gradient(gp.metric, grad));
  trace.z = v.coords() - gp.d;
  trace.h = h;
  trace.eta = eta;

  DynamicPhase dp = dynamic_phase(theta, v, gp.d, h, eta);
  trace.d = std::move(gp.d);
  trace.d_pre = std::move(gp.d_pre);
  trace.v_tilde = std::move(dp.v_tilde);
  trace.metric = std::move(gp.metric);

  ExtendedState next{std::move(dp.theta), std::move(dp.v), std::move(gp.next), state.k + 1};
  return {std::move(next), std::move(trace)};
}

namespace {

struct Pending {
  DiagnosticsRecord record;
  Point theta;
  Vector d;
  Vector v_tilde;
  Metric metric = Metric::identity();
};

class RecordBuilder {
 public:
  RecordBuilder(const ObjectiveHandle& obj, const RunOptions& opt)
      : alpha_(opt.alpha) {
    if (opt.f_star) {
      f_star_ = *opt.f_star;
    } else if (obj.f_star()) {
      f_star_ = *obj.f_star();
    } else {
      estimated_ = true;
    }
  }

  bool estimated() const { return estimated_; }

  double observe(double f) {
    running_min_ = std::min(running_min_, f);
    return f;
  }

  Pending open(std::int64_t k, const Point& theta, double f, const Tangent& exact_grad,
               const StepTrace& trace) {
    Pending p{{}, theta, trace.d, trace.v_tilde, trace.metric};
    auto& r = p.record;
    r.k = k;
    r.f_val = f;
    const Tangent rg = riemannian_gradient(trace.metric, exact_grad);
    const double gn = norm(trace.metric, rg);
    r.grad_norm = gn;
    r.descent_alignment = gn > 0.0 ? inner(trace.metric, rg.coords(), trace.d) / (gn * gn) : 1.0;
    r.z_norm = norm(trace.metric, trace.z);
    r.h = trace.h;
    r.eta = trace.eta;
    return p;
  }

  DiagnosticsRecord close(Pending p, const Point& theta_next, const Vector& d_next,
                          const Vector& z_next, double f_next, double h_next) {
    const Tangent d_prev = transport(p.theta, theta_next, Tangent(p.theta, p.d));
    const Tangent d_now(theta_next, d_next);
    const Tangent delta = forcing(d_now, d_prev);
    const Tangent v_applied = transport(p.theta, theta_next, Tangent(p.theta, p.v_tilde));
    auto& r = p.record;
    r.delta_norm = norm(p.metric, delta);
    const TubeMetrics t = tube_metrics(v_applied, d_prev, delta, p.metric);
    r.r = t.r;
    r.cos_vd = t.cos_vd;
    r.q_perp = t.q_perp;
    r.f_next = f_next;
    r.z_next_norm = norm(p.metric, z_next);
    r.h_next = h_next;
    const double fs = estimated_ ? running_min_ : f_star_;
    r.V = r.f_val - fs + (alpha_ / r.h) * r.z_norm * r.z_norm;
    return r;
  }

 private:
  double alpha_;
  double f_star_ = 0.0;
  bool estimated_ = false;
  double running_min_ = std::numeric_limits<double>::infinity();
};

}  // namespace

TrajectorySummary run_trajectory(const RLOConfig& cfg, const ObjectiveHandle& objective,
                                 const Point& theta0, std::int64_t steps,
                                 DiagnosticsSink* sink, const RunOptions& options) {
  cfg.validate();
  objective.validate();
  if (steps < 0) throw PreconditionError("run_trajectory: steps must be >= 0");
  if (theta0.dim() != objective.dim()) {
    throw DimensionMismatch("run_trajectory: theta0 has dimension " +
                            std::to_string(theta0.dim()) + ", objective has " +
                            std::to_string(objective.dim()));
  }
  if (objective.manifold() != cfg.manifold) {
    throw PreconditionError("run_trajectory: objective and configuration disagree on the manifold");
  }
  for (const Schedule* s : {&cfg.h_schedule, &cfg.eta_schedule}) {
    const auto last = s->last_step();
    if (last && *last < steps - 1) {
      throw ConfigError(s == &cfg.h_schedule ? "h" : "eta",
                        "schedule is shorter than the run");
    }
  }

  ObjectiveHandle oracle = objective;
  oracle.noise.rng_seed = cfg.seed;
  RecordBuilder builder(oracle, options);

  TrajectorySummary sum{ExtendedState::initial(theta0, cfg)};
  sum.f_star_estimated = builder.estimated();

  auto exact = [&](const Point& p) {
    Evaluation e = oracle.objective->evaluate(p.coords());
    return std::pair{builder.observe(e.f), Tangent(p, std::move(e.grad))};
  };

  auto [f0, grad0] = exact(theta0);
  sum.initial_loss = sum.best_loss = sum.final_loss = f0;
  double f_now = f0;
  Tangent grad_now = grad0;
  std::optional<Pending> pending;

  try {
    for (std::int64_t k = 0; k < steps; ++k) {
      ExtendedState& st = sum.final_state;
      const Tangent g = sample_gradient(oracle, st.theta, k);
      StepResult res = rlo_step(st, g, cfg);
      if (pending) {
        const DiagnosticsRecord rec =
            builder.close(std::move(*pending), st.theta, res.trace.d, res.trace.z, f_now,
                          res.trace.h);
        if (sink) sink->consume(rec);
      }
      pending = builder.open(k, st.theta, f_now, grad_now, res.trace);
      st = std::move(res.state);
      sum.steps_completed = k + 1;

      std::tie(f_now, grad_now) = exact(st.theta);
      sum.final_loss = f_now;
      sum.best_loss = std::min(sum.best_loss, f_now);
    }

    if (pending) {
      // Look-ahead at theta_K supplies d_K for the last record's forcing term.
      const ExtendedState& st = sum.final_state;
      const Tangent g = sample_gradient(oracle, st.theta, st.k);
      if (!g.coords().allFinite()) {
        throw PoisonedGradient("gradient at step " + std::to_string(st.k) +
                               " contains NaN or Inf");
      }
      const GeometricPhase gp = geometric_phase(st.y, g, cfg);
      const double h_next = schedule_value(cfg.h_schedule, clamp_step(cfg.h_schedule, st.k));
      const DiagnosticsRecord rec = builder.close(std::move(*pending), st.theta, gp.d,
                                                  st.v.coords() - gp.d, f_now, h_next);
      if (sink) sink->consume(rec);
    }
  } catch (const PoisonedGradient& e) {
    sum.poisoned = true;
    sum.error = e.what();
  }
  return sum;
}

}  // namespace rlo
