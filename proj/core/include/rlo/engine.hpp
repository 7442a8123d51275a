#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "rlo/diagnostics.hpp"
#include "rlo/fields.hpp"
#include "rlo/geometry.hpp"
#include "rlo/objectives.hpp"

namespace rlo {

enum class ScheduleKind { kConstant, kCosineWithWarmup };

std::string_view to_string(ScheduleKind kind);
std::optional<ScheduleKind> parse_schedule_kind(std::string_view name);

struct Schedule {
  ScheduleKind kind = ScheduleKind::kConstant;
  double peak = 0.0;
  /// Length of a cosine schedule. Zero for a constant schedule means unbounded.
  std::int64_t total_steps = 0;
  std::int64_t warmup_steps = 0;
  double floor = 0.0;

  static Schedule constant(double value) { return {ScheduleKind::kConstant, value, 0, 0, 0.0}; }
  static Schedule cosine(double peak, std::int64_t total, std::int64_t warmup, double floor) {
    return {ScheduleKind::kCosineWithWarmup, peak, total, warmup, floor};
  }

  /// Throws ConfigError(field, ...) on inconsistent settings.
  void validate(const std::string& field) const;
  /// Largest step index the schedule is defined for, or nullopt if unbounded.
  std::optional<std::int64_t> last_step() const;
};

/// Linear warmup to `peak`, then cosine decay to `floor`.
/// Throws PreconditionError when k is outside [0, total_steps).
double schedule_value(const Schedule& s, std::int64_t k);

/// How the metric is obtained each step.
enum class MetricMode {
  /// `RLOConfig::metric` is used as given and applied to the raw gradient.
  kFixed,
  /// Diagonal metric with weights sqrt(s) + eps rebuilt from the optimizer's
  /// second moment and applied to the field output.
  kSecondMoment,
};

struct RLOConfig {
  FieldSpec field;
  Metric metric = Metric::identity();
  MetricMode metric_mode = MetricMode::kFixed;
  Manifold manifold = Manifold::kEuclidean;
  Schedule h_schedule = Schedule::constant(0.1);
  Schedule eta_schedule = Schedule::constant(1.0);
  double weight_decay = 0.0;
  std::uint64_t seed = 0;

  /// Throws ConfigError naming the first offending field.
  void validate() const;
  /// Whether the optimizer state needs a second moment.
  bool needs_second_moment() const;
};

/// x_k = (theta_k, v_k, y_k).
struct ExtendedState {
  Point theta;
  Tangent v;
  OptimizerState y;
  std::int64_t k = 0;

  /// v_0 = 0, zeroed moments.
  static ExtendedState initial(const Point& theta0, const RLOConfig& cfg);
};

struct StepTrace {
  double g_norm = 0.0;
  Vector d;
  /// Field output before global normalization and the belief term.
  Vector d_pre;
  Vector v_tilde;
  /// v_k - d_k.
  Vector z;
  double h = 0.0;
  double eta = 0.0;
  Metric metric = Metric::identity();
};

struct GeometricPhase {
  Vector d;
  Vector d_pre;
  OptimizerState next;
  Metric metric = Metric::identity();
};

/// Target direction at theta for gradient g (already based at theta).
GeometricPhase geometric_phase(const OptimizerState& y, const Tangent& g,
                               const RLOConfig& cfg);

struct DynamicPhase {
  Vector v_tilde;
  Point theta;
  Tangent v;
};

/// v~ = (1 - eta) v + eta d;  theta' = R_theta(-h v~);  v' = T(v~).
/// Accepts any eta, including the boundary value 0.
DynamicPhase dynamic_phase(const Point& theta, const Tangent& v, const Vector& d, double h,
                           double eta);

struct StepResult {
  ExtendedState state;
  StepTrace trace;
};

/// One iteration of the lifted dynamics. Throws PoisonedGradient, leaving the
/// caller's state untouched, when g has NaN or Inf entries.
StepResult rlo_step(const ExtendedState& state, const Tangent& g, const RLOConfig& cfg);

/// Named optimizers: sgd, momentum, adamw, lion, rlo, rlo_lambda, rlo_lifted.
///
/// Recognized keys: h (required), eta (required for momentum), beta1, beta2,
/// beta3, gamma, lambda_b, eps, wd, global_normalize (0 or 1). Unknown keys and
/// unknown names raise ConfigError.
RLOConfig make_preset(std::string_view name, const std::map<std::string, double>& hyper);
const std::vector<std::string>& preset_names();

struct RunOptions {
  /// Residual weight used for V in emitted records.
  double alpha = 1.0;
  /// Overrides the objective's optimum; otherwise the objective's own value
  /// or, failing that, the running minimum of f.
  std::optional<double> f_star;
};

struct TrajectorySummary {
  ExtendedState final_state;
  double initial_loss = 0.0;
  double best_loss = 0.0;
  double final_loss = 0.0;
  std::int64_t steps_completed = 0;
  bool poisoned = false;
  std::string error{};
  bool f_star_estimated = false;
};

/// Runs `steps` steps from theta0, drawing gradients from `objective` with
/// noise seeded by cfg.seed, and emits one record per step to `sink` (may be
/// null). A poisoned gradient stops the run and flags the summary.
TrajectorySummary run_trajectory(const RLOConfig& cfg, const ObjectiveHandle& objective,
                                 const Point& theta0, std::int64_t steps,
                                 DiagnosticsSink* sink, const RunOptions& options = {});

}  // namespace rlo
