#include <cmath>
#include <numbers>
#include <string>

#include "rlo/engine.hpp"
#include "rlo/error.hpp"

namespace rlo {

std::string_view to_string(ScheduleKind kind) {
  return kind == ScheduleKind::kConstant ? "constant" : "cosine_with_warmup";
}

std::optional<ScheduleKind> parse_schedule_kind(std::string_view name) {
  if (name == "constant") return ScheduleKind::kConstant;
  if (name == "cosine_with_warmup") return ScheduleKind::kCosineWithWarmup;
  return std::nullopt;
}

void Schedule::validate(const std::string& field) const {
  if (!std::isfinite(peak) || !(peak > 0.0)) throw ConfigError(field, "peak must be > 0");
  if (kind == ScheduleKind::kConstant) {
    if (total_steps < 0) throw ConfigError(field, "total_steps must be >= 0");
    return;
  }
  if (total_steps < 1) throw ConfigError(field, "total_steps must be >= 1");
  if (warmup_steps < 0 || warmup_steps > total_steps) {
    throw ConfigError(field, "warmup_steps must lie in [0, total_steps]");
  }
  if (!std::isfinite(floor) || floor < 0.0 || floor >= peak) {
    throw ConfigError(field, "floor must lie in [0, peak)");
  }
}

std::optional<std::int64_t> Schedule::last_step() const {
  if (total_steps == 0 && kind == ScheduleKind::kConstant) return std::nullopt;
  return total_steps - 1;
}

double schedule_value(const Schedule& s, std::int64_t k) {
  const bool unbounded = s.kind == ScheduleKind::kConstant && s.total_steps == 0;
  if (k < 0 || (!unbounded && k >= s.total_steps)) {
    throw PreconditionError("schedule_value: step " + std::to_string(k) + " out of range");
  }
  if (s.kind == ScheduleKind::kConstant) return s.peak;
  if (k < s.warmup_steps) {
    return s.peak * static_cast<double>(k + 1) / static_cast<double>(s.warmup_steps);
  }
  // The final step lands exactly on the floor.
  const std::int64_t span = s.total_steps - s.warmup_steps - 1;
  if (span <= 0) return s.peak;
  const double phase =
      std::numbers::pi * static_cast<double>(k - s.warmup_steps) / static_cast<double>(span);
  return s.floor + (s.peak - s.floor) * 0.5 * (1.0 + std::cos(phase));
}

}  // namespace rlo
