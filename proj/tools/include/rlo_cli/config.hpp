#pragma once

#include <nlohmann/json.hpp>

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>

#include "rlo/engine.hpp"

namespace rlo::cli {

enum class FStarMode { kAuto, kRunningMin, kValue };

struct DiagnosticsOptions {
  /// Residual weight; nullopt selects twice the smallest admissible value.
  std::optional<double> alpha;
  FStarMode f_star_mode = FStarMode::kAuto;
  double f_star_value = 0.0;
  bool certificates = true;
  std::optional<double> mu_pl;
};

/// A fully validated experiment, ready to run.
struct Experiment {
  std::string label;
  ObjectiveHandle objective;
  Point theta0;
  RLOConfig optimizer{};
  std::int64_t steps = 0;
  std::int64_t log_every = 1;
  DiagnosticsOptions diagnostics{};
  /// Analytic PL constant, available for quadratic objectives.
  std::optional<double> analytic_mu_pl{};
};

/// Builds an experiment from a parsed JSON document. Relative dataset paths are
/// resolved against `base_dir`. Throws ConfigError naming the JSON path of the
/// first offending entry; unknown keys are errors.
Experiment build_experiment(const nlohmann::json& doc, const std::filesystem::path& base_dir,
                            std::optional<std::uint64_t> seed_override = std::nullopt);

/// Reads and parses a JSON file. Throws std::ios_base::failure when unreadable
/// and ConfigError on malformed JSON.
nlohmann::json read_json(const std::filesystem::path& path);

}  // namespace rlo::cli
