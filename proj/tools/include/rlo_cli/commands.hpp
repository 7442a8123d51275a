#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "rlo/diagnostics.hpp"
#include "rlo/engine.hpp"
#include "rlo_cli/config.hpp"

namespace rlo::cli {

namespace exit_code {
inline constexpr int kOk = 0;
inline constexpr int kIoError = 1;
inline constexpr int kValidation = 2;
inline constexpr int kPoisoned = 3;
/// `verify` ran but at least one property failed.
inline constexpr int kCheckFailed = 4;
}  // namespace exit_code

struct CommonOptions {
  std::filesystem::path out_dir;
  std::optional<std::uint64_t> seed;
  bool quiet = false;
};

/// The completed run plus post-hoc certificates.
struct RunAnalysis {
  TrajectorySummary summary;
  std::vector<DiagnosticsRecord> records{};
  double alpha = 0.0;
  double mu_phi = 1.0;
  double f_star = 0.0;
  bool f_star_estimated = false;
  std::optional<CertificateReport> descent{};
  std::optional<UubReport> uub{};
  std::string uub_note{};
};

/// Runs the experiment, fixes alpha and f_star, recomputes V for every
/// record, and evaluates the certificates requested by the config.
RunAnalysis analyze(const Experiment& ex);

int cmd_run(const std::filesystem::path& config, const CommonOptions& opts, std::ostream& out,
            std::ostream& err);
int cmd_ablate(const std::filesystem::path& config, const std::filesystem::path& grid,
               const CommonOptions& opts, std::ostream& out, std::ostream& err);
int cmd_verify(const std::string& suite, const CommonOptions& opts, std::ostream& out,
               std::ostream& err);

/// Default output directory: $RLO_OUT, else ./rlo_out.
std::filesystem::path default_out_dir();

}  // namespace rlo::cli
