#pragma once

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

namespace rlo::cli {

struct CheckResult {
  std::string name;
  bool pass = false;
  std::string detail;
};

// Property checks shared by `rlo verify` and the acceptance binary. Each runs a
// self-contained experiment and reports the measured quantity in `detail`.

CheckResult check_optimizer_recovery();
CheckResult check_frozen_field_contraction();
CheckResult check_stochastic_residual_inequality();
CheckResult check_lyapunov_descent();
CheckResult check_certificate_soundness();
CheckResult check_uub_floor_scaling();
CheckResult check_eta_thickness();
CheckResult check_smoothness_asymmetry();
CheckResult check_global_normalization_identity();
CheckResult check_preconditioned_equivalence();
CheckResult check_sphere_rayleigh();
CheckResult check_gradient_integrity();
/// Runs `rlo run` twice on one config inside `scratch` and compares traces.
CheckResult check_trace_determinism(const std::filesystem::path& scratch);

const std::vector<std::string>& suite_names();
/// Throws std::invalid_argument for an unknown suite.
std::vector<CheckResult> run_suite(std::string_view suite);

}  // namespace rlo::cli
