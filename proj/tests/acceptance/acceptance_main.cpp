// Prints one PASS/FAIL line per acceptance criterion; exits nonzero if any fail.

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <string>
#include <vector>

#include "rlo_cli/checks.hpp"

namespace {

struct Criterion {
  int id;
  const char* title;
  double budget_s;
  std::function<rlo::cli::CheckResult()> run;
};

}  // namespace

int main() {
  namespace fs = std::filesystem;
  using namespace rlo::cli;
  const fs::path scratch = fs::temp_directory_path() / "rlo_acceptance";

  const std::vector<Criterion> criteria = {
      {1, "optimizer recovery", 1.0, check_optimizer_recovery},
      {2, "exact fiber contraction", 0.0, check_frozen_field_contraction},
      {3, "stochastic residual inequality", 0.0, check_stochastic_residual_inequality},
      {4, "Lyapunov descent certificate", 5.0, check_lyapunov_descent},
      {5, "UUB noise floor and scaling", 30.0, check_uub_floor_scaling},
      {6, "eta-thickness law", 120.0, check_eta_thickness},
      {7, "smoothness asymmetry", 0.0, check_smoothness_asymmetry},
      {8, "global-normalization step-size identity", 0.0, check_global_normalization_identity},
      {9, "preconditioned equivalence", 0.0, check_preconditioned_equivalence},
      {10, "Riemannian convergence", 0.0, check_sphere_rayleigh},
      {11, "gradient integrity", 0.0, check_gradient_integrity},
      {12, "trace determinism", 0.0, [&] { return check_trace_determinism(scratch); }},
  };

  int failed = 0;
  for (const auto& c : criteria) {
    const auto t0 = std::chrono::steady_clock::now();
    CheckResult r = c.run();
    const double secs =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    bool pass = r.pass;
    if (c.budget_s > 0.0 && secs >= c.budget_s) {
      pass = false;
      r.detail += " (over the " + std::to_string(c.budget_s) + " s budget)";
    }
    if (!pass) ++failed;
    std::printf("%s %2d %s: %s [%.2fs]\n", pass ? "PASS" : "FAIL", c.id, c.title,
                r.detail.c_str(), secs);
    std::fflush(stdout);
  }
  fs::remove_all(scratch);
  return failed == 0 ? 0 : 1;
}
