#include <CLI11.hpp>

#include <iostream>

#include "rlo_cli/commands.hpp"

int main(int argc, char** argv) {
  using namespace rlo::cli;
  CLI::App app{"Lifted-dynamics optimizer testbed: runs, ablation grids and property suites"};
  app.require_subcommand(1);

  std::string config, grid, out_dir, suite;
  std::optional<std::uint64_t> seed;
  bool quiet = false;
  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--out", out_dir, "Output directory (default: $RLO_OUT or ./rlo_out)");
    sub->add_option("--seed", seed, "Override run.seed");
    sub->add_flag("--quiet", quiet, "Suppress the summary on stdout");
  };

  auto* run = app.add_subcommand("run", "Run one configured experiment");
  run->add_option("--config", config, "Experiment JSON")->required();
  add_common(run);

  auto* ablate = app.add_subcommand("ablate", "Run every cell of a parameter grid");
  ablate->add_option("--config", config, "Base experiment JSON")->required();
  ablate->add_option("--grid", grid, "Grid JSON")->required();
  add_common(ablate);

  auto* verify = app.add_subcommand("verify", "Run a named property suite");
  verify->add_option("suite", suite, "equivalence | lyapunov | contraction | gradients | uub")
      ->required();
  add_common(verify);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : exit_code::kValidation;
  }

  const CommonOptions opts{out_dir.empty() ? default_out_dir() : std::filesystem::path(out_dir),
                           seed, quiet};
  if (*run) return cmd_run(config, opts, std::cout, std::cerr);
  if (*ablate) return cmd_ablate(config, grid, opts, std::cout, std::cerr);
  return cmd_verify(suite, opts, std::cout, std::cerr);
}
