#include "rlo_cli/commands.hpp"

#include <algorithm>
#include <cstdlib>
#include <fstream>
#include <future>
#include <iomanip>
#include <ios>
#include <map>
#include <sstream>
#include <thread>

#include "rlo/error.hpp"
#include "rlo_cli/checks.hpp"
#include "rlo_cli/csv.hpp"

namespace rlo::cli {
namespace {

using nlohmann::json;

std::ofstream open_output(const std::filesystem::path& path) {
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) throw std::ios_base::failure("cannot write " + path.string());
  return f;
}

void ensure_dir(const std::filesystem::path& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw std::ios_base::failure("cannot create " + dir.string() + ": " + ec.message());
}

bool analytic_unit_alignment(const RLOConfig& cfg) {
  return cfg.field.phi == PhiKind::kRawGradient && cfg.metric_mode == MetricMode::kFixed;
}

void write_summary(std::ostream& out, const Experiment& ex, const RunAnalysis& a) {
  const auto& s = a.summary;
  out << "label = " << ex.label << '\n'
      << "objective = " << to_string(ex.objective.kind()) << '\n'
      << "dim = " << ex.objective.dim() << '\n'
      << "steps_requested = " << ex.steps << '\n'
      << "steps_completed = " << s.steps_completed << '\n'
      << "poisoned = " << (s.poisoned ? "true" : "false") << '\n';
  if (s.poisoned) out << "error = " << s.error << '\n';
  out << "initial_loss = " << format_real(s.initial_loss) << '\n'
      << "best_loss = " << format_real(s.best_loss) << '\n'
      << "final_loss = " << format_real(s.final_loss) << '\n'
      << "f_star = " << format_real(a.f_star) << '\n'
      << "f_star_estimated = " << (a.f_star_estimated ? "true" : "false") << '\n'
      << "alpha = " << format_real(a.alpha) << '\n'
      << "mu_phi = " << format_real(a.mu_phi) << '\n';
  if (a.descent) {
    const auto& d = *a.descent;
    out << "descent.fraction = " << format_real(d.fraction) << '\n'
        << "descent.worst_slack = " << format_real(d.worst_slack) << '\n'
        << "descent.worst_step = " << d.worst_step << '\n'
        << "descent.c1 = " << format_real(d.c1) << '\n'
        << "descent.admissible = " << (d.admissible ? "true" : "false") << '\n'
        << "descent.advisory = " << (d.advisory ? "true" : "false") << '\n';
  }
  if (a.uub) {
    out << "uub.rho = " << format_real(a.uub->rho) << '\n'
        << "uub.floor = " << format_real(a.uub->floor) << '\n'
        << "uub.max_tail_V = " << format_real(a.uub->max_tail_V) << '\n'
        << "uub.satisfied = " << (a.uub->satisfied ? "true" : "false") << '\n';
  }
  if (!a.uub_note.empty()) out << "uub.note = " << a.uub_note << '\n';
}

std::string cell_text(const json& v) {
  if (v.is_string()) return v.get<std::string>();
  if (v.is_number_float()) return format_real(v.get<double>());
  return v.dump();
}

// Shortest round-trip text, for human-facing tables.
std::string axis_label(const json& v) {
  return v.is_string() ? v.get<std::string>() : v.dump();
}

struct Axis {
  std::string path;
  std::vector<json> values;
};

struct CellResult {
  std::vector<json> coords;
  double best_loss = 0.0;
  double final_loss = 0.0;
  double tail_z = 0.0;
  double mean_cos = 0.0;
  bool poisoned = false;
};

std::vector<Axis> parse_grid(const json& grid, std::size_t& cap) {
  if (!grid.is_object()) throw ConfigError("grid", "expected an object");
  for (const auto& [k, v] : grid.items()) {
    if (k != "axes" && k != "cap") throw ConfigError("grid." + k, "unknown key");
  }
  cap = 256;
  if (grid.contains("cap")) {
    if (!grid["cap"].is_number_integer() || grid["cap"].get<std::int64_t>() < 1) {
      throw ConfigError("grid.cap", "expected a positive integer");
    }
    cap = grid["cap"].get<std::size_t>();
  }
  std::vector<Axis> axes;
  if (!grid.contains("axes")) return axes;
  if (!grid["axes"].is_array()) throw ConfigError("grid.axes", "expected an array");
  for (std::size_t i = 0; i < grid["axes"].size(); ++i) {
    const json& a = grid["axes"][i];
    const std::string where = "grid.axes[" + std::to_string(i) + "]";
    if (!a.is_object() || !a.contains("path") || !a["path"].is_string() ||
        !a.contains("values") || !a["values"].is_array() || a["values"].empty()) {
      throw ConfigError(where, "expected {\"path\": string, \"values\": non-empty array}");
    }
    axes.push_back({a["path"].get<std::string>(), a["values"].get<std::vector<json>>()});
  }
  return axes;
}

json::json_pointer to_pointer(const std::string& dotted) {
  std::string p;
  std::stringstream ss(dotted);
  std::string part;
  while (std::getline(ss, part, '.')) p += "/" + part;
  return json::json_pointer(p);
}

CellResult run_cell(const Experiment& ex, std::vector<json> coords) {
  RecordCollector sink;
  const auto sum = run_trajectory(ex.optimizer, ex.objective, ex.theta0, ex.steps, &sink);
  const auto& recs = sink.records();
  CellResult c{std::move(coords), sum.best_loss, sum.final_loss, 0.0, 0.0, sum.poisoned};
  if (!recs.empty()) {
    const std::size_t start = recs.size() - std::max<std::size_t>(1, recs.size() / 4);
    double tz = 0.0, cs = 0.0;
    for (std::size_t i = start; i < recs.size(); ++i) tz += recs[i].z_norm;
    for (const auto& r : recs) cs += r.cos_vd;
    c.tail_z = tz / static_cast<double>(recs.size() - start);
    c.mean_cos = cs / static_cast<double>(recs.size());
  }
  return c;
}

void write_pivot(std::ostream& out, const std::vector<Axis>& axes,
                 const std::vector<CellResult>& cells) {
  constexpr int kWidth = 14;
  auto cell = [](double x) {
    std::ostringstream s;
    s << std::setprecision(6) << x;
    return s.str();
  };
  if (axes.size() < 2) {
    out << std::left << std::setw(kWidth) << (axes.empty() ? "cell" : axes[0].path)
        << std::setw(kWidth) << "final_loss" << std::setw(kWidth) << "tail_z_norm" << '\n';
    for (const auto& c : cells) {
      out << std::setw(kWidth) << (axes.empty() ? "base" : axis_label(c.coords[0]))
          << std::setw(kWidth) << cell(c.final_loss) << std::setw(kWidth) << cell(c.tail_z)
          << '\n';
    }
    return;
  }
  // Rows: first axis; columns: second axis; one block per remaining combination.
  std::map<std::vector<std::string>, std::map<std::pair<std::string, std::string>, double>> blocks;
  for (const auto& c : cells) {
    std::vector<std::string> rest;
    for (std::size_t i = 2; i < c.coords.size(); ++i) rest.push_back(axis_label(c.coords[i]));
    blocks[rest][{axis_label(c.coords[0]), axis_label(c.coords[1])}] = c.final_loss;
  }
  for (const auto& [rest, table] : blocks) {
    out << "final_loss";
    for (std::size_t i = 0; i < rest.size(); ++i) {
      out << "  " << axes[i + 2].path << "=" << rest[i];
    }
    out << '\n' << std::left << std::setw(kWidth) << (axes[0].path + " \\ " + axes[1].path)
        << '\n' << std::setw(kWidth) << "";
    for (const auto& v : axes[1].values) out << std::setw(kWidth) << axis_label(v);
    out << '\n';
    for (const auto& r : axes[0].values) {
      out << std::setw(kWidth) << axis_label(r);
      for (const auto& v : axes[1].values) {
        out << std::setw(kWidth) << cell(table.at({axis_label(r), axis_label(v)}));
      }
      out << '\n';
    }
    out << '\n';
  }
}

}  // namespace

std::filesystem::path default_out_dir() {
  const char* env = std::getenv("RLO_OUT");
  return env && *env ? std::filesystem::path(env) : std::filesystem::path("rlo_out");
}

RunAnalysis analyze(const Experiment& ex) {
  const auto f_star_obj = ex.objective.f_star();
  RunOptions ropt;
  if (ex.diagnostics.f_star_mode == FStarMode::kValue) {
    ropt.f_star = ex.diagnostics.f_star_value;
  } else if (ex.diagnostics.f_star_mode == FStarMode::kAuto && f_star_obj) {
    ropt.f_star = *f_star_obj;
  }

  RecordCollector sink;
  RunAnalysis a{run_trajectory(ex.optimizer, ex.objective, ex.theta0, ex.steps, &sink, ropt)};
  a.records = sink.take();

  if (ropt.f_star) {
    a.f_star = *ropt.f_star;
  } else {
    a.f_star = a.summary.best_loss;
    a.f_star_estimated = true;
  }
  a.mu_phi = analytic_unit_alignment(ex.optimizer) ? 1.0 : estimate_mu_phi(a.records);
  if (ex.diagnostics.alpha) {
    a.alpha = *ex.diagnostics.alpha;
  } else {
    double need = 0.0;
    for (const auto& r : a.records) {
      need = std::max(need, min_admissible_alpha(r.h, r.eta, a.mu_phi));
    }
    a.alpha = need > 0.0 ? 2.0 * need : 1.0;
  }
  LyapunovParams p{a.alpha, a.f_star, a.mu_phi,
                   ex.diagnostics.mu_pl ? ex.diagnostics.mu_pl : ex.analytic_mu_pl};
  for (auto& r : a.records) r.V = lyapunov_value(r.f_val, p, r.z_norm, r.h);

  if (ex.diagnostics.certificates && !a.records.empty()) {
    a.descent = check_descent_inequality(a.records, p, a.f_star_estimated);
    const std::size_t tail = a.records.size() / 4;
    if (!p.mu_pl) {
      a.uub_note = "skipped: mu_pl unknown";
    } else if (tail < kMinUubWindow) {
      a.uub_note = "skipped: tail window shorter than " + std::to_string(kMinUubWindow);
    } else {
      const std::span<const DiagnosticsRecord> window(a.records.data() + a.records.size() - tail,
                                                      tail);
      try {
        a.uub = uub_floor(window, p, window.back().h, window.back().eta);
      } catch (const InadmissibleParameters& e) {
        a.uub_note = e.what();
      }
    }
  }
  return a;
}

int cmd_run(const std::filesystem::path& config, const CommonOptions& opts, std::ostream& out,
            std::ostream& err) {
  std::optional<Experiment> parsed;
  try {
    parsed = build_experiment(read_json(config), config.parent_path(), opts.seed);
  } catch (const ConfigError& e) {
    err << "invalid config: " << e.what() << '\n';
    return exit_code::kValidation;
  } catch (const std::ios_base::failure& e) {
    err << e.what() << '\n';
    return exit_code::kIoError;
  }

  const Experiment& ex = *parsed;
  std::optional<RunAnalysis> analysis;
  try {
    analysis = analyze(ex);
  } catch (const ConfigError& e) {
    err << "invalid config: " << e.what() << '\n';
    return exit_code::kValidation;
  } catch (const Error& e) {
    err << "run failed: " << e.what() << '\n';
    return exit_code::kValidation;
  }
  const RunAnalysis& a = *analysis;

  try {
    ensure_dir(opts.out_dir);
    auto trace = open_output(opts.out_dir / "trace.csv");
    write_trace(trace, a.records, ex.log_every);
    auto summary = open_output(opts.out_dir / "summary.txt");
    write_summary(summary, ex, a);
    if (!trace || !summary) throw std::ios_base::failure("write failed");
  } catch (const std::ios_base::failure& e) {
    err << e.what() << '\n';
    return exit_code::kIoError;
  }

  if (!opts.quiet) write_summary(out, ex, a);
  if (a.summary.poisoned) {
    err << "poisoned gradient: " << a.summary.error << '\n';
    return exit_code::kPoisoned;
  }
  return exit_code::kOk;
}

int cmd_ablate(const std::filesystem::path& config, const std::filesystem::path& grid_path,
               const CommonOptions& opts, std::ostream& out, std::ostream& err) {
  std::vector<Experiment> cells;
  std::vector<std::vector<json>> coords;
  std::vector<Axis> axes;
  try {
    const json base = read_json(config);
    std::size_t cap = 0;
    axes = parse_grid(read_json(grid_path), cap);
    std::size_t total = 1;
    for (const auto& ax : axes) {
      total *= ax.values.size();
      if (total > cap) {
        throw ConfigError("grid.cap", "grid has more than " + std::to_string(cap) + " cells");
      }
    }
    for (std::size_t c = 0; c < total; ++c) {
      json doc = base;
      std::vector<json> point(axes.size());
      std::size_t rem = c;
      for (std::size_t i = axes.size(); i-- > 0;) {
        point[i] = axes[i].values[rem % axes[i].values.size()];
        rem /= axes[i].values.size();
      }
      for (std::size_t i = 0; i < axes.size(); ++i) {
        try {
          doc[to_pointer(axes[i].path)] = point[i];
        } catch (const json::exception& e) {
          throw ConfigError(axes[i].path, std::string("cannot set: ") + e.what());
        }
      }
      cells.push_back(build_experiment(doc, config.parent_path(), opts.seed));
      coords.push_back(std::move(point));
    }
  } catch (const ConfigError& e) {
    err << "invalid grid: " << e.what() << '\n';
    return exit_code::kValidation;
  } catch (const std::ios_base::failure& e) {
    err << e.what() << '\n';
    return exit_code::kIoError;
  }

  std::vector<CellResult> results(cells.size());
  try {
    const std::size_t workers = std::max(1u, std::thread::hardware_concurrency());
    for (std::size_t start = 0; start < cells.size(); start += workers) {
      std::vector<std::future<CellResult>> batch;
      const std::size_t stop = std::min(cells.size(), start + workers);
      for (std::size_t i = start; i < stop; ++i) {
        batch.push_back(std::async(std::launch::async, run_cell, std::cref(cells[i]), coords[i]));
      }
      for (std::size_t i = start; i < stop; ++i) results[i] = batch[i - start].get();
    }
  } catch (const Error& e) {
    err << "ablation failed: " << e.what() << '\n';
    return exit_code::kValidation;
  }

  std::ostringstream pivot;
  write_pivot(pivot, axes, results);
  try {
    ensure_dir(opts.out_dir);
    auto csv = open_output(opts.out_dir / "grid.csv");
    for (const auto& ax : axes) csv << ax.path << ',';
    csv << "best_loss,final_loss,tail_z_norm,mean_cos_vd\n";
    for (const auto& r : results) {
      for (const auto& v : r.coords) csv << cell_text(v) << ',';
      csv << format_real(r.best_loss) << ',' << format_real(r.final_loss) << ','
          << format_real(r.tail_z) << ',' << format_real(r.mean_cos) << '\n';
    }
    auto piv = open_output(opts.out_dir / "pivot.txt");
    piv << pivot.str();
    if (!csv || !piv) throw std::ios_base::failure("write failed");
  } catch (const std::ios_base::failure& e) {
    err << e.what() << '\n';
    return exit_code::kIoError;
  }
  if (!opts.quiet) out << pivot.str();
  const bool poisoned = std::any_of(results.begin(), results.end(),
                                    [](const CellResult& r) { return r.poisoned; });
  return poisoned ? exit_code::kPoisoned : exit_code::kOk;
}

int cmd_verify(const std::string& suite, const CommonOptions& opts, std::ostream& out,
               std::ostream& err) {
  const auto& names = suite_names();
  if (std::find(names.begin(), names.end(), suite) == names.end()) {
    err << "unknown suite '" << suite << "'; expected one of:";
    for (const auto& n : names) err << ' ' << n;
    err << '\n';
    return exit_code::kValidation;
  }
  bool all = true;
  for (const auto& r : run_suite(suite)) {
    all = all && r.pass;
    if (!opts.quiet || !r.pass) {
      out << (r.pass ? "PASS " : "FAIL ") << r.name << ": " << r.detail << '\n';
    }
  }
  return all ? exit_code::kOk : exit_code::kCheckFailed;
}

}  // namespace rlo::cli
