#include "rlo_cli/config.hpp"

#include <fstream>
#include <initializer_list>
#include <ios>
#include <map>
#include <set>
#include <sstream>

#include "rlo/dataset.hpp"
#include "rlo/error.hpp"

namespace rlo::cli {
namespace {

using nlohmann::json;

/// A JSON object paired with its dotted path, for error messages.
class Section {
 public:
  Section(const json& node, std::string path) : node_(node), path_(std::move(path)) {
    if (!node_.is_object()) throw ConfigError(path_.empty() ? "<root>" : path_, "expected an object");
  }

  void allow_only(std::initializer_list<const char*> keys) const {
    const std::set<std::string> allowed(keys.begin(), keys.end());
    for (const auto& [key, value] : node_.items()) {
      if (!allowed.contains(key)) throw ConfigError(child(key), "unknown key");
    }
  }

  bool has(const std::string& key) const { return node_.contains(key); }
  const json& raw(const std::string& key) const { return node_.at(key); }
  Section section(const std::string& key) const { return Section(node_.at(key), child(key)); }

  std::string child(const std::string& key) const {
    return path_.empty() ? key : path_ + "." + key;
  }

  double number(const std::string& key) const {
    const json& v = require(key);
    if (!v.is_number()) throw ConfigError(child(key), "expected a number");
    return v.get<double>();
  }
  double number(const std::string& key, double fallback) const {
    return has(key) ? number(key) : fallback;
  }

  std::int64_t integer(const std::string& key) const {
    const json& v = require(key);
    if (!v.is_number_integer()) throw ConfigError(child(key), "expected an integer");
    return v.get<std::int64_t>();
  }
  std::int64_t integer(const std::string& key, std::int64_t fallback) const {
    return has(key) ? integer(key) : fallback;
  }

  std::string string(const std::string& key) const {
    const json& v = require(key);
    if (!v.is_string()) throw ConfigError(child(key), "expected a string");
    return v.get<std::string>();
  }

  bool boolean(const std::string& key, bool fallback) const {
    if (!has(key)) return fallback;
    const json& v = node_.at(key);
    if (!v.is_boolean()) throw ConfigError(child(key), "expected true or false");
    return v.get<bool>();
  }

  Vector vector(const std::string& key) const {
    const json& v = require(key);
    if (!v.is_array() || v.empty()) throw ConfigError(child(key), "expected a non-empty array");
    Vector out(static_cast<Index>(v.size()));
    for (std::size_t i = 0; i < v.size(); ++i) {
      if (!v[i].is_number()) throw ConfigError(child(key), "expected numbers");
      out[static_cast<Index>(i)] = v[i].get<double>();
    }
    return out;
  }

 private:
  const json& require(const std::string& key) const {
    if (!node_.contains(key)) throw ConfigError(child(key), "required key is missing");
    return node_.at(key);
  }

  const json& node_;
  std::string path_;
};

std::uint64_t as_seed(std::int64_t v, const std::string& field) {
  if (v < 0) throw ConfigError(field, "seed must be >= 0");
  return static_cast<std::uint64_t>(v);
}

NoiseModel parse_noise(const Section& s) {
  s.allow_only({"kind", "sigma", "batch_size"});
  NoiseModel noise;
  const auto kind = parse_noise_kind(s.string("kind"));
  if (!kind) throw ConfigError(s.child("kind"), "expected none, gaussian or minibatch");
  noise.kind = *kind;
  noise.sigma = s.number("sigma", 0.0);
  noise.batch_size = s.integer("batch_size", 0);
  return noise;
}

Dataset parse_dataset(const Section& obj, const std::filesystem::path& base_dir) {
  if (obj.has("dataset") && obj.has("synthetic")) {
    throw ConfigError(obj.child("dataset"), "give either dataset or synthetic, not both");
  }
  if (obj.has("dataset")) {
    std::filesystem::path p = obj.string("dataset");
    if (p.is_relative()) p = base_dir / p;
    try {
      return load_csv_dataset(p);
    } catch (const DatasetError& e) {
      throw ConfigError(obj.child("dataset"), p.string() + ": " + e.what());
    }
  }
  if (!obj.has("synthetic")) {
    throw ConfigError(obj.child("dataset"), "dataset objectives need dataset or synthetic");
  }
  const Section syn = obj.section("synthetic");
  syn.allow_only({"rows_per_class", "dim", "separation", "seed"});
  const auto rows = syn.integer("rows_per_class");
  const auto dim = syn.integer("dim");
  if (rows < 1) throw ConfigError(syn.child("rows_per_class"), "must be >= 1");
  if (dim < 1) throw ConfigError(syn.child("dim"), "must be >= 1");
  return make_two_gaussians(rows, dim, syn.number("separation", 3.0),
                            as_seed(syn.integer("seed", 0), syn.child("seed")));
}

struct ObjectiveBlock {
  ObjectiveHandle handle;
  std::optional<Point> theta0;
  std::optional<double> mu_pl;
  std::uint64_t init_seed = 0;
};

ObjectiveBlock parse_objective(const Section& s, const std::filesystem::path& base_dir) {
  s.allow_only({"kind", "dim", "noise", "dataset", "synthetic", "spectrum", "hidden", "seed",
                "theta0"});
  ObjectiveBlock out;
  const auto kind = parse_objective_kind(s.string("kind"));
  if (!kind) {
    throw ConfigError(s.child("kind"),
                      "expected quadratic, rosenbrock, logistic, mlp or rayleigh_sphere");
  }
  const std::uint64_t seed = as_seed(s.integer("seed", 0), s.child("seed"));
  out.init_seed = seed;
  auto dim_of = [&] {
    const auto d = s.integer("dim");
    if (d < 1) throw ConfigError(s.child("dim"), "must be >= 1");
    return static_cast<Index>(d);
  };
  auto spectrum = [&]() -> std::pair<double, double> {
    if (!s.has("spectrum")) return {1.0, 10.0};
    const Vector v = s.vector("spectrum");
    if (v.size() != 2 || !(v[0] > 0.0) || !(v[1] >= v[0])) {
      throw ConfigError(s.child("spectrum"), "expected [lo, hi] with 0 < lo <= hi");
    }
    return {v[0], v[1]};
  };

  switch (*kind) {
    case ObjectiveKind::kQuadratic: {
      const auto [lo, hi] = spectrum();
      QuadraticSpec spec = QuadraticSpec::random(dim_of(), lo, hi, seed);
      out.mu_pl = spec.lambda_min();
      out.handle.objective = make_quadratic_objective(std::move(spec));
      break;
    }
    case ObjectiveKind::kRosenbrock:
      out.handle.objective = make_rosenbrock_objective(dim_of());
      break;
    case ObjectiveKind::kLogistic:
      out.handle.objective = make_logistic_objective(parse_dataset(s, base_dir));
      break;
    case ObjectiveKind::kMlp: {
      Dataset data = parse_dataset(s, base_dir);
      const auto hidden = s.integer("hidden", 16);
      if (hidden < 1) throw ConfigError(s.child("hidden"), "must be >= 1");
      const MlpArch arch{data.n_cols(), hidden, std::max<Index>(2, data.num_classes())};
      out.handle.objective = make_mlp_objective(std::move(data), arch);
      break;
    }
    case ObjectiveKind::kRayleighSphere: {
      const auto [lo, hi] = spectrum();
      out.handle.objective = make_rayleigh_objective(random_spd(dim_of(), lo, hi, seed));
      break;
    }
  }
  if (s.has("noise")) out.handle.noise = parse_noise(s.section("noise"));
  if (s.has("dim") && s.integer("dim") != out.handle.dim()) {
    throw ConfigError(s.child("dim"), "does not match the objective's dimension " +
                                          std::to_string(out.handle.dim()));
  }
  if (s.has("theta0")) {
    const Vector t = s.vector("theta0");
    if (t.size() != out.handle.dim()) {
      throw ConfigError(s.child("theta0"), "has the wrong dimension");
    }
    try {
      out.theta0 = out.handle.manifold() == Manifold::kSphere ? Point::sphere(t)
                                                             : Point::euclidean(t);
    } catch (const PreconditionError& e) {
      throw ConfigError(s.child("theta0"), e.what());
    }
  }
  return out;
}

Schedule parse_schedule(const Section& s) {
  s.allow_only({"kind", "peak", "total_steps", "warmup_steps", "floor"});
  const auto kind = parse_schedule_kind(s.string("kind"));
  if (!kind) throw ConfigError(s.child("kind"), "expected constant or cosine_with_warmup");
  return {*kind, s.number("peak"), s.integer("total_steps", 0), s.integer("warmup_steps", 0),
          s.number("floor", 0.0)};
}

Metric parse_metric(const Section& opt, MetricMode& mode) {
  const json& m = opt.raw("metric");
  if (m.is_string()) {
    const auto name = m.get<std::string>();
    if (name == "identity") return Metric::identity();
    if (name == "second_moment") {
      mode = MetricMode::kSecondMoment;
      return Metric::identity();
    }
    throw ConfigError(opt.child("metric"), "expected identity, second_moment or an object");
  }
  const Section s = opt.section("metric");
  s.allow_only({"kind", "weights"});
  if (s.string("kind") != "diagonal") throw ConfigError(s.child("kind"), "expected diagonal");
  try {
    return Metric::diagonal(s.vector("weights"));
  } catch (const PreconditionError& e) {
    throw ConfigError(s.child("weights"), e.what());
  }
}

RLOConfig parse_optimizer(const Section& s, Manifold manifold) {
  s.allow_only({"preset", "hyper", "field", "h", "eta", "metric", "h_schedule",
                "eta_schedule", "weight_decay"});
  RLOConfig cfg;
  if (s.has("preset") == s.has("field")) {
    throw ConfigError(s.child("preset"), "give exactly one of preset or field");
  }
  if (s.has("preset")) {
    if (s.has("h") || s.has("eta")) {
      throw ConfigError(s.child("h"), "preset step sizes belong in hyper");
    }
    std::map<std::string, double> hyper;
    if (s.has("hyper")) {
      const json& h = s.raw("hyper");
      if (!h.is_object()) throw ConfigError(s.child("hyper"), "expected an object");
      for (const auto& [key, value] : h.items()) {
        if (value.is_boolean()) {
          hyper[key] = value.get<bool>() ? 1.0 : 0.0;
        } else if (value.is_number()) {
          hyper[key] = value.get<double>();
        } else {
          throw ConfigError(s.child("hyper") + "." + key, "expected a number");
        }
      }
    }
    try {
      cfg = make_preset(s.string("preset"), hyper);
    } catch (const ConfigError& e) {
      const std::string where = e.field() == "preset" ? s.child("preset")
                                                      : s.child("hyper") + "." + e.field();
      throw ConfigError(where, e.what());
    }
  } else {
    const Section f = s.section("field");
    f.allow_only({"phi", "gamma", "lambda_b", "beta1", "beta2", "beta3", "epsilon",
                  "global_normalize"});
    const auto phi = parse_phi_kind(f.string("phi"));
    if (!phi) throw ConfigError(f.child("phi"), "unknown field kind");
    FieldSpec& fs = cfg.field;
    fs.phi = *phi;
    fs.gamma = f.number("gamma", fs.gamma);
    fs.lambda_b = f.number("lambda_b", fs.lambda_b);
    fs.beta1 = f.number("beta1", fs.beta1);
    fs.beta2 = f.number("beta2", fs.beta2);
    fs.beta3 = f.number("beta3", fs.beta3);
    fs.epsilon = f.number("epsilon", fs.epsilon);
    fs.global_normalize = f.boolean("global_normalize", fs.global_normalize);
    if (!s.has("h_schedule")) cfg.h_schedule = Schedule::constant(s.number("h"));
    if (!s.has("eta_schedule")) cfg.eta_schedule = Schedule::constant(s.number("eta", 1.0));
    if (s.has("metric")) cfg.metric = parse_metric(s, cfg.metric_mode);
  }
  if (s.has("h_schedule")) cfg.h_schedule = parse_schedule(s.section("h_schedule"));
  if (s.has("eta_schedule")) cfg.eta_schedule = parse_schedule(s.section("eta_schedule"));
  if (s.has("weight_decay")) cfg.weight_decay = s.number("weight_decay");
  cfg.manifold = manifold;
  try {
    cfg.validate();
  } catch (const ConfigError& e) {
    throw ConfigError(s.child(e.field()), e.what());
  }
  return cfg;
}

DiagnosticsOptions parse_diagnostics(const Section& s) {
  s.allow_only({"alpha", "f_star", "certificates", "mu_pl"});
  DiagnosticsOptions d;
  if (s.has("alpha")) {
    const json& a = s.raw("alpha");
    if (a.is_string() && a.get<std::string>() == "auto") {
      d.alpha.reset();
    } else if (a.is_number() && a.get<double>() > 0.0) {
      d.alpha = a.get<double>();
    } else {
      throw ConfigError(s.child("alpha"), "expected a positive number or \"auto\"");
    }
  }
  if (s.has("f_star")) {
    const json& f = s.raw("f_star");
    if (f.is_number()) {
      d.f_star_mode = FStarMode::kValue;
      d.f_star_value = f.get<double>();
    } else if (f.is_string() && f.get<std::string>() == "auto") {
      d.f_star_mode = FStarMode::kAuto;
    } else if (f.is_string() && f.get<std::string>() == "running_min") {
      d.f_star_mode = FStarMode::kRunningMin;
    } else {
      throw ConfigError(s.child("f_star"), "expected a number, \"auto\" or \"running_min\"");
    }
  }
  d.certificates = s.boolean("certificates", true);
  if (s.has("mu_pl")) {
    d.mu_pl = s.number("mu_pl");
    if (!(*d.mu_pl > 0.0)) throw ConfigError(s.child("mu_pl"), "must be > 0");
  }
  return d;
}

}  // namespace

nlohmann::json read_json(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::ios_base::failure("cannot read " + path.string());
  std::stringstream buf;
  buf << in.rdbuf();
  try {
    return json::parse(buf.str());
  } catch (const json::parse_error& e) {
    throw ConfigError(path.filename().string(), std::string("malformed JSON: ") + e.what());
  }
}

Experiment build_experiment(const json& doc, const std::filesystem::path& base_dir,
                            std::optional<std::uint64_t> seed_override) {
  const Section root(doc, "");
  root.allow_only({"label", "objective", "optimizer", "run", "diagnostics"});

  Experiment ex{.label = root.has("label") ? root.string("label") : "run",
                .objective = {},
                .theta0 = Point::euclidean(Vector::Zero(1))};
  ObjectiveBlock ob;
  try {
    ob = parse_objective(root.section("objective"), base_dir);
  } catch (const PreconditionError& e) {
    throw ConfigError("objective", e.what());
  }
  ex.objective = ob.handle;
  ex.analytic_mu_pl = ob.mu_pl;
  ex.optimizer = parse_optimizer(root.section("optimizer"), ex.objective.manifold());

  const Section run = root.section("run");
  run.allow_only({"steps", "seed", "log_every"});
  ex.steps = run.integer("steps");
  if (ex.steps < 0) throw ConfigError(run.child("steps"), "must be >= 0");
  ex.log_every = run.integer("log_every", 1);
  if (ex.log_every < 1) throw ConfigError(run.child("log_every"), "must be >= 1");
  ex.optimizer.seed = seed_override ? *seed_override
                                    : as_seed(run.integer("seed", 0), run.child("seed"));
  ex.objective.noise.rng_seed = ex.optimizer.seed;

  if (root.has("diagnostics")) ex.diagnostics = parse_diagnostics(root.section("diagnostics"));

  try {
    ex.objective.validate();
  } catch (const ConfigError& e) {
    throw ConfigError("objective." + e.field(), e.what());
  }
  for (const Schedule* s : {&ex.optimizer.h_schedule, &ex.optimizer.eta_schedule}) {
    const auto last = s->last_step();
    if (last && *last < ex.steps - 1) {
      throw ConfigError(s == &ex.optimizer.h_schedule ? "optimizer.h_schedule.total_steps"
                                                      : "optimizer.eta_schedule.total_steps",
                        "schedule is shorter than run.steps");
    }
  }
  ex.theta0 = ob.theta0 ? *ob.theta0 : default_initial_point(ex.objective, ob.init_seed);
  return ex;
}

}  // namespace rlo::cli
