#include "rlo_cli/checks.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <fstream>
#include <functional>
#include <iterator>
#include <sstream>
#include <stdexcept>

#include "rlo/counter_rng.hpp"
#include "rlo/diagnostics.hpp"
#include "rlo/engine.hpp"
#include "rlo/reference_optimizers.hpp"
#include "rlo_cli/commands.hpp"

namespace rlo::cli {
namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

std::string fmt(double x) {
  std::ostringstream s;
  s.precision(4);
  s << x;
  return s.str();
}

ObjectiveHandle quadratic_handle(Index dim, std::uint64_t seed, NoiseModel noise = {}) {
  return {make_quadratic_objective(QuadraticSpec::random(dim, 1.0, 10.0, seed)), noise};
}

std::vector<DiagnosticsRecord> collect(const RLOConfig& cfg, const ObjectiveHandle& obj,
                                       const Point& theta0, std::int64_t steps,
                                       const RunOptions& opt = {}) {
  RecordCollector sink;
  run_trajectory(cfg, obj, theta0, steps, &sink, opt);
  return sink.take();
}

double tail_mean(const std::vector<DiagnosticsRecord>& recs,
                 double DiagnosticsRecord::*field) {
  const std::size_t start = recs.size() - recs.size() / 4;
  double acc = 0.0;
  for (std::size_t i = start; i < recs.size(); ++i) acc += recs[i].*field;
  return acc / static_cast<double>(recs.size() - start);
}

}  // namespace

CheckResult check_optimizer_recovery() {
  const auto t0 = Clock::now();
  const auto spec = QuadraticSpec::random(10, 1.0, 10.0, 21);
  const ObjectiveHandle obj{make_quadratic_objective(spec), {}};
  const Point theta0 = default_initial_point(obj, 4);
  constexpr std::int64_t kSteps = 100;

  const reference::GradientFn grad = [&](const reference::Params& t, std::int64_t) {
    const Vector g = obj.objective->evaluate(Eigen::Map<const Vector>(t.data(), 10)).grad;
    return reference::Params(g.data(), g.data() + g.size());
  };

  struct Case {
    const char* preset;
    std::map<std::string, double> hyper;
    const char* oracle;
    reference::Hyper ref;
  };
  const std::vector<Case> cases = {
      {"sgd", {{"h", 0.05}}, "sgd", {.lr = 0.05}},
      {"momentum", {{"h", 0.5}, {"eta", 0.1}}, "heavyball", {.lr = 0.05, .momentum = 0.9}},
      {"lion",
       {{"h", 0.01}, {"wd", 0.1}},
       "lion",
       {.lr = 0.01, .beta1 = 0.9, .beta2 = 0.99, .weight_decay = 0.1}},
      {"adamw",
       {{"h", 0.01}, {"wd", 0.01}},
       "adam_nobc",
       {.lr = 0.01, .beta1 = 0.9, .beta2 = 0.999, .eps = 1e-8, .weight_decay = 0.01}},
  };

  double worst = 0.0;
  std::string detail;
  for (const auto& c : cases) {
    const RLOConfig cfg = make_preset(c.preset, c.hyper);
    ExtendedState st = ExtendedState::initial(theta0, cfg);
    const auto ref = reference::reference_oracle(
        c.oracle, c.ref, grad,
        reference::Params(theta0.coords().data(), theta0.coords().data() + 10), kSteps);
    double err = 0.0;
    for (std::int64_t k = 0; k < kSteps; ++k) {
      st = rlo_step(st, sample_gradient(obj, st.theta, k), cfg).state;
      const auto& r = ref[static_cast<std::size_t>(k) + 1];
      for (Index i = 0; i < 10; ++i) {
        const double b = r[static_cast<std::size_t>(i)];
        err = std::max(err, std::abs(st.theta.coords()[i] - b) / std::max(std::abs(b), 1e-300));
      }
    }
    worst = std::max(worst, err);
    detail += std::string(c.preset) + "=" + fmt(err) + " ";
  }
  const double secs = seconds_since(t0);
  return {"optimizer_recovery", worst <= 1e-12 && secs < 1.0,
          "max relative error " + detail + "(" + fmt(secs) + " s)"};
}

CheckResult check_frozen_field_contraction() {
  // The frozen field sits far below the residual's magnitude so that the
  // contraction stays resolvable in double precision over 50 steps.
  const CounterRng rng(2024);
  constexpr Index kDim = 5;
  Vector d(kDim), v0(kDim), th(kDim);
  for (Index i = 0; i < kDim; ++i) {
    d[i] = 1e-60 * rng.normal(0, static_cast<std::uint64_t>(i));
    v0[i] = rng.normal(1, static_cast<std::uint64_t>(i));
    th[i] = rng.normal(2, static_cast<std::uint64_t>(i));
  }
  double worst = 0.0;
  for (double eta : {0.1, 0.5, 0.9}) {
    Point theta = Point::euclidean(th);
    Tangent v(theta, v0);
    for (int k = 0; k < 50; ++k) {
      const double z_before = (v.coords() - d).norm();
      DynamicPhase dp = dynamic_phase(theta, v, d, 0.1, eta);
      theta = dp.theta;
      v = dp.v;
      const double ratio = (v.coords() - d).norm() / z_before;
      worst = std::max(worst, std::abs(ratio - (1.0 - eta)));
    }
  }
  return {"frozen_field_contraction", worst <= 1e-12,
          "max |ratio - (1 - eta)| = " + fmt(worst) + " over eta in {0.1, 0.5, 0.9}, 50 steps"};
}

CheckResult check_stochastic_residual_inequality() {
  const ObjectiveHandle obj = quadratic_handle(10, 31, {NoiseKind::kGaussian, 0.05, 0, 0});
  const Point theta0 = default_initial_point(obj, 8);
  constexpr double kEta = 0.5;

  std::vector<FieldSpec> fields;
  for (PhiKind kind : {PhiKind::kRawGradient, PhiKind::kMomentum, PhiKind::kSign,
                       PhiKind::kSignBelief, PhiKind::kTanh, PhiKind::kTanhAdaptive}) {
    FieldSpec f;
    f.phi = kind;
    if (kind == PhiKind::kSignBelief || kind == PhiKind::kTanh) f.lambda_b = 0.2;
    if (kind == PhiKind::kTanh || kind == PhiKind::kTanhAdaptive) f.global_normalize = true;
    fields.push_back(f);
  }

  std::size_t violations = 0, total = 0;
  double worst = -std::numeric_limits<double>::infinity();
  for (const auto& f : fields) {
    RLOConfig cfg;
    cfg.field = f;
    cfg.h_schedule = Schedule::constant(0.01);
    cfg.eta_schedule = Schedule::constant(kEta);
    cfg.seed = 5;
    for (const auto& r : collect(cfg, obj, theta0, 1000)) {
      const double lhs = r.z_next_norm * r.z_next_norm;
      const double rhs = (1.0 - r.eta) * r.z_norm * r.z_norm +
                         r.delta_norm * r.delta_norm / r.eta + 1e-9;
      worst = std::max(worst, lhs - rhs);
      if (lhs > rhs) ++violations;
      ++total;
    }
  }
  return {"stochastic_residual_inequality", violations == 0 && total == 6000,
          std::to_string(violations) + " violations in " + std::to_string(total) +
              " steps (6 field kinds, sigma 0.05); max lhs - rhs = " + fmt(worst)};
}

CheckResult check_lyapunov_descent() {
  const auto t0 = Clock::now();
  const auto spec = QuadraticSpec::random(10, 1.0, 10.0, 7);
  const ObjectiveHandle obj{make_quadratic_objective(spec), {}};
  const double h = 0.05 / spec.lambda_max();
  const RLOConfig cfg = make_preset("rlo_lifted", {{"h", h}});
  const double eta = schedule_value(cfg.eta_schedule, 0);
  // The run covers the descent phase, where the field stays aligned with the
  // gradient (mu_phi > 0); see README for what happens past it.
  const auto recs = collect(cfg, obj, default_initial_point(obj, 3), 250);

  LyapunovParams p;
  p.mu_phi = estimate_mu_phi(recs);
  p.alpha = 2.0 * min_admissible_alpha(h, eta, p.mu_phi);
  p.f_star = 0.0;
  const auto rep = check_descent_inequality(recs, p);

  std::size_t rises = 0;
  for (const auto& r : recs) {
    if (r.k < 10) continue;
    const double now = lyapunov_value(r.f_val, p, r.z_norm, r.h);
    const double next = lyapunov_value(r.f_next, p, r.z_next_norm, r.h_next);
    if (next > now + 1e-10) ++rises;
  }
  const double secs = seconds_since(t0);
  const bool ok = rep.fraction == 1.0 && rep.admissible && rises == 0 && p.mu_phi > 1e-6 &&
                  secs < 5.0;
  return {"lyapunov_descent_certificate", ok,
          "fraction " + fmt(rep.fraction) + ", worst slack " + fmt(rep.worst_slack) +
              ", mu_phi " + fmt(p.mu_phi) + ", alpha " + fmt(p.alpha) + ", V rises after k=10: " +
              std::to_string(rises) + ", f " + fmt(recs.front().f_val) + " -> " +
              fmt(recs.back().f_next) + " (" + fmt(secs) + " s)"};
}

CheckResult check_certificate_soundness() {
  LyapunovParams p;
  p.alpha = 0.5;
  DiagnosticsRecord still;
  still.h = still.h_next = 0.1;
  still.eta = 1.0;
  const auto calm = check_descent_inequality(std::span(&still, 1), p);

  DiagnosticsRecord bad = still;
  bad.f_val = bad.f_next = 1.0;
  bad.z_next_norm = 1e3;
  const auto flagged = check_descent_inequality(std::span(&bad, 1), p);
  return {"certificate_soundness", calm.holds() && !flagged.holds(),
          "stationary record holds: " + std::string(calm.holds() ? "yes" : "no") +
              ", injected violation flagged: " + std::string(flagged.holds() ? "no" : "yes")};
}

CheckResult check_uub_floor_scaling() {
  const auto t0 = Clock::now();
  constexpr double kH = 0.1;
  const auto spec = QuadraticSpec::random(10, 1.0, 10.0, 41);
  LyapunovParams p;
  p.mu_phi = 1.0;
  p.alpha = 2.0 * min_admissible_alpha(kH, 1.0, p.mu_phi);
  p.mu_pl = pl_constant(spec);
  const RLOConfig cfg = make_preset("sgd", {{"h", kH}});

  std::vector<double> xs, ys;
  bool all_below = true;
  std::string detail;
  for (double sigma : {0.01, 0.02, 0.04, 0.08}) {
    const ObjectiveHandle obj{make_quadratic_objective(spec),
                              {NoiseKind::kGaussian, sigma, 0, 0}};
    const auto recs = collect(cfg, obj, default_initial_point(obj, 2), 4000, {p.alpha, 0.0});
    const std::span<const DiagnosticsRecord> tail(recs.data() + recs.size() * 3 / 4,
                                                  recs.size() / 4);
    const auto rep = uub_floor(tail, p, kH, 1.0);
    double mean_v = 0.0;
    for (const auto& r : tail) mean_v += lyapunov_value(r.f_val, p, r.z_norm, r.h);
    mean_v /= static_cast<double>(tail.size());
    all_below = all_below && rep.satisfied;
    xs.push_back(std::log(sigma));
    ys.push_back(std::log(mean_v));
    detail += "sigma " + fmt(sigma) + ": max V " + fmt(rep.max_tail_V) + " <= floor " +
              fmt(rep.floor) + "; ";
  }
  const double mx = (xs[0] + xs[1] + xs[2] + xs[3]) / 4.0;
  const double my = (ys[0] + ys[1] + ys[2] + ys[3]) / 4.0;
  double sxy = 0.0, sxx = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    sxy += (xs[i] - mx) * (ys[i] - my);
    sxx += (xs[i] - mx) * (xs[i] - mx);
  }
  const double slope = sxy / sxx;
  const double secs = seconds_since(t0);
  return {"uub_noise_floor", all_below && std::abs(slope - 2.0) <= 0.3 && secs < 30.0,
          detail + "log-log slope " + fmt(slope) + " (" + fmt(secs) + " s)"};
}

CheckResult check_eta_thickness() {
  const auto t0 = Clock::now();
  const ObjectiveHandle obj{make_mlp_objective(make_two_gaussians(200, 2, 3.0, 11), {2, 16, 2}),
                            {NoiseKind::kMinibatch, 0.0, 128, 0}};
  const Point theta0 = default_initial_point(obj, 16);
  std::vector<double> thick;
  std::string detail;
  for (double eta : {0.1, 0.3, 0.5, 0.7, 0.9}) {
    RLOConfig cfg = make_preset("rlo_lifted", {{"h", 0.01},
                                               {"eta", eta},
                                               {"lambda_b", 0.0},
                                               {"global_normalize", 0.0},
                                               {"beta1", 0.99}});
    cfg.seed = 11;
    thick.push_back(tail_mean(collect(cfg, obj, theta0, 300), &DiagnosticsRecord::z_norm));
    detail += "eta " + fmt(eta) + ": " + fmt(thick.back()) + "; ";
  }
  bool decreasing = true;
  for (std::size_t i = 1; i < thick.size(); ++i) decreasing = decreasing && thick[i] < thick[i - 1];
  const double ratio = thick.front() / thick.back();
  const double secs = seconds_since(t0);
  return {"eta_thickness", decreasing && ratio >= 5.0 && ratio <= 15.0 && secs < 120.0,
          detail + "ratio " + fmt(ratio) + " (" + fmt(secs) + " s)"};
}

CheckResult check_smoothness_asymmetry() {
  const ObjectiveHandle obj{make_mlp_objective(make_two_gaussians(200, 2, 3.0, 1), {2, 16, 2}),
                            {NoiseKind::kMinibatch, 0.0, 32, 0}};
  const Point theta0 = default_initial_point(obj, 6);
  double sd[2] = {0.0, 0.0};
  int i = 0;
  for (PhiKind kind : {PhiKind::kSign, PhiKind::kTanh}) {
    RLOConfig cfg;
    cfg.field.phi = kind;
    cfg.h_schedule = Schedule::constant(0.01);
    cfg.seed = 1;
    const auto recs = collect(cfg, obj, theta0, 1000);
    double m = 0.0, q = 0.0;
    const std::size_t start = recs.size() / 2;
    for (std::size_t k = start; k < recs.size(); ++k) m += recs[k].f_val;
    m /= static_cast<double>(recs.size() - start);
    for (std::size_t k = start; k < recs.size(); ++k) q += std::pow(recs[k].f_val - m, 2);
    sd[i++] = std::sqrt(q / static_cast<double>(recs.size() - start));
  }
  return {"smoothness_asymmetry", sd[0] > sd[1],
          "loss std over final half: sign " + fmt(sd[0]) + ", tanh " + fmt(sd[1])};
}

CheckResult check_global_normalization_identity() {
  const ObjectiveHandle obj = quadratic_handle(12, 61, {NoiseKind::kGaussian, 0.1, 0, 0});
  const Point theta0 = default_initial_point(obj, 1);
  const double sqrt_d = std::sqrt(12.0);
  double worst = 0.0;
  std::size_t checked = 0;
  std::vector<RLOConfig> cfgs = {
      make_preset("rlo_lambda", {{"h", 0.01}}),
      make_preset("rlo_lifted", {{"h", 0.01}, {"lambda_b", 0.0}}),
      make_preset("lion", {{"h", 0.01}, {"global_normalize", 1.0}}),
  };
  for (auto& cfg : cfgs) {
    cfg.seed = 3;
    ExtendedState st = ExtendedState::initial(theta0, cfg);
    for (std::int64_t k = 0; k < 300; ++k) {
      auto res = rlo_step(st, sample_gradient(obj, st.theta, k), cfg);
      const double pre = res.trace.d_pre.norm();
      const double want = sqrt_d * pre / (pre + cfg.field.epsilon);
      worst = std::max(worst, std::abs(res.trace.d.norm() - want));
      ++checked;
      st = std::move(res.state);
    }
  }
  return {"global_normalization_identity", worst <= 1e-12,
          "max | ||d|| - sqrt(D) ||d_pre|| / (||d_pre|| + eps) | = " + fmt(worst) + " over " +
              std::to_string(checked) + " directions"};
}

CheckResult check_preconditioned_equivalence() {
  const CounterRng rng(77);
  constexpr Index kDim = 6;
  double worst = 0.0;
  for (std::uint64_t t = 0; t < 100; ++t) {
    Vector a(kDim), g(kDim), th(kDim);
    for (Index i = 0; i < kDim; ++i) {
      const auto c = static_cast<std::uint64_t>(i);
      a[i] = std::exp(4.0 * rng.uniform(3 * t, c) - 2.0);
      g[i] = rng.normal(3 * t + 1, c);
      th[i] = rng.normal(3 * t + 2, c);
    }
    const double h = 0.01 + rng.uniform(1000 + t, 0);
    const Vector direct = th - h * (a.array() * g.array()).matrix();
    const Point p = Point::euclidean(th);
    const Metric metric = Metric::diagonal(a.cwiseInverse());
    const Tangent rg = riemannian_gradient(metric, Tangent(p, g));
    const Point stepped = retract(p, Tangent(p, -h * rg.coords()));
    worst = std::max(worst, (stepped.coords() - direct).cwiseAbs().maxCoeff() /
                                std::max(1.0, direct.cwiseAbs().maxCoeff()));
  }
  return {"preconditioned_equivalence", worst <= 1e-12,
          "max scaled difference " + fmt(worst) + " over 100 random (A, grad f, h)"};
}

CheckResult check_sphere_rayleigh() {
  double worst_gap = 0.0, worst_norm = 0.0;
  for (std::uint64_t i = 0; i < 10; ++i) {
    const Matrix A = random_spd(5, 1.0, 10.0, 100 + i);
    const ObjectiveHandle obj{make_rayleigh_objective(A), {}};
    const double lmax = Eigen::SelfAdjointEigenSolver<Matrix>(A).eigenvalues().maxCoeff();
    RLOConfig cfg = make_preset("sgd", {{"h", 0.5 / lmax}});
    cfg.manifold = Manifold::kSphere;
    ExtendedState st = ExtendedState::initial(default_initial_point(obj, i), cfg);
    for (std::int64_t k = 0; k < 20000; ++k) {
      st = rlo_step(st, sample_gradient(obj, st.theta, k), cfg).state;
      worst_norm = std::max(worst_norm, std::abs(st.theta.coords().norm() - 1.0));
    }
    const double f = obj.objective->evaluate(st.theta.coords()).f;
    worst_gap = std::max(worst_gap, f - *obj.f_star());
  }
  return {"sphere_rayleigh", worst_gap <= 1e-8 && worst_norm <= 1e-12,
          "max f - lambda_min " + fmt(worst_gap) + ", max | ||theta|| - 1 | " + fmt(worst_norm) +
              " over 10 matrices"};
}

CheckResult check_gradient_integrity() {
  constexpr double kStep = 1e-6;
  constexpr int kPoints = 20;
  const CounterRng rng(909);
  std::string detail;
  bool ok = true;

  auto fd_check = [&](const std::string& name, Index dim, double scale,
                      const std::function<Evaluation(const Vector&)>& eval, std::uint64_t stream) {
    double worst = 0.0;
    for (int p = 0; p < kPoints; ++p) {
      Vector x(dim);
      for (Index i = 0; i < dim; ++i) {
        x[i] = scale * rng.normal(stream * 100 + static_cast<std::uint64_t>(p),
                                  static_cast<std::uint64_t>(i));
      }
      const Vector g = eval(x).grad;
      Vector fd(dim);
      for (Index i = 0; i < dim; ++i) {
        Vector xp = x, xm = x;
        xp[i] += kStep;
        xm[i] -= kStep;
        fd[i] = (eval(xp).f - eval(xm).f) / (2.0 * kStep);
      }
      worst = std::max(worst, (fd - g).norm() / std::max(g.norm(), 1e-8));
    }
    ok = ok && worst <= 1e-5;
    detail += name + " " + fmt(worst) + "; ";
  };

  const auto quad = QuadraticSpec::random(6, 1.0, 10.0, 51);
  fd_check("quadratic", 6, 2.0, [&](const Vector& x) { return quadratic_eval(quad, x); }, 1);
  fd_check("rosenbrock", 4, 1.0, [](const Vector& x) { return rosenbrock_eval(x); }, 2);
  const Dataset logi = make_two_gaussians(30, 3, 2.0, 3);
  fd_check("logistic", 3, 1.0, [&](const Vector& x) { return logistic_eval(logi, x); }, 3);
  const Dataset mlp_data = make_two_gaussians(20, 3, 2.0, 4);
  const MlpArch arch{3, 5, 2};
  fd_check("mlp", arch.num_weights(), 0.7,
           [&](const Vector& w) { return mlp_eval(w, mlp_data, arch); }, 4);

  // Sphere: derivatives along retraction curves in projected coordinate directions.
  const Matrix A = random_spd(5, 1.0, 10.0, 9);
  double worst = 0.0;
  for (int p = 0; p < kPoints; ++p) {
    Vector x(5);
    for (Index i = 0; i < 5; ++i) x[i] = rng.normal(500 + static_cast<std::uint64_t>(p), static_cast<std::uint64_t>(i));
    const Point theta = Point::sphere_normalized(x);
    const auto ev = rayleigh_eval(A, theta);
    Vector fd(5);
    for (Index i = 0; i < 5; ++i) {
      const Tangent xi = Tangent::project(theta, Vector::Unit(5, i));
      const Point up = retract(theta, Tangent(theta, kStep * xi.coords()));
      const Point dn = retract(theta, Tangent(theta, -kStep * xi.coords()));
      fd[i] = (rayleigh_eval(A, up).f - rayleigh_eval(A, dn).f) / (2.0 * kStep);
    }
    worst = std::max(worst, (fd - ev.rgrad.coords()).norm() /
                                std::max(ev.rgrad.coords().norm(), 1e-8));
  }
  ok = ok && worst <= 1e-5;
  detail += "rayleigh " + fmt(worst);
  return {"gradient_integrity", ok, "max relative FD error: " + detail};
}

CheckResult check_trace_determinism(const std::filesystem::path& scratch) {
  std::filesystem::create_directories(scratch);
  const auto config = scratch / "determinism.json";
  {
    std::ofstream f(config);
    f << R"({
  "objective": {"kind": "mlp", "synthetic": {"rows_per_class": 100, "dim": 2, "seed": 3},
                "hidden": 16, "noise": {"kind": "minibatch", "batch_size": 32}, "seed": 9},
  "optimizer": {"preset": "rlo_lifted", "hyper": {"h": 0.01}},
  "run": {"steps": 200, "seed": 17}
})";
  }
  auto slurp = [](const std::filesystem::path& p) {
    std::ifstream in(p, std::ios::binary);
    return std::string(std::istreambuf_iterator<char>(in), {});
  };
  std::ostringstream sink;
  const int a = cmd_run(config, {scratch / "a", std::nullopt, true}, sink, sink);
  const int b = cmd_run(config, {scratch / "b", std::nullopt, true}, sink, sink);
  const std::string ta = slurp(scratch / "a" / "trace.csv");
  const std::string tb = slurp(scratch / "b" / "trace.csv");
  const auto rows = std::count(ta.begin(), ta.end(), '\n');
  const bool ok = a == 0 && b == 0 && !ta.empty() && ta == tb && rows == 201;
  return {"trace_determinism", ok,
          "exit codes " + std::to_string(a) + "/" + std::to_string(b) + ", " +
              std::to_string(ta.size()) + " bytes, " + std::to_string(rows) + " lines, " +
              (ta == tb ? "identical" : "different")};
}

const std::vector<std::string>& suite_names() {
  static const std::vector<std::string> names = {"equivalence", "lyapunov", "contraction",
                                                 "gradients", "uub"};
  return names;
}

std::vector<CheckResult> run_suite(std::string_view suite) {
  if (suite == "equivalence") {
    return {check_optimizer_recovery(), check_preconditioned_equivalence(),
            check_global_normalization_identity()};
  }
  if (suite == "lyapunov") {
    return {check_lyapunov_descent(), check_certificate_soundness(), check_sphere_rayleigh()};
  }
  if (suite == "contraction") {
    return {check_frozen_field_contraction(), check_stochastic_residual_inequality()};
  }
  if (suite == "gradients") return {check_gradient_integrity()};
  if (suite == "uub") return {check_uub_floor_scaling()};
  throw std::invalid_argument("unknown suite '" + std::string(suite) + "'");
}

}  // namespace rlo::cli
