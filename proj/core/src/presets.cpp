#include <set>
#include <string>

#include "rlo/engine.hpp"
#include "rlo/error.hpp"

namespace rlo {
namespace {

const std::set<std::string, std::less<>> kKnownKeys = {
    "h", "eta", "beta1", "beta2", "beta3", "gamma", "lambda_b", "eps", "wd", "global_normalize"};

class HyperReader {
 public:
  explicit HyperReader(const std::map<std::string, double>& hyper) : hyper_(hyper) {
    for (const auto& [key, value] : hyper_) {
      if (!kKnownKeys.contains(key)) throw ConfigError(key, "unknown hyperparameter");
    }
  }

  double required(const std::string& key) const {
    const auto it = hyper_.find(key);
    if (it == hyper_.end()) throw ConfigError(key, "required hyperparameter is missing");
    return it->second;
  }

  double get(const std::string& key, double fallback) const {
    const auto it = hyper_.find(key);
    return it == hyper_.end() ? fallback : it->second;
  }

 private:
  const std::map<std::string, double>& hyper_;
};

}  // namespace

const std::vector<std::string>& preset_names() {
  static const std::vector<std::string> names = {"sgd",  "momentum", "adamw",     "lion",
                                                 "rlo",  "rlo_lambda", "rlo_lifted"};
  return names;
}

RLOConfig make_preset(std::string_view name, const std::map<std::string, double>& hyper) {
  const HyperReader in(hyper);
  RLOConfig cfg;
  FieldSpec& f = cfg.field;
  double eta = 1.0;

  if (name == "sgd") {
    f.phi = PhiKind::kRawGradient;
  } else if (name == "momentum") {
    f.phi = PhiKind::kRawGradient;
    eta = in.required("eta");
  } else if (name == "adamw") {
    // Non-bias-corrected Adam: c_k coincides with the Adam first moment when
    // the state EMA uses the same decay as the blend.
    f.phi = PhiKind::kMomentum;
    f.beta1 = in.get("beta1", 0.9);
    f.beta2 = in.get("beta2", f.beta1);
    f.beta3 = in.get("beta3", 0.999);
    cfg.metric_mode = MetricMode::kSecondMoment;
  } else if (name == "lion") {
    f.phi = PhiKind::kSign;
    f.beta1 = 0.9;
    f.beta2 = 0.99;
  } else if (name == "rlo") {
    f.phi = PhiKind::kSignBelief;
    f.lambda_b = 0.2;
  } else if (name == "rlo_lambda") {
    f.phi = PhiKind::kTanhAdaptive;
    f.global_normalize = true;
  } else if (name == "rlo_lifted") {
    f.phi = PhiKind::kTanh;
    f.global_normalize = true;
    f.lambda_b = 0.2;
    eta = 0.7;
  } else {
    throw ConfigError("preset", "unknown preset '" + std::string(name) + "'");
  }

  const double h = in.required("h");
  eta = in.get("eta", eta);
  f.beta1 = in.get("beta1", f.beta1);
  f.beta2 = in.get("beta2", f.beta2);
  f.beta3 = in.get("beta3", f.beta3);
  f.gamma = in.get("gamma", f.gamma);
  f.lambda_b = in.get("lambda_b", f.lambda_b);
  f.epsilon = in.get("eps", f.epsilon);
  f.global_normalize = in.get("global_normalize", f.global_normalize ? 1.0 : 0.0) != 0.0;
  cfg.weight_decay = in.get("wd", 0.0);
  cfg.h_schedule = Schedule::constant(h);
  cfg.eta_schedule = Schedule::constant(eta);
  cfg.validate();
  return cfg;
}

}  // namespace rlo
