#include "rlo/reference_optimizers.hpp"

#include <cmath>
#include <string>

#include "rlo/error.hpp"

namespace rlo::reference {
namespace {

double sign(double x) { return x > 0.0 ? 1.0 : (x < 0.0 ? -1.0 : 0.0); }

}  // namespace

std::vector<Params> reference_oracle(std::string_view name, const Hyper& hyper,
                                     const GradientFn& grad, Params theta,
                                     std::int64_t steps) {
  enum { kSgd, kHeavyBall, kAdam, kLion } rule;
  if (name == "sgd") {
    rule = kSgd;
  } else if (name == "heavyball") {
    rule = kHeavyBall;
  } else if (name == "adam_nobc") {
    rule = kAdam;
  } else if (name == "lion") {
    rule = kLion;
  } else {
    throw PreconditionError("unknown reference optimizer '" + std::string(name) + "'");
  }

  const std::size_t n = theta.size();
  Params m(n, 0.0), s(n, 0.0), u(n, 0.0);
  std::vector<Params> path{theta};
  path.reserve(static_cast<std::size_t>(steps) + 1);

  for (std::int64_t k = 0; k < steps; ++k) {
    const Params g = grad(theta, k);
    if (g.size() != n) throw DimensionMismatch("reference gradient has wrong size");
    if (hyper.weight_decay != 0.0) {
      for (double& t : theta) t *= 1.0 - hyper.lr * hyper.weight_decay;
    }
    for (std::size_t i = 0; i < n; ++i) {
      switch (rule) {
        case kSgd:
          theta[i] -= hyper.lr * g[i];
          break;
        case kHeavyBall:
          u[i] = hyper.momentum * u[i] + g[i];
          theta[i] -= hyper.lr * u[i];
          break;
        case kAdam:
          m[i] = hyper.beta1 * m[i] + (1.0 - hyper.beta1) * g[i];
          s[i] = hyper.beta2 * s[i] + (1.0 - hyper.beta2) * g[i] * g[i];
          theta[i] -= hyper.lr * m[i] / (std::sqrt(s[i]) + hyper.eps);
          break;
        case kLion: {
          const double c = hyper.beta1 * m[i] + (1.0 - hyper.beta1) * g[i];
          theta[i] -= hyper.lr * sign(c);
          m[i] = hyper.beta2 * m[i] + (1.0 - hyper.beta2) * g[i];
          break;
        }
      }
    }
    path.push_back(theta);
  }
  return path;
}

}  // namespace rlo::reference
