#pragma once

#include <cstdint>
#include <functional>
#include <string_view>
#include <vector>

namespace rlo::reference {

/// Textbook optimizer loops over plain std::vector, kept free of any engine
/// code so they can serve as independent oracles.
using Params = std::vector<double>;
/// Stochastic gradient at (theta, step).
using GradientFn = std::function<Params(const Params& theta, std::int64_t k)>;

struct Hyper {
  double lr = 0.1;
  /// Heavy-ball coefficient.
  double momentum = 0.9;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
  double weight_decay = 0.0;
};

/// Runs `steps` iterations of `name` (sgd, heavyball, adam_nobc, lion) and
/// returns theta_0 .. theta_steps.
///
///   sgd        theta -= lr g
///   heavyball  u = momentum u + g;  theta -= lr u
///   adam_nobc  m = b1 m + (1-b1) g;  s = b2 s + (1-b2) g^2;
///              theta -= lr m / (sqrt(s) + eps)
///   lion       theta -= lr sign(b1 m + (1-b1) g);  m = b2 m + (1-b2) g
///
/// Weight decay is decoupled: theta *= (1 - lr wd) before the update.
/// Throws PreconditionError on an unknown name.
std::vector<Params> reference_oracle(std::string_view name, const Hyper& hyper,
                                     const GradientFn& grad, Params theta0,
                                     std::int64_t steps);

}  // namespace rlo::reference
