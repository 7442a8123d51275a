#pragma once

#include <Eigen/Core>

#include <cstdint>
#include <memory>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include "rlo/dataset.hpp"
#include "rlo/geometry.hpp"

namespace rlo {

using Matrix = Eigen::MatrixXd;

struct Evaluation {
  double f = 0.0;
  Vector grad;
};

/// f(theta) = 1/2 (theta - theta*)^T A (theta - theta*), so f* = 0.
struct QuadraticSpec {
  Matrix A;
  Vector theta_star;
  double f_star = 0.0;

  /// Throws PreconditionError unless A is symmetric (1e-12) and positive definite.
  void validate() const;
  double lambda_min() const;
  double lambda_max() const;

  /// A = Q diag(lambda) Q^T with lambda evenly spaced over [lo, hi] and Q a
  /// seeded random rotation; theta* is a seeded standard normal draw.
  static QuadraticSpec random(Index dim, double lo, double hi, std::uint64_t seed);
};

Evaluation quadratic_eval(const QuadraticSpec& spec, const Vector& theta);

/// Chained Rosenbrock, sum_i 100 (theta_{i+1} - theta_i^2)^2 + (1 - theta_i)^2.
Evaluation rosenbrock_eval(const Vector& theta);

/// Mean sigmoid cross-entropy over the selected rows (all rows when empty).
/// Labels must be 0 or 1.
Evaluation logistic_eval(const Dataset& data, const Vector& theta,
                         std::span<const Index> rows = {});

/// One hidden tanh layer followed by softmax cross-entropy.
///
/// Flat weight layout: W1 (hidden x in, row-major), b1 (hidden),
/// W2 (out x hidden, row-major), b2 (out).
struct MlpArch {
  Index in = 0;
  Index hidden = 0;
  Index out = 0;

  Index num_weights() const { return hidden * in + hidden + out * hidden + out; }
};

Evaluation mlp_eval(const Vector& weights, const Dataset& data, const MlpArch& arch,
                    std::span<const Index> rows = {});

struct RayleighEvaluation {
  double f;
  Tangent rgrad;
};

/// f = theta^T A theta on the unit sphere; rgrad = 2 (A theta - f theta).
RayleighEvaluation rayleigh_eval(const Matrix& A, const Point& theta);

enum class ObjectiveKind { kQuadratic, kRosenbrock, kLogistic, kMlp, kRayleighSphere };

std::string_view to_string(ObjectiveKind kind);
std::optional<ObjectiveKind> parse_objective_kind(std::string_view name);

enum class NoiseKind { kNone, kGaussian, kMinibatch };

std::string_view to_string(NoiseKind kind);
std::optional<NoiseKind> parse_noise_kind(std::string_view name);

/// Gradient noise. Gaussian noise is i.i.d. N(0, sigma^2) per coordinate and
/// step; minibatch noise evaluates the loss on `batch_size` rows drawn without
/// replacement per step.
struct NoiseModel {
  NoiseKind kind = NoiseKind::kNone;
  double sigma = 0.0;
  Index batch_size = 0;
  std::uint64_t rng_seed = 0;
};

/// A read-only objective with exact (full-batch) evaluation.
class Objective {
 public:
  virtual ~Objective() = default;

  virtual ObjectiveKind kind() const = 0;
  virtual Index dim() const = 0;
  virtual Manifold manifold() const { return Manifold::kEuclidean; }
  /// The optimal value when it is known analytically.
  virtual std::optional<double> f_star() const = 0;
  /// Loss and gradient at theta. For sphere objectives the gradient is the
  /// Riemannian gradient.
  virtual Evaluation evaluate(const Vector& theta) const = 0;

  /// Rows available for minibatch sampling; 0 when unsupported.
  virtual Index num_rows() const { return 0; }
  /// Loss and gradient restricted to `rows`. Only for dataset objectives.
  virtual Evaluation evaluate_rows(const Vector& theta, std::span<const Index> rows) const;
};

std::shared_ptr<const Objective> make_quadratic_objective(QuadraticSpec spec);
std::shared_ptr<const Objective> make_rosenbrock_objective(Index dim);
std::shared_ptr<const Objective> make_logistic_objective(Dataset data);
std::shared_ptr<const Objective> make_mlp_objective(Dataset data, MlpArch arch);
std::shared_ptr<const Objective> make_rayleigh_objective(Matrix A);

/// An objective paired with the noise model of its gradient oracle.
struct ObjectiveHandle {
  std::shared_ptr<const Objective> objective;
  NoiseModel noise;

  ObjectiveKind kind() const { return objective->kind(); }
  Index dim() const { return objective->dim(); }
  Manifold manifold() const { return objective->manifold(); }
  std::optional<double> f_star() const { return objective->f_star(); }

  /// Throws ConfigError on an inconsistent noise model.
  void validate() const;
};

/// Row indices for the step-k minibatch, ascending. With batch_size >= n_rows
/// every row is returned.
std::vector<Index> minibatch_rows(Index n_rows, Index batch_size, std::uint64_t seed,
                                  std::int64_t k);

/// Exact gradient plus noise. A pure function of (handle, theta, k).
Tangent sample_gradient(const ObjectiveHandle& handle, const Point& theta, std::int64_t k);

/// A deterministic starting point for the objective.
Point default_initial_point(const ObjectiveHandle& handle, std::uint64_t seed);

/// A seeded random symmetric positive definite matrix with spectrum in [lo, hi].
Matrix random_spd(Index dim, double lo, double hi, std::uint64_t seed);

}  // namespace rlo
