#include "rlo/objectives.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "rlo/counter_rng.hpp"
#include "rlo/error.hpp"

namespace rlo {
namespace {

void require_dim(Index got, Index want, const char* where) {
  if (got != want) {
    throw DimensionMismatch(std::string(where) + ": dimension " + std::to_string(got) +
                            " vs expected " + std::to_string(want));
  }
}

double softplus(double z) {
  return z > 0.0 ? z + std::log1p(std::exp(-z)) : std::log1p(std::exp(z));
}

double sigmoid(double z) {
  if (z >= 0.0) return 1.0 / (1.0 + std::exp(-z));
  const double e = std::exp(z);
  return e / (1.0 + e);
}

std::vector<Index> all_rows(Index n) {
  std::vector<Index> rows(static_cast<std::size_t>(n));
  std::iota(rows.begin(), rows.end(), Index{0});
  return rows;
}

Matrix random_rotation(Index dim, std::uint64_t seed) {
  const CounterRng rng(seed);
  Matrix G(dim, dim);
  for (Index i = 0; i < dim; ++i) {
    for (Index j = 0; j < dim; ++j) {
      G(i, j) = rng.normal(static_cast<std::uint64_t>(i), static_cast<std::uint64_t>(j));
    }
  }
  Eigen::HouseholderQR<Matrix> qr(G);
  Matrix Q = qr.householderQ();
  // Fix column signs so Q is a deterministic function of G.
  const Matrix R = qr.matrixQR().triangularView<Eigen::Upper>();
  for (Index j = 0; j < dim; ++j) {
    if (R(j, j) < 0.0) Q.col(j) *= -1.0;
  }
  return Q;
}

Matrix spd_from_spectrum(const Vector& lambda, std::uint64_t seed) {
  const Matrix Q = random_rotation(lambda.size(), seed);
  Matrix A = Q * lambda.asDiagonal() * Q.transpose();
  return 0.5 * (A + A.transpose());
}

class QuadraticObjective final : public Objective {
 public:
  explicit QuadraticObjective(QuadraticSpec spec) : spec_(std::move(spec)) {
    spec_.validate();
  }
  ObjectiveKind kind() const override { return ObjectiveKind::kQuadratic; }
  Index dim() const override { return spec_.theta_star.size(); }
  std::optional<double> f_star() const override { return spec_.f_star; }
  Evaluation evaluate(const Vector& theta) const override {
    return quadratic_eval(spec_, theta);
  }

 private:
  QuadraticSpec spec_;
};

class RosenbrockObjective final : public Objective {
 public:
  explicit RosenbrockObjective(Index dim) : dim_(dim) {
    if (dim < 2) throw PreconditionError("rosenbrock requires dim >= 2");
  }
  ObjectiveKind kind() const override { return ObjectiveKind::kRosenbrock; }
  Index dim() const override { return dim_; }
  std::optional<double> f_star() const override { return 0.0; }
  Evaluation evaluate(const Vector& theta) const override { return rosenbrock_eval(theta); }

 private:
  Index dim_;
};

class LogisticObjective final : public Objective {
 public:
  explicit LogisticObjective(Dataset data) : data_(std::move(data)) {
    data_.validate();
    for (int y : data_.labels) {
      if (y != 0 && y != 1) throw PreconditionError("logistic objective needs binary labels");
    }
  }
  ObjectiveKind kind() const override { return ObjectiveKind::kLogistic; }
  Index dim() const override { return data_.n_cols(); }
  std::optional<double> f_star() const override { return std::nullopt; }
  Evaluation evaluate(const Vector& theta) const override {
    return logistic_eval(data_, theta);
  }
  Index num_rows() const override { return data_.n_rows(); }
  Evaluation evaluate_rows(const Vector& theta, std::span<const Index> rows) const override {
    return logistic_eval(data_, theta, rows);
  }

 private:
  Dataset data_;
};

class MlpObjective final : public Objective {
 public:
  MlpObjective(Dataset data, MlpArch arch) : data_(std::move(data)), arch_(arch) {
    data_.validate();
    if (arch_.in != data_.n_cols()) {
      throw PreconditionError("mlp input width does not match dataset columns");
    }
    if (data_.num_classes() > arch_.out) {
      throw PreconditionError("mlp output width is smaller than the number of classes");
    }
  }
  ObjectiveKind kind() const override { return ObjectiveKind::kMlp; }
  Index dim() const override { return arch_.num_weights(); }
  std::optional<double> f_star() const override { return std::nullopt; }
  Evaluation evaluate(const Vector& theta) const override {
    return mlp_eval(theta, data_, arch_);
  }
  Index num_rows() const override { return data_.n_rows(); }
  Evaluation evaluate_rows(const Vector& theta, std::span<const Index> rows) const override {
    return mlp_eval(theta, data_, arch_, rows);
  }

 private:
  Dataset data_;
  MlpArch arch_;
};

class RayleighObjective final : public Objective {
 public:
  explicit RayleighObjective(Matrix A) : A_(std::move(A)) {
    if (A_.rows() != A_.cols() || A_.rows() < 1) {
      throw PreconditionError("rayleigh objective needs a square matrix");
    }
    if ((A_ - A_.transpose()).cwiseAbs().maxCoeff() > 1e-12) {
      throw PreconditionError("rayleigh objective needs a symmetric matrix");
    }
    lambda_min_ = Eigen::SelfAdjointEigenSolver<Matrix>(A_, Eigen::EigenvaluesOnly)
                      .eigenvalues()
                      .minCoeff();
  }
  ObjectiveKind kind() const override { return ObjectiveKind::kRayleighSphere; }
  Index dim() const override { return A_.rows(); }
  Manifold manifold() const override { return Manifold::kSphere; }
  std::optional<double> f_star() const override { return lambda_min_; }
  Evaluation evaluate(const Vector& theta) const override {
    if (std::abs(theta.norm() - 1.0) > 1e-10) {
      throw PreconditionError("rayleigh_eval: point is off the unit sphere");
    }
    auto r = rayleigh_eval(A_, Point::sphere_normalized(theta));
    return {r.f, r.rgrad.coords()};
  }

 private:
  Matrix A_;
  double lambda_min_ = 0.0;
};

}  // namespace

void QuadraticSpec::validate() const {
  if (A.rows() != A.cols()) throw PreconditionError("quadratic: A must be square");
  require_dim(theta_star.size(), A.rows(), "quadratic theta_star");
  if (A.rows() < 1) throw PreconditionError("quadratic: empty matrix");
  if ((A - A.transpose()).cwiseAbs().maxCoeff() > 1e-12) {
    throw PreconditionError("quadratic: A is not symmetric within 1e-12");
  }
  if (!(lambda_min() > 0.0)) {
    throw PreconditionError("quadratic: A is not positive definite");
  }
}

double QuadraticSpec::lambda_min() const {
  return Eigen::SelfAdjointEigenSolver<Matrix>(A, Eigen::EigenvaluesOnly)
      .eigenvalues()
      .minCoeff();
}

double QuadraticSpec::lambda_max() const {
  return Eigen::SelfAdjointEigenSolver<Matrix>(A, Eigen::EigenvaluesOnly)
      .eigenvalues()
      .maxCoeff();
}

QuadraticSpec QuadraticSpec::random(Index dim, double lo, double hi, std::uint64_t seed) {
  if (dim < 1 || !(lo > 0.0) || !(hi >= lo)) {
    throw PreconditionError("QuadraticSpec::random: need dim >= 1 and 0 < lo <= hi");
  }
  Vector lambda(dim);
  for (Index i = 0; i < dim; ++i) {
    lambda[i] = dim == 1 ? lo : lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(dim - 1);
  }
  QuadraticSpec spec;
  spec.A = spd_from_spectrum(lambda, seed);
  const CounterRng rng = CounterRng(seed).split(1);
  spec.theta_star.resize(dim);
  for (Index i = 0; i < dim; ++i) spec.theta_star[i] = rng.normal(0, static_cast<std::uint64_t>(i));
  return spec;
}

Matrix random_spd(Index dim, double lo, double hi, std::uint64_t seed) {
  if (dim < 1 || !(lo > 0.0) || !(hi >= lo)) {
    throw PreconditionError("random_spd: need dim >= 1 and 0 < lo <= hi");
  }
  const CounterRng rng = CounterRng(seed).split(2);
  Vector lambda(dim);
  for (Index i = 0; i < dim; ++i) lambda[i] = lo + (hi - lo) * rng.uniform(0, static_cast<std::uint64_t>(i));
  return spd_from_spectrum(lambda, seed);
}

Evaluation quadratic_eval(const QuadraticSpec& spec, const Vector& theta) {
  require_dim(theta.size(), spec.theta_star.size(), "quadratic_eval");
  const Vector e = theta - spec.theta_star;
  Evaluation out;
  out.grad = spec.A * e;
  out.f = 0.5 * e.dot(out.grad);
  return out;
}

Evaluation rosenbrock_eval(const Vector& theta) {
  const Index n = theta.size();
  if (n < 2) throw PreconditionError("rosenbrock_eval requires dim >= 2");
  Evaluation out;
  out.grad = Vector::Zero(n);
  for (Index i = 0; i + 1 < n; ++i) {
    const double a = theta[i + 1] - theta[i] * theta[i];
    const double b = 1.0 - theta[i];
    out.f += 100.0 * a * a + b * b;
    out.grad[i] += -400.0 * theta[i] * a - 2.0 * b;
    out.grad[i + 1] += 200.0 * a;
  }
  return out;
}

Evaluation logistic_eval(const Dataset& data, const Vector& theta,
                         std::span<const Index> rows) {
  require_dim(theta.size(), data.n_cols(), "logistic_eval");
  std::vector<Index> owned;
  if (rows.empty()) {
    owned = all_rows(data.n_rows());
    rows = owned;
  }
  Evaluation out;
  out.grad = Vector::Zero(theta.size());
  for (Index r : rows) {
    const int y = data.labels[static_cast<std::size_t>(r)];
    if (y != 0 && y != 1) throw PreconditionError("logistic_eval: non-binary label");
    const auto x = data.features.row(r);
    const double z = x.dot(theta.transpose());
    out.f += softplus(z) - y * z;
    out.grad += (sigmoid(z) - y) * x.transpose();
  }
  const double inv = 1.0 / static_cast<double>(rows.size());
  out.f *= inv;
  out.grad *= inv;
  return out;
}

Evaluation mlp_eval(const Vector& weights, const Dataset& data, const MlpArch& arch,
                    std::span<const Index> rows) {
  if (weights.size() != arch.num_weights()) {
    throw DimensionMismatch("mlp_eval: expected " + std::to_string(arch.num_weights()) +
                            " weights, got " + std::to_string(weights.size()));
  }
  require_dim(data.n_cols(), arch.in, "mlp_eval (input width)");
  std::vector<Index> owned;
  if (rows.empty()) {
    owned = all_rows(data.n_rows());
    rows = owned;
  }

  const double* p = weights.data();
  const Eigen::Map<const RowMatrix> W1(p, arch.hidden, arch.in);
  const Eigen::Map<const Vector> b1(p + arch.hidden * arch.in, arch.hidden);
  const double* p2 = p + arch.hidden * arch.in + arch.hidden;
  const Eigen::Map<const RowMatrix> W2(p2, arch.out, arch.hidden);
  const Eigen::Map<const Vector> b2(p2 + arch.out * arch.hidden, arch.out);

  Evaluation out;
  out.grad = Vector::Zero(weights.size());
  double* q = out.grad.data();
  Eigen::Map<RowMatrix> dW1(q, arch.hidden, arch.in);
  Eigen::Map<Vector> db1(q + arch.hidden * arch.in, arch.hidden);
  double* q2 = q + arch.hidden * arch.in + arch.hidden;
  Eigen::Map<RowMatrix> dW2(q2, arch.out, arch.hidden);
  Eigen::Map<Vector> db2(q2 + arch.out * arch.hidden, arch.out);

  for (Index r : rows) {
    const int y = data.labels[static_cast<std::size_t>(r)];
    if (y < 0 || y >= arch.out) throw PreconditionError("mlp_eval: label out of range");
    const Vector x = data.features.row(r).transpose();
    const Vector h = (W1 * x + b1).array().tanh().matrix();
    const Vector o = W2 * h + b2;
    const double shift = o.maxCoeff();
    const Vector e = (o.array() - shift).exp().matrix();
    const double z = e.sum();
    out.f += std::log(z) + shift - o[y];

    Vector d_o = e / z;
    d_o[y] -= 1.0;
    dW2.noalias() += d_o * h.transpose();
    db2 += d_o;
    const Vector d_a = ((W2.transpose() * d_o).array() * (1.0 - h.array().square())).matrix();
    dW1.noalias() += d_a * x.transpose();
    db1 += d_a;
  }
  const double inv = 1.0 / static_cast<double>(rows.size());
  out.f *= inv;
  out.grad *= inv;
  return out;
}

RayleighEvaluation rayleigh_eval(const Matrix& A, const Point& theta) {
  require_dim(theta.dim(), A.rows(), "rayleigh_eval");
  if (std::abs(theta.coords().norm() - 1.0) > 1e-10) {
    throw PreconditionError("rayleigh_eval: point is off the unit sphere");
  }
  const Vector At = A * theta.coords();
  const double f = theta.coords().dot(At);
  Vector rg = 2.0 * (At - f * theta.coords());
  return {f, Tangent(theta, std::move(rg))};
}

Evaluation Objective::evaluate_rows(const Vector&, std::span<const Index>) const {
  throw PreconditionError("objective " + std::string(to_string(kind())) +
                          " does not support minibatch evaluation");
}

std::shared_ptr<const Objective> make_quadratic_objective(QuadraticSpec spec) {
  return std::make_shared<QuadraticObjective>(std::move(spec));
}
std::shared_ptr<const Objective> make_rosenbrock_objective(Index dim) {
  return std::make_shared<RosenbrockObjective>(dim);
}
std::shared_ptr<const Objective> make_logistic_objective(Dataset data) {
  return std::make_shared<LogisticObjective>(std::move(data));
}
std::shared_ptr<const Objective> make_mlp_objective(Dataset data, MlpArch arch) {
  return std::make_shared<MlpObjective>(std::move(data), arch);
}
std::shared_ptr<const Objective> make_rayleigh_objective(Matrix A) {
  return std::make_shared<RayleighObjective>(std::move(A));
}

std::string_view to_string(ObjectiveKind kind) {
  switch (kind) {
    case ObjectiveKind::kQuadratic:
      return "quadratic";
    case ObjectiveKind::kRosenbrock:
      return "rosenbrock";
    case ObjectiveKind::kLogistic:
      return "logistic";
    case ObjectiveKind::kMlp:
      return "mlp";
    case ObjectiveKind::kRayleighSphere:
      return "rayleigh_sphere";
  }
  return "unknown";
}

std::optional<ObjectiveKind> parse_objective_kind(std::string_view name) {
  for (auto k : {ObjectiveKind::kQuadratic, ObjectiveKind::kRosenbrock,
                 ObjectiveKind::kLogistic, ObjectiveKind::kMlp,
                 ObjectiveKind::kRayleighSphere}) {
    if (to_string(k) == name) return k;
  }
  return std::nullopt;
}

std::string_view to_string(NoiseKind kind) {
  switch (kind) {
    case NoiseKind::kNone:
      return "none";
    case NoiseKind::kGaussian:
      return "gaussian";
    case NoiseKind::kMinibatch:
      return "minibatch";
  }
  return "unknown";
}

std::optional<NoiseKind> parse_noise_kind(std::string_view name) {
  for (auto k : {NoiseKind::kNone, NoiseKind::kGaussian, NoiseKind::kMinibatch}) {
    if (to_string(k) == name) return k;
  }
  return std::nullopt;
}

void ObjectiveHandle::validate() const {
  if (!objective) throw ConfigError("objective", "no objective attached");
  if (!(noise.sigma >= 0.0) || !std::isfinite(noise.sigma)) {
    throw ConfigError("noise.sigma", "must be nonnegative");
  }
  if (noise.kind == NoiseKind::kGaussian && !(noise.sigma > 0.0)) {
    throw ConfigError("noise.sigma", "gaussian noise needs sigma > 0");
  }
  if (noise.kind == NoiseKind::kMinibatch) {
    if (objective->num_rows() == 0) {
      throw ConfigError("noise.kind", "minibatch noise needs a dataset objective");
    }
    if (noise.batch_size < 1) throw ConfigError("noise.batch_size", "must be >= 1");
  }
}

std::vector<Index> minibatch_rows(Index n_rows, Index batch_size, std::uint64_t seed,
                                  std::int64_t k) {
  if (batch_size >= n_rows) return all_rows(n_rows);
  // Partial Fisher-Yates keyed by (seed, k).
  const CounterRng rng = CounterRng(seed).split(0x6d62);
  std::vector<Index> perm = all_rows(n_rows);
  for (Index j = 0; j < batch_size; ++j) {
    const auto span = static_cast<std::uint64_t>(n_rows - j);
    const auto pick = j + static_cast<Index>(
                              rng.bits(static_cast<std::uint64_t>(k),
                                       static_cast<std::uint64_t>(j)) % span);
    std::swap(perm[static_cast<std::size_t>(j)], perm[static_cast<std::size_t>(pick)]);
  }
  perm.resize(static_cast<std::size_t>(batch_size));
  std::sort(perm.begin(), perm.end());
  return perm;
}

Tangent sample_gradient(const ObjectiveHandle& handle, const Point& theta, std::int64_t k) {
  require_dim(theta.dim(), handle.dim(), "sample_gradient");
  Vector grad;
  if (handle.noise.kind == NoiseKind::kMinibatch) {
    const auto rows = minibatch_rows(handle.objective->num_rows(), handle.noise.batch_size,
                                     handle.noise.rng_seed, k);
    grad = handle.objective->evaluate_rows(theta.coords(), rows).grad;
  } else {
    grad = handle.objective->evaluate(theta.coords()).grad;
  }
  if (handle.noise.kind == NoiseKind::kGaussian) {
    const CounterRng rng = CounterRng(handle.noise.rng_seed).split(0x6761);
    for (Index i = 0; i < grad.size(); ++i) {
      grad[i] += handle.noise.sigma *
                 rng.normal(static_cast<std::uint64_t>(k), static_cast<std::uint64_t>(i));
    }
  }
  return Tangent(theta, std::move(grad));
}

Point default_initial_point(const ObjectiveHandle& handle, std::uint64_t seed) {
  const Index n = handle.dim();
  const CounterRng rng = CounterRng(seed).split(0x696e);
  Vector x(n);
  for (Index i = 0; i < n; ++i) x[i] = rng.normal(0, static_cast<std::uint64_t>(i));
  switch (handle.kind()) {
    case ObjectiveKind::kRayleighSphere:
      return Point::sphere_normalized(x);
    case ObjectiveKind::kRosenbrock:
      for (Index i = 0; i < n; ++i) x[i] = (i % 2 == 0) ? -1.2 : 1.0;
      return Point::euclidean(x);
    case ObjectiveKind::kLogistic:
      return Point::euclidean(Vector::Zero(n));
    case ObjectiveKind::kMlp:
      return Point::euclidean(0.5 * x);
    case ObjectiveKind::kQuadratic:
      break;
  }
  return Point::euclidean(x);
}

}  // namespace rlo
