#include "dflab/spectral.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "dflab/numerics.hpp"

namespace dflab {

namespace {

constexpr double kNegativeFloorFlag = -1e-12;
const double kInf = std::numeric_limits<double>::infinity();

void check_dim(const StateSpace& space, const Eigen::VectorXd& u, const char* who) {
  if (u.size() != space.size())
    throw std::invalid_argument(std::string(who) + ": vertex-function dimension mismatch");
}

/// Row vector v0 * exp(tQ) in log space via uniformization. v0 must be
/// nonnegative; entries of the result are log-probability masses.
Eigen::VectorXd uniformization_log(const StateSpace& space, double t, const Eigen::VectorXd& v0) {
  const int n = space.size();
  Eigen::VectorXd result(n);
  if (t == 0.0) {
    for (int i = 0; i < n; ++i) result[i] = v0[i] > 0.0 ? std::log(v0[i]) : -kInf;
    return result;
  }

  double max_rate = 0.0;
  for (int x = 0; x < n; ++x) max_rate = std::max(max_rate, space.holding_rate(x));
  // Slack keeps the jump matrix aperiodic (positive diagonal).
  const double r = 1.05 * max_rate + 1e-12;
  const double rt = r * t;

  Eigen::VectorXd diag(n);
  for (int x = 0; x < n; ++x) diag[x] = 1.0 - space.holding_rate(x) / r;

  const long k_star = static_cast<long>(std::floor(rt));
  const double shift = -rt + k_star * std::log(rt) - std::lgamma(static_cast<double>(k_star) + 1.0);
  const long k_max =
      static_cast<long>(std::ceil(rt + 12.0 * std::sqrt(rt + 1.0))) + n + 64;

  Eigen::VectorXd v = v0, next(n), acc = Eigen::VectorXd::Zero(n);
  double log_weight = -rt;  // log Poisson(k; rt) accumulated incrementally
  for (long k = 0; k <= k_max; ++k) {
    if (k > 0) log_weight += std::log(rt) - std::log(static_cast<double>(k));
    const double w = std::exp(log_weight - shift);
    if (w > 0.0) acc += w * v;
    // Poisson tail is negligible once past the mode; keep going until every
    // vertex within graph distance <= n has been reached.
    if (k > rt && w < 1e-18 && k >= n) break;
    next.setZero();
    for (int x = 0; x < n; ++x) {
      const double vx = v[x];
      if (vx == 0.0) continue;
      next[x] += vx * diag[x];
      const double scale = vx / (space.measure[x] * r);
      for (const auto& [y, wxy] : space.adjacency[x]) next[y] += scale * wxy;
    }
    v.swap(next);
  }
  for (int i = 0; i < n; ++i) result[i] = acc[i] > 0.0 ? std::log(acc[i]) + shift : -kInf;
  return result;
}

}  // namespace

double dirichlet_energy(const StateSpace& space, const Eigen::VectorXd& u,
                        const Eigen::VectorXd& v) {
  check_dim(space, u, "dirichlet_energy");
  check_dim(space, v, "dirichlet_energy");
  KahanSum sum;
  for (int x = 0; x < space.size(); ++x)
    for (const auto& [y, w] : space.adjacency[x]) sum.add(w * (u[x] - u[y]) * (v[x] - v[y]));
  return 0.5 * sum.value();
}

Eigen::VectorXd energy_density(const StateSpace& space, const Eigen::VectorXd& u) {
  check_dim(space, u, "energy_density");
  Eigen::VectorXd gamma(space.size());
  for (int x = 0; x < space.size(); ++x) {
    double s = 0.0;
    for (const auto& [y, w] : space.adjacency[x]) {
      const double d = u[x] - u[y];
      s += w * d * d;
    }
    gamma[x] = s / space.measure[x];
  }
  return gamma;
}

Eigen::VectorXd generator_apply(const StateSpace& space, const Eigen::VectorXd& u) {
  check_dim(space, u, "generator_apply");
  Eigen::VectorXd out(space.size());
  for (int x = 0; x < space.size(); ++x) {
    double s = 0.0;
    for (const auto& [y, w] : space.adjacency[x]) s += w * (u[y] - u[x]);
    out[x] = s / space.measure[x];
  }
  return out;
}

SpectralCache SpectralCache::build(std::shared_ptr<const StateSpace> space) {
  const auto report = validate_space(*space);
  if (!report.pass)
    throw std::invalid_argument("SpectralCache::build: invalid space: " + report.issues.front());

  const int n = space->size();
  Eigen::VectorXd sqrt_m(n);
  for (int x = 0; x < n; ++x) sqrt_m[x] = std::sqrt(space->measure[x]);

  // Symmetrized positive semidefinite operator M^{1/2} (-A) M^{-1/2}.
  Eigen::MatrixXd sym = Eigen::MatrixXd::Zero(n, n);
  for (int x = 0; x < n; ++x) {
    double degree = 0.0;
    for (const auto& [y, w] : space->adjacency[x]) {
      degree += w;
      sym(x, y) -= w / (sqrt_m[x] * sqrt_m[y]);
    }
    sym(x, x) += degree / space->measure[x];
  }
  sym = 0.5 * (sym + sym.transpose()).eval();

  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(sym);
  if (solver.info() != Eigen::Success) {
    throw std::runtime_error(
        "SpectralCache::build: eigensolver failed (operator norm approx " +
        std::to_string(sym.norm()) + ", n = " + std::to_string(n) + ")");
  }

  SpectralCache cache;
  cache.space_ = std::move(space);
  cache.eigenvalues_ = solver.eigenvalues();
  cache.modes_ = solver.eigenvectors();
  for (int x = 0; x < n; ++x) cache.modes_.row(x) /= sqrt_m[x];
  return cache;
}

double SpectralCache::pair_sum(double t, int x, int y, double& abs_mass) const {
  KahanSum sum;
  double mass = 0.0;
  for (int k = 0; k < eigenvalues_.size(); ++k) {
    const double term = std::exp(-eigenvalues_[k] * t) * modes_(x, k) * modes_(y, k);
    sum.add(term);
    mass += std::abs(term);
  }
  abs_mass = mass;
  return sum.value();
}

KernelValue SpectralCache::heat_kernel(double t, int x, int y) const {
  if (!(t > 0.0)) throw std::invalid_argument("heat_kernel: t must be positive");
  const int n = space_->size();
  if (x < 0 || x >= n || y < 0 || y >= n)
    throw std::invalid_argument("heat_kernel: vertex out of range");
  const int a = std::min(x, y), b = std::max(x, y);

  double abs_mass = 0.0;
  const double raw = pair_sum(t, a, b, abs_mass);
  const double noise_floor = abs_mass * n * 2e-13;

  KernelValue kv;
  kv.t = t;
  kv.x = x;
  kv.y = y;
  kv.floored = raw < kNegativeFloorFlag;
  kv.value = std::max(raw, 0.0);
  if (raw > noise_floor) {
    kv.log_value = std::log(raw);
  } else {
    const Eigen::VectorXd row = log_transition_row(*space_, t, a);
    kv.log_value = row[b] - std::log(space_->measure[b]);
    if (kv.value == 0.0 && std::isfinite(kv.log_value)) kv.value = std::exp(kv.log_value);
  }
  return kv;
}

double SpectralCache::log_heat_kernel(double t, int x, int y) const {
  return heat_kernel(t, x, y).log_value;
}

Eigen::VectorXd SpectralCache::semigroup_apply(double t, const Eigen::VectorXd& f) const {
  if (t < 0.0) throw std::invalid_argument("semigroup_apply: t must be nonnegative");
  check_dim(*space_, f, "semigroup_apply");
  const int n = space_->size();
  Eigen::VectorXd mf(n);
  for (int x = 0; x < n; ++x) mf[x] = space_->measure[x] * f[x];
  Eigen::VectorXd coeffs = modes_.transpose() * mf;
  for (int k = 0; k < n; ++k) coeffs[k] *= std::exp(-eigenvalues_[k] * t);
  return modes_ * coeffs;
}

Eigen::MatrixXd SpectralCache::kernel_matrix(double t) const {
  if (!(t > 0.0)) throw std::invalid_argument("kernel_matrix: t must be positive");
  Eigen::VectorXd decay(eigenvalues_.size());
  for (int k = 0; k < eigenvalues_.size(); ++k) decay[k] = std::exp(-eigenvalues_[k] * t);
  return modes_ * decay.asDiagonal() * modes_.transpose();
}

double SpectralCache::chapman_kolmogorov_residual(double t, double r) const {
  if (!(r > 0.0) || !(r < t))
    throw std::invalid_argument("chapman_kolmogorov_residual: need 0 < r < t");
  const Eigen::MatrixXd lhs = kernel_matrix(t);
  Eigen::VectorXd m(space_->size());
  for (int x = 0; x < space_->size(); ++x) m[x] = space_->measure[x];
  const Eigen::MatrixXd rhs = kernel_matrix(r) * m.asDiagonal() * kernel_matrix(t - r);
  return (lhs - rhs).cwiseAbs().maxCoeff();
}

double SpectralCache::log_semigroup_indicator(double t, int x, const Region& A) const {
  if (!(t > 0.0)) throw std::invalid_argument("log_semigroup_indicator: t must be positive");
  if (A.empty()) throw std::invalid_argument("log_semigroup_indicator: empty region");
  const int n = space_->size();

  KahanSum sum;
  double mass = 0.0;
  for (int k = 0; k < n; ++k) {
    double ak = 0.0;
    for (int v : A.vertices) ak += space_->measure[v] * modes_(v, k);
    const double term = std::exp(-eigenvalues_[k] * t) * modes_(x, k) * ak;
    sum.add(term);
    mass += std::abs(term);
  }
  const double raw = sum.value();
  if (raw > mass * n * 2e-13) return std::log(raw);

  const Eigen::VectorXd row = log_transition_row(*space_, t, x);
  std::vector<double> terms;
  terms.reserve(A.vertices.size());
  for (int v : A.vertices) terms.push_back(row[v]);
  return log_sum_exp(terms);
}

double SpectralCache::log_inner_indicator(double t, const Region& A, const Region& B) const {
  if (!(t > 0.0)) throw std::invalid_argument("log_inner_indicator: t must be positive");
  if (A.empty() || B.empty()) throw std::invalid_argument("log_inner_indicator: empty region");
  const int n = space_->size();

  KahanSum sum;
  double mass = 0.0;
  for (int k = 0; k < n; ++k) {
    double ak = 0.0, bk = 0.0;
    for (int v : A.vertices) ak += space_->measure[v] * modes_(v, k);
    for (int v : B.vertices) bk += space_->measure[v] * modes_(v, k);
    const double term = std::exp(-eigenvalues_[k] * t) * ak * bk;
    sum.add(term);
    mass += std::abs(term);
  }
  const double raw = sum.value();
  if (raw > mass * n * 2e-13) return std::log(raw);

  // Start the jump chain from m normalized on A; all contributions stay
  // nonnegative, so the tiny inner product keeps relative accuracy.
  double mA = 0.0;
  for (int v : A.vertices) mA += space_->measure[v];
  Eigen::VectorXd v0 = Eigen::VectorXd::Zero(n);
  for (int v : A.vertices) v0[v] = space_->measure[v] / mA;
  const Eigen::VectorXd row = uniformization_log(*space_, t, v0);
  std::vector<double> terms;
  terms.reserve(B.vertices.size());
  for (int v : B.vertices) terms.push_back(row[v]);
  return std::log(mA) + log_sum_exp(terms);
}

Eigen::VectorXd log_transition_row(const StateSpace& space, double t, int x) {
  if (t < 0.0) throw std::invalid_argument("log_transition_row: t must be nonnegative");
  Eigen::VectorXd v0 = Eigen::VectorXd::Zero(space.size());
  v0[x] = 1.0;
  return uniformization_log(space, t, v0);
}

}  // namespace dflab
