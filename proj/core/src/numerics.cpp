#include "dflab/numerics.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <thread>

namespace dflab {

double log_sum_exp(std::span<const double> v) {
  double hi = -std::numeric_limits<double>::infinity();
  for (double x : v)
    if (x > hi) hi = x;
  if (!std::isfinite(hi)) return hi;
  KahanSum sum;
  for (double x : v)
    if (std::isfinite(x)) sum.add(std::exp(x - hi));
  return hi + std::log(sum.value());
}

LeastSquaresFit least_squares(const Eigen::MatrixXd& X, const Eigen::VectorXd& y) {
  LeastSquaresFit fit;
  fit.coeffs = X.colPivHouseholderQr().solve(y);
  const Eigen::VectorXd residual = y - X * fit.coeffs;
  fit.residual_rms = std::sqrt(residual.squaredNorm() / std::max<Eigen::Index>(1, y.size()));
  return fit;
}

double LimitFit::evaluate(double t) const {
  double v = coeffs[0];
  if (coeffs.size() > 1) v += coeffs[1] * t * std::log(t);
  if (coeffs.size() > 2) v += coeffs[2] * t;
  if (coeffs.size() > 3) v += coeffs[3] / (t * t);
  return v;
}

LimitFit fit_short_time_model(const std::vector<double>& t, const std::vector<double>& y) {
  if (t.size() != y.size() || t.size() < 3)
    throw std::invalid_argument("fit_short_time_model: need at least three samples");
  const bool with_tail = t.size() >= 5;
  const Eigen::Index cols = with_tail ? 4 : 3;
  Eigen::MatrixXd X(t.size(), cols);
  Eigen::VectorXd rhs(t.size());
  for (std::size_t i = 0; i < t.size(); ++i) {
    X(i, 0) = 1.0;
    X(i, 1) = t[i] * std::log(t[i]);
    X(i, 2) = t[i];
    if (with_tail) X(i, 3) = 1.0 / (t[i] * t[i]);
    rhs(i) = y[i];
  }
  const auto ls = least_squares(X, rhs);
  LimitFit fit;
  fit.coeffs = ls.coeffs;
  fit.limit = ls.coeffs[0];
  fit.residual_rms = ls.residual_rms;
  return fit;
}

void parallel_for(std::size_t n, const std::function<void(std::size_t)>& fn, int threads) {
  if (n == 0) return;
  unsigned workers = threads > 0 ? static_cast<unsigned>(threads)
                                 : std::max(1u, std::thread::hardware_concurrency());
  workers = std::min<unsigned>(workers, static_cast<unsigned>(n));
  if (workers <= 1) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::vector<std::thread> pool;
  pool.reserve(workers);
  for (unsigned w = 0; w < workers; ++w) {
    pool.emplace_back([&, w] {
      for (std::size_t i = w; i < n; i += workers) fn(i);
    });
  }
  for (auto& th : pool) th.join();
}

std::string fnv1a_hex(const std::string& bytes) {
  std::uint64_t h = 0xCBF29CE484222325ull;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001B3ull;
  }
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

std::string format_double(double x) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", x);
  // Prefer the shortest representation that round-trips.
  for (int prec = 1; prec <= 16; ++prec) {
    char shorter[40];
    std::snprintf(shorter, sizeof(shorter), "%.*g", prec, x);
    double back = 0.0;
    std::sscanf(shorter, "%lf", &back);
    if (back == x || (std::isnan(back) && std::isnan(x))) return shorter;
  }
  return buf;
}

}  // namespace dflab
