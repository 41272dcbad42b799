#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

namespace dflab {

/// Compensated (Kahan) accumulator.
class KahanSum {
 public:
  void add(double x) {
    const double y = x - c_;
    const double t = s_ + y;
    c_ = (t - s_) - y;
    s_ = t;
  }
  double value() const { return s_; }

 private:
  double s_ = 0.0;
  double c_ = 0.0;
};

/// log(sum exp(v_i)) with the usual max shift; -inf entries are skipped.
double log_sum_exp(std::span<const double> v);

/// Ordinary least squares y ~ X*beta (dense, column-pivoted QR).
struct LeastSquaresFit {
  Eigen::VectorXd coeffs;
  double residual_rms = 0.0;
};
LeastSquaresFit least_squares(const Eigen::MatrixXd& X, const Eigen::VectorXd& y);

/// Extrapolation model for short-time log-quantities:
///   t log q = L + a t log t + b t + c / t^2.
/// The t log t and t columns absorb the continuum (2 pi t)^{-1/2} prefactor;
/// the 1/t^2 column absorbs the leading jump-tail correction of a lattice
/// chain (it vanishes in the continuum limit). The quartic term is dropped
/// when fewer than five samples are available.
struct LimitFit {
  double limit = 0.0;
  double residual_rms = 0.0;
  Eigen::VectorXd coeffs;
  double evaluate(double t) const;
};
LimitFit fit_short_time_model(const std::vector<double>& t, const std::vector<double>& y);

/// Run fn(i) for i in [0, n) on up to `threads` workers (0 = hardware default).
/// fn must be safe to call concurrently for distinct i.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& fn, int threads = 0);

/// FNV-1a 64-bit digest, hex-encoded; used for config fingerprints.
std::string fnv1a_hex(const std::string& bytes);

/// Shortest round-trip decimal form of a double ("%.17g" trimmed), locale-free.
std::string format_double(double x);

}  // namespace dflab
