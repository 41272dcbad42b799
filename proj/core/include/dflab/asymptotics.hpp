#pragma once

#include <string>
#include <vector>

#include "dflab/metric.hpp"
#include "dflab/spectral.hpp"
#include "dflab/state_space.hpp"

namespace dflab {

struct ProbePoint {
  double t = 0.0;
  double value = 0.0;  ///< t log(quantity)
  double model = 0.0;  ///< fitted model value at t
  bool in_window = false;
  bool dropped = false;
};

/// Short-time probe of t log(quantity) against the Gaussian target -d^2/2,
/// extrapolated with the prefactor-aware model
///   t log q = L + a t log t + b t
/// (the continuum (2 pi t)^{-1/2} prefactor contributes exactly such terms).
/// The validity window starts at t_lo = max(25 h^2/sigma^2, d h / 1.6):
/// below the first the chain has not entered the diffusive regime, below the
/// second the Gaussian tail outruns the jump budget. Spaces without a
/// continuum tag have an empty window and the fit is advisory only.
struct AsymptoticProbe {
  std::vector<ProbePoint> points;
  double fitted_limit = 0.0;
  double fit_residual = 0.0;
  double target = 0.0;         ///< -d_lower^2 / 2
  double rel_deviation = 0.0;  ///< |L - target| / |target| (absolute when target = 0)
  double window_lo = 0.0;
  bool window_empty = true;
  bool fit_on_window = false;  ///< fit restricted to in-window points
  std::string note;
};

std::vector<double> log_spaced_grid(double lo, double hi, int points);

AsymptoticProbe varadhan_kernel(const SpectralCache& cache, const DistanceMatrix& dmat, int x,
                                int y, const std::vector<double>& t_grid);

AsymptoticProbe varadhan_indicator(const SpectralCache& cache, const DistanceMatrix& dmat,
                                   const Region& A, int x, const std::vector<double>& t_grid);

/// Threshold t* for the integrated Gaussian estimate
///   (1_A, T_t 1_B) <= sqrt(m(A) m(B)) exp(-d^2(A,B) / (2t)):
/// smallest sampled t above which the bound holds on the scan grid, refined
/// by bisection against the first failing sample below. On discrete spaces
/// the bound fails in the jump-tail regime below a mesh-dependent t*.
struct GaussianThreshold {
  double t_star = 0.0;
  bool violation_found = false;
  double d_ab = 0.0;
  struct ScanPoint {
    double t, lhs_log, rhs_log;
    bool violated;
  };
  std::vector<ScanPoint> scan;
};

GaussianThreshold gaussian_bound_threshold(const SpectralCache& cache, const DistanceMatrix& dmat,
                                           const Region& A, const Region& B, double t_lo = 1e-4,
                                           double t_hi = 4.0, int scan_points = 48);

}  // namespace dflab
