#pragma once

#include <cstdint>
#include <vector>

#include "dflab/fdd.hpp"
#include "dflab/metric.hpp"
#include "dflab/path_energy.hpp"
#include "dflab/spectral.hpp"
#include "dflab/state_space.hpp"
#include "dflab/time_partition.hpp"

namespace dflab {

/// One exact CTMC trajectory over physical horizon s, reported in rescaled
/// time: jump number k happened at jump_times[k] in (0, 1], states[k+1] is
/// the vertex entered. Identical (seed, stream) reproduce the sample bit for
/// bit regardless of execution order.
struct PathSample {
  double horizon = 0.0;
  int start = 0;
  std::vector<double> jump_times;
  std::vector<int> states;  ///< size jump_times.size() + 1, states[0] = start
  std::uint64_t seed = 0, stream = 0;

  int state_at(double t) const;  ///< rescaled t in [0, 1]
};

/// Holding rate at x is (1/m(x)) sum_y w(x,y); jumps proportional to w(x,y).
PathSample sample_path(const StateSpace& space, double s, int x0, std::uint64_t seed,
                       std::uint64_t stream = 0);

/// Checkpoint tube: paths with d(X^s_{t_j}, center(t_j)) < delta at every
/// checkpoint time t_j. Finite-dimensional by construction so the exact FDD
/// computation can serve as its oracle.
struct TubeEvent {
  Curve center;
  double delta = 0.0;
  TimePartition checkpoints;
};

/// The tube as a cylinder event: checkpoint balls around the center curve,
/// initial law m normalized on the delta-ball at time 0.
CylinderEvent tube_to_cylinder(const StateSpace& space, const DistanceMatrix& dmat,
                               const TubeEvent& event);

struct TubeEstimate {
  double p_hat = 0.0;
  double wilson_lo = 0.0, wilson_hi = 0.0;  ///< 95% interval
  long long hits = 0, samples = 0;
  bool zero_hits = false;
};

/// Monte Carlo tube probability with a Wilson 95% interval; the initial
/// state is drawn from m restricted to the delta-ball around center(0).
TubeEstimate tube_probability(const StateSpace& space, const DistanceMatrix& dmat,
                              const TubeEvent& event, double s, long long n_samples,
                              std::uint64_t seed, int threads = 0);

struct TubeLdpPoint {
  double s = 0.0;
  double s_log_p = 0.0;
  bool exact = false;  ///< exact FDD path (vs Monte Carlo)
  bool in_window = false;
  bool dropped = false;
};

struct TubeLdp {
  std::vector<TubeLdpPoint> points;
  double fitted_limit = 0.0;
  double fit_residual = 0.0;
  RateBracket rates;            ///< DP rates on shrunken/original/enlarged balls
  double center_energy = 0.0;   ///< H~ of the center curve (lower-bound side)
  bool center_energy_defined = false;
  bool window_empty = false;
};

/// s log P(tube) along an s-grid: exact FDD computation whenever the
/// restricted checkpoint product is small enough, Monte Carlo otherwise;
/// extrapolated with the prefactor-aware model and reported against the
/// [-rate(shrunken), -rate(enlarged)] bracket and -H~(center).
TubeLdp tube_ldp_estimate(const SpectralCache& cache, const DistanceMatrix& dmat,
                          const TubeEvent& event, const std::vector<double>& s_grid,
                          long long mc_samples, std::uint64_t seed,
                          double exact_product_cap = 1e6);

}  // namespace dflab
