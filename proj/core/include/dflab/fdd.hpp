#pragma once

#include <vector>

#include "dflab/metric.hpp"
#include "dflab/spectral.hpp"
#include "dflab/state_space.hpp"
#include "dflab/time_partition.hpp"

namespace dflab {

/// Cylinder event: the rescaled process visits set A_i at time s * t_i.
/// The initial law lives on sets[0]; empty means m restricted to A_0 and
/// normalized (the rate carries no term for the start, so the choice only
/// conditions the first marginal).
struct CylinderEvent {
  TimePartition partition;
  std::vector<Region> sets;
  std::vector<double> initial_law;  ///< aligned with sets[0].vertices; sums to 1
  double beta = -1.0;               ///< bracket width; < 0 means default 2 * mesh

  void validate() const;
  std::vector<double> resolved_initial_law(const StateSpace& space) const;
  double resolved_beta(const StateSpace& space) const;
};

/// log P(X_{s t_0} in A_0, ..., X_{s t_n} in A_n): exact restricted
/// vector-matrix products; stages fall back to the positive-series path when
/// the dense double kernel is below its reliability floor.
double fdd_log_probability(const SpectralCache& cache, const CylinderEvent& event, double s);
double fdd_probability(const SpectralCache& cache, const CylinderEvent& event, double s);

struct RateResult {
  double rate = 0.0;
  std::vector<int> chain;  ///< optimizing vertex chain (smallest-index ties)
  bool infinite = false;   ///< some stage set was empty
};

/// min over chains x_i in sets_i of sum d^2(x_i, x_{i+1}) / (2 (t_{i+1}-t_i)),
/// by dynamic programming over the stages.
RateResult fdd_rate(const DistanceMatrix& dmat, const std::vector<Region>& sets,
                    const TimePartition& partition);

/// Same DP on shrunken / original / enlarged stage sets; ordering
/// enlarged.rate <= original.rate <= shrunken.rate.
struct RateBracket {
  RateResult enlarged, original, shrunken;
  double beta = 0.0;
};
RateBracket fdd_rate_bracket(const StateSpace& space, const DistanceMatrix& dmat,
                             const CylinderEvent& event);

struct LdpCurvePoint {
  double s = 0.0;
  double s_log_p = 0.0;
  bool in_window = false;
  bool dropped = false;
};

struct LdpCurve {
  std::vector<LdpCurvePoint> points;
  double fitted_limit = 0.0;
  double fit_residual = 0.0;
  bool window_empty = false;
  RateBracket bracket;  ///< limit should land in [-shrunken.rate, -enlarged.rate]
};

/// s log P along an s-grid with the prefactor-aware extrapolation
/// s log P = L + a s log s + b s, reported against the rate bracket.
LdpCurve fdd_ldp_curve(const SpectralCache& cache, const DistanceMatrix& dmat,
                       const CylinderEvent& event, const std::vector<double>& s_grid);

}  // namespace dflab
