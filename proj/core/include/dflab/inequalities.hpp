#pragma once

#include <Eigen/Dense>

#include <string>
#include <vector>

#include "dflab/metric.hpp"
#include "dflab/spectral.hpp"
#include "dflab/state_space.hpp"

namespace dflab {

enum class InequalityKind { VolumeDoubling, Poincare, Harnack, VolumeScaling };

struct InequalitySample {
  int center = -1;
  double r = 0.0;
  double t = 0.0;
  int source = -1;  ///< solution source vertex (Harnack samples)
  double value = 0.0;
  bool excluded = false;
  std::string note;
};

struct InequalityReport {
  InequalityKind kind = InequalityKind::VolumeDoubling;
  std::string region;
  std::vector<InequalitySample> samples;
  double best = 0.0;    ///< max over non-excluded samples
  bool defined = false; ///< false when no admissible sample existed
};

/// Best empirical doubling exponent N = max log2(m(B_2r)/m(B_r)) over centers
/// in `region` with B_2r contained in `region`; balls from certified lower
/// bounds. Throws when no admissible (center, r) sample exists.
InequalityReport doubling_exponent(const StateSpace& space, const DistanceMatrix& dmat,
                                   const Region& region, const std::vector<double>& radii,
                                   int max_centers = 64);

/// Best Poincare constant at one ball: kappa = 1/(r^2 lambda*), lambda* the
/// smallest positive generalized eigenvalue of (energy on B_2r, variance on
/// B_r). Undefined (flagged) when B_r has fewer than two vertices.
struct PoincareResult {
  double kappa = 0.0;
  double lambda_star = 0.0;
  Eigen::VectorXd optimizer;   ///< on the whole space, supported on B_2r
  std::vector<int> ball_r, ball_2r;
  bool defined = false;
  std::string note;
};
PoincareResult poincare_constant(const StateSpace& space, const DistanceMatrix& dmat, int x,
                                 double r);

struct HarnackOptions {
  int time_samples = 8;     ///< per cylinder window (half-open grids)
  double inf_floor = 1e-280;
  int max_centers = 6;
  int max_sources = 5;
};

/// Empirical parabolic Harnack constant over space-time cylinders
/// Q- = [t-3r^2, t-2r^2) x B_r, Q+ = [t-r^2, t) x B_r for nonnegative
/// solutions u_s = p_s(x0, .). Samples with inf below the floor are excluded.
InequalityReport harnack_constant(const SpectralCache& cache, const DistanceMatrix& dmat,
                                  const Region& region, const std::vector<double>& radii,
                                  const std::vector<double>& times,
                                  const HarnackOptions& opts = {});

struct VolumeScalingPoint {
  double t = 0.0;
  double value = 0.0;        ///< t log vol(sqrt(eps t), x)
  double proof_bound = 0.0;  ///< (N/2)|t log t| + t |log vol(sqrt(eps), x)|
  bool within_bound = false;
};

struct VolumeScalingCurve {
  int center = -1;
  double epsilon = 0.0;
  std::vector<VolumeScalingPoint> points;
  double fitted_limit = 0.0;  ///< linear extrapolation to t = 0
  double doubling_N = 0.0;
};

/// t log vol(sqrt(eps t), x) along a t grid; the limit must vanish and every
/// point is checked against the volume-doubling bound with the supplied N.
VolumeScalingCurve volume_scaling_curve(const StateSpace& space, const DistanceMatrix& dmat,
                                        int x, double epsilon, const std::vector<double>& t_grid,
                                        double doubling_N);

/// Measure of the open metric ball B_r(x), floored at m(x).
double ball_volume(const StateSpace& space, const DistanceMatrix& dmat, int x, double r);

}  // namespace dflab
