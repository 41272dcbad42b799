#pragma once

#include <Eigen/Dense>

#include <cstdint>

#include "dflab/state_space.hpp"

namespace dflab {

/// Certified bounds on the intrinsic pseudo-metric
///   d(x,y) = sup { f(x) - f(y) : max_v gamma(f)(v) <= 1 }.
/// `lower` is witness(x) - witness(y) for a feasible witness (ascent side);
/// `upper` is a shortest-path certificate from the single-edge relaxation.
struct DistanceBracket {
  double lower = 0.0;
  double upper = 0.0;
  Eigen::VectorXd witness;
  double witness_max_gamma = 0.0;
  bool connected = true;
  double relative_gap(double eps = 1e-12) const {
    return (upper - lower) / std::max(lower, eps);
  }
};

struct MetricOptions {
  double tol = 1e-3;  ///< relative convergence target for the ascent
  int restarts = 10;
  int max_ascent_iters = 400;
  std::uint64_t seed = 0x5EEDULL;
};

DistanceBracket intrinsic_distance(const StateSpace& space, int x, int y,
                                   const MetricOptions& opts = {});
DistanceBracket intrinsic_distance(const StateSpace& space, int x, int y, double tol);

/// All-pairs certified bounds. Lower bounds come from a shared library of
/// feasible functions (rescaled tight shortest-path profiles per source and,
/// on embedded spaces, coordinate projections scaled by a global
/// energy-density bound), so they are symmetric and triangle-consistent by
/// construction. Upper bounds are shortest paths with edge length
/// sqrt(2 min(m)/w). Disconnected pairs report +inf.
class DistanceMatrix {
 public:
  static DistanceMatrix build(const StateSpace& space, double tol = 1e-3, int threads = 0);

  int size() const { return static_cast<int>(lower_.rows()); }
  double lower(int x, int y) const { return lower_(x, y); }
  double upper(int x, int y) const { return upper_(x, y); }
  bool connected(int x, int y) const { return std::isfinite(upper_(x, y)); }
  double diameter_lower() const;

  const Eigen::MatrixXd& lower_matrix() const { return lower_; }

 private:
  Eigen::MatrixXd lower_, upper_;
};

/// min over a in A of the certified lower bound d(a, x); 0 if x in A.
double set_distance(const DistanceMatrix& dmat, const Region& A, int x);
/// min over (a, b) in A x B of the lower bound.
double set_to_set_distance(const DistanceMatrix& dmat, const Region& A, const Region& B);

/// A^{beta-} = {x in A : d(A^c, x) > beta}; may be empty (legal, caller checks).
std::vector<int> shrink_set(const StateSpace& space, const DistanceMatrix& dmat, const Region& A,
                            double beta);
/// A^{beta+} = A together with {x : d(A, x) < beta}; equals A at beta = 0.
std::vector<int> enlarge_set(const StateSpace& space, const DistanceMatrix& dmat, const Region& A,
                             double beta);

/// Open metric ball {y : d_lower(center, y) < r}.
std::vector<int> metric_ball(const DistanceMatrix& dmat, int center, double r);

/// max_v gamma(f)(v); the feasibility functional of the metric program.
double max_energy_density(const StateSpace& space, const Eigen::VectorXd& f);

}  // namespace dflab
