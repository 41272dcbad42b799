#pragma once

#include <Eigen/Dense>

#include <memory>
#include <vector>

#include "dflab/metric.hpp"
#include "dflab/state_space.hpp"
#include "dflab/time_partition.hpp"

namespace dflab {

/// Curve on [0,1] into a metric context: Euclidean R^k (dense samples with
/// linear interpolation, or an exact piecewise-constant descriptor) or a
/// weighted graph with its intrinsic metric (nearest-sample vertices,
/// distances from the certified lower-bound matrix).
class Curve {
 public:
  static constexpr int kDefaultResolution = 1 << 12;

  static Curve line(const Eigen::VectorXd& from, const Eigen::VectorXd& to,
                    int resolution = kDefaultResolution);
  static Curve circle_arc(const Eigen::Vector2d& center, double radius, double angle_from,
                          double angle_to, int resolution = kDefaultResolution);
  /// Component-wise polynomial in t: coeffs[d] lists c_0..c_p for axis d.
  static Curve polynomial(const std::vector<std::vector<double>>& coeffs,
                          int resolution = kDefaultResolution);
  /// Uniformly spaced Euclidean samples (rows = points along the curve).
  static Curve euclidean_samples(Eigen::MatrixXd samples);
  /// Exact step curve: value pieces[i].second on [breaks[i], breaks[i+1]).
  static Curve piecewise_constant(const std::vector<double>& breaks,
                                  const std::vector<Eigen::VectorXd>& values);

  /// Graph-context curve following the straight segment between two
  /// coordinate points, snapped to nearest vertices.
  static Curve graph_segment(std::shared_ptr<const StateSpace> space,
                             std::shared_ptr<const DistanceMatrix> dmat,
                             const Eigen::VectorXd& from, const Eigen::VectorXd& to,
                             int resolution = kDefaultResolution);
  static Curve graph_samples(std::shared_ptr<const StateSpace> space,
                             std::shared_ptr<const DistanceMatrix> dmat,
                             std::vector<int> vertices);

  bool graph_context() const { return space_ != nullptr; }
  int dim() const;
  int resolution() const;

  Eigen::VectorXd point(double t) const;  ///< Euclidean contexts
  int vertex(double t) const;             ///< graph contexts
  /// Exact metric distance d(curve(t1), curve(t2)) in the curve's context.
  double distance(double t1, double t2) const;
  /// Scale below which the evaluator cannot resolve movement
  /// (max consecutive-sample distance).
  double resolution_scale() const;

  const StateSpace* space() const { return space_.get(); }
  const DistanceMatrix* metric() const { return dmat_.get(); }

 private:
  Curve() = default;
  // Euclidean sampled representation
  Eigen::MatrixXd samples_;  // (res+1) x dim, row i at t = i/res
  // exact step representation
  std::vector<double> breaks_;
  std::vector<Eigen::VectorXd> pieces_;
  // graph representation
  std::shared_ptr<const StateSpace> space_;
  std::shared_ptr<const DistanceMatrix> dmat_;
  std::vector<int> vertices_;
};

/// H_Delta = 1/2 sum d^2(curve(t_i), curve(t_{i+1})) / (t_{i+1} - t_i).
double discrete_energy(const Curve& curve, const TimePartition& partition);

/// sup over partitions via dyadic refinement (monotone under refinement),
/// plus randomized partitions at the final level. A curve whose per-level
/// energies keep growing is flagged non-convergent (lower bound only).
struct EnergyEstimate {
  double value = 0.0;
  int level = 0;
  double last_increment = 0.0;
  bool converged = false;
  std::vector<double> per_level;
};
EnergyEstimate energy_sup(const Curve& curve, double tol = 1e-6, int max_level = 14);

/// Metric speed at an interior time from symmetric difference quotients.
/// Euclidean contexts are Richardson-extrapolated; graph contexts use the
/// largest admissible quotient (vertex snapping makes finer steps noise).
struct SpeedEstimate {
  double value = 0.0;
  bool ok = false;
  int quotients_used = 0;
};
SpeedEstimate metric_derivative(const Curve& curve, double t,
                                const std::vector<double>& h_grid = {});

/// H~ = 1/2 int |curve'|^2 by composite midpoint quadrature of the metric
/// speed. Undefined when more than 10% of the nodes fail.
struct Ac2Result {
  double value = 0.0;
  bool defined = false;
  double failed_fraction = 0.0;
};
Ac2Result ac2_energy(const Curve& curve, int quadrature_points = 64);

/// Signed gap H~ - H with both estimates and their flags.
struct GapResult {
  double h_sup = 0.0;
  double h_tilde = 0.0;
  double gap = 0.0;
  bool defined = false;
  bool sup_converged = false;
  bool ac2_defined = false;
};
GapResult identification_gap(const Curve& curve, double tol = 1e-6);

}  // namespace dflab
