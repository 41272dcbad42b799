#pragma once

#include <Eigen/Dense>

#include <memory>

#include "dflab/state_space.hpp"

namespace dflab {

/// E(u,v) = 1/2 sum_{x,y} w(x,y) (u(x)-u(y)) (v(x)-v(y))  (ordered pairs).
double dirichlet_energy(const StateSpace& space, const Eigen::VectorXd& u,
                        const Eigen::VectorXd& v);

/// Energy-measure density against m:
/// gamma(u)(x) = (1/m(x)) sum_y w(x,y) (u(x)-u(y))^2,
/// so E(u,u) = 1/2 sum_x gamma(u)(x) m(x).
Eigen::VectorXd energy_density(const StateSpace& space, const Eigen::VectorXd& u);

/// (Au)(x) = (1/m(x)) sum_y w(x,y) (u(y)-u(x)); <-Au,u>_m = E(u,u).
Eigen::VectorXd generator_apply(const StateSpace& space, const Eigen::VectorXd& u);

struct KernelValue {
  double t = 0.0;
  int x = 0, y = 0;
  double value = 0.0;      ///< p_t(x,y), floored at 0
  double log_value = 0.0;  ///< robust log p_t(x,y) (-inf if the kernel vanishes)
  bool floored = false;    ///< raw spectral sum fell below -1e-12
};

/// Eigendecomposition of the m-symmetrized generator; immutable after build.
/// Eigenvalues 0 = lambda_0 <= ... <= lambda_{n-1}, modes phi_k orthonormal
/// in L^2(m). Backs exact semigroup and heat-kernel evaluation at any t.
class SpectralCache {
 public:
  static SpectralCache build(std::shared_ptr<const StateSpace> space);

  const StateSpace& space() const { return *space_; }
  std::shared_ptr<const StateSpace> space_ptr() const { return space_; }
  const Eigen::VectorXd& eigenvalues() const { return eigenvalues_; }
  /// Columns are the m-orthonormal modes phi_k.
  const Eigen::MatrixXd& modes() const { return modes_; }

  /// p_t(x,y) = sum_k exp(-lambda_k t) phi_k(x) phi_k(y); symmetric as
  /// computed (arguments are canonicalized). Deep-tail values where the
  /// double spectral sum is below its cancellation floor are recovered in
  /// log space from the jump-chain series.
  KernelValue heat_kernel(double t, int x, int y) const;
  double log_heat_kernel(double t, int x, int y) const;

  /// T_t f; T_0 is the identity and ||T_t f||_{L^2(m)} <= ||f||_{L^2(m)}.
  Eigen::VectorXd semigroup_apply(double t, const Eigen::VectorXd& f) const;

  /// Dense kernel matrix [p_t(x,y)]_{x,y} (double path, no flooring).
  Eigen::MatrixXd kernel_matrix(double t) const;

  /// max_{x,y} | p_t(x,y) - sum_z p_r(x,z) p_{t-r}(z,y) m(z) |.
  double chapman_kolmogorov_residual(double t, double r) const;

  /// log T_t 1_A(x), deep-tail safe.
  double log_semigroup_indicator(double t, int x, const Region& A) const;
  /// log (1_A, T_t 1_B)_{L^2(m)}, deep-tail safe.
  double log_inner_indicator(double t, const Region& A, const Region& B) const;

 private:
  std::shared_ptr<const StateSpace> space_;
  Eigen::VectorXd eigenvalues_;
  Eigen::MatrixXd modes_;

  /// Spectral pair sum with its absolute-term mass (for the reliability test).
  double pair_sum(double t, int x, int y, double& abs_mass) const;
};

/// P(X_t = y | X_0 = x) for the chain with jump rates w(x,y)/m(x), evaluated
/// by uniformization: a Poisson-weighted series of substochastic products,
/// every term nonnegative, so tiny probabilities keep full relative accuracy.
/// Returns log-probabilities (-inf when unreachable within the series).
Eigen::VectorXd log_transition_row(const StateSpace& space, double t, int x);

}  // namespace dflab
