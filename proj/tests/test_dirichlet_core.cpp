#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <memory>
#include <random>

#include "dflab/spectral.hpp"
#include "dflab/state_space.hpp"
#include "oracles.hpp"

using namespace dflab;

namespace {

std::shared_ptr<StateSpace> shared(StateSpace space) {
  return std::make_shared<StateSpace>(std::move(space));
}

Eigen::VectorXd random_function(int n, unsigned seed) {
  std::mt19937 gen(seed);
  std::normal_distribution<double> normal;
  Eigen::VectorXd u(n);
  for (int i = 0; i < n; ++i) u[i] = normal(gen);
  return u;
}

double weighted_dot(const StateSpace& space, const Eigen::VectorXd& a, const Eigen::VectorXd& b) {
  double s = 0.0;
  for (int i = 0; i < space.size(); ++i) s += space.measure[i] * a[i] * b[i];
  return s;
}

}  // namespace

TEST_CASE("dirichlet energy: hand values and bilinearity") {
  const auto two = build_two_state(1.0, 1.0, 1.0);
  Eigen::VectorXd u(2);
  u << 1.0, 0.0;
  CHECK(dirichlet_energy(two, u, u) == doctest::Approx(1.0).epsilon(1e-12));

  const auto lattice = build_lattice_1d(64, 1.0, 1.0);
  Eigen::VectorXd linear(lattice.size());
  for (int i = 0; i < lattice.size(); ++i) linear[i] = lattice.positions[i][0];
  // 64 edges, each contributing 32 * (1/64)^2
  CHECK(dirichlet_energy(lattice, linear, linear) == doctest::Approx(0.5).epsilon(1e-12));

  const Eigen::VectorXd constant = Eigen::VectorXd::Constant(lattice.size(), 3.7);
  CHECK(dirichlet_energy(lattice, constant, constant) == doctest::Approx(0.0));
  CHECK_THROWS_AS(dirichlet_energy(two, linear, linear), std::invalid_argument);
}

TEST_CASE("energy density: pointwise values and energy identity") {
  const auto two = build_two_state(1.0, 1.0, 1.0);
  Eigen::VectorXd u(2);
  u << 1.0, 0.0;
  const auto gamma = energy_density(two, u);
  CHECK(gamma[0] == doctest::Approx(1.0));
  CHECK(gamma[1] == doctest::Approx(1.0));

  const auto lattice = build_lattice_1d(64, 1.0, 1.0);
  Eigen::VectorXd linear(lattice.size());
  for (int i = 0; i < lattice.size(); ++i) linear[i] = lattice.positions[i][0];
  CHECK(energy_density(lattice, linear)[32] == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(energy_density(lattice, Eigen::VectorXd::Zero(lattice.size())).maxCoeff() == 0.0);
}

TEST_CASE("generator: hand values and eigenvector identity") {
  const auto two = build_two_state(1.0, 1.0, 1.0);
  Eigen::VectorXd u(2);
  u << 1.0, 0.0;
  const auto au = generator_apply(two, u);
  CHECK(au[0] == doctest::Approx(-1.0));
  CHECK(au[1] == doctest::Approx(1.0));

  const auto cache = SpectralCache::build(shared(build_lattice_1d(64, 1.0, 1.0)));
  const Eigen::VectorXd phi1 = cache.modes().col(1);
  const Eigen::VectorXd lhs = generator_apply(cache.space(), phi1);
  const Eigen::VectorXd rhs = -cache.eigenvalues()[1] * phi1;
  CHECK((lhs - rhs).cwiseAbs().maxCoeff() <= 1e-8);
}

TEST_CASE("spectral cache: spectrum and mode normalization") {
  const auto cache = SpectralCache::build(shared(build_lattice_1d(64, 1.0, 1.0)));
  CHECK(std::abs(cache.eigenvalues()[0]) <= 1e-10);
  // Neumann half-Laplacian on [0,1]: lambda_1 = pi^2/2
  CHECK(cache.eigenvalues()[1] ==
        doctest::Approx(M_PI * M_PI / 2.0).epsilon(0.01));

  // phi_0 constant, and the modes are m-orthonormal
  const auto& space = cache.space();
  const Eigen::VectorXd phi0 = cache.modes().col(0);
  CHECK((phi0.array() - phi0[0]).abs().maxCoeff() <= 1e-9);
  for (int j : {0, 1, 5})
    for (int k : {0, 1, 5}) {
      const double dot = weighted_dot(space, cache.modes().col(j), cache.modes().col(k));
      CHECK(dot == doctest::Approx(j == k ? 1.0 : 0.0).epsilon(1e-10));
    }
}

TEST_CASE("heat kernel: closed form, equilibrium, continuum envelope") {
  const auto cache = SpectralCache::build(shared(build_two_state(1.0, 1.0, 1.0)));
  const double expected = oracles::two_state_kernel(0.5, 0, 1);
  CHECK(expected == doctest::Approx(0.5 * (1.0 - std::exp(-1.0))));
  CHECK(cache.heat_kernel(0.5, 0, 1).value == doctest::Approx(expected).epsilon(1e-12));
  CHECK(cache.heat_kernel(50.0, 0, 1).value == doctest::Approx(0.5).epsilon(1e-10));
  CHECK_THROWS_AS(cache.heat_kernel(0.0, 0, 1), std::invalid_argument);

  const auto fine = SpectralCache::build(shared(build_lattice_1d(256, 1.0, 1.0)));
  const int x = 64, y = 192;  // positions 0.25 and 0.75
  const double gauss = std::pow(2.0 * M_PI * 0.01, -0.5) * std::exp(-0.125 / 0.01);
  CHECK(fine.heat_kernel(0.01, x, y).value == doctest::Approx(gauss).epsilon(0.20));
}

TEST_CASE("semigroup: identity at zero, eigen decay, closed form") {
  const auto cache = SpectralCache::build(shared(build_lattice_1d(32, 1.0, 1.0)));
  const Eigen::VectorXd f = random_function(cache.space().size(), 7);
  CHECK((cache.semigroup_apply(0.0, f) - f).cwiseAbs().maxCoeff() <= 1e-10);

  const Eigen::VectorXd phi1 = cache.modes().col(1);
  const Eigen::VectorXd expected = std::exp(-cache.eigenvalues()[1] * 0.3) * phi1;
  CHECK((cache.semigroup_apply(0.3, phi1) - expected).cwiseAbs().maxCoeff() <= 1e-10);

  const auto two = SpectralCache::build(shared(build_two_state(1.0, 1.0, 1.0)));
  Eigen::VectorXd indicator(2);
  indicator << 0.0, 1.0;
  const Eigen::VectorXd evolved = two.semigroup_apply(0.5, indicator);
  CHECK(evolved[0] == doctest::Approx(0.5 * (1.0 - std::exp(-1.0))).epsilon(1e-10));
  CHECK(evolved[1] == doctest::Approx(0.5 * (1.0 + std::exp(-1.0))).epsilon(1e-10));
  CHECK_THROWS_AS(two.semigroup_apply(-0.1, indicator), std::invalid_argument);
}

TEST_CASE("chapman-kolmogorov residuals") {
  const auto two = SpectralCache::build(shared(build_two_state(1.0, 1.0, 1.0)));
  CHECK(two.chapman_kolmogorov_residual(1.0, 0.3) <= 1e-10);

  const auto lattice = SpectralCache::build(shared(build_lattice_1d(64, 1.0, 1.0)));
  CHECK(lattice.chapman_kolmogorov_residual(0.1, 0.05) <= 1e-8);

  const auto grid = SpectralCache::build(shared(build_grid_2d(8, 8, 1.0, 1.0, 1.0)));
  CHECK(grid.chapman_kolmogorov_residual(0.1, 0.05) <= 1e-8);
  CHECK_THROWS_AS(grid.chapman_kolmogorov_residual(0.1, 0.1), std::invalid_argument);
}

TEST_CASE("kernel symmetry is exact as computed") {
  const auto cache = SpectralCache::build(shared(build_lattice_1d(48, 1.0, 1.0)));
  for (double t : {1e-3, 0.05, 1.0})
    for (int x : {0, 7, 20})
      for (int y : {3, 31, 48})
        CHECK(cache.heat_kernel(t, x, y).value == cache.heat_kernel(t, y, x).value);
}

TEST_CASE("mass conservation across the time range") {
  for (auto space : {shared(build_two_state(1.0, 2.0, 1.0)),
                     shared(build_lattice_1d(64, 1.0, 1.0)),
                     shared(build_grid_2d(8, 8, 1.0, 1.0, 1.0))}) {
    const auto cache = SpectralCache::build(space);
    const Eigen::VectorXd ones = Eigen::VectorXd::Ones(space->size());
    for (double t : {1e-4, 1e-2, 0.5, 10.0})
      CHECK((cache.semigroup_apply(t, ones).array() - 1.0).abs().maxCoeff() <= 1e-8);
  }
}

TEST_CASE("L2 contraction is monotone in t") {
  const auto cache = SpectralCache::build(shared(build_lattice_1d(32, 1.0, 1.0)));
  const auto& space = cache.space();
  const Eigen::VectorXd f = random_function(space.size(), 11);
  double prev = std::sqrt(weighted_dot(space, f, f));
  for (int i = 1; i <= 20; ++i) {
    const Eigen::VectorXd g = cache.semigroup_apply(0.02 * i, f);
    const double norm = std::sqrt(weighted_dot(space, g, g));
    CHECK(norm <= prev + 1e-12);
    prev = norm;
  }
}

TEST_CASE("spectral-energy consistency over random functions") {
  const auto lattice = build_lattice_1d(24, 1.0, 1.0);
  for (unsigned seed = 0; seed < 100; ++seed) {
    const Eigen::VectorXd u = random_function(lattice.size(), seed);
    const double via_energy = dirichlet_energy(lattice, u, u);
    const double via_generator = -weighted_dot(lattice, generator_apply(lattice, u), u);
    double via_density = 0.0;
    const auto gamma = energy_density(lattice, u);
    for (int x = 0; x < lattice.size(); ++x) via_density += gamma[x] * lattice.measure[x];
    via_density *= 0.5;
    const double scale = std::max(1.0, std::abs(via_energy));
    CHECK(std::abs(via_energy - via_generator) <= 1e-10 * scale);
    CHECK(std::abs(via_energy - via_density) <= 1e-10 * scale);
  }
}

TEST_CASE("log kernel agrees with the dense path where both are reliable") {
  const auto space = shared(build_lattice_1d(64, 1.0, 1.0));
  const auto cache = SpectralCache::build(space);
  for (double t : {0.05, 0.3}) {
    const Eigen::VectorXd logs = log_transition_row(*space, t, 10);
    for (int y : {0, 10, 40}) {
      const double dense = cache.heat_kernel(t, 10, y).value * space->measure[y];
      CHECK(std::exp(logs[y]) == doctest::Approx(dense).epsilon(1e-9));
    }
  }
}

TEST_CASE("log kernel reaches the deep tail the dense path cannot") {
  const auto cache = SpectralCache::build(shared(build_lattice_1d(256, 1.0, 1.0)));
  const int x = 64, y = 192;
  const double log_p = cache.log_heat_kernel(2e-3, x, y);
  // leading Gaussian behaviour: log p ~ -d^2/(2t) - log sqrt(2 pi t) with
  // a known O(1) jump-tail correction at this t; demand the right ballpark
  const double gauss = -0.125 / 2e-3 - 0.5 * std::log(2.0 * M_PI * 2e-3);
  CHECK(log_p < -50.0);
  CHECK(std::abs(log_p - gauss) / std::abs(gauss) < 0.12);
  // and exact symmetry of the log path
  CHECK(cache.log_heat_kernel(2e-3, y, x) == log_p);
}
