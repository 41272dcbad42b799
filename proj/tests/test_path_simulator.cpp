#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <limits>
#include <memory>

#include "dflab/asymptotics.hpp"
#include "dflab/fdd.hpp"
#include "dflab/metric.hpp"
#include "dflab/simulate.hpp"
#include "dflab/spectral.hpp"
#include "dflab/state_space.hpp"
#include "oracles.hpp"

using namespace dflab;

namespace {

struct Fixture {
  std::shared_ptr<StateSpace> space;
  std::shared_ptr<DistanceMatrix> dmat;
  std::shared_ptr<SpectralCache> cache;
};

Fixture make(StateSpace s) {
  Fixture f;
  f.space = std::make_shared<StateSpace>(std::move(s));
  f.dmat = std::make_shared<DistanceMatrix>(DistanceMatrix::build(*f.space));
  f.cache = std::make_shared<SpectralCache>(SpectralCache::build(f.space));
  return f;
}

TubeEvent geodesic_tube(const Fixture& f, double delta, int checkpoints) {
  Eigen::VectorXd from(1), to(1);
  from << 0.25;
  to << 0.75;
  return TubeEvent{Curve::graph_segment(f.space, f.dmat, from, to), delta,
                   TimePartition::uniform(checkpoints - 1)};
}

}  // namespace

TEST_CASE("fixed seeds reproduce paths bit for bit") {
  const auto space = build_lattice_1d(64, 1.0, 1.0);
  const auto a = sample_path(space, 0.05, 32, 12345, 7);
  const auto b = sample_path(space, 0.05, 32, 12345, 7);
  CHECK(a.jump_times == b.jump_times);
  CHECK(a.states == b.states);
  const auto c = sample_path(space, 0.05, 32, 12345, 8);
  CHECK(a.jump_times != c.jump_times);
}

TEST_CASE("path bookkeeping: rescaled jump times, adjacency of moves") {
  const auto space = build_lattice_1d(64, 1.0, 1.0);
  const auto path = sample_path(space, 0.05, 32, 99, 0);
  REQUIRE(path.states.size() == path.jump_times.size() + 1);
  for (std::size_t i = 0; i + 1 < path.jump_times.size(); ++i)
    CHECK(path.jump_times[i] < path.jump_times[i + 1]);
  for (double t : path.jump_times) {
    CHECK(t > 0.0);
    CHECK(t <= 1.0);
  }
  for (std::size_t i = 0; i + 1 < path.states.size(); ++i)
    CHECK(space.conductance(path.states[i], path.states[i + 1]) > 0.0);
  CHECK(path.state_at(0.0) == 32);
  CHECK(path.state_at(1.0) == path.states.back());
}

TEST_CASE("vanishing horizon freezes the chain") {
  const auto space = build_two_state(1.0, 1.0, 1.0);
  int constant = 0;
  for (int i = 0; i < 500; ++i) {
    const auto path = sample_path(space, 1e-9, 0, 4242, i);
    if (path.jump_times.empty()) ++constant;
  }
  CHECK(constant == 500);
}

TEST_CASE("two-state empirical marginal matches the closed-form kernel") {
  const auto space = build_two_state(1.0, 1.0, 1.0);
  const long long n = 100000;
  long long hits = 0;
  for (long long i = 0; i < n; ++i) {
    const auto path = sample_path(space, 0.5, 0, 777, static_cast<std::uint64_t>(i));
    if (path.state_at(1.0) == 1) ++hits;
  }
  const double expected = oracles::two_state_kernel(0.5, 0, 1) * 1.0;  // p * m(v2)
  const double p_hat = static_cast<double>(hits) / n;
  const double sigma = std::sqrt(expected * (1.0 - expected) / n);
  CHECK(std::abs(p_hat - expected) <= 3.0 * sigma);
}

TEST_CASE("lattice marginal matches the semigroup within a 4-sigma band") {
  auto f = make(build_lattice_1d(16, 1.0, 1.0));
  const int x0 = 8;
  const double s = 0.1;
  Eigen::VectorXd delta = Eigen::VectorXd::Zero(f.space->size());
  delta[x0] = 1.0 / f.space->measure[x0];
  const Eigen::VectorXd marginal = f.cache->semigroup_apply(s, delta);

  const long long n = 20000;
  std::vector<long long> counts(f.space->size(), 0);
  for (long long i = 0; i < n; ++i)
    ++counts[sample_path(*f.space, s, x0, 2718, static_cast<std::uint64_t>(i)).state_at(1.0)];
  for (int v : {6, 7, 8, 9, 10}) {
    const double expected = marginal[v] * f.space->measure[v];
    const double sigma = std::sqrt(expected * (1.0 - expected) / n);
    CHECK(std::abs(static_cast<double>(counts[v]) / n - expected) <= 4.0 * sigma);
  }
}

TEST_CASE("tube probability: full tube certain, interval scaling") {
  auto f = make(build_lattice_1d(16, 1.0, 1.0));
  const auto wide = geodesic_tube(f, 2.0, 5);
  const auto sure = tube_probability(*f.space, *f.dmat, wide, 0.05, 2000, 1);
  CHECK(sure.p_hat == 1.0);
  CHECK(sure.hits == 2000);

  const auto tube = geodesic_tube(f, 0.25, 3);
  const auto small = tube_probability(*f.space, *f.dmat, tube, 0.05, 4000, 5);
  const auto big = tube_probability(*f.space, *f.dmat, tube, 0.05, 8000, 5);
  const double ratio = (big.wilson_hi - big.wilson_lo) / (small.wilson_hi - small.wilson_lo);
  CHECK(ratio >= 0.6);
  CHECK(ratio <= 0.85);
  CHECK_THROWS_AS(tube_probability(*f.space, *f.dmat, tube, 0.05, 100, 1),
                  std::invalid_argument);
}

TEST_CASE("tube monte carlo agrees with the exact fdd oracle") {
  auto f = make(build_lattice_1d(64, 1.0, 1.0));
  const auto tube = geodesic_tube(f, 0.1, 5);
  const double s = 0.02;
  const auto cylinder = tube_to_cylinder(*f.space, *f.dmat, tube);
  const double exact = fdd_probability(*f.cache, cylinder, s);
  const long long n = 20000;
  const auto mc = tube_probability(*f.space, *f.dmat, tube, s, n, 31337);
  const double sigma = std::sqrt(exact * (1.0 - exact) / n);
  CHECK(std::abs(mc.p_hat - exact) <= 3.0 * sigma);
  // identical rerun, bit for bit
  const auto again = tube_probability(*f.space, *f.dmat, tube, s, n, 31337);
  CHECK(again.hits == mc.hits);
}

TEST_CASE("tube ldp bracket containment on the lattice geodesic") {
  auto f = make(build_lattice_1d(256, 1.0, 1.0));
  const auto tube = geodesic_tube(f, 0.1, 5);
  const auto result =
      tube_ldp_estimate(*f.cache, *f.dmat, tube, log_spaced_grid(2e-3, 2e-2, 10), 2000, 11);
  for (const auto& pt : result.points) CHECK(pt.exact);
  const double lo = result.rates.shrunken.infinite
                        ? -std::numeric_limits<double>::infinity()
                        : -result.rates.shrunken.rate;
  const double hi = -result.rates.enlarged.rate;
  const double slack = 3.0 * result.fit_residual + 1e-9;
  CHECK(result.fitted_limit >= lo - slack);
  CHECK(result.fitted_limit <= hi + slack);
  // the center curve's energy bounds the admissible decay from below
  CHECK(result.center_energy_defined);
  CHECK(-result.center_energy <= hi + 1e-9);
}

TEST_CASE("tube ldp estimate: trivial tube, brackets, negative control") {
  auto f = make(build_lattice_1d(16, 1.0, 1.0));
  const auto wide = geodesic_tube(f, 10.0, 3);
  const auto trivial =
      tube_ldp_estimate(*f.cache, *f.dmat, wide, log_spaced_grid(0.01, 0.1, 6), 2000, 3);
  CHECK(std::abs(trivial.fitted_limit) <= 1e-9);

  auto two = make(build_two_state(1.0, 1.0, 1.0));
  Eigen::VectorXd from(1), to(1);
  from << 0.0;
  to << 0.0;
  // center curve sits on vertex 0 the whole time (graph samples)
  const TubeEvent stay{Curve::graph_samples(two.space, two.dmat, {0, 0, 0}), 0.5,
                       TimePartition::uniform(2)};
  const auto control =
      tube_ldp_estimate(*two.cache, *two.dmat, stay, log_spaced_grid(0.01, 0.1, 6), 2000, 3);
  CHECK(control.window_empty);
}
