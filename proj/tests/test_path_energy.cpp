#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <memory>
#include <random>

#include "dflab/metric.hpp"
#include "dflab/path_energy.hpp"
#include "dflab/state_space.hpp"
#include "dflab/time_partition.hpp"

using namespace dflab;

namespace {

Eigen::VectorXd vec2(double x, double y) {
  Eigen::VectorXd v(2);
  v << x, y;
  return v;
}

Curve unit_diagonal() { return Curve::line(vec2(0.0, 0.0), vec2(1.0, 1.0)); }

Curve half_circle() { return Curve::circle_arc(Eigen::Vector2d(0.0, 0.0), 1.0, 0.0, M_PI); }

Curve jump_curve() {
  return Curve::piecewise_constant({0.0, 0.5}, {vec2(0.0, 0.0), vec2(0.5, 0.0)});
}

Curve random_polyline(std::mt19937& gen) {
  std::normal_distribution<double> step(0.0, 0.3);
  Eigen::MatrixXd pts(16, 2);
  pts.row(0).setZero();
  for (int i = 1; i < 16; ++i) {
    pts(i, 0) = pts(i - 1, 0) + step(gen);
    pts(i, 1) = pts(i - 1, 1) + step(gen);
  }
  return Curve::euclidean_samples(pts);
}

TimePartition random_partition(std::mt19937& gen, int interior) {
  std::uniform_real_distribution<double> uni(1e-6, 1.0 - 1e-6);
  std::vector<double> times{0.0, 1.0};
  for (int i = 0; i < interior; ++i) times.push_back(uni(gen));
  std::sort(times.begin(), times.end());
  times.erase(std::unique(times.begin(), times.end()), times.end());
  return TimePartition(times);
}

}  // namespace

TEST_CASE("discrete energy: constants, straight line, geodesic refinement") {
  const auto still = Curve::line(vec2(0.3, -1.0), vec2(0.3, -1.0));
  CHECK(discrete_energy(still, TimePartition({0.0, 0.25, 1.0})) == 0.0);

  const auto line = unit_diagonal();
  CHECK(discrete_energy(line, TimePartition({0.0, 1.0})) == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(discrete_energy(line, TimePartition({0.0, 0.5, 1.0})) ==
        doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("energy sup: line converges immediately, half-circle from below") {
  const auto line_estimate = energy_sup(unit_diagonal());
  CHECK(line_estimate.converged);
  CHECK(line_estimate.level == 1);
  CHECK(line_estimate.value == doctest::Approx(1.0).epsilon(1e-9));

  const auto arc_estimate = energy_sup(half_circle());
  CHECK(arc_estimate.converged);
  const double target = M_PI * M_PI / 2.0;
  CHECK(std::abs(arc_estimate.value - target) <= 0.005 * target);
  // dyadic sums increase toward the supremum
  for (std::size_t k = 1; k < arc_estimate.per_level.size(); ++k)
    CHECK(arc_estimate.per_level[k] >= arc_estimate.per_level[k - 1] - 1e-12);
}

TEST_CASE("a jump curve diverges along refinements and is flagged") {
  const auto estimate = energy_sup(jump_curve(), 1e-6, 14);
  CHECK_FALSE(estimate.converged);
  // chord term delta^2 / (2 * 2^-k) doubles per level
  const auto& lv = estimate.per_level;
  CHECK(lv.back() > 100.0);
  CHECK(lv.back() >= 1.9 * lv[lv.size() - 2]);
}

TEST_CASE("metric derivative: line, half-circle, constant") {
  const auto line = unit_diagonal();
  for (double t : {0.2, 0.5, 0.8}) {
    const auto speed = metric_derivative(line, t);
    CHECK(speed.ok);
    CHECK(speed.value == doctest::Approx(std::sqrt(2.0)).epsilon(1e-6));
  }
  const auto arc_speed = metric_derivative(half_circle(), 0.5);
  CHECK(arc_speed.ok);
  CHECK(std::abs(arc_speed.value - M_PI) <= 0.001 * M_PI);

  const auto still = Curve::line(vec2(1.0, 2.0), vec2(1.0, 2.0));
  CHECK(metric_derivative(still, 0.4).value == doctest::Approx(0.0));
  CHECK_THROWS_AS(metric_derivative(line, 0.0), std::invalid_argument);
}

TEST_CASE("ac2 energy: line, half-circle, graph geodesic") {
  CHECK(ac2_energy(unit_diagonal()).value == doctest::Approx(1.0).epsilon(1e-6));
  const double target = M_PI * M_PI / 2.0;
  const auto arc = ac2_energy(half_circle());
  CHECK(arc.defined);
  CHECK(std::abs(arc.value - target) <= 0.005 * target);

  auto space = std::make_shared<StateSpace>(build_lattice_1d(256, 1.0, 1.0));
  auto dmat = std::make_shared<DistanceMatrix>(DistanceMatrix::build(*space));
  Eigen::VectorXd from(1), to(1);
  from << 0.25;
  to << 0.75;
  const auto segment = Curve::graph_segment(space, dmat, from, to);
  const auto graph_energy = ac2_energy(segment);
  CHECK(graph_energy.defined);
  CHECK(std::abs(graph_energy.value - 0.125) <= 0.03 * 0.125);
}

TEST_CASE("identification gap: equality for smooth fixtures, undefined off AC2") {
  const auto line_gap = identification_gap(unit_diagonal());
  CHECK(line_gap.defined);
  CHECK(std::abs(line_gap.gap) <= 1e-6);

  const auto arc_gap = identification_gap(half_circle());
  CHECK(arc_gap.defined);
  CHECK(std::abs(arc_gap.gap) <= 0.01 * (M_PI * M_PI / 2.0));
  // one-sided inequality direction: H <= H~ + tol
  CHECK(arc_gap.h_sup <= arc_gap.h_tilde + 0.01 * arc_gap.h_tilde);

  const auto jump_gap = identification_gap(jump_curve());
  CHECK_FALSE(jump_gap.defined);
  CHECK(std::isinf(jump_gap.h_sup));
  CHECK(std::isinf(jump_gap.h_tilde));
}

TEST_CASE("quadratic reparametrization: energy 2/3, not 1/2") {
  // gamma(t) = t^2 on [0,1] in R^1: speed 2t, H~ = (1/2) int 4 t^2 = 2/3
  const auto curve = Curve::polynomial({{0.0, 0.0, 1.0}});
  const auto sup = energy_sup(curve);
  CHECK(sup.converged);
  CHECK(std::abs(sup.value - 2.0 / 3.0) <= 0.01 * (2.0 / 3.0));
  const auto tilde = ac2_energy(curve, 128);
  CHECK(std::abs(tilde.value - 2.0 / 3.0) <= 0.01 * (2.0 / 3.0));
}

TEST_CASE("refinement monotonicity over random curves and partitions") {
  std::mt19937 gen(99);
  std::uniform_int_distribution<int> interior(0, 6);
  for (int trial = 0; trial < 100; ++trial) {
    const auto curve = random_polyline(gen);
    const auto coarse = random_partition(gen, interior(gen));
    std::vector<double> extra;
    for (int i = 0; i < 3; ++i) extra.push_back((gen() % 1000 + 0.5) / 1001.0);
    const auto fine = coarse.refine_with(extra);
    CHECK(coarse.refined_by(fine));
    CHECK(discrete_energy(curve, coarse) <= discrete_energy(curve, fine) + 1e-12);
  }
}

TEST_CASE("projective consistency of stage energies on vertex chains") {
  const auto space = build_lattice_1d(16, 1.0, 1.0);
  const auto dmat = DistanceMatrix::build(space);
  std::mt19937 gen(5);
  for (int trial = 0; trial < 50; ++trial) {
    const auto fine = random_partition(gen, 4);
    // coarse partition: every other interior time of the fine one
    std::vector<double> coarse_times{0.0, 1.0};
    for (std::size_t i = 1; i + 1 < fine.times().size(); i += 2)
      coarse_times.push_back(fine.times()[i]);
    std::sort(coarse_times.begin(), coarse_times.end());
    const TimePartition coarse(coarse_times);

    std::vector<int> chain(fine.times().size());
    for (auto& v : chain) v = static_cast<int>(gen() % space.size());

    auto stagewise = [&](const TimePartition& partition, const std::vector<int>& pts) {
      double sum = 0.0;
      for (int i = 0; i + 1 < static_cast<int>(pts.size()); ++i) {
        const double d = dmat.lower(pts[i], pts[i + 1]);
        sum += 0.5 * d * d / partition.delta(i);
      }
      return sum;
    };
    // restrict the chain to the coarse times
    std::vector<int> restricted;
    for (double tc : coarse.times())
      for (std::size_t i = 0; i < fine.times().size(); ++i)
        if (fine.times()[i] == tc) restricted.push_back(chain[i]);
    CHECK(stagewise(coarse, restricted) <= stagewise(fine, chain) + 1e-12);
  }
}

TEST_CASE("chord bound from cauchy-schwarz on any partition") {
  std::mt19937 gen(7);
  for (int trial = 0; trial < 20; ++trial) {
    const auto curve = random_polyline(gen);
    const auto partition = random_partition(gen, 5);
    double chord_sum = 0.0;
    for (int i = 0; i < partition.intervals(); ++i)
      chord_sum += curve.distance(partition.time(i), partition.time(i + 1));
    CHECK(chord_sum <= std::sqrt(2.0 * discrete_energy(curve, partition)) + 1e-9);
  }
}
