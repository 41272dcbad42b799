// Acceptance suite: one self-contained check per shipped guarantee, each
// printing a single [PASS]/[FAIL] line with the measured numbers. The
// process exit code is the number of failed criteria.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <memory>
#include <random>
#include <string>
#include <vector>

#include "dflab/asymptotics.hpp"
#include "dflab/fdd.hpp"
#include "dflab/inequalities.hpp"
#include "dflab/metric.hpp"
#include "dflab/path_energy.hpp"
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

Fixture make(StateSpace s, bool with_cache = true) {
  Fixture f;
  f.space = std::make_shared<StateSpace>(std::move(s));
  f.dmat = std::make_shared<DistanceMatrix>(DistanceMatrix::build(*f.space));
  if (with_cache) f.cache = std::make_shared<SpectralCache>(SpectralCache::build(f.space));
  return f;
}

struct Criterion {
  bool pass = true;
  std::string detail;

  void require(bool ok, const std::string& what) {
    if (!ok) {
      pass = false;
      if (!detail.empty()) detail += "; ";
      detail += what;
    }
  }
  void note(const std::string& what) {
    if (!detail.empty()) detail += "; ";
    detail += what;
  }
};

std::string num(double v) {
  char buf[48];
  std::snprintf(buf, sizeof(buf), "%.6g", v);
  return buf;
}

// 1. Chapman-Kolmogorov and mass conservation at spectral precision.
Criterion criterion_spectral_exactness() {
  Criterion c;
  for (auto& f : {make(build_two_state(1.0, 1.0, 1.0)), make(build_lattice_1d(256, 1.0, 1.0)),
                  make(build_grid_2d(32, 32, 1.0, 1.0, 1.0))}) {
    const Eigen::VectorXd ones = Eigen::VectorXd::Ones(f.space->size());
    for (double t : {1e-3, 1e-2, 0.1, 1.0}) {
      const double ck = f.cache->chapman_kolmogorov_residual(t, t / 2.0);
      c.require(ck <= 1e-8, f.space->kind + " CK residual " + num(ck) + " at t=" + num(t));
      const double mass = (f.cache->semigroup_apply(t, ones).array() - 1.0).abs().maxCoeff();
      c.require(mass <= 1e-8, f.space->kind + " mass defect " + num(mass) + " at t=" + num(t));
    }
  }
  return c;
}

// 2. Intrinsic metric: analytic two-state value, euclidean lattice value,
//    metric axioms on all pairs of the coarse lattice.
Criterion criterion_intrinsic_metric() {
  Criterion c;
  const auto two = build_two_state(1.0, 1.0, 1.0);
  const auto pair = intrinsic_distance(two, 0, 1, 1e-6);
  c.require(std::abs(pair.lower - 1.0) <= 1e-6,
            "two_state d = " + num(pair.lower) + " vs analytic 1.0");

  const auto lattice = build_lattice_1d(64, 1.0, 1.0);
  const auto mid = intrinsic_distance(lattice, lattice.nearest_vertex({0.25}),
                                      lattice.nearest_vertex({0.75}), 1e-3);
  c.require(std::abs(mid.lower - 0.5) <= 0.01 * 0.5,
            "lattice_1d(64) d(0.25,0.75) = " + num(mid.lower));

  const double tol = 1e-3;
  const auto coarse = build_lattice_1d(16, 1.0, 1.0);
  const auto dmat = DistanceMatrix::build(coarse, tol);
  bool symmetric = true, triangle = true;
  for (int x = 0; x < coarse.size(); ++x)
    for (int y = 0; y < coarse.size(); ++y) {
      symmetric = symmetric && dmat.lower(x, y) == dmat.lower(y, x);
      for (int z = 0; z < coarse.size(); ++z)
        triangle =
            triangle && dmat.lower(x, z) <= dmat.lower(x, y) + dmat.lower(y, z) + 2.0 * tol;
    }
  c.require(symmetric, "symmetry violated on lattice_1d(16)");
  c.require(triangle, "triangle inequality violated on lattice_1d(16)");
  c.note("two_state " + num(pair.lower) + ", lattice " + num(mid.lower));
  return c;
}

// 3. Functional inequality constants on the desk fixtures.
Criterion criterion_functional_inequalities() {
  Criterion c;
  auto line = make(build_lattice_1d(256, 1.0, 1.0));
  const auto region1 = box_region(*line.space, {0.05}, {0.95});
  const double n1 =
      doubling_exponent(*line.space, *line.dmat, region1, {0.05, 0.1, 0.2}).best;
  c.require(n1 >= 0.9 && n1 <= 1.2, "1d doubling exponent " + num(n1));

  auto plane = make(build_grid_2d(32, 32, 1.0, 1.0, 1.0), false);
  const auto region2 = box_region(*plane.space, {0.05, 0.05}, {0.95, 0.95});
  const double n2 =
      doubling_exponent(*plane.space, *plane.dmat, region2, {0.05, 0.1, 0.2}).best;
  c.require(n2 >= 1.8 && n2 <= 2.3, "2d doubling exponent " + num(n2));

  const int mid = line.space->nearest_vertex({0.5});
  const double continuum = 4.0 / (M_PI * M_PI);
  const auto pi1 = poincare_constant(*line.space, *line.dmat, mid, 0.1);
  c.require(pi1.defined && std::abs(pi1.kappa - continuum) <= 0.1 * continuum,
            "poincare kappa(r=0.1) = " + num(pi1.kappa));
  const auto pi2 = poincare_constant(*line.space, *line.dmat, mid, 0.05);
  c.require(pi2.defined && std::abs(pi2.kappa - pi1.kappa) <= 0.1 * pi1.kappa,
            "poincare kappa(r=0.05) = " + num(pi2.kappa));

  const auto hi_region = box_region(*line.space, {0.2}, {0.8});
  const auto hi1 =
      harnack_constant(*line.cache, *line.dmat, hi_region, {0.1}, {8.0 * 0.01});
  const auto hi2 =
      harnack_constant(*line.cache, *line.dmat, hi_region, {0.05}, {8.0 * 0.0025});
  c.require(hi1.defined && std::isfinite(hi1.best) && hi1.best >= 1.0,
            "harnack C(0.1) = " + num(hi1.best));
  c.require(hi2.defined && std::isfinite(hi2.best) && hi2.best >= 1.0,
            "harnack C(0.05) = " + num(hi2.best));
  const double ratio = hi2.best / hi1.best;
  c.require(ratio >= 0.25 && ratio <= 4.0, "harnack scale ratio " + num(ratio));
  c.note("N1=" + num(n1) + " N2=" + num(n2) + " kappa=" + num(pi1.kappa) +
         " C(0.05)/C(0.1)=" + num(ratio));
  return c;
}

// 4. Varadhan short-time limits with the two-state negative control.
Criterion criterion_varadhan() {
  Criterion c;
  auto f = make(build_lattice_1d(256, 1.0, 1.0));
  const auto grid = log_spaced_grid(2e-3, 2e-2, 12);
  const int a = f.space->nearest_vertex({0.25});
  const int b = f.space->nearest_vertex({0.75});

  const auto pair = varadhan_kernel(*f.cache, *f.dmat, a, b, grid);
  c.require(std::abs(pair.fitted_limit + 0.125) <= 0.05 * 0.125,
            "kernel limit " + num(pair.fitted_limit) + " vs -0.125");

  const auto diag = varadhan_kernel(*f.cache, *f.dmat, a, a, grid);
  c.require(std::abs(diag.fitted_limit) <= 1e-3, "diagonal limit " + num(diag.fitted_limit));

  const auto indicator = varadhan_indicator(
      *f.cache, *f.dmat, box_region(*f.space, {0.0}, {0.1}), f.space->nearest_vertex({0.5}),
      grid);
  c.require(std::abs(indicator.fitted_limit + 0.08) <= 0.07 * 0.08,
            "indicator limit " + num(indicator.fitted_limit) + " vs -0.08");

  auto two = make(build_two_state(1.0, 1.0, 1.0));
  const auto control =
      varadhan_kernel(*two.cache, *two.dmat, 0, 1, log_spaced_grid(0.01, 0.1, 10));
  c.require(control.window_empty, "two_state control: window unexpectedly nonempty");
  c.require(std::abs(control.fitted_limit) <= 0.02,
            "two_state control limit " + num(control.fitted_limit));
  c.note("pair " + num(pair.fitted_limit) + ", indicator " + num(indicator.fitted_limit) +
         ", control " + num(control.fitted_limit));
  return c;
}

// 5. Integrated Gaussian estimate thresholds.
Criterion criterion_gaussian_threshold() {
  Criterion c;
  auto two = make(build_two_state(1.0, 1.0, 1.0));
  const auto result = gaussian_bound_threshold(*two.cache, *two.dmat, Region::of({0}),
                                               Region::of({1}), 1e-3, 4.0, 64);
  c.require(result.violation_found, "two_state: no violation found");
  c.require(std::abs(result.t_star - 0.37) <= 0.03,
            "two_state t* = " + num(result.t_star) + " vs 0.37 +- 0.03");
  const double closed_form = oracles::two_state_gaussian_crossing();
  c.require(std::abs(result.t_star - closed_form) <= 1e-4,
            "two_state t* differs from the closed-form crossing " + num(closed_form));

  double prev = 1e300;
  std::string thresholds;
  for (int cells : {64, 128, 256}) {
    auto f = make(build_lattice_1d(cells, 1.0, 1.0));
    const auto t = gaussian_bound_threshold(*f.cache, *f.dmat,
                                            box_region(*f.space, {0.0}, {0.1}),
                                            box_region(*f.space, {0.9}, {1.0}), 1e-3, 2.0, 40);
    c.require(t.t_star <= prev + 1e-9,
              "threshold increased under refinement at cells=" + std::to_string(cells));
    prev = t.t_star;
    thresholds += (thresholds.empty() ? "" : ", ") + num(t.t_star);
  }
  c.note("t*(two_state)=" + num(result.t_star) + "; lattice t*: " + thresholds);
  return c;
}

// 6. FDD LDP: DP versus enumeration, and the three-set lattice event.
Criterion criterion_fdd_ldp() {
  Criterion c;
  auto coarse = make(build_lattice_1d(16, 1.0, 1.0), false);
  std::mt19937 gen(424242);
  bool dp_exact = true;
  for (int trial = 0; trial < 40 && dp_exact; ++trial) {
    const int stages = 1 + static_cast<int>(gen() % 3);
    std::vector<double> times{0.0, 1.0};
    for (int i = 1; i < stages; ++i) times.push_back(static_cast<double>(i) / stages);
    std::sort(times.begin(), times.end());
    TimePartition partition(times);
    std::vector<Region> sets;
    double product = 1.0;
    for (int i = 0; i <= stages; ++i) {
      std::vector<int> ids;
      const int count = 1 + static_cast<int>(gen() % 8);
      for (int k = 0; k < count; ++k) ids.push_back(static_cast<int>(gen() % coarse.space->size()));
      sets.push_back(Region::of(std::move(ids)));
      product *= sets.back().size();
    }
    if (product > 1e4) continue;
    const auto dp = fdd_rate(*coarse.dmat, sets, partition);
    dp_exact = dp.rate == oracles::fdd_rate_enumeration(*coarse.dmat, sets, partition);
  }
  c.require(dp_exact, "DP rate differs from exhaustive enumeration");

  auto f = make(build_lattice_1d(256, 1.0, 1.0));
  const CylinderEvent event{
      TimePartition({0.0, 0.5, 1.0}),
      {Region::of({f.space->nearest_vertex({0.25})}),
       Region::of(metric_ball(*f.dmat, f.space->nearest_vertex({0.5}), 0.05)),
       Region::of({f.space->nearest_vertex({0.75})})},
      {},
      -1.0};
  const auto curve = fdd_ldp_curve(*f.cache, *f.dmat, event, log_spaced_grid(2e-3, 2e-2, 12));
  c.require(std::abs(curve.fitted_limit + 0.125) <= 0.10 * 0.125,
            "three-set limit " + num(curve.fitted_limit) + " vs -0.125");
  const double slack = 3.0 * curve.fit_residual + 1e-9;
  const double lo =
      curve.bracket.shrunken.infinite ? -1e300 : -curve.bracket.shrunken.rate;
  const double hi = -curve.bracket.enlarged.rate;
  c.require(curve.fitted_limit >= lo - slack && curve.fitted_limit <= hi + slack,
            "limit " + num(curve.fitted_limit) + " outside bracket [" + num(lo) + ", " +
                num(hi) + "] + fit slack " + num(slack));
  c.note("limit " + num(curve.fitted_limit) + " in [" + num(lo) + ", " + num(hi) + "]");
  return c;
}

// 7. Path energy: closed-form fixtures, monotonicity, H = H~ identification.
Criterion criterion_path_energy() {
  Criterion c;
  Eigen::VectorXd o(2), e(2);
  o << 0.0, 0.0;
  e << 1.0, 1.0;
  const auto line = Curve::line(o, e);
  const auto line_sup = energy_sup(line);
  const auto line_ac2 = ac2_energy(line, 128);
  c.require(line_sup.converged && std::abs(line_sup.value - 1.0) <= 1e-6,
            "line H = " + num(line_sup.value));
  c.require(line_ac2.defined && std::abs(line_ac2.value - 1.0) <= 1e-6,
            "line H~ = " + num(line_ac2.value));

  const double half_pi2 = M_PI * M_PI / 2.0;
  const auto arc = Curve::circle_arc(Eigen::Vector2d(0, 0), 1.0, 0.0, M_PI);
  const auto arc_sup = energy_sup(arc);
  const auto arc_ac2 = ac2_energy(arc, 128);
  c.require(arc_sup.converged && std::abs(arc_sup.value - half_pi2) <= 0.005 * half_pi2,
            "half-circle H = " + num(arc_sup.value));
  c.require(arc_ac2.defined && std::abs(arc_ac2.value - half_pi2) <= 0.005 * half_pi2,
            "half-circle H~ = " + num(arc_ac2.value));

  std::mt19937 gen(1123);
  std::normal_distribution<double> step(0.0, 0.3);
  std::uniform_real_distribution<double> uni(1e-6, 1.0 - 1e-6);
  bool monotone = true;
  for (int trial = 0; trial < 100 && monotone; ++trial) {
    Eigen::MatrixXd pts(12, 2);
    pts.row(0).setZero();
    for (int i = 1; i < 12; ++i) {
      pts(i, 0) = pts(i - 1, 0) + step(gen);
      pts(i, 1) = pts(i - 1, 1) + step(gen);
    }
    const auto curve = Curve::euclidean_samples(pts);
    std::vector<double> times{0.0, 1.0};
    for (int i = 0; i < 4; ++i) times.push_back(uni(gen));
    std::sort(times.begin(), times.end());
    times.erase(std::unique(times.begin(), times.end()), times.end());
    const TimePartition coarse_p(times);
    const auto fine_p = coarse_p.refine_with({uni(gen), uni(gen), uni(gen)});
    monotone = discrete_energy(curve, coarse_p) <= discrete_energy(curve, fine_p) + 1e-12;
  }
  c.require(monotone, "refinement monotonicity failed on a random pair");

  const auto reparam = Curve::polynomial({{0.0, 0.0, 1.0}});
  const auto reparam_sup = energy_sup(reparam);
  c.require(std::abs(reparam_sup.value - 2.0 / 3.0) <= 0.01 * (2.0 / 3.0),
            "reparametrized line energy " + num(reparam_sup.value) + " vs 2/3");

  int idx = 0;
  for (const auto* fixture : {&line, &arc, &reparam}) {
    const auto gap = identification_gap(*fixture);
    const double scale = std::max(gap.h_tilde, 1.0);
    c.require(gap.defined && std::abs(gap.gap) <= 0.01 * scale,
              "identification gap fixture " + std::to_string(idx) + " = " + num(gap.gap));
    ++idx;
  }

  const auto jump =
      Curve::piecewise_constant({0.0, 0.5}, {0.0 * e, 0.5 * e / std::sqrt(2.0)});
  const auto jump_gap = identification_gap(jump);
  c.require(!jump_gap.defined && std::isinf(jump_gap.h_sup) && std::isinf(jump_gap.h_tilde),
            "jump fixture not flagged divergent");
  c.note("line " + num(line_sup.value) + ", arc " + num(arc_sup.value) + ", reparam " +
         num(reparam_sup.value));
  return c;
}

// 8. Simulator law consistency and reproducibility.
Criterion criterion_simulator() {
  Criterion c;
  const auto two = build_two_state(1.0, 1.0, 1.0);
  const long long n = 100000;
  long long hits = 0;
  for (long long i = 0; i < n; ++i)
    if (sample_path(two, 0.5, 0, 90210, static_cast<std::uint64_t>(i)).state_at(1.0) == 1)
      ++hits;
  const double expected = 0.5 * (1.0 - std::exp(-1.0));
  const double p_hat = static_cast<double>(hits) / n;
  const double sigma = std::sqrt(expected * (1.0 - expected) / n);
  c.require(std::abs(p_hat - expected) <= 3.0 * sigma,
            "two_state marginal " + num(p_hat) + " vs " + num(expected) + " (3 sigma " +
                num(3.0 * sigma) + ")");

  auto f = make(build_lattice_1d(256, 1.0, 1.0));
  Eigen::VectorXd from(1), to(1);
  from << 0.25;
  to << 0.75;
  const TubeEvent tube{Curve::graph_segment(f.space, f.dmat, from, to), 0.1,
                       TimePartition::uniform(4)};
  const double s = 0.02;
  const double exact = fdd_probability(*f.cache, tube_to_cylinder(*f.space, *f.dmat, tube), s);
  const auto mc = tube_probability(*f.space, *f.dmat, tube, s, n, 1729);
  const double tube_sigma = std::sqrt(exact * (1.0 - exact) / n);
  c.require(std::abs(mc.p_hat - exact) <= 3.0 * tube_sigma,
            "tube MC " + num(mc.p_hat) + " vs exact " + num(exact) + " (3 sigma " +
                num(3.0 * tube_sigma) + ")");

  const auto rerun = tube_probability(*f.space, *f.dmat, tube, s, n, 1729);
  c.require(rerun.hits == mc.hits, "tube Monte Carlo rerun differs under a fixed seed");
  const auto p1 = sample_path(*f.space, s, 64, 55, 3);
  const auto p2 = sample_path(*f.space, s, 64, 55, 3);
  c.require(p1.jump_times == p2.jump_times && p1.states == p2.states,
            "sample_path rerun differs under a fixed seed");
  c.note("marginal " + num(p_hat) + " (exp " + num(expected) + "), tube " + num(mc.p_hat) +
         " (exact " + num(exact) + ")");
  return c;
}

}  // namespace

int main() {
  struct Entry {
    const char* name;
    std::function<Criterion()> run;
  };
  const std::vector<Entry> entries{
      {"spectral exactness (CK + mass conservation <= 1e-8)", criterion_spectral_exactness},
      {"intrinsic metric (analytic value, euclidean limit, axioms)", criterion_intrinsic_metric},
      {"functional inequalities (VD, PI, HI)", criterion_functional_inequalities},
      {"varadhan kernel/indicator limits with negative control", criterion_varadhan},
      {"integrated gaussian thresholds", criterion_gaussian_threshold},
      {"fdd ldp (DP oracle + three-set event bracket)", criterion_fdd_ldp},
      {"path energy (closed forms, monotonicity, H = H~)", criterion_path_energy},
      {"simulator law consistency and reproducibility", criterion_simulator},
  };

  int failures = 0;
  for (std::size_t i = 0; i < entries.size(); ++i) {
    const auto start = std::chrono::steady_clock::now();
    Criterion result;
    try {
      result = entries[i].run();
    } catch (const std::exception& err) {
      result.pass = false;
      result.detail = std::string("exception: ") + err.what();
    }
    const double seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    std::printf("[%s] criterion %zu: %s%s%s (%.1fs)\n", result.pass ? "PASS" : "FAIL", i + 1,
                entries[i].name, result.detail.empty() ? "" : " -- ",
                result.detail.c_str(), seconds);
    std::fflush(stdout);
    if (!result.pass) ++failures;
  }
  return failures;
}
