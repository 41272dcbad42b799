#include "dflab/simulate.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "dflab/numerics.hpp"
#include "dflab/rng.hpp"

namespace dflab {

namespace {
const double kInf = std::numeric_limits<double>::infinity();
}

int PathSample::state_at(double t) const {
  if (t < 0.0 || t > 1.0) throw std::invalid_argument("PathSample::state_at: t outside [0,1]");
  // last jump with jump_time <= t
  const auto it = std::upper_bound(jump_times.begin(), jump_times.end(), t);
  return states[static_cast<std::size_t>(it - jump_times.begin())];
}

PathSample sample_path(const StateSpace& space, double s, int x0, std::uint64_t seed,
                       std::uint64_t stream) {
  if (!(s > 0.0)) throw std::invalid_argument("sample_path: s must be positive");
  if (x0 < 0 || x0 >= space.size()) throw std::invalid_argument("sample_path: x0 out of range");

  PathSample path;
  path.horizon = s;
  path.start = x0;
  path.seed = seed;
  path.stream = stream;
  path.states.push_back(x0);

  RngStream rng(seed, stream);
  int x = x0;
  double clock = 0.0;
  while (true) {
    const double rate = space.holding_rate(x);
    if (!(rate > 0.0)) break;  // absorbing vertex
    clock += rng.exponential(rate);
    if (clock >= s) break;
    // jump proportional to conductances
    double total = 0.0;
    for (const auto& [y, w] : space.adjacency[x]) {
      (void)y;
      total += w;
    }
    double u = rng.uniform01() * total;
    int next = space.adjacency[x].back().first;
    for (const auto& [y, w] : space.adjacency[x]) {
      u -= w;
      if (u <= 0.0) {
        next = y;
        break;
      }
    }
    x = next;
    path.jump_times.push_back(clock / s);
    path.states.push_back(x);
  }
  return path;
}

CylinderEvent tube_to_cylinder(const StateSpace& space, const DistanceMatrix& dmat,
                               const TubeEvent& event) {
  if (!(event.delta > 0.0)) throw std::invalid_argument("tube event: delta must be positive");
  std::vector<Region> balls;
  for (double t : event.checkpoints.times()) {
    const int center = event.center.graph_context()
                           ? event.center.vertex(t)
                           : [&] {
                               const Eigen::VectorXd p = event.center.point(t);
                               return space.nearest_vertex(
                                   std::vector<double>(p.data(), p.data() + p.size()));
                             }();
    auto ball = metric_ball(dmat, center, event.delta);
    if (ball.empty()) throw std::invalid_argument("tube event: empty checkpoint ball");
    balls.push_back(Region::of(std::move(ball), "tube checkpoint"));
  }
  return CylinderEvent{event.checkpoints, std::move(balls), {}, -1.0};
}

TubeEstimate tube_probability(const StateSpace& space, const DistanceMatrix& dmat,
                              const TubeEvent& event, double s, long long n_samples,
                              std::uint64_t seed, int threads) {
  if (n_samples < 1000)
    throw std::invalid_argument("tube_probability: need at least 1e3 samples");
  const CylinderEvent cylinder = tube_to_cylinder(space, dmat, event);
  const auto& times = event.checkpoints.times();
  const auto law = cylinder.resolved_initial_law(space);
  const auto& start_ball = cylinder.sets.front().vertices;

  // Precompute checkpoint membership masks.
  std::vector<std::vector<char>> inside(times.size(), std::vector<char>(space.size(), 0));
  for (std::size_t j = 0; j < times.size(); ++j)
    for (int v : cylinder.sets[j].vertices) inside[j][v] = 1;

  std::atomic<long long> hits{0};
  parallel_for(
      static_cast<std::size_t>(n_samples),
      [&](std::size_t i) {
        RngStream init_rng(seed ^ 0xA5A5A5A5ull, i);
        // draw x0 from the normalized restriction of m to the start ball
        double u = init_rng.uniform01();
        int x0 = start_ball.back();
        for (std::size_t k = 0; k < law.size(); ++k) {
          u -= law[k];
          if (u <= 0.0) {
            x0 = start_ball[k];
            break;
          }
        }
        const PathSample path = sample_path(space, s, x0, seed, i);
        for (std::size_t j = 0; j < times.size(); ++j)
          if (!inside[j][path.state_at(times[j])]) return;
        hits.fetch_add(1, std::memory_order_relaxed);
      },
      threads);

  TubeEstimate est;
  est.hits = hits.load();
  est.samples = n_samples;
  est.p_hat = static_cast<double>(est.hits) / static_cast<double>(n_samples);
  est.zero_hits = est.hits == 0;
  const double z = 1.959963984540054;  // 95%
  const double n = static_cast<double>(n_samples);
  const double z2 = z * z;
  const double denom = 1.0 + z2 / n;
  const double center = (est.p_hat + z2 / (2.0 * n)) / denom;
  const double half =
      z * std::sqrt(est.p_hat * (1.0 - est.p_hat) / n + z2 / (4.0 * n * n)) / denom;
  est.wilson_lo = std::max(0.0, center - half);
  est.wilson_hi = std::min(1.0, center + half);
  return est;
}

TubeLdp tube_ldp_estimate(const SpectralCache& cache, const DistanceMatrix& dmat,
                          const TubeEvent& event, const std::vector<double>& s_grid,
                          long long mc_samples, std::uint64_t seed, double exact_product_cap) {
  if (s_grid.empty()) throw std::invalid_argument("tube_ldp_estimate: empty s grid");
  const StateSpace& space = cache.space();
  const CylinderEvent cylinder = tube_to_cylinder(space, dmat, event);

  TubeLdp out;
  out.rates = fdd_rate_bracket(space, dmat, cylinder);
  const auto tilde = ac2_energy(event.center);
  out.center_energy = tilde.value;
  out.center_energy_defined = tilde.defined;

  // Exact-path budget: the restricted vector-matrix evaluation touches
  // sum_i |A_i| * |A_{i+1}| kernel entries, not the full checkpoint product.
  double terms = 0.0;
  for (std::size_t i = 0; i + 1 < cylinder.sets.size(); ++i)
    terms += static_cast<double>(cylinder.sets[i].size()) *
             static_cast<double>(cylinder.sets[i + 1].size());
  const bool exact = terms <= exact_product_cap;

  double s_lo = kInf;
  if (space.continuum_tagged()) {
    const double sigma2 = space.sigma > 0.0 ? space.sigma * space.sigma : 1.0;
    double bound = 0.0;
    for (int i = 0; i < cylinder.partition.intervals(); ++i) {
      bound = std::max(bound,
                       25.0 * space.mesh * space.mesh / sigma2 / cylinder.partition.delta(i));
      if (!out.rates.original.infinite) {
        const double d =
            dmat.lower(out.rates.original.chain[i], out.rates.original.chain[i + 1]);
        bound = std::max(bound, d * space.mesh / (1.6 * cylinder.partition.delta(i)));
      }
    }
    s_lo = bound;
  }
  out.window_empty = !space.continuum_tagged();

  std::vector<double> xs, ys;
  for (std::size_t i = 0; i < s_grid.size(); ++i) {
    const double s = s_grid[i];
    TubeLdpPoint pt;
    pt.s = s;
    pt.exact = exact;
    double log_p;
    if (exact) {
      log_p = fdd_log_probability(cache, cylinder, s);
    } else {
      const auto est =
          tube_probability(space, dmat, event, s, mc_samples, seed + 7919 * (i + 1));
      log_p = est.zero_hits ? -kInf : std::log(est.p_hat);
    }
    if (!std::isfinite(log_p)) {
      pt.dropped = true;
      out.points.push_back(pt);
      continue;
    }
    pt.s_log_p = s * log_p;
    pt.in_window = !out.window_empty && s >= s_lo;
    out.points.push_back(pt);
    if (pt.in_window) {
      xs.push_back(s);
      ys.push_back(pt.s_log_p);
    }
  }
  if (xs.size() < 4) {
    xs.clear();
    ys.clear();
    for (const auto& pt : out.points)
      if (!pt.dropped) {
        xs.push_back(pt.s);
        ys.push_back(pt.s_log_p);
      }
  }
  if (xs.size() >= 3) {
    const auto fit = fit_short_time_model(xs, ys);
    out.fitted_limit = fit.limit;
    out.fit_residual = fit.residual_rms;
  } else if (!ys.empty()) {
    out.fitted_limit = ys.back();
    out.fit_residual = kInf;
  }
  return out;
}

}  // namespace dflab
