#include "dflab/asymptotics.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <stdexcept>

#include "dflab/numerics.hpp"

namespace dflab {

namespace {

const double kInf = std::numeric_limits<double>::infinity();

AsymptoticProbe probe_from_samples(const StateSpace& space, double dist,
                                   const std::vector<double>& t_grid,
                                   const std::function<double(double)>& log_quantity) {
  if (t_grid.empty()) throw std::invalid_argument("varadhan probe: empty t grid");
  AsymptoticProbe probe;
  probe.target = -0.5 * dist * dist;
  probe.window_empty = !space.continuum_tagged();
  if (!probe.window_empty) {
    const double sigma2 = space.sigma > 0.0 ? space.sigma * space.sigma : 1.0;
    probe.window_lo =
        std::max(25.0 * space.mesh * space.mesh / sigma2, dist * space.mesh / 1.6);
  } else {
    probe.window_lo = kInf;
    probe.note = "outside continuum validity window (no mesh tag)";
  }

  for (double t : t_grid) {
    ProbePoint pt;
    pt.t = t;
    const double lq = log_quantity(t);
    if (!std::isfinite(lq)) {
      pt.dropped = true;
      probe.points.push_back(pt);
      continue;
    }
    pt.value = t * lq;
    pt.in_window = !probe.window_empty && t >= probe.window_lo;
    probe.points.push_back(pt);
  }

  std::vector<const ProbePoint*> used;
  for (const auto& pt : probe.points)
    if (pt.in_window && !pt.dropped) used.push_back(&pt);
  probe.fit_on_window = used.size() >= 4;
  if (!probe.fit_on_window) {
    used.clear();
    for (const auto& pt : probe.points)
      if (!pt.dropped) used.push_back(&pt);
  }
  if (used.size() < 3) {
    probe.note += (probe.note.empty() ? "" : "; ");
    probe.note += "too few usable grid points for the model fit";
    if (!used.empty()) probe.fitted_limit = used.back()->value;
    probe.fit_residual = kInf;
  } else {
    std::vector<double> ts, ys;
    for (const auto* pt : used) {
      ts.push_back(pt->t);
      ys.push_back(pt->value);
    }
    const auto fit = fit_short_time_model(ts, ys);
    probe.fitted_limit = fit.limit;
    probe.fit_residual = fit.residual_rms;
    for (auto& pt : probe.points)
      if (!pt.dropped) pt.model = fit.evaluate(pt.t);
  }
  probe.rel_deviation = probe.target != 0.0
                            ? std::abs(probe.fitted_limit - probe.target) / std::abs(probe.target)
                            : std::abs(probe.fitted_limit);
  return probe;
}

}  // namespace

std::vector<double> log_spaced_grid(double lo, double hi, int points) {
  if (!(lo > 0.0) || !(hi > lo) || points < 2)
    throw std::invalid_argument("log_spaced_grid: need 0 < lo < hi and points >= 2");
  std::vector<double> grid(points);
  const double step = (std::log(hi) - std::log(lo)) / (points - 1);
  for (int i = 0; i < points; ++i) grid[i] = std::exp(std::log(lo) + i * step);
  return grid;
}

AsymptoticProbe varadhan_kernel(const SpectralCache& cache, const DistanceMatrix& dmat, int x,
                                int y, const std::vector<double>& t_grid) {
  const double dist = x == y ? 0.0 : dmat.lower(x, y);
  if (!std::isfinite(dist))
    throw std::invalid_argument("varadhan_kernel: disconnected pair has d = +inf");
  return probe_from_samples(cache.space(), dist, t_grid,
                            [&](double t) { return cache.log_heat_kernel(t, x, y); });
}

AsymptoticProbe varadhan_indicator(const SpectralCache& cache, const DistanceMatrix& dmat,
                                   const Region& A, int x, const std::vector<double>& t_grid) {
  const double dist = set_distance(dmat, A, x);
  if (!std::isfinite(dist))
    throw std::invalid_argument("varadhan_indicator: region unreachable from x");
  return probe_from_samples(cache.space(), dist, t_grid,
                            [&](double t) { return cache.log_semigroup_indicator(t, x, A); });
}

GaussianThreshold gaussian_bound_threshold(const SpectralCache& cache, const DistanceMatrix& dmat,
                                           const Region& A, const Region& B, double t_lo,
                                           double t_hi, int scan_points) {
  if (!(t_lo > 0.0) || !(t_hi > t_lo))
    throw std::invalid_argument("gaussian_bound_threshold: need 0 < t_lo < t_hi");
  const StateSpace& space = cache.space();
  GaussianThreshold result;
  result.d_ab = set_to_set_distance(dmat, A, B);

  double mA = 0.0, mB = 0.0;
  for (int v : A.vertices) mA += space.measure[v];
  for (int v : B.vertices) mB += space.measure[v];
  const double log_prefactor = 0.5 * (std::log(mA) + std::log(mB));

  auto excess = [&](double t) {
    const double lhs = cache.log_inner_indicator(t, A, B);
    const double rhs = log_prefactor - result.d_ab * result.d_ab / (2.0 * t);
    return lhs - rhs;  // > 0 means the bound is violated
  };

  const auto grid = log_spaced_grid(t_lo, t_hi, scan_points);
  int last_violation = -1;
  for (int i = 0; i < scan_points; ++i) {
    const double t = grid[i];
    const double lhs = cache.log_inner_indicator(t, A, B);
    const double rhs = log_prefactor - result.d_ab * result.d_ab / (2.0 * t);
    const bool violated = lhs > rhs + 1e-12;
    result.scan.push_back({t, lhs, rhs, violated});
    if (violated) last_violation = i;
  }
  if (last_violation < 0) {
    result.t_star = t_lo;
    result.violation_found = false;
    return result;
  }
  result.violation_found = true;
  if (last_violation + 1 >= scan_points) {
    // Bound still failing at the top of the grid; report the grid maximum.
    result.t_star = t_hi;
    return result;
  }
  double lo = grid[last_violation], hi = grid[last_violation + 1];
  for (int it = 0; it < 60 && (hi - lo) > 1e-12 * hi; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (excess(mid) > 1e-12)
      lo = mid;
    else
      hi = mid;
  }
  result.t_star = 0.5 * (lo + hi);
  return result;
}

}  // namespace dflab
