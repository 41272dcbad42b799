#include "dflab/inequalities.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "dflab/numerics.hpp"

namespace dflab {

namespace {

const double kInf = std::numeric_limits<double>::infinity();

bool ball_inside(const DistanceMatrix& dmat, const Region& region, int center, double r) {
  for (int v = 0; v < dmat.size(); ++v)
    if (dmat.lower(center, v) < r && !region.contains(v)) return false;
  return true;
}

std::vector<int> spread_subset(const std::vector<int>& pool, int cap) {
  if (static_cast<int>(pool.size()) <= cap) return pool;
  std::vector<int> picked;
  picked.reserve(cap);
  const double stride = static_cast<double>(pool.size() - 1) / (cap - 1);
  for (int i = 0; i < cap; ++i) picked.push_back(pool[static_cast<int>(std::lround(i * stride))]);
  picked.erase(std::unique(picked.begin(), picked.end()), picked.end());
  return picked;
}

}  // namespace

double ball_volume(const StateSpace& space, const DistanceMatrix& dmat, int x, double r) {
  double vol = 0.0;
  for (int v : metric_ball(dmat, x, r)) vol += space.measure[v];
  return std::max(vol, space.measure[x]);
}

InequalityReport doubling_exponent(const StateSpace& space, const DistanceMatrix& dmat,
                                   const Region& region, const std::vector<double>& radii,
                                   int max_centers) {
  InequalityReport report;
  report.kind = InequalityKind::VolumeDoubling;
  report.region = region.description;

  const auto centers = spread_subset(region.vertices, max_centers);
  double best = -kInf;
  for (int x : centers) {
    for (double r : radii) {
      if (!(r > 0.0)) continue;
      if (!ball_inside(dmat, region, x, 2.0 * r)) continue;
      InequalitySample sample;
      sample.center = x;
      sample.r = r;
      const double v1 = ball_volume(space, dmat, x, r);
      const double v2 = ball_volume(space, dmat, x, 2.0 * r);
      sample.value = std::log2(v2 / v1);
      best = std::max(best, sample.value);
      report.samples.push_back(sample);
    }
  }
  if (report.samples.empty())
    throw std::invalid_argument("doubling_exponent: no admissible (center, radius) sample");
  report.best = best;
  report.defined = true;
  return report;
}

PoincareResult poincare_constant(const StateSpace& space, const DistanceMatrix& dmat, int x,
                                 double r) {
  if (!(r > 0.0)) throw std::invalid_argument("poincare_constant: r must be positive");
  PoincareResult result;
  result.ball_r = metric_ball(dmat, x, r);
  result.ball_2r = metric_ball(dmat, x, 2.0 * r);
  if (result.ball_r.size() < 2) {
    result.note = "ball B_r has fewer than two vertices; constant undefined";
    return result;
  }

  const int nb = static_cast<int>(result.ball_2r.size());
  std::vector<int> local(space.size(), -1);
  for (int i = 0; i < nb; ++i) local[result.ball_2r[i]] = i;

  // Energy-measure integral over B_2r (edges with both endpoints inside):
  // u^T K u = sum_{x in B_2r} gamma(u)(x) m(x) = sum_{x,y in B_2r} w (du)^2,
  // an ordered-pair sum, i.e. twice the graph-Laplacian quadratic form.
  Eigen::MatrixXd K = Eigen::MatrixXd::Zero(nb, nb);
  for (int i = 0; i < nb; ++i) {
    const int v = result.ball_2r[i];
    for (const auto& [y, w] : space.adjacency[v]) {
      const int j = local[y];
      if (j < 0) continue;
      K(i, i) += 2.0 * w;
      K(i, j) -= 2.0 * w;
    }
  }

  // Variance form on B_r: B(u,u) = sum_{B_r} m (u - mean_m(u))^2.
  Eigen::VectorXd mass = Eigen::VectorXd::Zero(nb);
  double total = 0.0;
  for (int v : result.ball_r) {
    mass[local[v]] = space.measure[v];
    total += space.measure[v];
  }
  Eigen::MatrixXd B = mass.asDiagonal();
  B -= (mass * mass.transpose()) / total;

  // Quotient out ker(K) (constants per component of B_2r); if the variance
  // form has mass there the constant is infinite.
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> ek(K);
  const double tau = std::max(1e-12 * ek.eigenvalues().maxCoeff(), 1e-300);
  std::vector<int> live;
  for (int i = 0; i < nb; ++i)
    if (ek.eigenvalues()[i] > tau) live.push_back(i);
  for (int i = 0; i < nb; ++i) {
    if (ek.eigenvalues()[i] > tau) continue;
    const Eigen::VectorXd z = ek.eigenvectors().col(i);
    if (z.dot(B * z) > 1e-10 * total) {
      result.kappa = kInf;
      result.lambda_star = 0.0;
      result.defined = true;
      result.note = "variance supported on a kernel direction (disconnected B_2r)";
      return result;
    }
  }
  if (live.empty()) {
    result.note = "energy form vanished on B_2r";
    return result;
  }

  Eigen::MatrixXd V(nb, live.size());
  Eigen::VectorXd k_live(live.size());
  for (std::size_t c = 0; c < live.size(); ++c) {
    V.col(c) = ek.eigenvectors().col(live[c]);
    k_live[c] = ek.eigenvalues()[live[c]];
  }
  // lambda* = 1 / max eig of K^{-1/2} B K^{-1/2} on the positive subspace.
  Eigen::MatrixXd Bt = V.transpose() * B * V;
  for (std::size_t a = 0; a < live.size(); ++a)
    for (std::size_t b = 0; b < live.size(); ++b)
      Bt(a, b) /= std::sqrt(k_live[a] * k_live[b]);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eb(Bt);
  const double mu_max = eb.eigenvalues().maxCoeff();
  if (!(mu_max > 0.0)) {
    result.note = "variance form vanished on B_r";
    return result;
  }
  result.lambda_star = 1.0 / mu_max;
  result.kappa = 1.0 / (r * r * result.lambda_star);

  Eigen::VectorXd psi = eb.eigenvectors().col(eb.eigenvalues().size() - 1);
  Eigen::VectorXd u_local = V * (psi.array() / k_live.array().sqrt()).matrix();
  result.optimizer = Eigen::VectorXd::Zero(space.size());
  for (int i = 0; i < nb; ++i) result.optimizer[result.ball_2r[i]] = u_local[i];
  result.defined = true;
  return result;
}

namespace {

/// Kernel row p_s(x0, .) with deep-tail entries recovered from the positive
/// series when the dense spectral row is below its cancellation floor.
Eigen::VectorXd reliable_kernel_row(const SpectralCache& cache, double s, int x0) {
  const StateSpace& space = cache.space();
  const int n = space.size();
  Eigen::VectorXd decay(n);
  for (int k = 0; k < n; ++k) decay[k] = std::exp(-cache.eigenvalues()[k] * s);
  Eigen::VectorXd row(n);
  bool reliable = true;
  for (int y = 0; y < n; ++y) {
    double sum = 0.0, mass = 0.0;
    for (int k = 0; k < n; ++k) {
      const double term = decay[k] * cache.modes()(x0, k) * cache.modes()(y, k);
      sum += term;
      mass += std::abs(term);
    }
    row[y] = sum;
    if (!(sum > mass * n * 2e-13)) reliable = false;
  }
  if (reliable) return row;
  const Eigen::VectorXd logs = log_transition_row(space, s, x0);
  for (int y = 0; y < n; ++y)
    row[y] = std::isfinite(logs[y]) ? std::exp(logs[y]) / space.measure[y] : 0.0;
  return row;
}

}  // namespace

InequalityReport harnack_constant(const SpectralCache& cache, const DistanceMatrix& dmat,
                                  const Region& region, const std::vector<double>& radii,
                                  const std::vector<double>& times, const HarnackOptions& opts) {
  InequalityReport report;
  report.kind = InequalityKind::Harnack;
  report.region = region.description;

  const auto centers = spread_subset(region.vertices, opts.max_centers);
  auto sources_for = [&](int center) {
    std::vector<int> sources{center};
    for (int v : spread_subset(region.vertices, opts.max_sources - 1))
      if (v != center) sources.push_back(v);
    return sources;
  };

  double best = -kInf;
  for (int x : centers) {
    for (double r : radii) {
      if (!(r > 0.0) || !ball_inside(dmat, region, x, 2.0 * r)) continue;
      const auto ball = metric_ball(dmat, x, r);
      for (double t : times) {
        if (!(t - 4.0 * r * r > 1e-12)) continue;  // whole cylinder needs s > 0
        for (int x0 : sources_for(x)) {
          double sup_minus = -kInf, inf_plus = kInf;
          for (int j = 0; j < opts.time_samples; ++j) {
            // half-open grids: left endpoint included, right excluded
            const double frac = static_cast<double>(j) / opts.time_samples;
            const Eigen::VectorXd row_minus =
                reliable_kernel_row(cache, (t - 3.0 * r * r) + frac * (r * r), x0);
            const Eigen::VectorXd row_plus =
                reliable_kernel_row(cache, (t - r * r) + frac * (r * r), x0);
            for (int y : ball) {
              sup_minus = std::max(sup_minus, row_minus[y]);
              inf_plus = std::min(inf_plus, row_plus[y]);
            }
          }
          InequalitySample sample;
          sample.center = x;
          sample.r = r;
          sample.t = t;
          sample.source = x0;
          if (inf_plus < opts.inf_floor) {
            sample.excluded = true;
            sample.note = "inf over Q+ below numerical floor";
          } else {
            sample.value = sup_minus / inf_plus;
            best = std::max(best, sample.value);
          }
          report.samples.push_back(sample);
        }
      }
    }
  }
  if (report.samples.empty())
    throw std::invalid_argument("harnack_constant: no admissible (center, r, t) sample");
  report.defined = best > -kInf;
  report.best = best;
  return report;
}

VolumeScalingCurve volume_scaling_curve(const StateSpace& space, const DistanceMatrix& dmat,
                                        int x, double epsilon, const std::vector<double>& t_grid,
                                        double doubling_N) {
  if (!(epsilon > 0.0)) throw std::invalid_argument("volume_scaling_curve: epsilon must be > 0");
  const double vol_eps = ball_volume(space, dmat, x, std::sqrt(epsilon));
  if (!(vol_eps > 0.0)) throw std::invalid_argument("volume_scaling_curve: vol(sqrt(eps)) = 0");

  VolumeScalingCurve curve;
  curve.center = x;
  curve.epsilon = epsilon;
  curve.doubling_N = doubling_N;
  for (double t : t_grid) {
    if (!(t > 0.0)) continue;
    VolumeScalingPoint pt;
    pt.t = t;
    const double vol = ball_volume(space, dmat, x, std::sqrt(epsilon * t));
    pt.value = t * std::log(vol);
    pt.proof_bound = 0.5 * doubling_N * std::abs(t * std::log(t)) + t * std::abs(std::log(vol_eps));
    pt.within_bound = std::abs(pt.value) <= pt.proof_bound + 1e-12;
    curve.points.push_back(pt);
  }
  if (curve.points.empty()) throw std::invalid_argument("volume_scaling_curve: empty t grid");

  // Extrapolate to t = 0 with a line through the smallest grid points; the
  // limit is exactly 0 on finite spaces (vol is floored at m(x) > 0).
  std::vector<VolumeScalingPoint> sorted = curve.points;
  std::sort(sorted.begin(), sorted.end(),
            [](const auto& a, const auto& b) { return a.t < b.t; });
  const std::size_t use = std::min<std::size_t>(4, sorted.size());
  Eigen::MatrixXd X(use, 2);
  Eigen::VectorXd y(use);
  for (std::size_t i = 0; i < use; ++i) {
    X(i, 0) = 1.0;
    X(i, 1) = sorted[i].t;
    y(i) = sorted[i].value;
  }
  curve.fitted_limit = use >= 2 ? least_squares(X, y).coeffs[0] : sorted.front().value;
  return curve;
}

}  // namespace dflab
