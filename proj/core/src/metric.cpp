#include "dflab/metric.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <queue>
#include <stdexcept>

#include "dflab/numerics.hpp"
#include "dflab/rng.hpp"
#include "dflab/spectral.hpp"

namespace dflab {

namespace {

const double kInf = std::numeric_limits<double>::infinity();

/// Dijkstra with edge length len(u,v) = sqrt(scale * min(m_u, m_v) / w).
Eigen::VectorXd shortest_path_from(const StateSpace& space, int source, double scale) {
  const int n = space.size();
  Eigen::VectorXd dist = Eigen::VectorXd::Constant(n, kInf);
  dist[source] = 0.0;
  using Item = std::pair<double, int>;
  std::priority_queue<Item, std::vector<Item>, std::greater<>> heap;
  heap.emplace(0.0, source);
  while (!heap.empty()) {
    const auto [d, x] = heap.top();
    heap.pop();
    if (d > dist[x]) continue;
    for (const auto& [y, w] : space.adjacency[x]) {
      if (!(w > 0.0)) continue;
      const double len = std::sqrt(scale * std::min(space.measure[x], space.measure[y]) / w);
      const double cand = d + len;
      if (cand < dist[y]) {
        dist[y] = cand;
        heap.emplace(cand, y);
      }
    }
  }
  return dist;
}

/// Scale a shortest-path profile into the feasible set {max gamma <= 1}.
/// Unreachable entries are pinned to the source value so they stay inert.
Eigen::VectorXd feasible_profile(const StateSpace& space, Eigen::VectorXd f) {
  for (int v = 0; v < f.size(); ++v)
    if (!std::isfinite(f[v])) f[v] = 0.0;
  const double gmax = max_energy_density(space, f);
  if (gmax > 1.0) f /= std::sqrt(gmax);
  return f;
}

/// Worst-case operator norm of the per-vertex quadratic forms
/// gamma(u . pos)(v) = u^T G_v u; coordinate projections scaled by
/// 1/sqrt(Lambda) are globally feasible.
double coordinate_energy_bound(const StateSpace& space) {
  if (!space.embedded()) return kInf;
  const int k = space.dim;
  double lambda = 0.0;
  Eigen::MatrixXd g(k, k);
  for (int v = 0; v < space.size(); ++v) {
    g.setZero();
    for (const auto& [y, w] : space.adjacency[v]) {
      for (int a = 0; a < k; ++a) {
        const double da = space.positions[v][a] - space.positions[y][a];
        for (int b = 0; b < k; ++b) {
          const double db = space.positions[v][b] - space.positions[y][b];
          g(a, b) += w * da * db;
        }
      }
    }
    g /= space.measure[v];
    if (k == 1) {
      lambda = std::max(lambda, g(0, 0));
    } else {
      Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(g);
      lambda = std::max(lambda, es.eigenvalues().maxCoeff());
    }
  }
  return lambda;
}

double euclidean_gap(const StateSpace& space, int x, int y) {
  double d2 = 0.0;
  for (int k = 0; k < space.dim; ++k) {
    const double d = space.positions[x][k] - space.positions[y][k];
    d2 += d * d;
  }
  return std::sqrt(d2);
}

/// Clamp f[v] into the interval where gamma(f)(v) <= 1, holding neighbors
/// fixed. If the local quadratic cannot reach 1, move to its minimizer.
void clamp_vertex(const StateSpace& space, Eigen::VectorXd& f, int v) {
  double a = 0.0, b = 0.0, c = 0.0;
  for (const auto& [y, w] : space.adjacency[v]) {
    a += w;
    b += w * f[y];
    c += w * f[y] * f[y];
  }
  if (a == 0.0) return;  // isolated vertex: gamma is identically 0
  const double m = space.measure[v];
  // gamma_v(s) = (a s^2 - 2 b s + c) / m <= 1
  const double disc = b * b - a * (c - m);
  if (disc <= 0.0) {
    f[v] = b / a;
    return;
  }
  const double root = std::sqrt(disc);
  const double lo = (b - root) / a, hi = (b + root) / a;
  f[v] = std::clamp(f[v], lo, hi);
}

/// Gauss-Seidel repair sweeps followed by a certifying global rescale.
void project_feasible(const StateSpace& space, Eigen::VectorXd& f, int sweeps = 30) {
  for (int pass = 0; pass < sweeps; ++pass) {
    const Eigen::VectorXd gamma = energy_density(space, f);
    double worst = 0.0;
    for (int v = 0; v < f.size(); ++v) worst = std::max(worst, gamma[v]);
    if (worst <= 1.0 + 1e-12) break;
    // Fix the most violated vertices first.
    std::vector<int> order(f.size());
    for (int v = 0; v < f.size(); ++v) order[v] = v;
    std::sort(order.begin(), order.end(), [&](int p, int q) { return gamma[p] > gamma[q]; });
    for (int v : order)
      if (gamma[v] > 1.0) clamp_vertex(space, f, v);
  }
  const double gmax = max_energy_density(space, f);
  if (gmax > 1.0) f /= std::sqrt(gmax);
}

/// Projected ascent of f(x) - f(y) over the feasible set, from a given start.
double ascend(const StateSpace& space, int x, int y, Eigen::VectorXd& f, const MetricOptions& opts) {
  project_feasible(space, f);
  double best = f[x] - f[y];
  Eigen::VectorXd best_f = f;
  double step = 0.25 * std::max(std::abs(best), 1.0);
  int stalled = 0;
  for (int it = 0; it < opts.max_ascent_iters && stalled < 10; ++it) {
    Eigen::VectorXd trial = best_f;
    trial[x] += step;
    trial[y] -= step;
    project_feasible(space, trial);
    const double value = trial[x] - trial[y];
    if (value > best + 1e-15) {
      const double gain = value - best;
      best = value;
      best_f = std::move(trial);
      step *= 1.5;
      stalled = gain < opts.tol * std::max(std::abs(best), 1e-12) ? stalled + 1 : 0;
    } else {
      step *= 0.5;
      ++stalled;
      if (step < 1e-14) break;
    }
  }
  f = best_f;
  return best;
}

}  // namespace

double max_energy_density(const StateSpace& space, const Eigen::VectorXd& f) {
  return energy_density(space, f).maxCoeff();
}

DistanceBracket intrinsic_distance(const StateSpace& space, int x, int y, double tol) {
  MetricOptions opts;
  opts.tol = tol;
  return intrinsic_distance(space, x, y, opts);
}

DistanceBracket intrinsic_distance(const StateSpace& space, int x, int y,
                                   const MetricOptions& opts) {
  const int n = space.size();
  if (x < 0 || x >= n || y < 0 || y >= n)
    throw std::invalid_argument("intrinsic_distance: vertex out of range");
  if (!(opts.tol > 0.0)) throw std::invalid_argument("intrinsic_distance: tol must be positive");

  DistanceBracket bracket;
  if (x == y) {
    bracket.witness = Eigen::VectorXd::Zero(n);
    return bracket;
  }

  const Eigen::VectorXd sp_upper = shortest_path_from(space, y, 2.0);
  bracket.upper = sp_upper[x];
  if (!std::isfinite(bracket.upper)) {
    bracket.connected = false;
    bracket.lower = kInf;
    bracket.upper = kInf;
    bracket.witness = Eigen::VectorXd::Zero(n);
    return bracket;
  }

  // Candidate starts: tight shortest-path profiles from both endpoints,
  // the aligned coordinate projection, and randomized perturbations.
  std::vector<Eigen::VectorXd> starts;
  starts.push_back(shortest_path_from(space, y, 1.0));
  starts.push_back(-shortest_path_from(space, x, 1.0));
  if (space.embedded()) {
    const double lambda = coordinate_energy_bound(space);
    if (lambda > 0.0 && std::isfinite(lambda)) {
      Eigen::VectorXd lin(n);
      std::vector<double> dir(space.dim);
      double norm = 0.0;
      for (int k = 0; k < space.dim; ++k) {
        dir[k] = space.positions[x][k] - space.positions[y][k];
        norm += dir[k] * dir[k];
      }
      norm = std::sqrt(norm);
      if (norm > 0.0) {
        for (int v = 0; v < n; ++v) {
          double proj = 0.0;
          for (int k = 0; k < space.dim; ++k) proj += space.positions[v][k] * dir[k] / norm;
          lin[v] = proj / std::sqrt(lambda);
        }
        starts.push_back(std::move(lin));
      }
    }
  }

  double best = -kInf;
  Eigen::VectorXd best_f;
  RngStream rng(opts.seed, (static_cast<std::uint64_t>(x) << 32) ^ static_cast<std::uint64_t>(y));
  const int total = std::max<int>(opts.restarts, static_cast<int>(starts.size()));
  for (int attempt = 0; attempt < total; ++attempt) {
    Eigen::VectorXd f;
    if (attempt < static_cast<int>(starts.size())) {
      f = feasible_profile(space, starts[attempt]);
    } else if (best_f.size() == n) {
      f = best_f;
      for (int v = 0; v < n; ++v) f[v] += 0.05 * bracket.upper * (rng.uniform01() - 0.5);
    } else {
      f.setZero(n);
      for (int v = 0; v < n; ++v) f[v] = bracket.upper * (rng.uniform01() - 0.5);
    }
    const double value = ascend(space, x, y, f, opts);
    if (value > best) {
      best = value;
      best_f = std::move(f);
    }
  }

  // Certify: the reported lower bound is evaluated on a feasible witness.
  const double gmax = max_energy_density(space, best_f);
  if (gmax > 1.0 + 1e-9) {
    best_f /= std::sqrt(gmax);
    best = best_f[x] - best_f[y];
  }
  bracket.lower = std::min(std::max(best, 0.0), bracket.upper);
  bracket.witness = best_f;
  bracket.witness_max_gamma = max_energy_density(space, best_f);
  return bracket;
}

DistanceMatrix DistanceMatrix::build(const StateSpace& space, double tol, int threads) {
  (void)tol;  // the library construction is exact for the witnesses it uses
  const int n = space.size();
  DistanceMatrix dmat;
  dmat.lower_.setZero(n, n);
  dmat.upper_.setZero(n, n);

  std::vector<Eigen::VectorXd> tight(n), loose(n);
  std::vector<double> scale(n);
  parallel_for(
      static_cast<std::size_t>(n),
      [&](std::size_t s) {
        const int src = static_cast<int>(s);
        tight[src] = shortest_path_from(space, src, 1.0);
        loose[src] = shortest_path_from(space, src, 2.0);
        Eigen::VectorXd profile = tight[src];
        for (int v = 0; v < n; ++v)
          if (!std::isfinite(profile[v])) profile[v] = 0.0;
        const double gmax = max_energy_density(space, profile);
        scale[src] = gmax > 1.0 ? 1.0 / std::sqrt(gmax) : 1.0;
      },
      threads);

  const double lambda = space.embedded() ? coordinate_energy_bound(space) : kInf;
  const double coord_scale =
      (std::isfinite(lambda) && lambda > 0.0) ? 1.0 / std::sqrt(lambda) : 0.0;

  for (int x = 0; x < n; ++x) {
    for (int y = x + 1; y < n; ++y) {
      const double up = std::min(loose[x][y], loose[y][x]);
      double lo;
      if (!std::isfinite(up)) {
        lo = kInf;
      } else {
        lo = std::max(tight[x][y] * scale[x], tight[y][x] * scale[y]);
        if (coord_scale > 0.0) lo = std::max(lo, euclidean_gap(space, x, y) * coord_scale);
        lo = std::min(lo, up);
      }
      dmat.lower_(x, y) = dmat.lower_(y, x) = lo;
      dmat.upper_(x, y) = dmat.upper_(y, x) = up;
    }
  }
  return dmat;
}

double DistanceMatrix::diameter_lower() const {
  double d = 0.0;
  for (int x = 0; x < size(); ++x)
    for (int y = x + 1; y < size(); ++y) d = std::max(d, lower_(x, y));
  return d;
}

double set_distance(const DistanceMatrix& dmat, const Region& A, int x) {
  if (A.empty()) throw std::invalid_argument("set_distance: empty region");
  if (A.contains(x)) return 0.0;
  double best = kInf;
  for (int a : A.vertices) best = std::min(best, dmat.lower(a, x));
  return best;
}

double set_to_set_distance(const DistanceMatrix& dmat, const Region& A, const Region& B) {
  if (A.empty() || B.empty()) throw std::invalid_argument("set_to_set_distance: empty region");
  double best = kInf;
  for (int a : A.vertices) {
    if (B.contains(a)) return 0.0;
    for (int b : B.vertices) best = std::min(best, dmat.lower(a, b));
  }
  return best;
}

std::vector<int> shrink_set(const StateSpace& space, const DistanceMatrix& dmat, const Region& A,
                            double beta) {
  if (beta < 0.0) throw std::invalid_argument("shrink_set: beta must be nonnegative");
  std::vector<int> complement;
  for (int v = 0; v < space.size(); ++v)
    if (!A.contains(v)) complement.push_back(v);
  if (complement.empty()) return A.vertices;  // d(empty, x) = +inf > beta
  std::vector<int> kept;
  for (int v : A.vertices) {
    double d = kInf;
    for (int c : complement) d = std::min(d, dmat.lower(c, v));
    if (d > beta) kept.push_back(v);
  }
  return kept;
}

std::vector<int> enlarge_set(const StateSpace& space, const DistanceMatrix& dmat, const Region& A,
                             double beta) {
  if (beta < 0.0) throw std::invalid_argument("enlarge_set: beta must be nonnegative");
  std::vector<int> out = A.vertices;
  for (int v = 0; v < space.size(); ++v) {
    if (A.contains(v)) continue;
    double d = kInf;
    for (int a : A.vertices) d = std::min(d, dmat.lower(a, v));
    if (d < beta) out.push_back(v);
  }
  std::sort(out.begin(), out.end());
  return out;
}

std::vector<int> metric_ball(const DistanceMatrix& dmat, int center, double r) {
  std::vector<int> ball;
  for (int v = 0; v < dmat.size(); ++v)
    if (dmat.lower(center, v) < r) ball.push_back(v);
  return ball;
}

}  // namespace dflab
