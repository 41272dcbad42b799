#include "dflab/fdd.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "dflab/numerics.hpp"

namespace dflab {

namespace {

const double kInf = std::numeric_limits<double>::infinity();

/// log transition-probability block P(x -> y) = p_tau(x,y) m(y) between two
/// stage sets. Dense double path when reliable, positive-series rows
/// otherwise.
Eigen::MatrixXd log_transition_block(const SpectralCache& cache, double tau,
                                     const std::vector<int>& from, const std::vector<int>& to) {
  const StateSpace& space = cache.space();
  const int n = space.size();
  Eigen::MatrixXd block(from.size(), to.size());

  // Reliability scan on the dense spectral path.
  bool reliable = true;
  {
    Eigen::VectorXd decay(n);
    for (int k = 0; k < n; ++k) decay[k] = std::exp(-cache.eigenvalues()[k] * tau);
    for (std::size_t i = 0; i < from.size() && reliable; ++i) {
      for (std::size_t j = 0; j < to.size(); ++j) {
        double sum = 0.0, mass = 0.0;
        for (int k = 0; k < n; ++k) {
          const double term = decay[k] * cache.modes()(from[i], k) * cache.modes()(to[j], k);
          sum += term;
          mass += std::abs(term);
        }
        if (!(sum > mass * n * 2e-13)) {
          reliable = false;
          break;
        }
        block(i, j) = std::log(sum * space.measure[to[j]]);
      }
    }
  }
  if (reliable) return block;

  for (std::size_t i = 0; i < from.size(); ++i) {
    const Eigen::VectorXd row = log_transition_row(space, tau, from[i]);
    for (std::size_t j = 0; j < to.size(); ++j) block(i, j) = row[to[j]];
  }
  return block;
}

}  // namespace

void CylinderEvent::validate() const {
  // A single set means the event constrains only the start (no stages).
  if (sets.size() != 1 && static_cast<int>(sets.size()) != partition.intervals() + 1)
    throw std::invalid_argument("CylinderEvent: need one set per partition time");
  for (const auto& region : sets)
    if (region.empty()) throw std::invalid_argument("CylinderEvent: empty stage set");
  if (!initial_law.empty()) {
    if (initial_law.size() != sets.front().vertices.size())
      throw std::invalid_argument("CylinderEvent: initial law must align with A_0");
    double total = 0.0;
    for (double p : initial_law) {
      if (p < 0.0) throw std::invalid_argument("CylinderEvent: negative initial mass");
      total += p;
    }
    if (std::abs(total - 1.0) > 1e-9)
      throw std::invalid_argument("CylinderEvent: initial law must sum to 1");
  }
}

std::vector<double> CylinderEvent::resolved_initial_law(const StateSpace& space) const {
  if (!initial_law.empty()) return initial_law;
  std::vector<double> law(sets.front().vertices.size());
  double total = 0.0;
  for (std::size_t i = 0; i < law.size(); ++i) total += space.measure[sets.front().vertices[i]];
  for (std::size_t i = 0; i < law.size(); ++i)
    law[i] = space.measure[sets.front().vertices[i]] / total;
  return law;
}

double CylinderEvent::resolved_beta(const StateSpace& space) const {
  if (beta >= 0.0) return beta;
  return space.continuum_tagged() ? 2.0 * space.mesh : 0.0;
}

double fdd_log_probability(const SpectralCache& cache, const CylinderEvent& event, double s) {
  if (!(s > 0.0)) throw std::invalid_argument("fdd_log_probability: s must be positive");
  event.validate();
  const StateSpace& space = cache.space();

  const auto law = event.resolved_initial_law(space);
  std::vector<double> log_alpha(law.size());
  for (std::size_t i = 0; i < law.size(); ++i)
    log_alpha[i] = law[i] > 0.0 ? std::log(law[i]) : -kInf;

  const int stages = static_cast<int>(event.sets.size()) - 1;
  for (int stage = 0; stage < stages; ++stage) {
    const auto& from = event.sets[stage].vertices;
    const auto& to = event.sets[stage + 1].vertices;
    const double tau = s * event.partition.delta(stage);
    const Eigen::MatrixXd block = log_transition_block(cache, tau, from, to);
    std::vector<double> next(to.size());
    std::vector<double> terms(from.size());
    for (std::size_t j = 0; j < to.size(); ++j) {
      for (std::size_t i = 0; i < from.size(); ++i) terms[i] = log_alpha[i] + block(i, j);
      next[j] = log_sum_exp(terms);
    }
    log_alpha = std::move(next);
  }
  const double log_p = log_sum_exp(log_alpha);
  return std::min(log_p, 0.0);  // guard tiny positive roundoff at p ~ 1
}

double fdd_probability(const SpectralCache& cache, const CylinderEvent& event, double s) {
  return std::exp(fdd_log_probability(cache, event, s));
}

RateResult fdd_rate(const DistanceMatrix& dmat, const std::vector<Region>& sets,
                    const TimePartition& partition) {
  if (sets.size() != 1 && static_cast<int>(sets.size()) != partition.intervals() + 1)
    throw std::invalid_argument("fdd_rate: need one set per partition time");
  RateResult result;
  for (const auto& region : sets)
    if (region.empty()) {
      result.infinite = true;
      result.rate = kInf;
      return result;
    }

  const int stages = static_cast<int>(sets.size()) - 1;
  std::vector<std::vector<double>> cost(stages + 1);
  std::vector<std::vector<int>> back(stages + 1);
  cost[0].assign(sets[0].vertices.size(), 0.0);
  for (int i = 1; i <= stages; ++i) {
    const auto& prev = sets[i - 1].vertices;
    const auto& cur = sets[i].vertices;
    const double inv = 1.0 / (2.0 * partition.delta(i - 1));
    cost[i].assign(cur.size(), kInf);
    back[i].assign(cur.size(), -1);
    for (std::size_t j = 0; j < cur.size(); ++j) {
      for (std::size_t p = 0; p < prev.size(); ++p) {
        const double d = dmat.lower(prev[p], cur[j]);
        const double c = cost[i - 1][p] + d * d * inv;
        // strict improvement keeps the smallest-index predecessor on ties
        if (c < cost[i][j]) {
          cost[i][j] = c;
          back[i][j] = static_cast<int>(p);
        }
      }
    }
  }

  std::size_t best = 0;
  for (std::size_t j = 1; j < cost[stages].size(); ++j)
    if (cost[stages][j] < cost[stages][best]) best = j;
  result.rate = cost[stages][best];
  result.chain.resize(stages + 1);
  int at = static_cast<int>(best);
  for (int i = stages; i >= 0; --i) {
    result.chain[i] = sets[i].vertices[at];
    if (i > 0) at = back[i][at];
  }
  return result;
}

RateBracket fdd_rate_bracket(const StateSpace& space, const DistanceMatrix& dmat,
                             const CylinderEvent& event) {
  event.validate();
  RateBracket bracket;
  bracket.beta = event.resolved_beta(space);
  bracket.original = fdd_rate(dmat, event.sets, event.partition);

  std::vector<Region> grown, kept;
  bool some_empty = false;
  for (const auto& region : event.sets) {
    grown.push_back(Region::of(enlarge_set(space, dmat, region, bracket.beta)));
    const auto small = shrink_set(space, dmat, region, bracket.beta);
    if (small.empty())
      some_empty = true;
    else
      kept.push_back(Region::of(small));
  }
  bracket.enlarged = fdd_rate(dmat, grown, event.partition);
  if (some_empty) {
    bracket.shrunken.infinite = true;
    bracket.shrunken.rate = kInf;
  } else {
    bracket.shrunken = fdd_rate(dmat, kept, event.partition);
  }
  return bracket;
}

LdpCurve fdd_ldp_curve(const SpectralCache& cache, const DistanceMatrix& dmat,
                       const CylinderEvent& event, const std::vector<double>& s_grid) {
  event.validate();
  if (s_grid.empty()) throw std::invalid_argument("fdd_ldp_curve: empty s grid");
  const StateSpace& space = cache.space();

  LdpCurve curve;
  curve.bracket = fdd_rate_bracket(space, dmat, event);

  // Validity window: every stage must sit in the diffusive regime and inside
  // the hop budget along the optimizing chain.
  double s_lo = kInf;
  if (space.continuum_tagged()) {
    const double sigma2 = space.sigma > 0.0 ? space.sigma * space.sigma : 1.0;
    double bound = 0.0;
    const int stages = static_cast<int>(event.sets.size()) - 1;
    for (int i = 0; i < stages; ++i) {
      bound = std::max(bound, 25.0 * space.mesh * space.mesh / sigma2 / event.partition.delta(i));
      if (!curve.bracket.original.infinite) {
        const double d = dmat.lower(curve.bracket.original.chain[i],
                                    curve.bracket.original.chain[i + 1]);
        bound = std::max(bound, d * space.mesh / (1.6 * event.partition.delta(i)));
      }
    }
    s_lo = bound;
  }
  curve.window_empty = !space.continuum_tagged();

  std::vector<double> xs, ys;
  for (double s : s_grid) {
    LdpCurvePoint pt;
    pt.s = s;
    const double log_p = fdd_log_probability(cache, event, s);
    if (!std::isfinite(log_p)) {
      pt.dropped = true;
      curve.points.push_back(pt);
      continue;
    }
    pt.s_log_p = s * log_p;
    pt.in_window = !curve.window_empty && s >= s_lo;
    curve.points.push_back(pt);
    if (pt.in_window) {
      xs.push_back(s);
      ys.push_back(pt.s_log_p);
    }
  }
  // Fall back to every non-dropped point when the window filters everything.
  if (xs.size() < 4) {
    xs.clear();
    ys.clear();
    for (const auto& pt : curve.points)
      if (!pt.dropped) {
        xs.push_back(pt.s);
        ys.push_back(pt.s_log_p);
      }
  }
  if (xs.size() >= 3) {
    const auto fit = fit_short_time_model(xs, ys);
    curve.fitted_limit = fit.limit;
    curve.fit_residual = fit.residual_rms;
  } else if (!ys.empty()) {
    curve.fitted_limit = ys.back();
    curve.fit_residual = kInf;
  }
  return curve;
}

}  // namespace dflab
