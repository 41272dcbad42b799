#include "dflab/path_energy.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "dflab/numerics.hpp"
#include "dflab/rng.hpp"

namespace dflab {

namespace {
const double kInf = std::numeric_limits<double>::infinity();
}

Curve Curve::line(const Eigen::VectorXd& from, const Eigen::VectorXd& to, int resolution) {
  if (from.size() != to.size()) throw std::invalid_argument("Curve::line: dimension mismatch");
  Curve c;
  c.samples_.resize(resolution + 1, from.size());
  for (int i = 0; i <= resolution; ++i) {
    const double t = static_cast<double>(i) / resolution;
    c.samples_.row(i) = ((1.0 - t) * from + t * to).transpose();
  }
  return c;
}

Curve Curve::circle_arc(const Eigen::Vector2d& center, double radius, double angle_from,
                        double angle_to, int resolution) {
  Curve c;
  c.samples_.resize(resolution + 1, 2);
  for (int i = 0; i <= resolution; ++i) {
    const double t = static_cast<double>(i) / resolution;
    const double a = angle_from + t * (angle_to - angle_from);
    c.samples_(i, 0) = center.x() + radius * std::cos(a);
    c.samples_(i, 1) = center.y() + radius * std::sin(a);
  }
  return c;
}

Curve Curve::polynomial(const std::vector<std::vector<double>>& coeffs, int resolution) {
  if (coeffs.empty()) throw std::invalid_argument("Curve::polynomial: no coefficients");
  Curve c;
  const int dim = static_cast<int>(coeffs.size());
  c.samples_.resize(resolution + 1, dim);
  for (int i = 0; i <= resolution; ++i) {
    const double t = static_cast<double>(i) / resolution;
    for (int d = 0; d < dim; ++d) {
      double value = 0.0;
      for (auto it = coeffs[d].rbegin(); it != coeffs[d].rend(); ++it) value = value * t + *it;
      c.samples_(i, d) = value;
    }
  }
  return c;
}

Curve Curve::euclidean_samples(Eigen::MatrixXd samples) {
  if (samples.rows() < 2) throw std::invalid_argument("Curve: need at least two samples");
  Curve c;
  c.samples_ = std::move(samples);
  return c;
}

Curve Curve::piecewise_constant(const std::vector<double>& breaks,
                                const std::vector<Eigen::VectorXd>& values) {
  if (breaks.size() != values.size() || breaks.empty() || breaks.front() != 0.0)
    throw std::invalid_argument("Curve::piecewise_constant: breaks must start at 0");
  for (std::size_t i = 0; i + 1 < breaks.size(); ++i)
    if (!(breaks[i] < breaks[i + 1]))
      throw std::invalid_argument("Curve::piecewise_constant: breaks must increase");
  Curve c;
  c.breaks_ = breaks;
  c.pieces_ = values;
  return c;
}

Curve Curve::graph_segment(std::shared_ptr<const StateSpace> space,
                           std::shared_ptr<const DistanceMatrix> dmat,
                           const Eigen::VectorXd& from, const Eigen::VectorXd& to,
                           int resolution) {
  if (!space->embedded())
    throw std::invalid_argument("Curve::graph_segment: space has no coordinates");
  Curve c;
  c.space_ = std::move(space);
  c.dmat_ = std::move(dmat);
  c.vertices_.resize(resolution + 1);
  std::vector<double> pos(c.space_->dim);
  for (int i = 0; i <= resolution; ++i) {
    const double t = static_cast<double>(i) / resolution;
    for (int d = 0; d < c.space_->dim; ++d) pos[d] = (1.0 - t) * from[d] + t * to[d];
    c.vertices_[i] = c.space_->nearest_vertex(pos);
  }
  return c;
}

Curve Curve::graph_samples(std::shared_ptr<const StateSpace> space,
                           std::shared_ptr<const DistanceMatrix> dmat, std::vector<int> vertices) {
  if (vertices.size() < 2) throw std::invalid_argument("Curve: need at least two samples");
  Curve c;
  c.space_ = std::move(space);
  c.dmat_ = std::move(dmat);
  c.vertices_ = std::move(vertices);
  return c;
}

int Curve::dim() const {
  if (graph_context()) return space_->dim;
  if (!pieces_.empty()) return static_cast<int>(pieces_.front().size());
  return static_cast<int>(samples_.cols());
}

int Curve::resolution() const {
  if (graph_context()) return static_cast<int>(vertices_.size()) - 1;
  if (!pieces_.empty()) return static_cast<int>(pieces_.size());
  return static_cast<int>(samples_.rows()) - 1;
}

Eigen::VectorXd Curve::point(double t) const {
  if (graph_context()) throw std::logic_error("Curve::point: graph context");
  t = std::clamp(t, 0.0, 1.0);
  if (!pieces_.empty()) {
    std::size_t i = pieces_.size() - 1;
    while (i > 0 && breaks_[i] > t) --i;
    return pieces_[i];
  }
  const int res = static_cast<int>(samples_.rows()) - 1;
  const double u = t * res;
  const int i = std::min(static_cast<int>(u), res - 1);
  const double frac = u - i;
  return ((1.0 - frac) * samples_.row(i) + frac * samples_.row(i + 1)).transpose();
}

int Curve::vertex(double t) const {
  if (!graph_context()) throw std::logic_error("Curve::vertex: not a graph context");
  t = std::clamp(t, 0.0, 1.0);
  const int res = static_cast<int>(vertices_.size()) - 1;
  return vertices_[static_cast<int>(std::lround(t * res))];
}

double Curve::distance(double t1, double t2) const {
  if (graph_context()) return dmat_->lower(vertex(t1), vertex(t2));
  return (point(t1) - point(t2)).norm();
}

double Curve::resolution_scale() const {
  double scale = 0.0;
  if (graph_context()) {
    for (std::size_t i = 0; i + 1 < vertices_.size(); ++i)
      scale = std::max(scale, dmat_->lower(vertices_[i], vertices_[i + 1]));
  } else if (!pieces_.empty()) {
    scale = 0.0;  // exact evaluator
  } else {
    for (int i = 0; i + 1 < samples_.rows(); ++i)
      scale = std::max(scale, (samples_.row(i) - samples_.row(i + 1)).norm());
  }
  return scale;
}

double discrete_energy(const Curve& curve, const TimePartition& partition) {
  KahanSum sum;
  for (int i = 0; i < partition.intervals(); ++i) {
    const double d = curve.distance(partition.time(i), partition.time(i + 1));
    sum.add(d * d / partition.delta(i));
  }
  return 0.5 * sum.value();
}

EnergyEstimate energy_sup(const Curve& curve, double tol, int max_level) {
  if (!(tol > 0.0)) throw std::invalid_argument("energy_sup: tol must be positive");
  EnergyEstimate estimate;
  double prev = 0.0;
  for (int level = 0; level <= max_level; ++level) {
    const double value = discrete_energy(curve, TimePartition::dyadic(level));
    estimate.per_level.push_back(value);
    estimate.value = std::max(estimate.value, value);
    estimate.level = level;
    if (level > 0) {
      estimate.last_increment = value - prev;
      if (std::abs(estimate.last_increment) < tol) {
        estimate.converged = true;
        break;
      }
    }
    prev = value;
  }

  // Randomized partitions at the final level guard against dyadic blind spots.
  RngStream rng(0xE17A11ull, static_cast<std::uint64_t>(estimate.level));
  const int pieces = std::min(1 << estimate.level, 1 << 12);
  for (int probe = 0; probe < 16; ++probe) {
    std::vector<double> times{0.0, 1.0};
    for (int i = 1; i < pieces; ++i) times.push_back(rng.uniform01() * (1.0 - 1e-12));
    std::sort(times.begin(), times.end());
    times.erase(std::unique(times.begin(), times.end()), times.end());
    if (times.size() < 2) continue;
    estimate.value = std::max(estimate.value, discrete_energy(curve, TimePartition(times)));
  }
  return estimate;
}

SpeedEstimate metric_derivative(const Curve& curve, double t, const std::vector<double>& h_grid) {
  if (!(t > 0.0) || !(t < 1.0))
    throw std::invalid_argument("metric_derivative: t must be interior");
  std::vector<double> hs = h_grid;
  if (hs.empty())
    for (int k = 4; k <= 10; ++k) hs.push_back(std::ldexp(1.0, -k));
  std::sort(hs.begin(), hs.end(), std::greater<>());

  const double scale = curve.resolution_scale();
  SpeedEstimate result;
  std::vector<double> quotients;
  std::vector<double> steps;
  for (double h : hs) {
    if (!(h > 0.0) || t - h < 0.0 || t + h > 1.0) continue;
    const double d = curve.distance(t - h, t + h);
    // snapping noise dominates once the chord is a handful of samples wide
    if (curve.graph_context() && d < 6.0 * scale) continue;
    if (!curve.graph_context() && 2.0 * h < 4.0 / std::max(1, curve.resolution())) continue;
    quotients.push_back(d / (2.0 * h));
    steps.push_back(h);
  }
  result.quotients_used = static_cast<int>(quotients.size());
  if (quotients.empty()) return result;

  if (curve.graph_context()) {
    result.value = quotients.front();  // largest admissible step
    result.ok = true;
    return result;
  }
  // Symmetric quotients have an even-order error expansion q(h) = L + c h^2 + ...;
  // extrapolate to h = 0 with Neville in the variable h^2 over the smallest steps.
  const std::size_t depth = std::min<std::size_t>(4, quotients.size());
  std::vector<double> z(depth), table(depth);
  for (std::size_t i = 0; i < depth; ++i) {
    const std::size_t idx = quotients.size() - depth + i;
    z[i] = steps[idx] * steps[idx];
    table[i] = quotients[idx];
  }
  for (std::size_t j = 1; j < depth; ++j)
    for (std::size_t i = 0; i + j < depth; ++i)
      table[i] = (z[i + j] * table[i] - z[i] * table[i + 1]) / (z[i + j] - z[i]);
  result.value = table.front();
  result.ok = std::isfinite(result.value);
  return result;
}

Ac2Result ac2_energy(const Curve& curve, int quadrature_points) {
  if (quadrature_points < 2)
    throw std::invalid_argument("ac2_energy: need at least two quadrature points");
  Ac2Result result;
  int failed = 0;
  KahanSum sum;
  for (int j = 0; j < quadrature_points; ++j) {
    const double t = (j + 0.5) / quadrature_points;
    const auto speed = metric_derivative(curve, t);
    if (!speed.ok) {
      ++failed;
      continue;
    }
    sum.add(0.5 * speed.value * speed.value);
  }
  result.failed_fraction = static_cast<double>(failed) / quadrature_points;
  if (result.failed_fraction > 0.10) return result;
  result.value = sum.value() / (quadrature_points - failed);
  result.defined = true;
  return result;
}

GapResult identification_gap(const Curve& curve, double tol) {
  GapResult result;
  const auto sup = energy_sup(curve, tol);
  result.h_sup = sup.value;
  result.sup_converged = sup.converged;
  if (!sup.converged) {
    // H is unbounded along refinements; off AC^2 both sides are infinite and
    // the finite gap is undefined.
    result.h_tilde = kInf;
    result.h_sup = kInf;
    return result;
  }
  const auto tilde = ac2_energy(curve, 128);
  result.ac2_defined = tilde.defined;
  if (!tilde.defined) return result;
  result.h_tilde = tilde.value;
  result.gap = result.h_tilde - result.h_sup;
  result.defined = true;
  return result;
}

}  // namespace dflab
