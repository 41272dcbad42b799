#include "dflab/state_space.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <queue>
#include <set>
#include <sstream>
#include <stdexcept>

namespace dflab {

double StateSpace::total_measure() const {
  double total = 0.0;
  for (double m : measure) total += m;
  return total;
}

double StateSpace::conductance(int x, int y) const {
  for (const auto& [v, w] : adjacency[x])
    if (v == y) return w;
  return 0.0;
}

double StateSpace::holding_rate(int x) const {
  double sum = 0.0;
  for (const auto& [v, w] : adjacency[x]) {
    (void)v;
    sum += w;
  }
  return sum / measure[x];
}

int StateSpace::nearest_vertex(const std::vector<double>& pos) const {
  if (!embedded()) throw std::invalid_argument("nearest_vertex: space has no coordinates");
  if (static_cast<int>(pos.size()) != dim)
    throw std::invalid_argument("nearest_vertex: coordinate dimension mismatch");
  int best = 0;
  double best_d2 = std::numeric_limits<double>::infinity();
  for (int v = 0; v < size(); ++v) {
    double d2 = 0.0;
    for (int k = 0; k < dim; ++k) {
      const double d = positions[v][k] - pos[k];
      d2 += d * d;
    }
    if (d2 < best_d2) {
      best_d2 = d2;
      best = v;
    }
  }
  return best;
}

bool Region::contains(int v) const {
  return std::binary_search(vertices.begin(), vertices.end(), v);
}

Region Region::of(std::vector<int> vertices, std::string description) {
  std::sort(vertices.begin(), vertices.end());
  vertices.erase(std::unique(vertices.begin(), vertices.end()), vertices.end());
  if (vertices.empty()) throw std::invalid_argument("Region: empty vertex set");
  return Region{std::move(vertices), std::move(description)};
}

namespace {

void add_edge(StateSpace& s, int a, int b, double w) {
  s.adjacency[a].emplace_back(b, w);
  s.adjacency[b].emplace_back(a, w);
}

}  // namespace

StateSpace build_two_state(double m1, double m2, double w) {
  if (!(m1 > 0.0) || !(m2 > 0.0) || !(w > 0.0))
    throw std::invalid_argument("build_two_state: m1, m2, w must be positive");
  StateSpace s;
  s.measure = {m1, m2};
  s.adjacency.resize(2);
  add_edge(s, 0, 1, w);
  s.kind = "two_state";
  return s;
}

StateSpace build_lattice_1d(int cells, double length, double sigma) {
  if (cells < 2) throw std::invalid_argument("build_lattice_1d: cells must be >= 2");
  if (!(length > 0.0) || !(sigma > 0.0))
    throw std::invalid_argument("build_lattice_1d: length and sigma must be positive");
  const int n = cells + 1;
  const double h = length / cells;
  StateSpace s;
  s.measure.assign(n, h);
  s.measure.front() = h / 2.0;
  s.measure.back() = h / 2.0;
  s.adjacency.resize(n);
  const double w = sigma * sigma / (2.0 * h);
  for (int i = 0; i + 1 < n; ++i) add_edge(s, i, i + 1, w);
  s.positions.resize(n);
  for (int i = 0; i < n; ++i) s.positions[i] = {i * h};
  s.dim = 1;
  s.kind = "lattice_1d";
  s.mesh = h;
  s.sigma = sigma;
  return s;
}

StateSpace build_grid_2d(int cells_x, int cells_y, double length_x, double length_y, double sigma) {
  if (cells_x < 2 || cells_y < 2)
    throw std::invalid_argument("build_grid_2d: cells must be >= 2 in each axis");
  if (!(length_x > 0.0) || !(length_y > 0.0) || !(sigma > 0.0))
    throw std::invalid_argument("build_grid_2d: lengths and sigma must be positive");
  const int nx = cells_x + 1, ny = cells_y + 1;
  const double hx = length_x / cells_x, hy = length_y / cells_y;
  auto trapezoid = [](int i, int n, double h) { return (i == 0 || i == n - 1) ? h / 2.0 : h; };
  auto id = [ny](int i, int j) { return i * ny + j; };

  StateSpace s;
  const int n = nx * ny;
  s.measure.resize(n);
  s.adjacency.resize(n);
  s.positions.resize(n);
  for (int i = 0; i < nx; ++i)
    for (int j = 0; j < ny; ++j) {
      s.measure[id(i, j)] = trapezoid(i, nx, hx) * trapezoid(j, ny, hy);
      s.positions[id(i, j)] = {i * hx, j * hy};
    }
  // Per-axis weight sigma^2/(2 h_axis) scaled by the transverse trapezoid
  // measure, so the generator is the five-point stencil of (sigma^2/2)*Laplace.
  for (int i = 0; i < nx; ++i)
    for (int j = 0; j < ny; ++j) {
      if (i + 1 < nx)
        add_edge(s, id(i, j), id(i + 1, j), sigma * sigma / (2.0 * hx) * trapezoid(j, ny, hy));
      if (j + 1 < ny)
        add_edge(s, id(i, j), id(i, j + 1), sigma * sigma / (2.0 * hy) * trapezoid(i, nx, hx));
    }
  s.dim = 2;
  s.kind = "grid_2d";
  s.mesh = std::max(hx, hy);
  s.sigma = sigma;
  return s;
}

StateSpace space_from_tables(std::vector<double> measure,
                             const std::vector<std::tuple<int, int, double>>& entries,
                             std::vector<std::vector<double>> positions) {
  StateSpace s;
  const int n = static_cast<int>(measure.size());
  s.measure = std::move(measure);
  s.adjacency.resize(n);
  for (const auto& [i, j, w] : entries) {
    if (i < 0 || i >= n || j < 0 || j >= n)
      throw std::invalid_argument("space_from_tables: vertex index out of range");
    s.adjacency[i].emplace_back(j, w);
  }
  if (!positions.empty()) {
    if (static_cast<int>(positions.size()) != n)
      throw std::invalid_argument("space_from_tables: positions size mismatch");
    s.dim = static_cast<int>(positions.front().size());
    s.positions = std::move(positions);
  }
  s.kind = "explicit";
  return s;
}

ValidationReport validate_space(const StateSpace& space) {
  ValidationReport report;
  auto fail = [&report](const std::string& what) {
    report.pass = false;
    report.issues.push_back(what);
  };

  const int n = space.size();
  if (n == 0) {
    fail("space has no vertices");
    return report;
  }
  for (int x = 0; x < n; ++x)
    if (!(space.measure[x] > 0.0)) {
      std::ostringstream os;
      os << "nonpositive measure m(" << x << ") = " << space.measure[x];
      fail(os.str());
    }

  for (int x = 0; x < n; ++x) {
    std::set<int> seen;
    for (const auto& [y, w] : space.adjacency[x]) {
      if (w < 0.0) {
        std::ostringstream os;
        os << "negative conductance w(" << x << "," << y << ") = " << w;
        fail(os.str());
      }
      if (y == x && w != 0.0) {
        std::ostringstream os;
        os << "nonzero self-loop w(" << x << "," << x << ")";
        fail(os.str());
      }
      if (!seen.insert(y).second) {
        std::ostringstream os;
        os << "duplicate adjacency entry (" << x << "," << y << ")";
        fail(os.str());
      }
      if (x < y) {
        const double back = space.conductance(y, x);
        if (std::abs(back - w) > 1e-12 * std::max(1.0, std::abs(w))) {
          std::ostringstream os;
          os << "asymmetric conductance: w(" << x << "," << y << ") = " << w << " but w(" << y
             << "," << x << ") = " << back;
          fail(os.str());
        }
      }
    }
  }

  // Connectivity over positive conductances.
  std::vector<char> visited(n, 0);
  std::queue<int> queue;
  queue.push(0);
  visited[0] = 1;
  int reached = 1;
  while (!queue.empty()) {
    const int x = queue.front();
    queue.pop();
    for (const auto& [y, w] : space.adjacency[x])
      if (w > 0.0 && !visited[y]) {
        visited[y] = 1;
        ++reached;
        queue.push(y);
      }
  }
  if (reached != n) {
    std::ostringstream os;
    os << "graph of positive conductances is disconnected: reached " << reached << " of " << n
       << " vertices";
    fail(os.str());
  }
  return report;
}

Region full_region(const StateSpace& space) {
  std::vector<int> all(space.size());
  for (int v = 0; v < space.size(); ++v) all[v] = v;
  return Region::of(std::move(all), "all");
}

Region box_region(const StateSpace& space, const std::vector<double>& lo,
                  const std::vector<double>& hi, std::string description) {
  if (!space.embedded()) throw std::invalid_argument("box_region: space has no coordinates");
  if (static_cast<int>(lo.size()) != space.dim || static_cast<int>(hi.size()) != space.dim)
    throw std::invalid_argument("box_region: bound dimension mismatch");
  std::vector<int> inside;
  for (int v = 0; v < space.size(); ++v) {
    bool ok = true;
    for (int k = 0; k < space.dim && ok; ++k)
      ok = space.positions[v][k] >= lo[k] && space.positions[v][k] <= hi[k];
    if (ok) inside.push_back(v);
  }
  if (description.empty()) description = "box";
  return Region::of(std::move(inside), std::move(description));
}

}  // namespace dflab
