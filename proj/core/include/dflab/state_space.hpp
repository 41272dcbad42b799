#pragma once

#include <Eigen/Dense>

#include <string>
#include <tuple>
#include <utility>
#include <vector>

namespace dflab {

/// Finite metric-measure space carrying a symmetric Dirichlet form:
/// a vertex set with positive measure m(x) and symmetric nonnegative
/// conductances w(x,y). Immutable after construction; safe to share
/// read-only across threads.
struct StateSpace {
  /// Per-vertex measure m(x) > 0.
  std::vector<double> measure;
  /// Adjacency entries as stored; builders insert both directions so the
  /// conductances are symmetric. validate_space() checks this for spaces
  /// assembled from raw tables.
  std::vector<std::vector<std::pair<int, double>>> adjacency;
  /// Optional embedding coordinates (n x dim); empty for abstract spaces.
  std::vector<std::vector<double>> positions;
  int dim = 0;

  std::string kind;    ///< "two_state" | "lattice_1d" | "grid_2d" | "explicit"
  double mesh = 0.0;   ///< continuum-approximation tag: mesh size h (> 0 when tagged)
  double sigma = 0.0;  ///< diffusion scale recorded with the tag

  int size() const { return static_cast<int>(measure.size()); }
  bool embedded() const { return !positions.empty(); }
  bool continuum_tagged() const { return mesh > 0.0; }
  double total_measure() const;
  /// w(x,y) as stored; 0 when no entry.
  double conductance(int x, int y) const;
  /// Total jump rate out of x: (1/m(x)) sum_y w(x,y).
  double holding_rate(int x) const;
  /// Nearest vertex to a coordinate point (embedded spaces only).
  int nearest_vertex(const std::vector<double>& pos) const;
};

/// Nonempty vertex subset with a human-readable description.
struct Region {
  std::vector<int> vertices;  ///< sorted, unique
  std::string description;

  bool contains(int v) const;
  int size() const { return static_cast<int>(vertices.size()); }
  bool empty() const { return vertices.empty(); }
  static Region of(std::vector<int> vertices, std::string description = "");
};

StateSpace build_two_state(double m1, double m2, double w);
StateSpace build_lattice_1d(int cells, double length, double sigma);
StateSpace build_grid_2d(int cells_x, int cells_y, double length_x, double length_y, double sigma);

/// Assemble a space from raw tables without symmetrizing; entries are kept
/// as given so validate_space can surface violations.
StateSpace space_from_tables(std::vector<double> measure,
                             const std::vector<std::tuple<int, int, double>>& entries,
                             std::vector<std::vector<double>> positions = {});

struct ValidationReport {
  bool pass = true;
  std::vector<std::string> issues;
};
ValidationReport validate_space(const StateSpace& space);

/// Whole vertex set as a Region.
Region full_region(const StateSpace& space);
/// Vertices whose coordinates lie in [lo_i, hi_i] for every axis.
Region box_region(const StateSpace& space, const std::vector<double>& lo,
                  const std::vector<double>& hi, std::string description = "");

}  // namespace dflab
