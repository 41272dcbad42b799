#pragma once

#include <iosfwd>
#include <memory>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "dflab/fdd.hpp"
#include "dflab/metric.hpp"
#include "dflab/path_energy.hpp"
#include "dflab/state_space.hpp"

namespace dflab {

/// Textual key-value document: one entry per line, first token is the key,
/// the rest is the payload; '#' starts a comment. Keys may repeat.
class KvDocument {
 public:
  static KvDocument parse(std::istream& in);
  static KvDocument parse_file(const std::string& path);

  const std::string* find(const std::string& key) const;
  std::string require(const std::string& key) const;
  std::vector<std::string> all(const std::string& key) const;
  bool has(const std::string& key) const { return find(key) != nullptr; }

 private:
  std::vector<std::pair<std::string, std::string>> entries_;
};

std::vector<std::string> split_tokens(const std::string& line);
double parse_number(const std::string& token);

/// Space description file: kind two_state | lattice_1d | grid_2d | explicit
/// with the matching parameters; explicit spaces carry full measure / edge /
/// position tables ("arc" rows are directed entries left as given).
StateSpace space_from_document(const KvDocument& doc);
StateSpace load_space(const std::string& path);
/// Canonical explicit form (round-trips through space_from_document).
void write_space(const StateSpace& space, std::ostream& out);
void write_space_file(const StateSpace& space, const std::string& path);

/// Vertex spec: "#12" (index) or coordinates "0.25" / "0.5,0.25".
int parse_vertex(const StateSpace& space, const std::string& spec);

/// Region spec: all | indices:1,2,3 | interval:a,b (1D) |
/// box:x0,x1[,y0,y1] | ball:c...,r (intrinsic ball; needs the metric).
Region parse_region(const StateSpace& space, const DistanceMatrix* dmat,
                    const std::string& spec);

/// Event file: "times 0 0.5 1", one "set <region-spec>" per time, optional
/// "beta <value>" and "initial <mass...>" aligned with the first set.
CylinderEvent event_from_document(const StateSpace& space, const DistanceMatrix& dmat,
                                  const KvDocument& doc);
CylinderEvent load_event(const StateSpace& space, const DistanceMatrix& dmat,
                         const std::string& path);

/// Curve file: "context euclidean <dim>" or "context graph", then a
/// closed-form descriptor (kind line | circle | poly | step) or a sample
/// table (kind samples). Graph contexts need the space and its metric.
Curve curve_from_document(const KvDocument& doc, std::shared_ptr<const StateSpace> space,
                          std::shared_ptr<const DistanceMatrix> dmat);
Curve load_curve(const std::string& path, std::shared_ptr<const StateSpace> space = nullptr,
                 std::shared_ptr<const DistanceMatrix> dmat = nullptr);

}  // namespace dflab
