#include "dflab/io.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "dflab/numerics.hpp"

namespace dflab {

namespace {

std::string trim(const std::string& s) {
  const auto a = s.find_first_not_of(" \t\r\n");
  if (a == std::string::npos) return "";
  const auto b = s.find_last_not_of(" \t\r\n");
  return s.substr(a, b - a + 1);
}

std::vector<std::string> split_on(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : s) {
    if (c == sep) {
      out.push_back(trim(cur));
      cur.clear();
    } else {
      cur += c;
    }
  }
  out.push_back(trim(cur));
  return out;
}

}  // namespace

std::vector<std::string> split_tokens(const std::string& line) {
  std::vector<std::string> tokens;
  std::istringstream in(line);
  std::string tok;
  while (in >> tok) tokens.push_back(tok);
  return tokens;
}

double parse_number(const std::string& token) {
  std::size_t used = 0;
  double value = 0.0;
  try {
    value = std::stod(token, &used);
  } catch (const std::exception&) {
    throw std::invalid_argument("expected a number, got '" + token + "'");
  }
  if (used != token.size()) throw std::invalid_argument("expected a number, got '" + token + "'");
  return value;
}

KvDocument KvDocument::parse(std::istream& in) {
  KvDocument doc;
  std::string line;
  while (std::getline(in, line)) {
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto space = line.find_first_of(" \t");
    if (space == std::string::npos) {
      doc.entries_.emplace_back(line, "");
    } else {
      doc.entries_.emplace_back(line.substr(0, space), trim(line.substr(space + 1)));
    }
  }
  return doc;
}

KvDocument KvDocument::parse_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open file: " + path);
  return parse(in);
}

const std::string* KvDocument::find(const std::string& key) const {
  for (const auto& [k, v] : entries_)
    if (k == key) return &v;
  return nullptr;
}

std::string KvDocument::require(const std::string& key) const {
  const std::string* v = find(key);
  if (!v) throw std::invalid_argument("missing required field '" + key + "'");
  return *v;
}

std::vector<std::string> KvDocument::all(const std::string& key) const {
  std::vector<std::string> out;
  for (const auto& [k, v] : entries_)
    if (k == key) out.push_back(v);
  return out;
}

StateSpace space_from_document(const KvDocument& doc) {
  const std::string kind = doc.require("kind");
  if (kind == "two_state") {
    return build_two_state(parse_number(doc.require("m1")), parse_number(doc.require("m2")),
                           parse_number(doc.require("w")));
  }
  if (kind == "lattice_1d") {
    return build_lattice_1d(static_cast<int>(parse_number(doc.require("cells"))),
                            parse_number(doc.require("length")),
                            parse_number(doc.require("sigma")));
  }
  if (kind == "grid_2d") {
    return build_grid_2d(static_cast<int>(parse_number(doc.require("cells_x"))),
                         static_cast<int>(parse_number(doc.require("cells_y"))),
                         parse_number(doc.require("length_x")),
                         parse_number(doc.require("length_y")),
                         parse_number(doc.require("sigma")));
  }
  if (kind != "explicit")
    throw std::invalid_argument("unknown space kind '" + kind + "'");

  const int n = static_cast<int>(parse_number(doc.require("n")));
  if (n <= 0) throw std::invalid_argument("explicit space: n must be positive");
  std::vector<double> measure(n, 0.0);
  for (const auto& row : doc.all("measure")) {
    const auto toks = split_tokens(row);
    if (toks.size() != 2) throw std::invalid_argument("measure row needs: index value");
    measure.at(static_cast<int>(parse_number(toks[0]))) = parse_number(toks[1]);
  }
  std::vector<std::tuple<int, int, double>> entries;
  for (const auto& row : doc.all("edge")) {
    const auto toks = split_tokens(row);
    if (toks.size() != 3) throw std::invalid_argument("edge row needs: i j w");
    const int i = static_cast<int>(parse_number(toks[0]));
    const int j = static_cast<int>(parse_number(toks[1]));
    const double w = parse_number(toks[2]);
    entries.emplace_back(i, j, w);
    entries.emplace_back(j, i, w);
  }
  for (const auto& row : doc.all("arc")) {
    const auto toks = split_tokens(row);
    if (toks.size() != 3) throw std::invalid_argument("arc row needs: i j w");
    entries.emplace_back(static_cast<int>(parse_number(toks[0])),
                         static_cast<int>(parse_number(toks[1])), parse_number(toks[2]));
  }
  std::vector<std::vector<double>> positions;
  const auto pos_rows = doc.all("position");
  if (!pos_rows.empty()) {
    positions.assign(n, {});
    for (const auto& row : pos_rows) {
      const auto toks = split_tokens(row);
      if (toks.size() < 2) throw std::invalid_argument("position row needs: index coords...");
      std::vector<double> coords;
      for (std::size_t k = 1; k < toks.size(); ++k) coords.push_back(parse_number(toks[k]));
      positions.at(static_cast<int>(parse_number(toks[0]))) = std::move(coords);
    }
    for (auto& p : positions)
      if (p.empty()) throw std::invalid_argument("explicit space: missing position row");
  }
  StateSpace space = space_from_tables(std::move(measure), entries, std::move(positions));
  if (doc.has("mesh")) space.mesh = parse_number(doc.require("mesh"));
  if (doc.has("sigma")) space.sigma = parse_number(doc.require("sigma"));
  if (doc.has("built_from")) space.kind = doc.require("built_from");
  return space;
}

StateSpace load_space(const std::string& path) {
  return space_from_document(KvDocument::parse_file(path));
}

void write_space(const StateSpace& space, std::ostream& out) {
  out << "kind explicit\n";
  if (space.kind != "explicit" && !space.kind.empty()) out << "built_from " << space.kind << "\n";
  out << "n " << space.size() << "\n";
  if (space.continuum_tagged()) {
    out << "mesh " << format_double(space.mesh) << "\n";
    out << "sigma " << format_double(space.sigma) << "\n";
  }
  for (int v = 0; v < space.size(); ++v)
    out << "measure " << v << " " << format_double(space.measure[v]) << "\n";
  if (space.embedded()) {
    for (int v = 0; v < space.size(); ++v) {
      out << "position " << v;
      for (double c : space.positions[v]) out << " " << format_double(c);
      out << "\n";
    }
  }
  for (int x = 0; x < space.size(); ++x)
    for (const auto& [y, w] : space.adjacency[x])
      if (x < y) out << "edge " << x << " " << y << " " << format_double(w) << "\n";
}

void write_space_file(const StateSpace& space, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write file: " + path);
  write_space(space, out);
}

int parse_vertex(const StateSpace& space, const std::string& spec) {
  if (spec.empty()) throw std::invalid_argument("empty vertex spec");
  if (spec[0] == '#') {
    const int v = static_cast<int>(parse_number(spec.substr(1)));
    if (v < 0 || v >= space.size())
      throw std::invalid_argument("vertex index out of range: " + spec);
    return v;
  }
  std::vector<double> coords;
  for (const auto& tok : split_on(spec, ','))
    if (!tok.empty()) coords.push_back(parse_number(tok));
  return space.nearest_vertex(coords);
}

Region parse_region(const StateSpace& space, const DistanceMatrix* dmat,
                    const std::string& spec) {
  if (spec == "all") return full_region(space);
  const auto colon = spec.find(':');
  if (colon == std::string::npos)
    throw std::invalid_argument("region spec must look like kind:args, got '" + spec + "'");
  const std::string head = spec.substr(0, colon);
  const auto args = split_on(spec.substr(colon + 1), ',');

  if (head == "indices") {
    std::vector<int> ids;
    for (const auto& a : args) ids.push_back(static_cast<int>(parse_number(a)));
    return Region::of(std::move(ids), spec);
  }
  if (head == "interval") {
    if (args.size() != 2 || space.dim != 1)
      throw std::invalid_argument("interval region needs a 1D space and two bounds");
    return box_region(space, {parse_number(args[0])}, {parse_number(args[1])}, spec);
  }
  if (head == "box") {
    if (args.size() != static_cast<std::size_t>(2 * space.dim))
      throw std::invalid_argument("box region needs min,max per axis");
    std::vector<double> lo, hi;
    for (int k = 0; k < space.dim; ++k) {
      lo.push_back(parse_number(args[2 * k]));
      hi.push_back(parse_number(args[2 * k + 1]));
    }
    return box_region(space, lo, hi, spec);
  }
  if (head == "ball") {
    if (!dmat) throw std::invalid_argument("ball region needs the intrinsic metric");
    if (args.size() != static_cast<std::size_t>(space.dim) + 1)
      throw std::invalid_argument("ball region needs center coords and a radius");
    std::vector<double> center;
    for (int k = 0; k < space.dim; ++k) center.push_back(parse_number(args[k]));
    const double r = parse_number(args.back());
    auto ids = metric_ball(*dmat, space.nearest_vertex(center), r);
    if (ids.empty()) throw std::invalid_argument("ball region is empty: " + spec);
    return Region::of(std::move(ids), spec);
  }
  throw std::invalid_argument("unknown region kind '" + head + "'");
}

CylinderEvent event_from_document(const StateSpace& space, const DistanceMatrix& dmat,
                                  const KvDocument& doc) {
  std::vector<double> times;
  for (const auto& tok : split_tokens(doc.require("times"))) times.push_back(parse_number(tok));
  TimePartition partition(std::move(times));

  std::vector<Region> sets;
  for (const auto& spec : doc.all("set")) sets.push_back(parse_region(space, &dmat, spec));

  CylinderEvent event{std::move(partition), std::move(sets), {}, -1.0};
  if (doc.has("beta")) event.beta = parse_number(doc.require("beta"));
  if (doc.has("initial")) {
    for (const auto& tok : split_tokens(doc.require("initial")))
      event.initial_law.push_back(parse_number(tok));
  }
  event.validate();
  return event;
}

CylinderEvent load_event(const StateSpace& space, const DistanceMatrix& dmat,
                         const std::string& path) {
  return event_from_document(space, dmat, KvDocument::parse_file(path));
}

Curve curve_from_document(const KvDocument& doc, std::shared_ptr<const StateSpace> space,
                          std::shared_ptr<const DistanceMatrix> dmat) {
  const auto context = split_tokens(doc.require("context"));
  if (context.empty()) throw std::invalid_argument("curve: empty context");
  const std::string kind = doc.require("kind");
  const int resolution = doc.has("resolution")
                             ? static_cast<int>(parse_number(doc.require("resolution")))
                             : Curve::kDefaultResolution;

  auto vector_field = [&doc](const std::string& key) {
    Eigen::VectorXd v;
    const auto toks = split_tokens(doc.require(key));
    v.resize(static_cast<Eigen::Index>(toks.size()));
    for (std::size_t i = 0; i < toks.size(); ++i) v[static_cast<Eigen::Index>(i)] = parse_number(toks[i]);
    return v;
  };

  if (context[0] == "graph") {
    if (!space || !dmat)
      throw std::invalid_argument("curve: graph context needs a space and its metric");
    if (kind == "line")
      return Curve::graph_segment(space, dmat, vector_field("from"), vector_field("to"),
                                  resolution);
    if (kind == "samples") {
      std::vector<int> vertices;
      for (const auto& row : doc.all("sample"))
        vertices.push_back(static_cast<int>(parse_number(row)));
      return Curve::graph_samples(space, dmat, std::move(vertices));
    }
    throw std::invalid_argument("graph curve kind must be line or samples");
  }
  if (context[0] != "euclidean")
    throw std::invalid_argument("curve context must be euclidean or graph");

  if (kind == "line") return Curve::line(vector_field("from"), vector_field("to"), resolution);
  if (kind == "circle") {
    const Eigen::VectorXd center = vector_field("center");
    if (center.size() != 2) throw std::invalid_argument("circle curve: center must be 2D");
    const auto angles = split_tokens(doc.require("angles"));
    if (angles.size() != 2) throw std::invalid_argument("circle curve: angles needs two values");
    return Curve::circle_arc(Eigen::Vector2d(center[0], center[1]),
                             parse_number(doc.require("radius")), parse_number(angles[0]),
                             parse_number(angles[1]), resolution);
  }
  if (kind == "poly") {
    std::vector<std::vector<double>> coeffs;
    for (const auto& row : doc.all("coeffs")) {
      std::vector<double> c;
      for (const auto& tok : split_tokens(row)) c.push_back(parse_number(tok));
      coeffs.push_back(std::move(c));
    }
    return Curve::polynomial(coeffs, resolution);
  }
  if (kind == "samples") {
    const auto rows = doc.all("sample");
    if (rows.size() < 2) throw std::invalid_argument("samples curve: need at least two rows");
    const auto first = split_tokens(rows.front());
    Eigen::MatrixXd samples(rows.size(), first.size());
    for (std::size_t i = 0; i < rows.size(); ++i) {
      const auto toks = split_tokens(rows[i]);
      if (toks.size() != first.size())
        throw std::invalid_argument("samples curve: inconsistent row width");
      for (std::size_t k = 0; k < toks.size(); ++k)
        samples(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(k)) =
            parse_number(toks[k]);
    }
    return Curve::euclidean_samples(std::move(samples));
  }
  if (kind == "step") {
    std::vector<double> breaks;
    std::vector<Eigen::VectorXd> values;
    for (const auto& row : doc.all("piece")) {
      const auto toks = split_tokens(row);
      if (toks.size() < 2) throw std::invalid_argument("step curve: piece needs t coords...");
      breaks.push_back(parse_number(toks[0]));
      Eigen::VectorXd v(toks.size() - 1);
      for (std::size_t k = 1; k < toks.size(); ++k)
        v[static_cast<Eigen::Index>(k - 1)] = parse_number(toks[k]);
      values.push_back(std::move(v));
    }
    return Curve::piecewise_constant(breaks, values);
  }
  throw std::invalid_argument("unknown curve kind '" + kind + "'");
}

Curve load_curve(const std::string& path, std::shared_ptr<const StateSpace> space,
                 std::shared_ptr<const DistanceMatrix> dmat) {
  return curve_from_document(KvDocument::parse_file(path), std::move(space), std::move(dmat));
}

}  // namespace dflab
