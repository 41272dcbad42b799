#include "dflab/experiment.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <limits>
#include <set>
#include <ostream>
#include <sstream>
#include <stdexcept>

#include "dflab/asymptotics.hpp"
#include "dflab/csv.hpp"
#include "dflab/fdd.hpp"
#include "dflab/inequalities.hpp"
#include "dflab/io.hpp"
#include "dflab/numerics.hpp"
#include "dflab/path_energy.hpp"
#include "dflab/simulate.hpp"

namespace dflab {

namespace {

const double kNaN = std::numeric_limits<double>::quiet_NaN();

const std::set<std::string>& known_kinds() {
  static const std::set<std::string> kinds{
      "vd", "pi", "hi", "volscale", "metric", "varadhan_kernel", "varadhan_indicator",
      "gaussian_threshold", "fdd", "energy", "tube"};
  return kinds;
}

std::vector<double> parse_list(const std::string& csv) {
  std::vector<double> out;
  std::string token;
  std::istringstream in(csv);
  while (std::getline(in, token, ','))
    if (!token.empty()) out.push_back(parse_number(token));
  return out;
}

std::vector<double> grid_from(const ProbeSpec& spec, const char* lo_key, const char* hi_key,
                              const char* points_key, int default_points) {
  return log_spaced_grid(spec.number(lo_key), spec.number(hi_key),
                         static_cast<int>(spec.number_or(points_key, default_points)));
}

Region region_from(const ProbeContext& ctx, const std::string& spec) {
  return parse_region(*ctx.space, ctx.dmat.get(), spec);
}

}  // namespace

std::string resolve_path(const std::string& base_dir, const std::string& path) {
  if (base_dir.empty() || path.empty()) return path;
  std::filesystem::path p(path);
  if (p.is_absolute()) return path;
  return (std::filesystem::path(base_dir) / p).string();
}

const std::string* ProbeSpec::find(const std::string& key) const {
  for (const auto& [k, v] : params)
    if (k == key) return &v;
  return nullptr;
}

std::string ProbeSpec::param(const std::string& key) const {
  const std::string* v = find(key);
  if (!v)
    throw std::invalid_argument("probe '" + id + "' (" + kind + "): missing parameter '" + key +
                                "'");
  return *v;
}

std::string ProbeSpec::param_or(const std::string& key, const std::string& fallback) const {
  const std::string* v = find(key);
  return v ? *v : fallback;
}

double ProbeSpec::number(const std::string& key) const { return parse_number(param(key)); }

double ProbeSpec::number_or(const std::string& key, double fallback) const {
  const std::string* v = find(key);
  return v ? parse_number(*v) : fallback;
}

std::string ProbeSpec::digest_string() const {
  std::string all = kind;
  for (const auto& [k, v] : params) {
    all += '|';
    all += k;
    all += '=';
    all += v;
  }
  return fnv1a_hex(all);
}

std::string ReportRow::flags_joined() const {
  std::string out;
  for (const auto& f : flags) {
    if (!out.empty()) out += ';';
    out += f;
  }
  return out;
}

ExperimentConfig ExperimentConfig::parse(std::istream& in, std::string base_dir) {
  ExperimentConfig config;
  config.base_dir = std::move(base_dir);
  std::string line;
  int line_no = 0;
  int anon = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    const auto tokens = split_tokens(line);
    if (tokens.empty()) continue;
    const std::string& key = tokens[0];
    auto need = [&](std::size_t n) {
      if (tokens.size() < n + 1)
        throw std::invalid_argument("config line " + std::to_string(line_no) + ": '" + key +
                                    "' needs an argument");
    };
    if (key == "space") {
      need(1);
      config.space_path = tokens[1];
    } else if (key == "out") {
      need(1);
      config.out_dir = tokens[1];
    } else if (key == "seed") {
      need(1);
      config.seed = static_cast<std::uint64_t>(parse_number(tokens[1]));
    } else if (key == "threads") {
      need(1);
      config.threads = static_cast<int>(parse_number(tokens[1]));
    } else if (key == "probe") {
      need(1);
      ProbeSpec spec;
      spec.kind = tokens[1];
      if (!known_kinds().count(spec.kind))
        throw std::invalid_argument("config line " + std::to_string(line_no) +
                                    ": unknown probe kind '" + spec.kind + "'");
      for (std::size_t i = 2; i < tokens.size(); ++i) {
        const auto eq = tokens[i].find('=');
        if (eq == std::string::npos)
          throw std::invalid_argument("config line " + std::to_string(line_no) +
                                      ": probe parameters must be key=value, got '" + tokens[i] +
                                      "'");
        const std::string k = tokens[i].substr(0, eq), v = tokens[i].substr(eq + 1);
        if (k == "id")
          spec.id = v;
        else
          spec.params.emplace_back(k, v);
      }
      if (spec.id.empty()) spec.id = spec.kind + "_" + std::to_string(++anon);
      config.probes.push_back(std::move(spec));
    } else {
      throw std::invalid_argument("config line " + std::to_string(line_no) + ": unknown key '" +
                                  key + "'");
    }
  }
  if (config.space_path.empty()) throw std::invalid_argument("config: missing 'space' line");
  std::set<std::string> ids;
  for (const auto& p : config.probes)
    if (!ids.insert(p.id).second)
      throw std::invalid_argument("config: duplicate probe id '" + p.id + "'");
  return config;
}

ExperimentConfig ExperimentConfig::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open config: " + path);
  return parse(in, std::filesystem::path(path).parent_path().string());
}

ProbeContext make_context(const ExperimentConfig& config) {
  ProbeContext ctx;
  auto space = std::make_shared<StateSpace>(
      load_space(resolve_path(config.base_dir, config.space_path)));
  const auto report = validate_space(*space);
  if (!report.pass)
    throw std::invalid_argument("experiment space invalid: " + report.issues.front());
  ctx.space = space;
  ctx.threads = config.threads;
  if (const char* env = std::getenv("DFLAB_THREADS"))
    ctx.threads = std::max(0, atoi(env));
  ctx.dmat = std::make_shared<DistanceMatrix>(DistanceMatrix::build(*space, 1e-3, ctx.threads));
  ctx.cache = std::make_shared<SpectralCache>(SpectralCache::build(space));
  ctx.seed = config.seed;
  ctx.base_dir = config.base_dir;
  return ctx;
}

namespace {

void probe_vd(const ProbeContext& ctx, const ProbeSpec& spec, ReportRow& row, std::ostream* csv) {
  const Region region = region_from(ctx, spec.param_or("region", "all"));
  const auto radii = parse_list(spec.param("radii"));
  const auto report = doubling_exponent(*ctx.space, *ctx.dmat, region, radii,
                                        static_cast<int>(spec.number_or("centers", 64)));
  row.headline = report.best;
  row.flags.push_back("no-paper-target");
  if (csv) {
    CsvWriter w(*csv);
    w.header({"center", "r", "vol_r", "vol_2r", "log2_ratio"});
    for (const auto& s : report.samples) {
      const double v1 = ball_volume(*ctx.space, *ctx.dmat, s.center, s.r);
      const double v2 = ball_volume(*ctx.space, *ctx.dmat, s.center, 2.0 * s.r);
      w.field(s.center).field(s.r).field(v1).field(v2).field(s.value);
      w.end_row();
    }
  }
}

void probe_pi(const ProbeContext& ctx, const ProbeSpec& spec, ReportRow& row, std::ostream* csv) {
  const int x = parse_vertex(*ctx.space, spec.param("x"));
  const double r = spec.number("r");
  const auto result = poincare_constant(*ctx.space, *ctx.dmat, x, r);
  row.headline = result.defined ? result.kappa : kNaN;
  row.flags.push_back("no-paper-target");
  if (!result.defined) row.flags.push_back("undefined:" + result.note);
  if (csv) {
    CsvWriter w(*csv);
    w.header({"x", "r", "kappa", "lambda_star", "ball_r_size", "ball_2r_size", "defined"});
    w.field(x).field(r).field(result.kappa).field(result.lambda_star);
    w.field(static_cast<long long>(result.ball_r.size()));
    w.field(static_cast<long long>(result.ball_2r.size()));
    w.field(static_cast<long long>(result.defined ? 1 : 0));
    w.end_row();
  }
}

void probe_hi(const ProbeContext& ctx, const ProbeSpec& spec, ReportRow& row, std::ostream* csv) {
  const Region region = region_from(ctx, spec.param_or("region", "all"));
  const auto radii = parse_list(spec.param("radii"));
  std::vector<double> times;
  if (spec.find("times")) {
    times = parse_list(spec.param("times"));
  } else {
    for (double r : radii) times.push_back(8.0 * r * r);
  }
  const auto report = harnack_constant(*ctx.cache, *ctx.dmat, region, radii, times);
  row.headline = report.best;
  row.flags.push_back("no-paper-target");
  if (!report.defined) row.flags.push_back("all-samples-excluded");
  if (csv) {
    CsvWriter w(*csv);
    w.header({"center", "r", "t", "source", "ratio", "excluded"});
    for (const auto& s : report.samples) {
      w.field(s.center).field(s.r).field(s.t).field(s.source).field(s.value);
      w.field(static_cast<long long>(s.excluded ? 1 : 0));
      w.end_row();
    }
  }
}

void probe_volscale(const ProbeContext& ctx, const ProbeSpec& spec, ReportRow& row,
                    std::ostream* csv) {
  const int x = parse_vertex(*ctx.space, spec.param("x"));
  const double epsilon = spec.number_or("epsilon", 1.0);
  const auto grid = grid_from(spec, "tmin", "tmax", "points", 10);
  double doubling = spec.number_or("n", -1.0);
  if (doubling < 0.0) {
    const double diam = ctx.dmat->diameter_lower();
    const auto vd =
        doubling_exponent(*ctx.space, *ctx.dmat, full_region(*ctx.space), {diam / 8.0}, 16);
    doubling = vd.best;
  }
  const auto curve = volume_scaling_curve(*ctx.space, *ctx.dmat, x, epsilon, grid, doubling);
  row.headline = curve.fitted_limit;
  row.has_target = true;
  row.target = 0.0;
  row.deviation = std::abs(curve.fitted_limit);
  row.series_names = {"t", "t_log_vol", "target"};
  for (const auto& pt : curve.points) {
    row.series_rows.push_back({pt.t, pt.value, 0.0});
    if (!pt.within_bound) row.flags.push_back("bound-violated-at-t=" + format_double(pt.t));
  }
  if (csv) {
    CsvWriter w(*csv);
    w.header({"t", "t_log_vol", "proof_bound", "within_bound"});
    for (const auto& pt : curve.points) {
      w.field(pt.t).field(pt.value).field(pt.proof_bound);
      w.field(static_cast<long long>(pt.within_bound ? 1 : 0));
      w.end_row();
    }
  }
}

void probe_metric(const ProbeContext& ctx, const ProbeSpec& spec, ReportRow& row,
                  std::ostream* csv) {
  const double tol = spec.number_or("tol", 1e-3);
  row.flags.push_back("no-paper-target");
  if (spec.param_or("all", "") == "true") {
    const int n = ctx.space->size();
    double diameter = 0.0;
    std::ostream null_sink(nullptr);
    CsvWriter w(csv ? *csv : null_sink);
    if (csv) w.header({"x", "y", "lower", "upper", "gap", "witness_max_gamma"});
    const bool per_pair = n <= 144;
    for (int x = 0; x < n; ++x) {
      for (int y = x + 1; y < n; ++y) {
        double lower, upper, gamma;
        if (per_pair) {
          const auto bracket = intrinsic_distance(*ctx.space, x, y, tol);
          lower = bracket.lower;
          upper = bracket.upper;
          gamma = bracket.witness_max_gamma;
        } else {
          lower = ctx.dmat->lower(x, y);
          upper = ctx.dmat->upper(x, y);
          gamma = 1.0;  // library witnesses are rescaled into the feasible set
        }
        diameter = std::max(diameter, lower);
        if (csv) {
          w.field(x).field(y).field(lower).field(upper).field(upper - lower).field(gamma);
          w.end_row();
        }
      }
    }
    row.headline = diameter;
    return;
  }
  const int x = parse_vertex(*ctx.space, spec.param("x"));
  const int y = parse_vertex(*ctx.space, spec.param("y"));
  const auto bracket = intrinsic_distance(*ctx.space, x, y, tol);
  row.headline = bracket.lower;
  if (!bracket.connected) row.flags.push_back("disconnected-pair");
  if (csv) {
    CsvWriter w(*csv);
    w.header({"x", "y", "lower", "upper", "gap", "witness_max_gamma"});
    w.field(x).field(y).field(bracket.lower).field(bracket.upper);
    w.field(bracket.upper - bracket.lower).field(bracket.witness_max_gamma);
    w.end_row();
  }
}

void write_probe_csv(const AsymptoticProbe& probe, std::ostream& out) {
  CsvWriter w(out);
  w.header({"t", "t_log_q", "model_fit", "target", "deviation", "in_window"});
  for (const auto& pt : probe.points) {
    if (pt.dropped) continue;
    w.field(pt.t).field(pt.value).field(pt.model).field(probe.target);
    w.field(pt.value - probe.target);
    w.field(static_cast<long long>(pt.in_window ? 1 : 0));
    w.end_row();
  }
}

void fill_probe_row(const AsymptoticProbe& probe, ReportRow& row) {
  row.headline = probe.fitted_limit;
  row.has_target = true;
  row.target = probe.target;
  row.deviation = probe.rel_deviation;
  if (probe.window_empty) row.flags.push_back("outside-validity-window");
  if (!probe.note.empty()) row.flags.push_back(probe.note);
  row.series_names = {"t", "t_log_q", "target"};
  for (const auto& pt : probe.points)
    if (!pt.dropped) row.series_rows.push_back({pt.t, pt.value, probe.target});
}

void probe_varadhan_kernel(const ProbeContext& ctx, const ProbeSpec& spec, ReportRow& row,
                           std::ostream* csv) {
  const int x = parse_vertex(*ctx.space, spec.param("x"));
  const int y = parse_vertex(*ctx.space, spec.param("y"));
  const auto grid = grid_from(spec, "tmin", "tmax", "points", 12);
  const auto probe = varadhan_kernel(*ctx.cache, *ctx.dmat, x, y, grid);
  fill_probe_row(probe, row);
  if (csv) write_probe_csv(probe, *csv);
}

void probe_varadhan_indicator(const ProbeContext& ctx, const ProbeSpec& spec, ReportRow& row,
                              std::ostream* csv) {
  const Region A = region_from(ctx, spec.param("region"));
  const int x = parse_vertex(*ctx.space, spec.param("x"));
  const auto grid = grid_from(spec, "tmin", "tmax", "points", 12);
  const auto probe = varadhan_indicator(*ctx.cache, *ctx.dmat, A, x, grid);
  fill_probe_row(probe, row);
  if (csv) write_probe_csv(probe, *csv);
}

void probe_gaussian(const ProbeContext& ctx, const ProbeSpec& spec, ReportRow& row,
                    std::ostream* csv) {
  const Region A = region_from(ctx, spec.param("a"));
  const Region B = region_from(ctx, spec.param("b"));
  const auto result = gaussian_bound_threshold(
      *ctx.cache, *ctx.dmat, A, B, spec.number_or("tmin", 1e-4), spec.number_or("tmax", 4.0),
      static_cast<int>(spec.number_or("points", 48)));
  row.headline = result.t_star;
  row.flags.push_back("no-paper-target");
  if (!result.violation_found) row.flags.push_back("no-violation-found");
  row.series_names = {"t", "lhs_minus_rhs_log", "target"};
  for (const auto& pt : result.scan)
    row.series_rows.push_back({pt.t, pt.lhs_log - pt.rhs_log, 0.0});
  if (csv) {
    CsvWriter w(*csv);
    w.header({"t", "lhs_log", "rhs_log", "violated"});
    for (const auto& pt : result.scan) {
      w.field(pt.t).field(pt.lhs_log).field(pt.rhs_log);
      w.field(static_cast<long long>(pt.violated ? 1 : 0));
      w.end_row();
    }
  }
}

void probe_fdd(const ProbeContext& ctx, const ProbeSpec& spec, ReportRow& row,
               std::ostream* csv) {
  const auto event = load_event(*ctx.space, *ctx.dmat,
                                resolve_path(ctx.base_dir, spec.param("event")));
  const auto grid = grid_from(spec, "smin", "smax", "points", 8);
  const auto curve = fdd_ldp_curve(*ctx.cache, *ctx.dmat, event, grid);

  row.headline = curve.fitted_limit;
  row.has_target = true;
  row.target = -curve.bracket.original.rate;
  row.deviation = row.target != 0.0
                      ? std::abs(curve.fitted_limit - row.target) / std::abs(row.target)
                      : std::abs(curve.fitted_limit);
  const double lo = curve.bracket.shrunken.infinite
                        ? -std::numeric_limits<double>::infinity()
                        : -curve.bracket.shrunken.rate;
  const double hi = -curve.bracket.enlarged.rate;
  row.flags.push_back(curve.fitted_limit >= lo - 3.0 * curve.fit_residual - 1e-9 &&
                              curve.fitted_limit <= hi + 3.0 * curve.fit_residual + 1e-9
                          ? "in-bracket"
                          : "outside-bracket");
  if (curve.window_empty) row.flags.push_back("outside-validity-window");
  row.series_names = {"s", "s_log_P", "bracket_lo", "bracket_hi"};
  for (const auto& pt : curve.points)
    if (!pt.dropped) row.series_rows.push_back({pt.s, pt.s_log_p, lo, hi});
  if (csv) {
    CsvWriter w(*csv);
    w.header({"s", "s_log_P", "bracket_lo", "bracket_hi", "in_window"});
    for (const auto& pt : curve.points) {
      if (pt.dropped) continue;
      w.field(pt.s).field(pt.s_log_p).field(lo).field(hi);
      w.field(static_cast<long long>(pt.in_window ? 1 : 0));
      w.end_row();
    }
  }
}

void probe_energy(const ProbeContext& ctx, const ProbeSpec& spec, ReportRow& row,
                  std::ostream* csv) {
  const Curve curve =
      load_curve(resolve_path(ctx.base_dir, spec.param("curve")), ctx.space, ctx.dmat);
  const std::string op = spec.param("op");
  std::ostream null_sink(nullptr);
  CsvWriter w(csv ? *csv : null_sink);
  if (op == "discrete") {
    const auto times = parse_list(spec.param_or("partition", "0,0.5,1"));
    const double value = discrete_energy(curve, TimePartition(times));
    row.headline = value;
    row.flags.push_back("no-paper-target");
    if (csv) {
      w.header({"op", "value"});
      w.field(std::string("discrete")).field(value);
      w.end_row();
    }
  } else if (op == "sup") {
    const auto estimate = energy_sup(curve, spec.number_or("tol", 1e-6),
                                     static_cast<int>(spec.number_or("max_level", 14)));
    row.headline = estimate.value;
    row.flags.push_back("no-paper-target");
    if (!estimate.converged) row.flags.push_back("lower-bound-only");
    row.series_names = {"level", "H_level"};
    for (std::size_t l = 0; l < estimate.per_level.size(); ++l)
      row.series_rows.push_back({static_cast<double>(l), estimate.per_level[l]});
    if (csv) {
      w.header({"level", "H_level", "converged"});
      for (std::size_t l = 0; l < estimate.per_level.size(); ++l) {
        w.field(static_cast<long long>(l)).field(estimate.per_level[l]);
        w.field(static_cast<long long>(estimate.converged ? 1 : 0));
        w.end_row();
      }
    }
  } else if (op == "derivative") {
    const double t = spec.number("t");
    const auto speed = metric_derivative(curve, t);
    row.headline = speed.value;
    row.flags.push_back("no-paper-target");
    if (!speed.ok) row.flags.push_back("resolution-insufficient");
    if (csv) {
      w.header({"t", "speed", "ok"});
      w.field(t).field(speed.value).field(static_cast<long long>(speed.ok ? 1 : 0));
      w.end_row();
    }
  } else if (op == "ac2") {
    const auto result = ac2_energy(curve, static_cast<int>(spec.number_or("quad", 64)));
    row.headline = result.value;
    row.flags.push_back("no-paper-target");
    if (!result.defined) row.flags.push_back("undefined");
    if (csv) {
      w.header({"value", "failed_fraction", "defined"});
      w.field(result.value).field(result.failed_fraction);
      w.field(static_cast<long long>(result.defined ? 1 : 0));
      w.end_row();
    }
  } else if (op == "gap") {
    const auto result = identification_gap(curve, spec.number_or("tol", 1e-6));
    row.headline = result.gap;
    row.has_target = true;
    row.target = 0.0;
    row.deviation = std::abs(result.gap);
    if (!result.defined) row.flags.push_back("undefined");
    if (csv) {
      w.header({"h_sup", "h_tilde", "gap", "defined"});
      w.field(result.h_sup).field(result.h_tilde).field(result.gap);
      w.field(static_cast<long long>(result.defined ? 1 : 0));
      w.end_row();
    }
  } else {
    throw std::invalid_argument("energy probe: unknown op '" + op + "'");
  }
}

void probe_tube(const ProbeContext& ctx, const ProbeSpec& spec, ReportRow& row,
                std::ostream* csv) {
  TubeEvent event{
      load_curve(resolve_path(ctx.base_dir, spec.param("curve")), ctx.space, ctx.dmat),
      spec.number("delta"),
      TimePartition::uniform(std::max(1, static_cast<int>(spec.number("checkpoints")) - 1))};
  const auto grid = grid_from(spec, "smin", "smax", "points", 8);
  const auto result = tube_ldp_estimate(
      *ctx.cache, *ctx.dmat, event, grid,
      static_cast<long long>(spec.number_or("samples", 100000)), ctx.seed,
      spec.number_or("cap", 1e6));

  row.headline = result.fitted_limit;
  const double lo = result.rates.shrunken.infinite
                        ? -std::numeric_limits<double>::infinity()
                        : -result.rates.shrunken.rate;
  const double hi = -result.rates.enlarged.rate;
  if (result.center_energy_defined) {
    row.has_target = true;
    row.target = -result.center_energy;
    // the theorem gives a one-sided bound through the center energy; report
    // the distance to the admissible bracket instead of a symmetric error
    row.deviation = std::max({0.0, lo - result.fitted_limit, result.fitted_limit - hi});
    row.flags.push_back("target-is-lower-bound");
  } else {
    row.flags.push_back("no-paper-target");
  }
  row.flags.push_back(result.fitted_limit >= lo - 3.0 * result.fit_residual - 1e-9 &&
                              result.fitted_limit <= hi + 3.0 * result.fit_residual + 1e-9
                          ? "in-bracket"
                          : "outside-bracket");
  if (result.window_empty) row.flags.push_back("outside-validity-window");
  row.series_names = {"s", "s_log_P", "bracket_lo", "bracket_hi"};
  for (const auto& pt : result.points)
    if (!pt.dropped) row.series_rows.push_back({pt.s, pt.s_log_p, lo, hi});
  if (csv) {
    CsvWriter w(*csv);
    w.header({"s", "s_log_P", "exact", "bracket_lo", "bracket_hi", "in_window"});
    for (const auto& pt : result.points) {
      if (pt.dropped) continue;
      w.field(pt.s).field(pt.s_log_p).field(static_cast<long long>(pt.exact ? 1 : 0));
      w.field(lo).field(hi);
      w.field(static_cast<long long>(pt.in_window ? 1 : 0));
      w.end_row();
    }
  }
}

}  // namespace

ReportRow run_probe(const ProbeContext& ctx, const ProbeSpec& spec, std::ostream* csv) {
  ReportRow row;
  row.id = spec.id;
  row.kind = spec.kind;
  row.digest = spec.digest_string();
  const auto start = std::chrono::steady_clock::now();
  try {
    if (spec.kind == "vd")
      probe_vd(ctx, spec, row, csv);
    else if (spec.kind == "pi")
      probe_pi(ctx, spec, row, csv);
    else if (spec.kind == "hi")
      probe_hi(ctx, spec, row, csv);
    else if (spec.kind == "volscale")
      probe_volscale(ctx, spec, row, csv);
    else if (spec.kind == "metric")
      probe_metric(ctx, spec, row, csv);
    else if (spec.kind == "varadhan_kernel")
      probe_varadhan_kernel(ctx, spec, row, csv);
    else if (spec.kind == "varadhan_indicator")
      probe_varadhan_indicator(ctx, spec, row, csv);
    else if (spec.kind == "gaussian_threshold")
      probe_gaussian(ctx, spec, row, csv);
    else if (spec.kind == "fdd")
      probe_fdd(ctx, spec, row, csv);
    else if (spec.kind == "energy")
      probe_energy(ctx, spec, row, csv);
    else if (spec.kind == "tube")
      probe_tube(ctx, spec, row, csv);
    else
      throw std::invalid_argument("unknown probe kind '" + spec.kind + "'");
  } catch (const std::exception& err) {
    row.errored = true;
    row.error = err.what();
  }
  row.wall_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return row;
}

std::vector<ReportRow> run_experiment(const ExperimentConfig& config) {
  const ProbeContext ctx = make_context(config);
  if (config.out_dir.empty()) throw std::invalid_argument("run_experiment: missing output dir");
  std::filesystem::create_directories(config.out_dir);

  std::vector<ReportRow> rows(config.probes.size());
  parallel_for(
      config.probes.size(),
      [&](std::size_t i) {
        const std::string path =
            (std::filesystem::path(config.out_dir) / (config.probes[i].id + ".csv")).string();
        std::ofstream csv(path);
        rows[i] = run_probe(ctx, config.probes[i], csv ? &csv : nullptr);
      },
      ctx.threads);

  std::ofstream summary((std::filesystem::path(config.out_dir) / "summary.csv").string());
  write_summary_csv(rows, summary);
  return rows;
}

void write_summary_csv(const std::vector<ReportRow>& rows, std::ostream& out) {
  CsvWriter w(out);
  w.header({"id", "kind", "digest", "headline", "target", "deviation", "flags", "error"});
  for (const auto& row : rows) {
    w.field(row.id).field(row.kind).field(row.digest).field(row.headline);
    if (row.has_target)
      w.field(row.target).field(row.deviation);
    else
      w.field(std::string()).field(std::string());
    w.field(row.flags_joined()).field(row.error);
    w.end_row();
  }
}

void emit_plotdata(const std::vector<ReportRow>& rows, const std::string& probe_id,
                   std::ostream& out) {
  const ReportRow* row = nullptr;
  for (const auto& r : rows)
    if (r.id == probe_id) row = &r;
  if (!row) throw std::invalid_argument("emit_plotdata: no probe named '" + probe_id + "'");
  if (!row->has_series())
    throw std::invalid_argument("emit_plotdata: probe '" + probe_id +
                                "' produced no grid series");
  out << "# columns:";
  for (const auto& name : row->series_names) out << " " << name;
  out << "\n";
  for (const auto& line : row->series_rows) {
    for (std::size_t i = 0; i < line.size(); ++i) out << (i ? " " : "") << format_double(line[i]);
    out << "\n";
  }
}

int run_experiment_main(const std::string& config_path, const std::string& out_override,
                        std::optional<std::uint64_t> seed_override,
                        std::optional<int> threads_override,
                        const std::vector<std::string>& plot_ids, std::ostream& log) {
  ExperimentConfig config;
  try {
    config = ExperimentConfig::load(config_path);
    if (!out_override.empty()) config.out_dir = out_override;
    if (seed_override) config.seed = *seed_override;
    if (threads_override) config.threads = *threads_override;
    if (config.out_dir.empty())
      throw std::invalid_argument("no output directory (config 'out' or --out)");
  } catch (const std::exception& err) {
    log << "config error: " << err.what() << "\n";
    return 1;
  }

  std::vector<ReportRow> rows;
  try {
    rows = run_experiment(config);
  } catch (const std::exception& err) {
    log << "config error: " << err.what() << "\n";
    return 1;
  }

  bool any_error = false;
  for (const auto& row : rows) {
    log << (row.errored ? "[error] " : "[ok]    ") << row.id << " (" << row.kind << ") ";
    if (row.errored)
      log << row.error;
    else {
      log << "headline=" << format_double(row.headline);
      if (row.has_target)
        log << " target=" << format_double(row.target)
            << " deviation=" << format_double(row.deviation);
      if (!row.flags.empty()) log << " flags=" << row.flags_joined();
    }
    log << " [" << format_double(row.wall_seconds) << "s]\n";
    any_error = any_error || row.errored;
  }

  for (const auto& id : plot_ids) {
    try {
      std::ofstream out((std::filesystem::path(config.out_dir) / (id + ".plot")).string());
      emit_plotdata(rows, id, out);
    } catch (const std::exception& err) {
      log << "plot error: " << err.what() << "\n";
      any_error = true;
    }
  }
  return any_error ? 2 : 0;
}

}  // namespace dflab
