// dflab: Dirichlet-form laboratory on finite weighted graphs.
//
// Subcommands build spaces, evaluate heat kernels, certify intrinsic
// metrics, estimate functional-inequality constants, probe short-time
// asymptotics and LDP rates, and run declarative experiment configs.

#include <CLI11.hpp>

#include <fstream>
#include <iostream>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "dflab/csv.hpp"
#include "dflab/experiment.hpp"
#include "dflab/io.hpp"
#include "dflab/numerics.hpp"
#include "dflab/spectral.hpp"

namespace {

struct ProbeCommand {
  std::string space_path;
  std::string out_path;
  std::uint64_t seed = 1;
  dflab::ProbeSpec spec;
};

/// Run a single probe built from CLI flags, writing its CSV to --out.
int run_single(const ProbeCommand& cmd) {
  dflab::ProbeContext ctx;
  if (cmd.space_path.empty()) {
    // Euclidean-only operations still get a (trivial) context space.
    auto space = std::make_shared<dflab::StateSpace>(dflab::build_two_state(1.0, 1.0, 1.0));
    ctx.space = space;
    ctx.dmat = std::make_shared<dflab::DistanceMatrix>(dflab::DistanceMatrix::build(*space));
    ctx.cache = std::make_shared<dflab::SpectralCache>(dflab::SpectralCache::build(space));
    ctx.seed = cmd.seed;
  } else {
    dflab::ExperimentConfig config;
    config.space_path = cmd.space_path;
    config.seed = cmd.seed;
    ctx = dflab::make_context(config);
  }
  std::ofstream csv;
  if (!cmd.out_path.empty()) {
    csv.open(cmd.out_path);
    if (!csv) {
      std::cerr << "cannot write " << cmd.out_path << "\n";
      return 1;
    }
  }
  const auto row = dflab::run_probe(ctx, cmd.spec, csv.is_open() ? &csv : nullptr);
  if (row.errored) {
    std::cerr << "error: " << row.error << "\n";
    return 2;
  }
  std::cout << row.kind << " headline " << dflab::format_double(row.headline);
  if (row.has_target)
    std::cout << " target " << dflab::format_double(row.target) << " deviation "
              << dflab::format_double(row.deviation);
  if (!row.flags.empty()) std::cout << " [" << row.flags_joined() << "]";
  std::cout << "\n";
  return 0;
}

void add_param(dflab::ProbeSpec& spec, const std::string& key, const std::string& value) {
  spec.params.emplace_back(key, value);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"dflab - Dirichlet forms, intrinsic metrics, heat-kernel asymptotics, "
               "and path large deviations on finite weighted graphs"};
  app.require_subcommand(1);

  // ---- space ----
  auto* space_cmd = app.add_subcommand("space", "build or validate space files");
  space_cmd->require_subcommand(1);

  std::string build_config, build_out;
  auto* space_build = space_cmd->add_subcommand("build", "build a space from a description file");
  space_build->add_option("--config", build_config, "space description file")->required();
  space_build->add_option("--out", build_out, "output space file (canonical explicit form)")
      ->required();

  std::string validate_path;
  auto* space_validate = space_cmd->add_subcommand("validate", "validate a space file");
  space_validate->add_option("file", validate_path, "space file")->required();

  // ---- kernel ----
  std::string kernel_space, kernel_out;
  double kernel_t = 1.0;
  auto* kernel_cmd = app.add_subcommand("kernel", "dump the heat kernel at one time");
  kernel_cmd->add_option("--space", kernel_space)->required();
  kernel_cmd->add_option("--t", kernel_t, "time")->required();
  kernel_cmd->add_option("--out", kernel_out, "output csv")->required();

  // ---- probe-style commands ----
  std::string m_space, m_out;
  bool m_all = false;
  double m_tol = 1e-3;
  auto* metric_cmd = app.add_subcommand("metric", "certified intrinsic-distance brackets");
  metric_cmd->add_option("--space", m_space)->required();
  metric_cmd->add_option("--pair", "--pair x y vertex specs")->expected(2);
  auto* m_pair_opt = metric_cmd->get_option("--pair");
  metric_cmd->add_flag("--all", m_all, "all pairs");
  metric_cmd->add_option("--tol", m_tol, "relative tolerance");
  metric_cmd->add_option("--out", m_out, "output csv");

  std::string iq_space, iq_kind, iq_out, iq_region = "all", iq_x, iq_radii, iq_times;
  double iq_r = 0.1, iq_eps = 1.0, iq_tmin = 1e-3, iq_tmax = 0.1;
  int iq_points = 10;
  auto* iq_cmd = app.add_subcommand("inequalities", "VD / PI / HI constants, volume scaling");
  iq_cmd->add_option("--space", iq_space)->required();
  iq_cmd->add_option("--kind", iq_kind, "vd | pi | hi | volscale")->required();
  iq_cmd->add_option("--out", iq_out, "output csv");
  iq_cmd->add_option("--region", iq_region, "region spec");
  iq_cmd->add_option("--x", iq_x, "vertex spec (pi, volscale)");
  iq_cmd->add_option("--r", iq_r, "radius (pi)");
  iq_cmd->add_option("--radii", iq_radii, "comma list of radii (vd, hi)");
  iq_cmd->add_option("--times", iq_times, "comma list of times (hi)");
  iq_cmd->add_option("--epsilon", iq_eps, "area scale (volscale)");
  iq_cmd->add_option("--tmin", iq_tmin);
  iq_cmd->add_option("--tmax", iq_tmax);
  iq_cmd->add_option("--points", iq_points);

  std::string v_space, v_out;
  std::vector<std::string> v_pair;
  double v_tmin = 2e-3, v_tmax = 2e-2;
  int v_points = 12;
  std::vector<std::string> v_setprobe;
  auto* v_cmd = app.add_subcommand("varadhan", "short-time kernel / indicator probes");
  v_cmd->add_option("--space", v_space)->required();
  v_cmd->add_option("--pair", v_pair, "x y vertex specs")->expected(2);
  v_cmd->add_option("--set-probe", v_setprobe, "region spec and vertex spec")->expected(2);
  v_cmd->add_option("--tmin", v_tmin);
  v_cmd->add_option("--tmax", v_tmax);
  v_cmd->add_option("--points", v_points);
  v_cmd->add_option("--out", v_out, "output csv");

  std::string f_space, f_event, f_out;
  double f_smin = 2e-3, f_smax = 2e-2;
  int f_points = 8;
  auto* f_cmd = app.add_subcommand("fdd", "finite-dimensional-distribution LDP curve");
  f_cmd->add_option("--space", f_space)->required();
  f_cmd->add_option("--event", f_event, "event file")->required();
  f_cmd->add_option("--smin", f_smin);
  f_cmd->add_option("--smax", f_smax);
  f_cmd->add_option("--points", f_points);
  f_cmd->add_option("--out", f_out, "output csv");

  std::string e_space, e_curve, e_op, e_out, e_partition;
  double e_t = 0.5, e_tol = 1e-6;
  int e_quad = 64;
  auto* e_cmd = app.add_subcommand("energy", "path-energy operations");
  e_cmd->add_option("--space", e_space, "space file (graph-context curves)");
  e_cmd->add_option("--curve", e_curve, "curve file")->required();
  e_cmd->add_option("--op", e_op, "discrete | sup | derivative | ac2 | gap")->required();
  e_cmd->add_option("--partition", e_partition, "comma list of times (discrete)");
  e_cmd->add_option("--t", e_t, "time (derivative)");
  e_cmd->add_option("--tol", e_tol);
  e_cmd->add_option("--quad", e_quad, "quadrature points (ac2)");
  e_cmd->add_option("--out", e_out, "output csv");

  std::string t_space, t_curve, t_out;
  double t_delta = 0.1, t_smin = 2e-3, t_smax = 2e-2;
  int t_checkpoints = 5, t_points = 8;
  long long t_samples = 100000;
  std::uint64_t t_seed = 1;
  auto* t_cmd = app.add_subcommand("tube", "tube probabilities and LDP bracket");
  t_cmd->add_option("--space", t_space)->required();
  t_cmd->add_option("--curve", t_curve, "center curve file")->required();
  t_cmd->add_option("--delta", t_delta, "tube radius")->required();
  t_cmd->add_option("--checkpoints", t_checkpoints, "number of checkpoint times");
  t_cmd->add_option("--smin", t_smin);
  t_cmd->add_option("--smax", t_smax);
  t_cmd->add_option("--points", t_points);
  t_cmd->add_option("--samples", t_samples, "Monte Carlo samples");
  t_cmd->add_option("--seed", t_seed, "master seed");
  t_cmd->add_option("--out", t_out, "output csv");

  std::string r_config, r_out;
  std::uint64_t r_seed = 0;
  bool r_seed_set = false;
  int r_threads = -1;
  std::vector<std::string> r_plots;
  auto* r_cmd = app.add_subcommand("run", "run a declarative experiment config");
  r_cmd->add_option("--config", r_config, "experiment config file")->required();
  r_cmd->add_option("--out", r_out, "output directory");
  r_cmd->add_option("--seed", r_seed)->each([&](const std::string&) { r_seed_set = true; });
  r_cmd->add_option("--threads", r_threads);
  r_cmd->add_option("--plot", r_plots, "emit plot data for these probe ids");

  CLI11_PARSE(app, argc, argv);

  try {
    if (space_build->parsed()) {
      const auto space = dflab::load_space(build_config);
      const auto report = dflab::validate_space(space);
      if (!report.pass) {
        for (const auto& issue : report.issues) std::cerr << "invalid: " << issue << "\n";
        return 1;
      }
      dflab::write_space_file(space, build_out);
      std::cout << "wrote " << build_out << " (" << space.size() << " vertices, total measure "
                << dflab::format_double(space.total_measure()) << ")\n";
      return 0;
    }
    if (space_validate->parsed()) {
      const auto space = dflab::load_space(validate_path);
      const auto report = dflab::validate_space(space);
      if (report.pass) {
        std::cout << "PASS: " << space.size() << " vertices, total measure "
                  << dflab::format_double(space.total_measure()) << "\n";
        return 0;
      }
      std::cout << "FAIL:\n";
      for (const auto& issue : report.issues) std::cout << "  - " << issue << "\n";
      return 1;
    }
    if (kernel_cmd->parsed()) {
      auto space = std::make_shared<dflab::StateSpace>(dflab::load_space(kernel_space));
      const auto cache = dflab::SpectralCache::build(space);
      std::ofstream out(kernel_out);
      if (!out) {
        std::cerr << "cannot write " << kernel_out << "\n";
        return 1;
      }
      dflab::CsvWriter w(out);
      w.header({"x_index", "y_index", "t", "p", "log_p"});
      for (int x = 0; x < space->size(); ++x)
        for (int y = x; y < space->size(); ++y) {
          const auto kv = cache.heat_kernel(kernel_t, x, y);
          w.field(x).field(y).field(kernel_t).field(kv.value).field(kv.log_value);
          w.end_row();
        }
      std::cout << "wrote " << kernel_out << "\n";
      return 0;
    }

    ProbeCommand cmd;
    if (metric_cmd->parsed()) {
      cmd.space_path = m_space;
      cmd.out_path = m_out;
      cmd.spec.id = cmd.spec.kind = "metric";
      add_param(cmd.spec, "tol", dflab::format_double(m_tol));
      if (m_all) {
        add_param(cmd.spec, "all", "true");
      } else {
        const auto pair = m_pair_opt->results();
        if (pair.size() != 2) throw CLI::ValidationError("metric", "need --pair or --all");
        add_param(cmd.spec, "x", pair[0]);
        add_param(cmd.spec, "y", pair[1]);
      }
      return run_single(cmd);
    }
    if (iq_cmd->parsed()) {
      cmd.space_path = iq_space;
      cmd.out_path = iq_out;
      if (iq_kind != "vd" && iq_kind != "pi" && iq_kind != "hi" && iq_kind != "volscale")
        throw CLI::ValidationError("inequalities", "unknown kind '" + iq_kind + "'");
      cmd.spec.id = cmd.spec.kind = iq_kind;
      add_param(cmd.spec, "region", iq_region);
      if (!iq_x.empty()) add_param(cmd.spec, "x", iq_x);
      if (!iq_radii.empty()) add_param(cmd.spec, "radii", iq_radii);
      if (!iq_times.empty()) add_param(cmd.spec, "times", iq_times);
      add_param(cmd.spec, "r", dflab::format_double(iq_r));
      add_param(cmd.spec, "epsilon", dflab::format_double(iq_eps));
      add_param(cmd.spec, "tmin", dflab::format_double(iq_tmin));
      add_param(cmd.spec, "tmax", dflab::format_double(iq_tmax));
      add_param(cmd.spec, "points", std::to_string(iq_points));
      return run_single(cmd);
    }
    if (v_cmd->parsed()) {
      cmd.space_path = v_space;
      cmd.out_path = v_out;
      if (!v_pair.empty()) {
        cmd.spec.id = cmd.spec.kind = "varadhan_kernel";
        add_param(cmd.spec, "x", v_pair[0]);
        add_param(cmd.spec, "y", v_pair[1]);
      } else if (!v_setprobe.empty()) {
        cmd.spec.id = cmd.spec.kind = "varadhan_indicator";
        add_param(cmd.spec, "region", v_setprobe[0]);
        add_param(cmd.spec, "x", v_setprobe[1]);
      } else {
        throw CLI::ValidationError("varadhan", "need --pair or --set-probe");
      }
      add_param(cmd.spec, "tmin", dflab::format_double(v_tmin));
      add_param(cmd.spec, "tmax", dflab::format_double(v_tmax));
      add_param(cmd.spec, "points", std::to_string(v_points));
      return run_single(cmd);
    }
    if (f_cmd->parsed()) {
      cmd.space_path = f_space;
      cmd.out_path = f_out;
      cmd.spec.id = cmd.spec.kind = "fdd";
      add_param(cmd.spec, "event", f_event);
      add_param(cmd.spec, "smin", dflab::format_double(f_smin));
      add_param(cmd.spec, "smax", dflab::format_double(f_smax));
      add_param(cmd.spec, "points", std::to_string(f_points));
      return run_single(cmd);
    }
    if (e_cmd->parsed()) {
      cmd.space_path = e_space;
      cmd.out_path = e_out;
      cmd.spec.id = cmd.spec.kind = "energy";
      add_param(cmd.spec, "curve", e_curve);
      add_param(cmd.spec, "op", e_op);
      if (!e_partition.empty()) add_param(cmd.spec, "partition", e_partition);
      add_param(cmd.spec, "t", dflab::format_double(e_t));
      add_param(cmd.spec, "tol", dflab::format_double(e_tol));
      add_param(cmd.spec, "quad", std::to_string(e_quad));
      return run_single(cmd);
    }
    if (t_cmd->parsed()) {
      cmd.space_path = t_space;
      cmd.out_path = t_out;
      cmd.seed = t_seed;
      cmd.spec.id = cmd.spec.kind = "tube";
      add_param(cmd.spec, "curve", t_curve);
      add_param(cmd.spec, "delta", dflab::format_double(t_delta));
      add_param(cmd.spec, "checkpoints", std::to_string(t_checkpoints));
      add_param(cmd.spec, "smin", dflab::format_double(t_smin));
      add_param(cmd.spec, "smax", dflab::format_double(t_smax));
      add_param(cmd.spec, "points", std::to_string(t_points));
      add_param(cmd.spec, "samples", std::to_string(t_samples));
      return run_single(cmd);
    }
    if (r_cmd->parsed()) {
      return dflab::run_experiment_main(
          r_config, r_out, r_seed_set ? std::optional<std::uint64_t>(r_seed) : std::nullopt,
          r_threads >= 0 ? std::optional<int>(r_threads) : std::nullopt, r_plots, std::cout);
    }
  } catch (const CLI::Error& err) {
    return app.exit(err);
  } catch (const std::exception& err) {
    std::cerr << "error: " << err.what() << "\n";
    return 1;
  }
  return 0;
}
