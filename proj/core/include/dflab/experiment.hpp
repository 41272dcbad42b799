#pragma once

#include <cstdint>
#include <iosfwd>
#include <memory>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "dflab/metric.hpp"
#include "dflab/spectral.hpp"
#include "dflab/state_space.hpp"

namespace dflab {

/// One probe line of an experiment config: kind plus key=value parameters.
struct ProbeSpec {
  std::string id;
  std::string kind;
  std::vector<std::pair<std::string, std::string>> params;

  const std::string* find(const std::string& key) const;
  std::string param(const std::string& key) const;
  std::string param_or(const std::string& key, const std::string& fallback) const;
  double number(const std::string& key) const;
  double number_or(const std::string& key, double fallback) const;
  std::string digest_string() const;
};

/// Declarative experiment: a space, a master seed, a thread budget, and an
/// ordered probe list. Probe kinds come from the closed set
/// {vd, pi, hi, volscale, metric, varadhan_kernel, varadhan_indicator,
///  gaussian_threshold, fdd, energy, tube}; anything else is a parse error.
struct ExperimentConfig {
  std::string space_path;
  std::string out_dir;
  std::uint64_t seed = 1;
  int threads = 0;  ///< 0 = available parallelism
  std::string base_dir;
  std::vector<ProbeSpec> probes;

  static ExperimentConfig parse(std::istream& in, std::string base_dir);
  static ExperimentConfig load(const std::string& path);
};

/// Tabular result record. Wall time stays in memory (console log only) so
/// rerunning a config produces byte-identical CSV files.
struct ReportRow {
  std::string id, kind, digest;
  double headline = 0.0;
  bool has_target = false;
  double target = 0.0;
  double deviation = 0.0;
  std::vector<std::string> flags;
  bool errored = false;
  std::string error;
  double wall_seconds = 0.0;

  std::vector<std::string> series_names;
  std::vector<std::vector<double>> series_rows;
  bool has_series() const { return !series_rows.empty(); }
  std::string flags_joined() const;
};

/// Shared read-only state for probe execution.
struct ProbeContext {
  std::shared_ptr<const StateSpace> space;
  std::shared_ptr<const DistanceMatrix> dmat;
  std::shared_ptr<const SpectralCache> cache;
  std::uint64_t seed = 1;
  int threads = 0;
  std::string base_dir;
};
ProbeContext make_context(const ExperimentConfig& config);

/// Execute one probe; detailed table goes to csv (when given), headline data
/// to the returned row. Exceptions are reported through the row.
ReportRow run_probe(const ProbeContext& ctx, const ProbeSpec& spec, std::ostream* csv);

/// Execute every probe (declared order; parallel across probes), write one
/// CSV per probe plus summary.csv into config.out_dir.
std::vector<ReportRow> run_experiment(const ExperimentConfig& config);

void write_summary_csv(const std::vector<ReportRow>& rows, std::ostream& out);

/// Columnar plot file (abscissa, value, optional target column) for a probe
/// that produced a grid series; throws naming the probe otherwise.
void emit_plotdata(const std::vector<ReportRow>& rows, const std::string& probe_id,
                   std::ostream& out);

/// CLI driver for `run`; returns the process exit code
/// (0 ok, 1 config error, 2 probe error).
int run_experiment_main(const std::string& config_path, const std::string& out_override,
                        std::optional<std::uint64_t> seed_override,
                        std::optional<int> threads_override,
                        const std::vector<std::string>& plot_ids, std::ostream& log);

std::string resolve_path(const std::string& base_dir, const std::string& path);

}  // namespace dflab
