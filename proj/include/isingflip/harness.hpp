#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "isingflip/dynamics.hpp"
#include "isingflip/generator.hpp"
#include "isingflip/model.hpp"
#include "isingflip/params.hpp"
#include "isingflip/structure.hpp"

namespace isingflip::harness {

/// Environment variable naming the default output directory.
inline constexpr const char* kOutDirEnv = "ISINGFLIP_OUT_DIR";

struct CalibrationConfig {
  /// Pilot model classes; empty means the experiment's generator spec.
  std::vector<GeneratorSpec> pilots;
  std::vector<std::uint64_t> seeds{101, 102, 103};
  /// Cycle-statistic horizon of each pilot run.
  double horizon = 2.0e4;
  /// Length of the matching segment simulated after the bulk horizon.
  double t_match = 2.0e3;
};

struct ExperimentConfig {
  std::string name = "experiment";
  std::optional<GeneratorSpec> generator;
  std::optional<std::filesystem::path> model_file;
  Kernel kernel = Kernel::glauber();
  /// horizon and initial are used; the seed is derived per run.
  SimConfig sim;
  bool write_traces = false;

  bool learn_structure = true;
  /// Replace tau_bulk / tau_match by calibrated values before the runs.
  bool calibrate = false;
  StructureConfig structure;
  CalibrationConfig calibration;

  bool learn_params = true;
  ParamConfig params;
  /// A seed passes parameter evaluation when both max errors stay within these.
  double coupling_tolerance = 0.05;
  double field_tolerance = 0.05;

  std::vector<std::uint64_t> seeds{1};
  std::size_t jobs = 1;
  std::filesystem::path output_dir;

  void validate() const;
};

/// TOML document; relative paths resolve against `base_dir`.
ExperimentConfig parse_config(std::string_view toml_text,
                              const std::filesystem::path& base_dir = ".");
ExperimentConfig load_config(const std::filesystem::path& path);
/// Explicit path, else $ISINGFLIP_OUT_DIR, else "isingflip-out".
std::filesystem::path default_output_dir(const std::optional<std::filesystem::path>& explicit_dir);

struct SeedResult {
  std::uint64_t seed = 0;
  bool ok = true;
  bool passed = true;
  std::string error;
  std::size_t n = 0;
  std::size_t true_edges = 0;
  std::size_t learned_edges = 0;
  double precision = 1.0;
  double recall = 1.0;
  bool exact_recovery = true;
  std::optional<double> coupling_max_error;
  std::optional<double> field_max_error;
  std::size_t indeterminate_pairs = 0;
  std::size_t indeterminate_edges = 0;
  std::size_t indeterminate_fields = 0;
  double time_generate = 0.0;
  double time_simulate = 0.0;
  double time_structure = 0.0;
  double time_params = 0.0;
};

struct EvalReport {
  std::string name;
  std::optional<double> tau_bulk;
  std::optional<double> tau_match;
  std::vector<SeedResult> seeds;

  std::size_t failures() const;
  double exact_recovery_rate() const;
};

/// Equal up to wall-time fields.
bool equivalent(const EvalReport& a, const EvalReport& b);

struct GraphScore {
  double precision = 1.0;
  double recall = 1.0;
  bool exact = true;
};

GraphScore score_graph(const Graph& truth, const Graph& learned);
/// Max |A_hat - A| over the union of both supports (a missing edge counts as 0).
double coupling_max_error(const IsingModel& truth, std::span<const Coupling> learned);
double field_max_error(const IsingModel& truth, std::span<const double> learned);

struct PilotSample {
  std::size_t pilot = 0;
  std::uint64_t seed = 0;
  std::uint32_t i = 0;
  std::uint32_t j = 0;
  /// "dense", "null", "match" or "match-null".
  std::string kind;
  double value = 0.0;
  double standard_error = 0.0;
};

struct CalibrationResult {
  bool ok = false;
  std::string reason;
  /// Smallest dense-edge mean (larger of the two orders per edge).
  double dense_floor = 0.0;
  /// Largest non-adjacent mean + 3 standard errors.
  double null_ceiling = 0.0;
  double tau_bulk = 0.0;
  std::optional<double> match_floor;
  std::optional<double> match_ceiling;
  std::optional<double> tau_match;
  std::vector<PilotSample> samples;
};

/// Thresholds from pilot runs: tau = sqrt(D * N) between the dense floor D and
/// the null ceiling N (D / 2 when N <= 0); fails when D <= N.
CalibrationResult calibrate(const CalibrationConfig& cfg, const Kernel& kernel,
                            const StructureConfig& structure, std::size_t jobs = 1);
CalibrationResult calibrate(const ExperimentConfig& cfg);

std::string calibration_to_json(const CalibrationResult& result);

/// Runs every seed (in parallel up to cfg.jobs) and writes per-seed logs when
/// cfg.output_dir is set. Per-seed failures are recorded, not thrown.
EvalReport run_experiment(const ExperimentConfig& cfg);

std::string report_to_json(const EvalReport& report);
EvalReport report_from_json(std::string_view text);
std::string report_to_csv(const EvalReport& report);
EvalReport report_from_csv(std::string_view text);
/// Long-format seed,metric,value rows for external plotting.
std::string report_plot_csv(const EvalReport& report);

/// report.json, report.csv and plot.csv under `dir`.
void write_report(const EvalReport& report, const std::filesystem::path& dir);
/// By extension: ".csv" or JSON.
EvalReport load_report(const std::filesystem::path& path);

}  // namespace isingflip::harness
