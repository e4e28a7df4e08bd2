// isingflip: generate, simulate, learn and evaluate Ising models observed
// through spin flips only.

#include <CLI11.hpp>
#include <json.hpp>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "isingflip/dynamics.hpp"
#include "isingflip/error.hpp"
#include "isingflip/generator.hpp"
#include "isingflip/harness.hpp"
#include "isingflip/model_io.hpp"
#include "isingflip/oracle.hpp"
#include "isingflip/params.hpp"
#include "isingflip/structure.hpp"
#include "isingflip/trace_io.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace isingflip;

namespace {

constexpr int kOk = 0;
constexpr int kEvalFailure = 1;
constexpr int kConfigError = 2;

template <class T>
void apply(std::optional<T>& flag, T& target) {
  if (flag) {
    target = *flag;
  }
}

void write_text(const fs::path& path, const std::string& text) {
  if (path.has_parent_path()) {
    fs::create_directories(path.parent_path());
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) {
    fail(ErrorKind::kIo, "cannot write " + path.string());
  }
  out << text;
}

fs::path out_path(const std::optional<std::string>& flag, const char* file) {
  if (flag) {
    return fs::path(*flag);
  }
  return harness::default_output_dir(std::nullopt) / file;
}

json edge_list(const std::vector<Edge>& edges) {
  json out = json::array();
  for (const auto& e : edges) {
    out.push_back({e.u, e.v});
  }
  return out;
}

json nullable(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

// ---------------------------------------------------------------------------

struct KernelFlags {
  std::optional<std::string> type;
  std::optional<double> r_plus;
  std::optional<double> r_minus;

  void add(CLI::App* cmd) {
    cmd->add_option("--kernel", type, "glauber or metropolis");
    cmd->add_option("--r-plus", r_plus, "Metropolis proposal rate out of +1");
    cmd->add_option("--r-minus", r_minus, "Metropolis proposal rate out of -1");
  }

  Kernel resolve(const Kernel& base) const {
    const std::string t = type.value_or(base.is_glauber() ? "glauber" : "metropolis");
    if (t == "glauber") {
      if (r_plus || r_minus) {
        fail(ErrorKind::kInvalidArgument, "--r-plus/--r-minus need --kernel metropolis");
      }
      return Kernel::glauber();
    }
    if (t == "metropolis") {
      return Kernel::metropolis(r_plus.value_or(base.is_glauber() ? 1.0 : base.r_plus()),
                                r_minus.value_or(base.is_glauber() ? 1.0 : base.r_minus()));
    }
    fail(ErrorKind::kInvalidArgument, "unknown kernel '" + t + "'");
  }
};

// ---------------------------------------------------------------------------
// generate

struct GenerateArgs {
  std::optional<std::string> config;
  std::optional<std::string> family;
  std::optional<std::size_t> n;
  std::optional<std::size_t> max_degree;
  std::optional<std::size_t> edge_count;
  std::optional<std::size_t> grid_rows;
  std::optional<std::size_t> planted_matching;
  std::optional<double> coupling_min;
  std::optional<double> coupling_max;
  std::optional<std::string> signs;
  std::optional<double> field_max;
  std::optional<double> width;
  std::uint64_t seed = 1;
  std::optional<std::string> out;
};

int run_generate(GenerateArgs& a) {
  GeneratorSpec spec;
  if (a.config) {
    const auto cfg = harness::load_config(*a.config);
    if (!cfg.generator) {
      fail(ErrorKind::kInvalidArgument, "config has no generator spec");
    }
    spec = *cfg.generator;
  }
  if (a.family) spec.family = parse_family(*a.family);
  if (a.signs) spec.signs = parse_signs(*a.signs);
  apply(a.n, spec.n);
  apply(a.max_degree, spec.max_degree);
  apply(a.edge_count, spec.edge_count);
  apply(a.grid_rows, spec.grid_rows);
  apply(a.planted_matching, spec.planted_matching);
  apply(a.coupling_min, spec.coupling_min);
  apply(a.coupling_max, spec.coupling_max);
  apply(a.field_max, spec.field_max);
  apply(a.width, spec.width);
  spec.validate();
  const auto model = random_model(spec, a.seed);
  const auto path = out_path(a.out, "model.json");
  save_model(model, path);
  const auto b = measured_bounds(model);
  std::cout << "wrote " << path.string() << " n=" << model.size()
            << " edges=" << model.couplings().size() << " d=" << b.max_degree
            << " width=" << b.width << "\n";
  return kOk;
}

// ---------------------------------------------------------------------------
// simulate

struct SimulateArgs {
  std::string model;
  std::optional<std::string> config;
  KernelFlags kernel;
  std::optional<double> horizon;
  std::uint64_t seed = 1;
  std::optional<std::string> initial;
  std::optional<std::string> out;
  std::optional<std::string> format;
};

int run_simulate(SimulateArgs& a) {
  Kernel base = Kernel::glauber();
  SimConfig sim;
  if (a.config) {
    const auto cfg = harness::load_config(*a.config);
    base = cfg.kernel;
    sim = cfg.sim;
  }
  const auto kernel = a.kernel.resolve(base);
  apply(a.horizon, sim.horizon);
  sim.seed = a.seed;
  if (a.initial) {
    if (*a.initial == "all-plus") {
      sim.initial = InitialKind::kAllPlus;
    } else if (*a.initial == "seeded-uniform") {
      sim.initial = InitialKind::kSeededUniform;
    } else {
      fail(ErrorKind::kInvalidArgument, "--initial must be all-plus or seeded-uniform");
    }
  }
  if (!(sim.horizon > 0.0)) {
    fail(ErrorKind::kInvalidArgument, "--horizon must be positive");
  }
  const auto model = load_model(a.model);
  const auto result = simulate(model, kernel, sim);
  const auto path =
      out_path(a.out, a.format && *a.format == "jsonl" ? "trace.jsonl" : "trace.bin");
  if (a.format) {
    if (*a.format != "jsonl" && *a.format != "binary") {
      fail(ErrorKind::kInvalidArgument, "--format must be jsonl or binary");
    }
    save_trace(result.flips, path, *a.format == "jsonl" ? TraceFormat::kJsonl : TraceFormat::kBinary);
  } else {
    save_trace(result.flips, path);
  }
  std::cout << "wrote " << path.string() << " kernel=" << kernel.name()
            << " horizon=" << sim.horizon << " attempts=" << result.attempts
            << " flips=" << result.flips.events().size() << "\n";
  return kOk;
}

// ---------------------------------------------------------------------------
// learn-structure

struct StructureArgs {
  std::string trace;
  std::optional<std::string> config;
  std::optional<double> eps;
  std::optional<double> spacing;
  std::optional<double> tau_bulk;
  std::optional<double> tau_match;
  std::optional<double> t_bulk;
  std::optional<double> t_match;
  std::optional<std::string> match_source;
  std::optional<double> min_occupancy;
  std::optional<std::size_t> jobs;
  std::optional<std::string> out;
};

int run_learn_structure(StructureArgs& a) {
  StructureConfig cfg;
  if (a.config) {
    cfg = harness::load_config(*a.config).structure;
  }
  apply(a.eps, cfg.cycle.eps);
  apply(a.spacing, cfg.cycle.spacing);
  apply(a.tau_bulk, cfg.tau_bulk);
  apply(a.tau_match, cfg.tau_match);
  apply(a.t_bulk, cfg.t_bulk);
  apply(a.t_match, cfg.t_match);
  apply(a.min_occupancy, cfg.min_occupancy);
  apply(a.jobs, cfg.jobs);
  if (a.match_source) {
    if (*a.match_source == "tail") {
      cfg.match_source = MatchSource::kTail;
    } else if (*a.match_source == "reuse") {
      cfg.match_source = MatchSource::kReuse;
    } else {
      fail(ErrorKind::kInvalidArgument, "--match-source must be tail or reuse");
    }
  }
  cfg.validate();
  const auto trace = load_trace(a.trace);
  const auto result = learn_structure(trace, cfg);

  json doc;
  doc["n"] = result.graph.size();
  doc["edges"] = edge_list({result.graph.edges().begin(), result.graph.edges().end()});
  doc["indeterminate"] = edge_list(result.matching.indeterminate);
  json diag;
  diag["windows"] = result.bulk.windows;
  diag["tau_bulk"] = cfg.tau_bulk;
  diag["tau_match"] = cfg.tau_match;
  json cycle = json::array();
  const auto& acc = result.bulk.stats;
  for (std::uint32_t i = 0; i < acc.size(); ++i) {
    for (std::uint32_t j = 0; j < acc.size(); ++j) {
      if (i != j && acc.sum_squares(i, j) != 0) {
        cycle.push_back({{"i", i}, {"j", j}, {"mean", acc.mean(i, j)},
                         {"standard_error", acc.standard_error(i, j)}});
      }
    }
  }
  diag["cycle"] = std::move(cycle);
  diag["isolated"] = result.isolated;
  json pairs = json::array();
  for (const auto& p : result.matching.pairs) {
    pairs.push_back({{"pair", {p.pair.u, p.pair.v}},
                     {"occupancy", p.occupancy},
                     {"difference", nullable(p.difference)},
                     {"indeterminate", p.indeterminate}});
  }
  diag["pairs"] = std::move(pairs);
  doc["diagnostics"] = std::move(diag);

  const auto path = out_path(a.out, "structure.json");
  write_text(path, doc.dump(2) + "\n");
  std::cout << "wrote " << path.string() << " edges=" << result.graph.edges().size()
            << " indeterminate=" << result.matching.indeterminate.size() << "\n";
  return kOk;
}

// ---------------------------------------------------------------------------
// learn-params

struct ParamsArgs {
  std::string trace;
  std::string graph;
  std::optional<std::string> config;
  std::optional<double> eps_rate;
  std::optional<double> spacing;
  std::optional<double> t_param;
  std::optional<std::size_t> min_samples;
  std::optional<std::size_t> jobs;
  std::optional<std::string> out;
};

json report_json(const ParamReport& report) {
  json edges = json::array();
  for (const auto& e : report.edges) {
    edges.push_back({{"edge", {e.edge.u, e.edge.v}},
                     {"value", e.value},
                     {"forward", e.forward ? json(*e.forward) : json(nullptr)},
                     {"backward", e.backward ? json(*e.backward) : json(nullptr)},
                     {"forward_min_count", e.forward_min_count},
                     {"backward_min_count", e.backward_min_count},
                     {"standard_error", e.standard_error},
                     {"disagreement", e.disagreement},
                     {"errors", e.errors}});
  }
  json sites = json::array();
  for (const auto& s : report.sites) {
    sites.push_back({{"site", s.site},
                     {"field", s.field ? json(*s.field) : json(nullptr)},
                     {"configurations", s.configurations},
                     {"samples", s.samples},
                     {"errors", s.errors}});
  }
  return {{"edges", std::move(edges)},
          {"sites", std::move(sites)},
          {"indeterminate_edges", report.indeterminate_edges},
          {"indeterminate_fields", report.indeterminate_fields}};
}

int run_learn_params(ParamsArgs& a) {
  ParamConfig cfg;
  if (a.config) {
    cfg = harness::load_config(*a.config).params;
  }
  apply(a.eps_rate, cfg.eps_rate);
  apply(a.spacing, cfg.spacing);
  apply(a.t_param, cfg.t_param);
  apply(a.min_samples, cfg.min_samples);
  apply(a.jobs, cfg.jobs);
  cfg.validate();
  const auto trace = load_trace(a.trace);
  const auto graph = load_graph(a.graph);
  if (graph.size() != trace.size()) {
    fail(ErrorKind::kInvalidArgument, "graph and trace differ in site count");
  }
  const auto result = learn_parameters(trace, graph, cfg);
  json doc;
  doc["n"] = trace.size();
  json couplings = json::array();
  for (const auto& c : result.couplings) {
    couplings.push_back({c.i, c.j, c.value});
  }
  doc["couplings"] = std::move(couplings);
  doc["fields"] = result.fields;
  doc["report"] = report_json(result.report);
  const auto path = out_path(a.out, "params.json");
  write_text(path, doc.dump(2) + "\n");
  std::cout << "wrote " << path.string() << " couplings=" << result.couplings.size()
            << " indeterminate_edges=" << result.report.indeterminate_edges
            << " indeterminate_fields=" << result.report.indeterminate_fields << "\n";
  return kOk;
}

// ---------------------------------------------------------------------------
// oracle-check

struct OracleArgs {
  std::string model;
  std::optional<std::string> config;
  KernelFlags kernel;
  double tolerance = 1e-12;
  std::optional<std::string> out;
};

struct Check {
  std::string name;
  std::string status;  // pass, fail, skipped
  double value = 0.0;
  double tolerance = 0.0;
  std::string note;
};

std::vector<Check> oracle_suite(const IsingModel& model, const Kernel& kernel, double tol) {
  std::vector<Check> checks;
  const std::size_t n = model.size();
  const auto add = [&](std::string name, double value, double limit, std::string note = {}) {
    checks.push_back({std::move(name), value <= limit ? "pass" : "fail", value, limit,
                      std::move(note)});
  };
  const auto skip = [&](std::string name, std::string note) {
    checks.push_back({std::move(name), "skipped", 0.0, 0.0, std::move(note)});
  };

  if (n <= oracle::kMaxBalanceSites) {
    add("detailed_balance", oracle::check_detailed_balance(model, kernel), tol);

    const auto pi = oracle::exact_distribution(model);
    double worst = 0.0;
    for (std::uint64_t x = 0; x < (std::uint64_t{1} << n); ++x) {
      const auto config = SpinConfig::from_index(n, x);
      for (std::size_t i = 0; i < n; ++i) {
        worst = std::max(worst, std::fabs(oracle::exact_kernel(pi, kernel, x, i) -
                                          flip_probability(model, kernel, config, i)));
      }
    }
    add("kernel_equivalence", worst, tol);

    // coupling and field from exact rates on every subcube of every edge
    double coupling_err = 0.0;
    double field_err = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const std::uint64_t bit_i = std::uint64_t{1} << i;
      for (std::uint64_t x = 0; x < (std::uint64_t{1} << n); ++x) {
        if ((x & bit_i) != 0) {
          continue;
        }
        const double rate_minus = oracle::exact_kernel(pi, kernel, x, i);
        const double rate_plus = oracle::exact_kernel(pi, kernel, x | bit_i, i);
        double interaction = 0.0;
        for (const auto& nb : model.neighbors(i)) {
          interaction += nb.coupling * (((x >> nb.site) & 1U) != 0 ? 1.0 : -1.0);
        }
        field_err = std::max(field_err, std::fabs(0.5 * std::log(rate_minus / rate_plus) -
                                                   interaction - model.field(i)));
        for (const auto& nb : model.neighbors(i)) {
          const std::uint64_t bit_j = std::uint64_t{1} << nb.site;
          if ((x & bit_j) != 0) {
            continue;
          }
          const std::array<double, 4> rates{
              oracle::exact_kernel(pi, kernel, x, i),
              oracle::exact_kernel(pi, kernel, x | bit_i, i),
              oracle::exact_kernel(pi, kernel, x | bit_j, i),
              oracle::exact_kernel(pi, kernel, x | bit_i | bit_j, i)};
          coupling_err =
              std::max(coupling_err, std::fabs(coupling_from_rates(rates) - nb.coupling));
        }
      }
    }
    add("coupling_identity", coupling_err, 1e-10);
    add("field_identity", field_err, 1e-10);
  } else {
    const std::string why = "model exceeds " + std::to_string(oracle::kMaxBalanceSites) + " sites";
    skip("detailed_balance", why);
    skip("kernel_equivalence", why);
    skip("coupling_identity", why);
    skip("field_identity", why);
  }

  if (n >= 2 && n <= oracle::kMaxDistributionSites) {
    const auto m = oracle::pair_marginal(model, 0, 1);
    add("pair_marginal_sum", std::fabs(m[0] + m[1] + m[2] + m[3] - 1.0), tol);
  } else {
    skip("pair_marginal_sum", "needs 2..20 sites");
  }

  const auto bounds = measured_bounds(model);
  if (bounds.min_coupling > 0.0) {
    const KernelProfile profile = kernel_profile(kernel, bounds);
    const double alpha = bounds.min_coupling;
    add("z_star_closed_form",
        std::fabs(oracle::z_star_numeric(profile, alpha) - profile.z_star(alpha)), 1e-10,
        "alpha = " + std::to_string(alpha));
  } else {
    skip("z_star_closed_form", "model has no couplings");
  }

  // spectral gap of each small connected component must be positive
  const auto graph = dependency_graph(model);
  std::vector<bool> seen(n, false);
  double smallest_gap = INFINITY;
  std::size_t components = 0;
  for (std::uint32_t s = 0; s < n; ++s) {
    if (seen[s]) {
      continue;
    }
    std::vector<std::uint32_t> comp{s};
    seen[s] = true;
    for (std::size_t k = 0; k < comp.size(); ++k) {
      for (auto v : graph.neighbors(comp[k])) {
        if (!seen[v]) {
          seen[v] = true;
          comp.push_back(v);
        }
      }
    }
    if (comp.size() <= oracle::kMaxSpectralSites) {
      std::sort(comp.begin(), comp.end());
      smallest_gap = std::min(smallest_gap, oracle::spectral_gap_numeric(model, comp, kernel));
      ++components;
    }
  }
  if (components > 0) {
    checks.push_back({"spectral_gap_positive", smallest_gap > 0.0 ? "pass" : "fail", smallest_gap,
                      0.0, std::to_string(components) + " components of <= 3 sites"});
  } else {
    skip("spectral_gap_positive", "no component of <= 3 sites");
  }
  return checks;
}

int run_oracle_check(OracleArgs& a) {
  Kernel base = Kernel::glauber();
  if (a.config) {
    base = harness::load_config(*a.config).kernel;
  }
  const auto kernel = a.kernel.resolve(base);
  const auto model = load_model(a.model);
  const auto checks = oracle_suite(model, kernel, a.tolerance);
  bool passed = true;
  json list = json::array();
  for (const auto& c : checks) {
    passed = passed && c.status != "fail";
    json entry{{"name", c.name}, {"status", c.status}};
    if (c.status != "skipped") {
      entry["value"] = c.value;
      entry["tolerance"] = c.tolerance;
    }
    if (!c.note.empty()) {
      entry["note"] = c.note;
    }
    list.push_back(std::move(entry));
    std::cout << c.status << "  " << c.name;
    if (c.status != "skipped") {
      std::cout << "  value=" << c.value << " tolerance=" << c.tolerance;
    }
    std::cout << "\n";
  }
  json doc{{"model", a.model}, {"kernel", kernel.name()}, {"n", model.size()},
           {"passed", passed}, {"checks", std::move(list)}};
  const auto path = out_path(a.out, "oracle.json");
  write_text(path, doc.dump(2) + "\n");
  return passed ? kOk : kEvalFailure;
}

// ---------------------------------------------------------------------------
// calibrate / run / evaluate

struct CalibrateArgs {
  std::string config;
  std::optional<double> horizon;
  std::optional<double> t_match;
  std::optional<std::size_t> jobs;
  std::optional<std::string> out;
};

int run_calibrate(CalibrateArgs& a) {
  auto cfg = harness::load_config(a.config);
  apply(a.horizon, cfg.calibration.horizon);
  apply(a.t_match, cfg.calibration.t_match);
  apply(a.jobs, cfg.structure.jobs);
  const auto result = harness::calibrate(cfg);
  const auto path = a.out ? fs::path(*a.out)
                          : harness::default_output_dir(cfg.output_dir.empty()
                                                            ? std::nullopt
                                                            : std::optional(cfg.output_dir)) /
                                "calibration.json";
  write_text(path, harness::calibration_to_json(result));
  if (!result.ok) {
    std::cerr << "calibration failed: " << result.reason << "\n";
    std::cout << "wrote " << path.string() << " (distributions only)\n";
    return kEvalFailure;
  }
  std::cout << "wrote " << path.string() << " tau_bulk=" << result.tau_bulk;
  if (result.tau_match) {
    std::cout << " tau_match=" << *result.tau_match;
  }
  std::cout << "\n";
  return kOk;
}

struct RunArgs {
  std::string config;
  std::vector<std::uint64_t> seeds;
  std::optional<std::size_t> jobs;
  std::optional<double> horizon;
  std::optional<std::string> out_dir;
};

void print_summary(const harness::EvalReport& report) {
  for (const auto& s : report.seeds) {
    std::cout << "seed " << s.seed << ": " << (s.passed ? "pass" : "FAIL");
    if (!s.ok) {
      std::cout << " error=" << s.error;
    } else {
      std::cout << " precision=" << s.precision << " recall=" << s.recall
                << " exact=" << (s.exact_recovery ? 1 : 0);
      if (s.coupling_max_error) std::cout << " coupling_err=" << *s.coupling_max_error;
      if (s.field_max_error) std::cout << " field_err=" << *s.field_max_error;
    }
    std::cout << "\n";
  }
  std::cout << "seeds=" << report.seeds.size() << " failures=" << report.failures()
            << " exact_recovery_rate=" << report.exact_recovery_rate() << "\n";
}

int run_run(RunArgs& a) {
  auto cfg = harness::load_config(a.config);
  if (!a.seeds.empty()) {
    cfg.seeds = a.seeds;
  }
  apply(a.jobs, cfg.jobs);
  apply(a.horizon, cfg.sim.horizon);
  cfg.output_dir = harness::default_output_dir(
      a.out_dir ? std::optional<fs::path>(*a.out_dir)
                : (cfg.output_dir.empty() ? std::nullopt : std::optional(cfg.output_dir)));
  cfg.validate();
  const auto report = harness::run_experiment(cfg);
  harness::write_report(report, cfg.output_dir);
  print_summary(report);
  std::cout << "wrote " << (cfg.output_dir / "report.json").string() << "\n";
  return report.failures() == 0 ? kOk : kEvalFailure;
}

struct EvaluateArgs {
  std::optional<std::string> report;
  std::optional<std::string> truth;
  std::optional<std::string> learned;
  std::optional<std::string> graph;
  double coupling_tolerance = 0.05;
  double field_tolerance = 0.05;
  std::optional<std::string> out;
};

int run_evaluate(EvaluateArgs& a) {
  if (a.report) {
    if (a.truth || a.learned) {
      fail(ErrorKind::kInvalidArgument, "--report excludes --truth/--learned");
    }
    const auto report = harness::load_report(*a.report);
    print_summary(report);
    if (a.out) {
      harness::write_report(report, *a.out);
    }
    return report.failures() == 0 ? kOk : kEvalFailure;
  }
  if (!a.truth || (!a.learned && !a.graph)) {
    fail(ErrorKind::kInvalidArgument, "evaluate needs --report, or --truth with --learned/--graph");
  }
  const auto truth = load_model(*a.truth);
  json doc;
  bool passed = true;
  if (a.graph || a.learned) {
    const auto learned_graph = load_graph(a.graph ? *a.graph : *a.learned);
    const auto score = harness::score_graph(dependency_graph(truth), learned_graph);
    doc["precision"] = score.precision;
    doc["recall"] = score.recall;
    doc["exact_recovery"] = score.exact;
    passed = passed && score.exact;
  }
  if (a.learned) {
    const auto learned = load_model(*a.learned);
    const double ce = harness::coupling_max_error(truth, learned.couplings());
    const double fe = harness::field_max_error(truth, learned.fields());
    doc["coupling_max_error"] = ce;
    doc["field_max_error"] = fe;
    passed = passed && ce <= a.coupling_tolerance && fe <= a.field_tolerance;
  }
  doc["passed"] = passed;
  const std::string text = doc.dump(2) + "\n";
  std::cout << text;
  if (a.out) {
    write_text(*a.out, text);
  }
  return passed ? kOk : kEvalFailure;
}

int exit_code_for(const Error& e) {
  switch (e.kind()) {
    case ErrorKind::kInsufficientSamples:
    case ErrorKind::kInfeasible:
      return kEvalFailure;
    default:
      return kConfigError;
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Ising model learning from flip-only dynamics"};
  app.require_subcommand(1);

  GenerateArgs gen;
  auto* g = app.add_subcommand("generate", "Draw a random model from a bounded class");
  g->add_option("--config", gen.config, "TOML config ([model] section)")->check(CLI::ExistingFile);
  g->add_option("--family", gen.family, "empty, bounded-degree, regular, matching, path, grid");
  g->add_option("--n", gen.n, "Number of sites");
  g->add_option("--max-degree", gen.max_degree);
  g->add_option("--edge-count", gen.edge_count);
  g->add_option("--grid-rows", gen.grid_rows);
  g->add_option("--planted-matching", gen.planted_matching, "Isolated edges on the last sites");
  g->add_option("--coupling-min", gen.coupling_min);
  g->add_option("--coupling-max", gen.coupling_max);
  g->add_option("--signs", gen.signs, "positive, negative or random");
  g->add_option("--field-max", gen.field_max);
  g->add_option("--width", gen.width);
  g->add_option("--seed", gen.seed);
  g->add_option("--out", gen.out, "Model JSON path");

  SimulateArgs sim;
  auto* s = app.add_subcommand("simulate", "Run the dynamics and record flips");
  s->add_option("--model", sim.model)->required()->check(CLI::ExistingFile);
  s->add_option("--config", sim.config, "TOML config ([kernel], [simulation])")
      ->check(CLI::ExistingFile);
  sim.kernel.add(s);
  s->add_option("--horizon", sim.horizon);
  s->add_option("--seed", sim.seed);
  s->add_option("--initial", sim.initial, "all-plus or seeded-uniform");
  s->add_option("--format", sim.format, "jsonl or binary (default from extension)");
  s->add_option("--out", sim.out, "Trace path");

  StructureArgs st;
  auto* ls = app.add_subcommand("learn-structure", "Recover the dependency graph from a trace");
  ls->add_option("--trace", st.trace)->required()->check(CLI::ExistingFile);
  ls->add_option("--config", st.config, "TOML config ([structure])")->check(CLI::ExistingFile);
  ls->add_option("--eps", st.eps);
  ls->add_option("--spacing", st.spacing);
  ls->add_option("--tau-bulk", st.tau_bulk);
  ls->add_option("--tau-match", st.tau_match);
  ls->add_option("--t-bulk", st.t_bulk);
  ls->add_option("--t-match", st.t_match);
  ls->add_option("--match-source", st.match_source, "tail or reuse");
  ls->add_option("--min-occupancy", st.min_occupancy);
  ls->add_option("--jobs", st.jobs);
  ls->add_option("--out", st.out);

  ParamsArgs pa;
  auto* lp = app.add_subcommand("learn-params", "Estimate couplings and fields on a known graph");
  lp->add_option("--trace", pa.trace)->required()->check(CLI::ExistingFile);
  lp->add_option("--graph", pa.graph, "Graph or model JSON")->required()->check(CLI::ExistingFile);
  lp->add_option("--config", pa.config, "TOML config ([params])")->check(CLI::ExistingFile);
  lp->add_option("--eps-rate", pa.eps_rate);
  lp->add_option("--spacing", pa.spacing);
  lp->add_option("--t-param", pa.t_param);
  lp->add_option("--min-samples", pa.min_samples);
  lp->add_option("--jobs", pa.jobs);
  lp->add_option("--out", pa.out);

  OracleArgs oa;
  auto* oc = app.add_subcommand("oracle-check", "Exact-enumeration checks on a model");
  oc->add_option("--model", oa.model)->required()->check(CLI::ExistingFile);
  oc->add_option("--config", oa.config)->check(CLI::ExistingFile);
  oa.kernel.add(oc);
  oc->add_option("--tolerance", oa.tolerance);
  oc->add_option("--out", oa.out);

  CalibrateArgs ca;
  auto* cal = app.add_subcommand("calibrate", "Thresholds from pilot runs");
  cal->add_option("--config", ca.config)->required()->check(CLI::ExistingFile);
  cal->add_option("--horizon", ca.horizon, "Pilot cycle-statistic horizon");
  cal->add_option("--t-match", ca.t_match);
  cal->add_option("--jobs", ca.jobs);
  cal->add_option("--out", ca.out);

  EvaluateArgs ea;
  auto* ev = app.add_subcommand("evaluate", "Score learned output or reload a report");
  ev->add_option("--report", ea.report, "report.json or report.csv")->check(CLI::ExistingFile);
  ev->add_option("--truth", ea.truth)->check(CLI::ExistingFile);
  ev->add_option("--learned", ea.learned, "Learned model JSON")->check(CLI::ExistingFile);
  ev->add_option("--graph", ea.graph, "Learned graph JSON")->check(CLI::ExistingFile);
  ev->add_option("--coupling-tolerance", ea.coupling_tolerance);
  ev->add_option("--field-tolerance", ea.field_tolerance);
  ev->add_option("--out", ea.out);

  RunArgs ra;
  auto* run = app.add_subcommand("run", "Full pipeline over a seed list");
  run->add_option("--config", ra.config)->required()->check(CLI::ExistingFile);
  run->add_option("--seeds", ra.seeds, "Override the seed list")->delimiter(',');
  run->add_option("--jobs", ra.jobs, "Seeds run in parallel");
  run->add_option("--horizon", ra.horizon);
  run->add_option("--output-dir", ra.out_dir);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kConfigError;
  }

  try {
    if (*g) return run_generate(gen);
    if (*s) return run_simulate(sim);
    if (*ls) return run_learn_structure(st);
    if (*lp) return run_learn_params(pa);
    if (*oc) return run_oracle_check(oa);
    if (*cal) return run_calibrate(ca);
    if (*ev) return run_evaluate(ea);
    if (*run) return run_run(ra);
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return exit_code_for(e);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kEvalFailure;
  }
  return kConfigError;
}
