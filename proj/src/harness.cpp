#include "isingflip/harness.hpp"

#include <toml.hpp>

#include <algorithm>
#include <charconv>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <initializer_list>
#include <mutex>
#include <set>
#include <sstream>

#include "file_util.hpp"
#include "isingflip/error.hpp"
#include "isingflip/model_io.hpp"
#include "isingflip/parallel.hpp"
#include "isingflip/rng.hpp"
#include "isingflip/trace_io.hpp"
#include "json_util.hpp"

namespace isingflip::harness {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr std::uint64_t kModelStream = 0x6d6f64;
constexpr std::uint64_t kSimStream = 0x73696d;
constexpr std::uint64_t kPilotStream = 0x70696c;

// ---------------------------------------------------------------------------
// TOML helpers

[[noreturn]] void config_error(const std::string& what) {
  fail(ErrorKind::kInvalidArgument, what);
}

void reject_unknown(const toml::table& t, const std::string& section,
                    std::initializer_list<std::string_view> allowed) {
  for (const auto& [key, node] : t) {
    if (std::find(allowed.begin(), allowed.end(), key.str()) == allowed.end()) {
      config_error("unknown key '" + std::string(key.str()) + "' in " + section);
    }
  }
}

const toml::table* table_of(const toml::table& t, const char* key) {
  const auto* node = t.get(key);
  if (node == nullptr) {
    return nullptr;
  }
  if (!node->is_table()) {
    config_error(std::string("'") + key + "' must be a table");
  }
  return node->as_table();
}

std::optional<double> get_double(const toml::table& t, const char* key) {
  const auto* node = t.get(key);
  if (node == nullptr) {
    return std::nullopt;
  }
  if (auto v = node->value<double>()) {
    return *v;
  }
  config_error(std::string("'") + key + "' must be a number");
}

std::optional<std::int64_t> get_int(const toml::table& t, const char* key) {
  const auto* node = t.get(key);
  if (node == nullptr) {
    return std::nullopt;
  }
  if (!node->is_integer()) {
    config_error(std::string("'") + key + "' must be an integer");
  }
  return node->value<std::int64_t>();
}

std::optional<std::size_t> get_count(const toml::table& t, const char* key) {
  auto v = get_int(t, key);
  if (v && *v < 0) {
    config_error(std::string("'") + key + "' must be >= 0");
  }
  return v ? std::optional<std::size_t>(static_cast<std::size_t>(*v)) : std::nullopt;
}

std::optional<bool> get_bool(const toml::table& t, const char* key) {
  const auto* node = t.get(key);
  if (node == nullptr) {
    return std::nullopt;
  }
  if (!node->is_boolean()) {
    config_error(std::string("'") + key + "' must be a boolean");
  }
  return node->value<bool>();
}

std::optional<std::string> get_string(const toml::table& t, const char* key) {
  const auto* node = t.get(key);
  if (node == nullptr) {
    return std::nullopt;
  }
  if (!node->is_string()) {
    config_error(std::string("'") + key + "' must be a string");
  }
  return node->value<std::string>();
}

std::vector<std::uint64_t> get_seed_list(const toml::table& t, const char* key) {
  const auto* node = t.get(key);
  const auto* arr = node != nullptr ? node->as_array() : nullptr;
  if (arr == nullptr) {
    config_error(std::string("'") + key + "' must be an array of integers");
  }
  std::vector<std::uint64_t> out;
  for (const auto& el : *arr) {
    auto v = el.value<std::int64_t>();
    if (!el.is_integer() || !v || *v < 0) {
      config_error(std::string("'") + key + "' entries must be non-negative integers");
    }
    out.push_back(static_cast<std::uint64_t>(*v));
  }
  return out;
}

GeneratorSpec parse_generator(const toml::table& t, const std::string& section) {
  reject_unknown(t, section,
                 {"family", "n", "max_degree", "edge_count", "grid_rows", "planted_matching",
                  "coupling", "coupling_min", "coupling_max", "signs", "field_max", "width",
                  "max_attempts", "file"});
  GeneratorSpec g;
  if (auto v = get_string(t, "family")) {
    g.family = parse_family(*v);
  }
  if (auto v = get_count(t, "n")) g.n = *v;
  if (auto v = get_count(t, "max_degree")) g.max_degree = *v;
  if (auto v = get_count(t, "edge_count")) g.edge_count = *v;
  if (auto v = get_count(t, "grid_rows")) g.grid_rows = *v;
  if (auto v = get_count(t, "planted_matching")) g.planted_matching = *v;
  if (auto v = get_double(t, "coupling")) {
    g.coupling_min = *v;
    g.coupling_max = *v;
  }
  if (auto v = get_double(t, "coupling_min")) g.coupling_min = *v;
  if (auto v = get_double(t, "coupling_max")) g.coupling_max = *v;
  if (auto v = get_string(t, "signs")) g.signs = parse_signs(*v);
  if (auto v = get_double(t, "field_max")) g.field_max = *v;
  if (auto v = get_double(t, "width")) g.width = *v;
  if (auto v = get_count(t, "max_attempts")) g.max_attempts = *v;
  return g;
}

Kernel parse_kernel(const toml::table& t) {
  reject_unknown(t, "[kernel]", {"type", "r_plus", "r_minus"});
  const auto type = get_string(t, "type").value_or("glauber");
  if (type == "glauber") {
    return Kernel::glauber();
  }
  if (type == "metropolis") {
    return Kernel::metropolis(get_double(t, "r_plus").value_or(1.0),
                              get_double(t, "r_minus").value_or(1.0));
  }
  config_error("unknown kernel type '" + type + "'");
}

MatchSource parse_match_source(const std::string& s) {
  if (s == "tail") return MatchSource::kTail;
  if (s == "reuse") return MatchSource::kReuse;
  config_error("match_source must be 'tail' or 'reuse', got '" + s + "'");
}

InitialKind parse_initial(const std::string& s) {
  if (s == "all-plus") return InitialKind::kAllPlus;
  if (s == "seeded-uniform") return InitialKind::kSeededUniform;
  config_error("initial must be 'all-plus' or 'seeded-uniform', got '" + s + "'");
}

// ---------------------------------------------------------------------------
// numeric text

std::string fmt_double(double v) {
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

double parse_double(std::string_view s, const char* what) {
  double v = 0.0;
  if (s == "nan") {
    return std::nan("");
  }
  const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (res.ec != std::errc{} || res.ptr != s.data() + s.size()) {
    fail(ErrorKind::kParse, std::string("bad number in column ") + what + ": '" +
                                std::string(s) + "'");
  }
  return v;
}

std::uint64_t parse_u64(std::string_view s, const char* what) {
  std::uint64_t v = 0;
  const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (res.ec != std::errc{} || res.ptr != s.data() + s.size()) {
    fail(ErrorKind::kParse, std::string("bad integer in column ") + what + ": '" +
                                std::string(s) + "'");
  }
  return v;
}

double seconds_since(std::chrono::steady_clock::time_point start) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

}  // namespace

// ---------------------------------------------------------------------------
// config

void ExperimentConfig::validate() const {
  if (seeds.empty()) {
    config_error("seed list must not be empty");
  }
  if (generator.has_value() == model_file.has_value()) {
    config_error("exactly one of a generator spec or a model file is required");
  }
  if (generator) {
    generator->validate();
  }
  if (model_file && !fs::exists(*model_file)) {
    config_error("model file does not exist: " + model_file->string());
  }
  if (!(sim.horizon > 0.0) || !std::isfinite(sim.horizon)) {
    config_error("simulation horizon must be positive and finite");
  }
  if (sim.initial == InitialKind::kExplicit) {
    config_error("explicit initial configurations are not supported in experiment configs");
  }
  if (learn_structure) {
    structure.validate();
    const double end = structure.match_source == MatchSource::kTail
                           ? structure.t_bulk + structure.t_match
                           : std::max(structure.t_bulk, structure.t_match);
    if (end > sim.horizon) {
      config_error("structure phases end after the simulation horizon");
    }
    if (structure.match_source == MatchSource::kTail && structure.t_bulk <= 0.0) {
      config_error("match_source 'tail' needs an explicit t_bulk");
    }
    if (calibrate) {
      if (calibration.seeds.empty()) {
        config_error("calibration needs at least one pilot seed");
      }
      if (calibration.pilots.empty() && !generator) {
        config_error("calibration needs pilot specs when the model comes from a file");
      }
      for (const auto& p : calibration.pilots) {
        p.validate();
      }
      if (!(calibration.horizon > 0.0) || !(calibration.t_match >= 0.0)) {
        config_error("calibration horizon must be positive and t_match >= 0");
      }
    }
  }
  if (learn_params) {
    params.validate();
    if (params.t_param > sim.horizon) {
      config_error("t_param exceeds the simulation horizon");
    }
  }
  if (!(coupling_tolerance >= 0.0) || !(field_tolerance >= 0.0)) {
    config_error("tolerances must be >= 0");
  }
}

ExperimentConfig parse_config(std::string_view toml_text, const fs::path& base_dir) {
  toml::table root;
  try {
    root = toml::parse(toml_text);
  } catch (const toml::parse_error& e) {
    const auto& src = e.source().begin;
    throw ParseError(std::string(e.description()), src.line,
                     src.column == 0 ? 0 : src.column - 1);
  }
  reject_unknown(root, "the top level",
                 {"name", "seeds", "seed_count", "seed_base", "jobs", "output_dir", "model",
                  "kernel", "simulation", "structure", "params", "calibration", "evaluation"});

  ExperimentConfig cfg;
  const auto resolve = [&](const std::string& p) {
    fs::path path(p);
    return path.is_absolute() ? path : base_dir / path;
  };

  if (auto v = get_string(root, "name")) cfg.name = *v;
  if (root.contains("seeds")) {
    cfg.seeds = get_seed_list(root, "seeds");
  } else if (auto count = get_count(root, "seed_count")) {
    const auto base = get_int(root, "seed_base").value_or(1);
    if (base < 0) {
      config_error("'seed_base' must be >= 0");
    }
    cfg.seeds.clear();
    for (std::size_t k = 0; k < *count; ++k) {
      cfg.seeds.push_back(static_cast<std::uint64_t>(base) + k);
    }
  }
  if (auto v = get_count(root, "jobs")) cfg.jobs = *v;
  if (auto v = get_string(root, "output_dir")) cfg.output_dir = resolve(*v);

  const auto* model = table_of(root, "model");
  if (model == nullptr) {
    config_error("missing [model] section");
  }
  if (auto file = get_string(*model, "file")) {
    if (model->size() != 1) {
      config_error("[model] takes either 'file' or generator keys, not both");
    }
    cfg.model_file = resolve(*file);
  } else {
    cfg.generator = parse_generator(*model, "[model]");
  }

  if (const auto* k = table_of(root, "kernel")) {
    cfg.kernel = parse_kernel(*k);
  }

  if (const auto* s = table_of(root, "simulation")) {
    reject_unknown(*s, "[simulation]", {"horizon", "initial", "write_traces"});
    if (auto v = get_double(*s, "horizon")) cfg.sim.horizon = *v;
    if (auto v = get_string(*s, "initial")) cfg.sim.initial = parse_initial(*v);
    if (auto v = get_bool(*s, "write_traces")) cfg.write_traces = *v;
  }

  if (cfg.generator) {
    cfg.structure.cycle.eps = CycleWindowConfig::default_eps(cfg.generator->max_degree);
    cfg.params.eps_rate = ParamConfig::default_eps(cfg.generator->max_degree);
  }
  if (const auto* s = table_of(root, "structure")) {
    reject_unknown(*s, "[structure]",
                   {"enabled", "calibrate", "eps", "spacing", "tau_bulk", "tau_match", "t_bulk",
                    "t_match", "match_source", "min_occupancy", "jobs"});
    if (auto v = get_bool(*s, "enabled")) cfg.learn_structure = *v;
    if (auto v = get_bool(*s, "calibrate")) cfg.calibrate = *v;
    if (auto v = get_double(*s, "eps")) cfg.structure.cycle.eps = *v;
    if (auto v = get_double(*s, "spacing")) cfg.structure.cycle.spacing = *v;
    if (auto v = get_double(*s, "tau_bulk")) cfg.structure.tau_bulk = *v;
    if (auto v = get_double(*s, "tau_match")) cfg.structure.tau_match = *v;
    if (auto v = get_double(*s, "t_bulk")) cfg.structure.t_bulk = *v;
    if (auto v = get_double(*s, "t_match")) cfg.structure.t_match = *v;
    if (auto v = get_string(*s, "match_source")) cfg.structure.match_source = parse_match_source(*v);
    if (auto v = get_double(*s, "min_occupancy")) cfg.structure.min_occupancy = *v;
    if (auto v = get_count(*s, "jobs")) cfg.structure.jobs = *v;
  }

  if (const auto* p = table_of(root, "params")) {
    reject_unknown(*p, "[params]",
                   {"enabled", "eps_rate", "spacing", "t_param", "min_samples", "jobs"});
    if (auto v = get_bool(*p, "enabled")) cfg.learn_params = *v;
    if (auto v = get_double(*p, "eps_rate")) cfg.params.eps_rate = *v;
    if (auto v = get_double(*p, "spacing")) cfg.params.spacing = *v;
    if (auto v = get_double(*p, "t_param")) cfg.params.t_param = *v;
    if (auto v = get_count(*p, "min_samples")) cfg.params.min_samples = *v;
    if (auto v = get_count(*p, "jobs")) cfg.params.jobs = *v;
  }

  if (const auto* c = table_of(root, "calibration")) {
    reject_unknown(*c, "[calibration]", {"seeds", "horizon", "t_match", "pilot"});
    if (c->contains("seeds")) cfg.calibration.seeds = get_seed_list(*c, "seeds");
    if (auto v = get_double(*c, "horizon")) cfg.calibration.horizon = *v;
    if (auto v = get_double(*c, "t_match")) cfg.calibration.t_match = *v;
    if (const auto* node = c->get("pilot")) {
      const auto* arr = node->as_array();
      if (arr == nullptr) {
        config_error("'calibration.pilot' must be an array of tables");
      }
      for (const auto& el : *arr) {
        if (!el.is_table()) {
          config_error("'calibration.pilot' must be an array of tables");
        }
        cfg.calibration.pilots.push_back(parse_generator(*el.as_table(), "[[calibration.pilot]]"));
      }
    }
  }

  if (const auto* e = table_of(root, "evaluation")) {
    reject_unknown(*e, "[evaluation]", {"coupling_tolerance", "field_tolerance"});
    if (auto v = get_double(*e, "coupling_tolerance")) cfg.coupling_tolerance = *v;
    if (auto v = get_double(*e, "field_tolerance")) cfg.field_tolerance = *v;
  }
  return cfg;
}

ExperimentConfig load_config(const fs::path& path) {
  return parse_config(detail::read_file(path), path.parent_path());
}

fs::path default_output_dir(const std::optional<fs::path>& explicit_dir) {
  if (explicit_dir && !explicit_dir->empty()) {
    return *explicit_dir;
  }
  if (const char* env = std::getenv(kOutDirEnv); env != nullptr && *env != '\0') {
    return fs::path(env);
  }
  return fs::path("isingflip-out");
}

// ---------------------------------------------------------------------------
// scoring

std::size_t EvalReport::failures() const {
  return static_cast<std::size_t>(
      std::count_if(seeds.begin(), seeds.end(), [](const SeedResult& s) { return !s.passed; }));
}

double EvalReport::exact_recovery_rate() const {
  if (seeds.empty()) {
    return 0.0;
  }
  const auto hits = std::count_if(seeds.begin(), seeds.end(),
                                  [](const SeedResult& s) { return s.ok && s.exact_recovery; });
  return static_cast<double>(hits) / static_cast<double>(seeds.size());
}

bool equivalent(const EvalReport& a, const EvalReport& b) {
  const auto strip = [](EvalReport r) {
    for (auto& s : r.seeds) {
      s.time_generate = s.time_simulate = s.time_structure = s.time_params = 0.0;
    }
    return report_to_json(r);
  };
  return strip(a) == strip(b);
}

GraphScore score_graph(const Graph& truth, const Graph& learned) {
  if (truth.size() != learned.size()) {
    fail(ErrorKind::kInvalidArgument, "graphs differ in site count");
  }
  const auto& t = truth.edges();
  const auto& l = learned.edges();
  std::size_t common = 0;
  for (const auto& e : l) {
    common += t.count(e);
  }
  GraphScore s;
  s.precision = l.empty() ? 1.0 : static_cast<double>(common) / static_cast<double>(l.size());
  s.recall = t.empty() ? 1.0 : static_cast<double>(common) / static_cast<double>(t.size());
  s.exact = t == l;
  return s;
}

double coupling_max_error(const IsingModel& truth, std::span<const Coupling> learned) {
  double worst = 0.0;
  std::set<Edge> seen;
  for (const auto& c : learned) {
    if (c.i >= truth.size() || c.j >= truth.size()) {
      fail(ErrorKind::kOutOfRange, "learned coupling outside the model");
    }
    seen.insert(make_edge(c.i, c.j));
    worst = std::max(worst, std::fabs(c.value - truth.coupling(c.i, c.j)));
  }
  for (const auto& c : truth.couplings()) {
    if (seen.count(make_edge(c.i, c.j)) == 0) {
      worst = std::max(worst, std::fabs(c.value));
    }
  }
  return worst;
}

double field_max_error(const IsingModel& truth, std::span<const double> learned) {
  if (learned.size() != truth.size()) {
    fail(ErrorKind::kInvalidArgument, "field vector length differs from the model");
  }
  double worst = 0.0;
  for (std::size_t i = 0; i < learned.size(); ++i) {
    worst = std::max(worst, std::fabs(learned[i] - truth.field(i)));
  }
  return worst;
}

// ---------------------------------------------------------------------------
// calibration

CalibrationResult calibrate(const CalibrationConfig& cfg, const Kernel& kernel,
                            const StructureConfig& structure, std::size_t jobs) {
  if (cfg.pilots.empty() || cfg.seeds.empty()) {
    fail(ErrorKind::kInvalidArgument, "calibration needs pilot specs and seeds");
  }
  structure.cycle.validate();
  CalibrationResult out;
  double dense_floor = INFINITY;
  double null_ceiling = -INFINITY;
  double match_floor = INFINITY;
  double match_ceiling = -INFINITY;
  bool any_match = false;
  bool any_match_null = false;

  for (std::size_t p = 0; p < cfg.pilots.size(); ++p) {
    for (const auto seed : cfg.seeds) {
      const auto model = random_model(cfg.pilots[p], derive_seed(seed, kPilotStream));
      SimConfig sim;
      sim.horizon = cfg.horizon + cfg.t_match;
      sim.seed = derive_seed(seed, kSimStream);
      const auto trace = simulate(model, kernel, sim).flips;
      const auto acc = accumulate_cycle_statistics(trace, structure.cycle, cfg.horizon, jobs);
      const auto truth = dependency_graph(model);
      const auto split = dense_edges(truth);

      const auto record = [&](std::uint32_t i, std::uint32_t j, const char* kind, double v,
                              double se) {
        out.samples.push_back({p, seed, i, j, kind, v, se});
      };
      for (const auto& e : split.dense) {
        const bool forward = acc.mean(e.u, e.v) >= acc.mean(e.v, e.u);
        const auto a = forward ? e.u : e.v;
        const auto b = forward ? e.v : e.u;
        record(a, b, "dense", acc.mean(a, b), acc.standard_error(a, b));
        dense_floor = std::min(dense_floor, acc.mean(a, b));
      }
      for (std::uint32_t i = 0; i < model.size(); ++i) {
        for (std::uint32_t j = 0; j < model.size(); ++j) {
          if (i == j || truth.has_edge(i, j)) {
            continue;
          }
          const double m = acc.mean(i, j);
          const double se = acc.standard_error(i, j);
          record(i, j, "null", m, se);
          null_ceiling = std::max(null_ceiling, m + 3.0 * se);
        }
      }

      if (cfg.t_match > 0.0) {
        std::vector<std::uint32_t> candidates(split.isolated_vertices);
        for (const auto& e : split.isolated_matching) {
          candidates.push_back(e.u);
          candidates.push_back(e.v);
        }
        std::sort(candidates.begin(), candidates.end());
        for (std::size_t a = 0; a < candidates.size(); ++a) {
          for (std::size_t b = a + 1; b < candidates.size(); ++b) {
            const auto i = candidates[a];
            const auto j = candidates[b];
            const auto occ = trace.occupation_time(i, j, cfg.horizon, cfg.horizon + cfg.t_match);
            double diff = conditional_difference(occ, structure.min_occupancy);
            const bool adjacent = truth.has_edge(i, j);
            if (std::isnan(diff)) {
              // an unreadable pair counts against separation on both sides
              diff = adjacent ? 0.0 : 1.0;
            }
            record(i, j, adjacent ? "match" : "match-null", diff, 0.0);
            if (adjacent) {
              any_match = true;
              match_floor = std::min(match_floor, diff);
            } else {
              any_match_null = true;
              match_ceiling = std::max(match_ceiling, diff);
            }
          }
        }
      }
    }
  }

  if (!std::isfinite(dense_floor) || !std::isfinite(null_ceiling)) {
    out.reason = "pilots need both dense edges and non-adjacent pairs";
    return out;
  }
  out.dense_floor = dense_floor;
  out.null_ceiling = null_ceiling;
  if (!(dense_floor > null_ceiling) || !(dense_floor > 0.0)) {
    out.reason = "cycle statistic does not separate: dense floor " + fmt_double(dense_floor) +
                 " <= null ceiling " + fmt_double(null_ceiling);
    return out;
  }
  const double tau = null_ceiling > 0.0 ? std::sqrt(dense_floor * null_ceiling) : dense_floor / 2.0;

  std::optional<double> tau_match;
  if (any_match) {
    out.match_floor = match_floor;
    const double ceiling = any_match_null ? std::max(match_ceiling, 0.0) : 0.0;
    out.match_ceiling = ceiling;
    if (!(match_floor > ceiling)) {
      out.reason = "matching statistic does not separate: floor " + fmt_double(match_floor) +
                   " <= ceiling " + fmt_double(ceiling);
      return out;
    }
    tau_match = ceiling > 0.0 ? std::sqrt(match_floor * ceiling) : match_floor / 2.0;
  }
  out.ok = true;
  out.tau_bulk = tau;
  out.tau_match = tau_match;
  return out;
}

CalibrationResult calibrate(const ExperimentConfig& cfg) {
  auto c = cfg.calibration;
  if (c.pilots.empty()) {
    if (!cfg.generator) {
      config_error("calibration needs pilot specs when the model comes from a file");
    }
    c.pilots.push_back(*cfg.generator);
  }
  return calibrate(c, cfg.kernel, cfg.structure, cfg.structure.jobs);
}

std::string calibration_to_json(const CalibrationResult& r) {
  json doc;
  doc["ok"] = r.ok;
  if (!r.ok) {
    doc["reason"] = r.reason;
  }
  doc["dense_floor"] = r.dense_floor;
  doc["null_ceiling"] = r.null_ceiling;
  if (r.ok) {
    doc["tau_bulk"] = r.tau_bulk;
    doc["tau_match"] = r.tau_match ? json(*r.tau_match) : json(nullptr);
  }
  if (r.match_floor) doc["match_floor"] = *r.match_floor;
  if (r.match_ceiling) doc["match_ceiling"] = *r.match_ceiling;
  json samples = json::array();
  for (const auto& s : r.samples) {
    samples.push_back({{"pilot", s.pilot},
                       {"seed", s.seed},
                       {"i", s.i},
                       {"j", s.j},
                       {"kind", s.kind},
                       {"value", s.value},
                       {"standard_error", s.standard_error}});
  }
  doc["samples"] = std::move(samples);
  return doc.dump(2) + "\n";
}

// ---------------------------------------------------------------------------
// pipeline

namespace {

SeedResult run_seed(const ExperimentConfig& cfg, const std::optional<IsingModel>& fixed,
                    const StructureConfig& structure, std::uint64_t seed, std::ostream& log) {
  using clock = std::chrono::steady_clock;
  SeedResult r;
  r.seed = seed;
  try {
    auto t0 = clock::now();
    const IsingModel model =
        fixed ? *fixed : random_model(*cfg.generator, derive_seed(seed, kModelStream));
    r.time_generate = seconds_since(t0);
    r.n = model.size();
    const auto truth = dependency_graph(model);
    r.true_edges = truth.edges().size();
    log << "model: n=" << model.size() << " edges=" << r.true_edges << "\n";

    t0 = clock::now();
    SimConfig sim = cfg.sim;
    sim.seed = derive_seed(seed, kSimStream);
    sim.record_full = false;
    const auto run = simulate(model, cfg.kernel, sim);
    r.time_simulate = seconds_since(t0);
    log << "simulate: horizon=" << fmt_double(sim.horizon) << " attempts=" << run.attempts
        << " flips=" << run.flips.events().size() << "\n";
    if (cfg.write_traces && !cfg.output_dir.empty()) {
      save_trace(run.flips, cfg.output_dir / "traces" / ("seed-" + std::to_string(seed) + ".bin"));
    }

    Graph graph = truth;
    if (cfg.learn_structure) {
      t0 = clock::now();
      const auto learned = learn_structure(run.flips, structure);
      r.time_structure = seconds_since(t0);
      graph = learned.graph;
      r.indeterminate_pairs = learned.matching.indeterminate.size();
      const auto score = score_graph(truth, graph);
      r.precision = score.precision;
      r.recall = score.recall;
      r.exact_recovery = score.exact;
      log << "structure: windows=" << learned.bulk.windows
          << " learned_edges=" << graph.edges().size() << " exact=" << score.exact
          << " indeterminate_pairs=" << r.indeterminate_pairs << "\n";
    }
    r.learned_edges = graph.edges().size();

    if (cfg.learn_params) {
      t0 = clock::now();
      const auto est = learn_parameters(run.flips, graph, cfg.params);
      r.time_params = seconds_since(t0);
      r.coupling_max_error = coupling_max_error(model, est.couplings);
      r.field_max_error = field_max_error(model, est.fields);
      r.indeterminate_edges = est.report.indeterminate_edges;
      r.indeterminate_fields = est.report.indeterminate_fields;
      log << "params: coupling_max_error=" << fmt_double(*r.coupling_max_error)
          << " field_max_error=" << fmt_double(*r.field_max_error)
          << " indeterminate_edges=" << r.indeterminate_edges
          << " indeterminate_fields=" << r.indeterminate_fields << "\n";
    }

    r.passed = (!cfg.learn_structure || r.exact_recovery) &&
               (!cfg.learn_params || (*r.coupling_max_error <= cfg.coupling_tolerance &&
                                      *r.field_max_error <= cfg.field_tolerance));
  } catch (const std::exception& e) {
    r.ok = false;
    r.passed = false;
    r.exact_recovery = false;
    r.error = e.what();
    log << "error: " << r.error << "\n";
  }
  log << "result: " << (r.passed ? "pass" : "fail") << "\n";
  return r;
}

}  // namespace

EvalReport run_experiment(const ExperimentConfig& cfg) {
  cfg.validate();
  EvalReport report;
  report.name = cfg.name;

  std::optional<IsingModel> fixed;
  if (cfg.model_file) {
    fixed = load_model(*cfg.model_file);
  }

  StructureConfig structure = cfg.structure;
  std::string calibration_error;
  if (cfg.learn_structure) {
    if (cfg.calibrate) {
      const auto cal = calibrate(cfg);
      if (!cfg.output_dir.empty()) {
        detail::write_file(cfg.output_dir / "calibration.json", calibration_to_json(cal));
      }
      if (cal.ok) {
        structure.tau_bulk = cal.tau_bulk;
        if (cal.tau_match) {
          structure.tau_match = *cal.tau_match;
        }
      } else {
        calibration_error = "calibration failed: " + cal.reason;
      }
    }
    report.tau_bulk = structure.tau_bulk;
    report.tau_match = structure.tau_match;
  }

  report.seeds.resize(cfg.seeds.size());
  const auto body = [&](std::size_t begin, std::size_t end, std::size_t) {
    for (std::size_t k = begin; k < end; ++k) {
      std::ostringstream log;
      log << "seed " << cfg.seeds[k] << "\n";
      if (!calibration_error.empty()) {
        SeedResult r;
        r.seed = cfg.seeds[k];
        r.ok = r.passed = r.exact_recovery = false;
        r.error = calibration_error;
        log << "error: " << r.error << "\n";
        report.seeds[k] = r;
      } else {
        report.seeds[k] = run_seed(cfg, fixed, structure, cfg.seeds[k], log);
      }
      if (!cfg.output_dir.empty()) {
        detail::write_file(cfg.output_dir / "logs" / ("seed-" + std::to_string(cfg.seeds[k]) + ".log"),
                           log.str());
      }
    }
  };
  parallel_chunks(cfg.seeds.size(), std::max<std::size_t>(cfg.jobs, 1), body);
  return report;
}

// ---------------------------------------------------------------------------
// report codecs

namespace {

constexpr std::initializer_list<const char*> kCsvColumns = {
    "seed",          "ok",                  "passed",
    "error",         "n",                   "true_edges",
    "learned_edges", "precision",           "recall",
    "exact_recovery", "coupling_max_error", "field_max_error",
    "indeterminate_pairs", "indeterminate_edges", "indeterminate_fields",
    "time_generate", "time_simulate",       "time_structure",
    "time_params"};

json optional_number(const std::optional<double>& v) {
  return v ? json(*v) : json(nullptr);
}

std::optional<double> read_optional(const json& doc, const char* key) {
  if (!doc.contains(key) || doc.at(key).is_null()) {
    return std::nullopt;
  }
  return detail::require<double>(doc, key);
}

std::string csv_quote(const std::string& s) {
  if (s.find_first_of(",\"\n\r") == std::string::npos) {
    return s;
  }
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') {
      out += '"';
    }
    out += c;
  }
  out += '"';
  return out;
}

/// Splits CSV text into records; quoted fields may hold commas, quotes and newlines.
std::vector<std::vector<std::string>> csv_records(std::string_view text) {
  std::vector<std::vector<std::string>> rows;
  std::vector<std::string> row;
  std::string field;
  bool quoted = false;
  bool touched = false;
  for (std::size_t k = 0; k < text.size(); ++k) {
    const char c = text[k];
    if (quoted) {
      if (c == '"') {
        if (k + 1 < text.size() && text[k + 1] == '"') {
          field += '"';
          ++k;
        } else {
          quoted = false;
        }
      } else {
        field += c;
      }
      continue;
    }
    if (c == '"') {
      quoted = true;
      touched = true;
    } else if (c == ',') {
      row.push_back(std::move(field));
      field.clear();
      touched = true;
    } else if (c == '\n' || c == '\r') {
      if (c == '\r' && k + 1 < text.size() && text[k + 1] == '\n') {
        ++k;
      }
      if (touched || !field.empty()) {
        row.push_back(std::move(field));
        rows.push_back(std::move(row));
      }
      row.clear();
      field.clear();
      touched = false;
    } else {
      field += c;
      touched = true;
    }
  }
  if (quoted) {
    fail(ErrorKind::kParse, "unterminated quoted CSV field");
  }
  if (touched || !field.empty()) {
    row.push_back(std::move(field));
    rows.push_back(std::move(row));
  }
  return rows;
}

}  // namespace

std::string report_to_json(const EvalReport& report) {
  json doc;
  doc["name"] = report.name;
  doc["tau_bulk"] = optional_number(report.tau_bulk);
  doc["tau_match"] = optional_number(report.tau_match);
  json seeds = json::array();
  for (const auto& s : report.seeds) {
    seeds.push_back({{"seed", s.seed},
                     {"ok", s.ok},
                     {"passed", s.passed},
                     {"error", s.error},
                     {"n", s.n},
                     {"true_edges", s.true_edges},
                     {"learned_edges", s.learned_edges},
                     {"precision", s.precision},
                     {"recall", s.recall},
                     {"exact_recovery", s.exact_recovery},
                     {"coupling_max_error", optional_number(s.coupling_max_error)},
                     {"field_max_error", optional_number(s.field_max_error)},
                     {"indeterminate_pairs", s.indeterminate_pairs},
                     {"indeterminate_edges", s.indeterminate_edges},
                     {"indeterminate_fields", s.indeterminate_fields},
                     {"wall_time",
                      {{"generate", s.time_generate},
                       {"simulate", s.time_simulate},
                       {"structure", s.time_structure},
                       {"params", s.time_params}}}});
  }
  doc["seeds"] = std::move(seeds);
  doc["summary"] = {{"seeds", report.seeds.size()},
                    {"failures", report.failures()},
                    {"exact_recovery_rate", report.exact_recovery_rate()}};
  return doc.dump(2) + "\n";
}

EvalReport report_from_json(std::string_view text) {
  const auto doc = detail::parse_json(text);
  EvalReport r;
  r.name = detail::require<std::string>(doc, "name");
  r.tau_bulk = read_optional(doc, "tau_bulk");
  r.tau_match = read_optional(doc, "tau_match");
  const auto seeds = detail::require<json>(doc, "seeds");
  if (!seeds.is_array()) {
    fail(ErrorKind::kParse, "'seeds' must be an array");
  }
  for (const auto& s : seeds) {
    SeedResult x;
    x.seed = detail::require<std::uint64_t>(s, "seed");
    x.ok = detail::require<bool>(s, "ok");
    x.passed = detail::require<bool>(s, "passed");
    x.error = detail::require<std::string>(s, "error");
    x.n = detail::require<std::size_t>(s, "n");
    x.true_edges = detail::require<std::size_t>(s, "true_edges");
    x.learned_edges = detail::require<std::size_t>(s, "learned_edges");
    x.precision = detail::require<double>(s, "precision");
    x.recall = detail::require<double>(s, "recall");
    x.exact_recovery = detail::require<bool>(s, "exact_recovery");
    x.coupling_max_error = read_optional(s, "coupling_max_error");
    x.field_max_error = read_optional(s, "field_max_error");
    x.indeterminate_pairs = detail::require<std::size_t>(s, "indeterminate_pairs");
    x.indeterminate_edges = detail::require<std::size_t>(s, "indeterminate_edges");
    x.indeterminate_fields = detail::require<std::size_t>(s, "indeterminate_fields");
    const auto wall = detail::require<json>(s, "wall_time");
    x.time_generate = detail::require<double>(wall, "generate");
    x.time_simulate = detail::require<double>(wall, "simulate");
    x.time_structure = detail::require<double>(wall, "structure");
    x.time_params = detail::require<double>(wall, "params");
    if (!(x.precision >= 0.0 && x.precision <= 1.0) || !(x.recall >= 0.0 && x.recall <= 1.0)) {
      fail(ErrorKind::kParse, "precision and recall must lie in [0, 1]");
    }
    r.seeds.push_back(std::move(x));
  }
  return r;
}

std::string report_to_csv(const EvalReport& report) {
  std::string out = "# name: " + csv_quote(report.name) + "\n";
  if (report.tau_bulk) out += "# tau_bulk: " + fmt_double(*report.tau_bulk) + "\n";
  if (report.tau_match) out += "# tau_match: " + fmt_double(*report.tau_match) + "\n";
  bool first = true;
  for (const char* c : kCsvColumns) {
    out += first ? "" : ",";
    out += c;
    first = false;
  }
  out += '\n';
  const auto opt = [](const std::optional<double>& v) { return v ? fmt_double(*v) : std::string(); };
  for (const auto& s : report.seeds) {
    out += std::to_string(s.seed) + "," + (s.ok ? "1" : "0") + "," + (s.passed ? "1" : "0") + "," +
           csv_quote(s.error) + "," + std::to_string(s.n) + "," + std::to_string(s.true_edges) +
           "," + std::to_string(s.learned_edges) + "," + fmt_double(s.precision) + "," +
           fmt_double(s.recall) + "," + (s.exact_recovery ? "1" : "0") + "," +
           opt(s.coupling_max_error) + "," + opt(s.field_max_error) + "," +
           std::to_string(s.indeterminate_pairs) + "," + std::to_string(s.indeterminate_edges) +
           "," + std::to_string(s.indeterminate_fields) + "," + fmt_double(s.time_generate) + "," +
           fmt_double(s.time_simulate) + "," + fmt_double(s.time_structure) + "," +
           fmt_double(s.time_params) + "\n";
  }
  return out;
}

EvalReport report_from_csv(std::string_view text) {
  EvalReport r;
  std::string body;
  std::size_t pos = 0;
  // metadata comments precede the header
  while (pos < text.size() && text[pos] == '#') {
    const auto nl = text.find('\n', pos);
    const auto line = text.substr(pos, nl == std::string_view::npos ? text.size() - pos : nl - pos);
    pos = nl == std::string_view::npos ? text.size() : nl + 1;
    const auto colon = line.find(':');
    if (colon == std::string_view::npos) {
      continue;
    }
    const auto key = line.substr(1, colon - 1);
    auto value = line.substr(colon + 1);
    while (!value.empty() && value.front() == ' ') value.remove_prefix(1);
    while (!value.empty() && (value.back() == '\r' || value.back() == ' ')) value.remove_suffix(1);
    if (key.find("name") != std::string_view::npos) {
      const auto rec = csv_records(value);
      r.name = rec.empty() || rec[0].empty() ? std::string() : rec[0][0];
    } else if (key.find("tau_bulk") != std::string_view::npos) {
      r.tau_bulk = parse_double(value, "tau_bulk");
    } else if (key.find("tau_match") != std::string_view::npos) {
      r.tau_match = parse_double(value, "tau_match");
    }
  }
  const auto rows = csv_records(text.substr(pos));
  if (rows.empty()) {
    fail(ErrorKind::kParse, "CSV report has no header");
  }
  const std::vector<std::string> expected(kCsvColumns.begin(), kCsvColumns.end());
  if (rows[0] != expected) {
    fail(ErrorKind::kParse, "CSV report header does not match the expected columns");
  }
  const auto flag = [](const std::string& s, const char* what) {
    if (s != "0" && s != "1") {
      fail(ErrorKind::kParse, std::string("column ") + what + " must be 0 or 1");
    }
    return s == "1";
  };
  const auto opt = [](const std::string& s, const char* what) {
    return s.empty() ? std::optional<double>() : std::optional<double>(parse_double(s, what));
  };
  for (std::size_t k = 1; k < rows.size(); ++k) {
    const auto& c = rows[k];
    if (c.size() != expected.size()) {
      fail(ErrorKind::kParse, "CSV row " + std::to_string(k + 1) + " has " +
                                  std::to_string(c.size()) + " fields, expected " +
                                  std::to_string(expected.size()));
    }
    SeedResult s;
    s.seed = parse_u64(c[0], "seed");
    s.ok = flag(c[1], "ok");
    s.passed = flag(c[2], "passed");
    s.error = c[3];
    s.n = parse_u64(c[4], "n");
    s.true_edges = parse_u64(c[5], "true_edges");
    s.learned_edges = parse_u64(c[6], "learned_edges");
    s.precision = parse_double(c[7], "precision");
    s.recall = parse_double(c[8], "recall");
    s.exact_recovery = flag(c[9], "exact_recovery");
    s.coupling_max_error = opt(c[10], "coupling_max_error");
    s.field_max_error = opt(c[11], "field_max_error");
    s.indeterminate_pairs = parse_u64(c[12], "indeterminate_pairs");
    s.indeterminate_edges = parse_u64(c[13], "indeterminate_edges");
    s.indeterminate_fields = parse_u64(c[14], "indeterminate_fields");
    s.time_generate = parse_double(c[15], "time_generate");
    s.time_simulate = parse_double(c[16], "time_simulate");
    s.time_structure = parse_double(c[17], "time_structure");
    s.time_params = parse_double(c[18], "time_params");
    r.seeds.push_back(std::move(s));
  }
  return r;
}

std::string report_plot_csv(const EvalReport& report) {
  std::string out = "seed,metric,value\n";
  for (const auto& s : report.seeds) {
    const auto row = [&](const char* metric, double v) {
      out += std::to_string(s.seed) + "," + metric + "," + fmt_double(v) + "\n";
    };
    row("precision", s.precision);
    row("recall", s.recall);
    row("exact_recovery", s.exact_recovery ? 1.0 : 0.0);
    if (s.coupling_max_error) row("coupling_max_error", *s.coupling_max_error);
    if (s.field_max_error) row("field_max_error", *s.field_max_error);
    row("time_simulate", s.time_simulate);
    row("time_structure", s.time_structure);
    row("time_params", s.time_params);
  }
  return out;
}

void write_report(const EvalReport& report, const fs::path& dir) {
  detail::write_file(dir / "report.json", report_to_json(report));
  detail::write_file(dir / "report.csv", report_to_csv(report));
  detail::write_file(dir / "plot.csv", report_plot_csv(report));
}

EvalReport load_report(const fs::path& path) {
  const auto text = detail::read_file(path);
  return path.extension() == ".csv" ? report_from_csv(text) : report_from_json(text);
}

}  // namespace isingflip::harness
