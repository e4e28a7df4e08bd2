// One PASS/FAIL line per criterion. Usage: isingflip_acceptance [--criterion N]...

#include <CLI11.hpp>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <random>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "isingflip/dynamics.hpp"
#include "isingflip/generator.hpp"
#include "isingflip/harness.hpp"
#include "isingflip/oracle.hpp"
#include "isingflip/params.hpp"
#include "isingflip/rng.hpp"
#include "isingflip/structure.hpp"

using namespace isingflip;
namespace orc = isingflip::oracle;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

std::string fmt(double v, int digits = 4) {
  std::ostringstream os;
  os.precision(digits);
  os << v;
  return os.str();
}

/// Runtime budget folded into the verdict.
Outcome within_budget(Outcome o, Clock::time_point t0, double budget) {
  const double s = seconds_since(t0);
  o.detail += " runtime=" + fmt(s, 3) + "s budget=" + fmt(budget, 4) + "s";
  o.pass = o.pass && s < budget;
  return o;
}

std::size_t workers() { return std::max(1U, std::thread::hardware_concurrency()); }

/// Random model with n <= 8 and width <= 2: random degree, signs and fields.
IsingModel small_model(std::mt19937_64& rng) {
  GeneratorSpec spec;
  spec.n = 2 + rng() % 7;
  spec.max_degree = std::min<std::size_t>(3, spec.n - 1);
  spec.coupling_min = 0.05;
  spec.coupling_max = 0.5;
  spec.signs = SignScheme::kRandom;
  spec.field_max = 0.4;
  spec.width = 2.0;
  return random_model(spec, rng());
}

Kernel random_metropolis(std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(0.1, 1.0);
  return Kernel::metropolis(u(rng), u(rng));
}

// --------------------------------------------------------------------------

Outcome criterion_1() {
  const auto t0 = Clock::now();
  std::mt19937_64 rng(1);
  double worst = 0.0;
  for (int m = 0; m < 50; ++m) {
    const auto model = small_model(rng);
    worst = std::max(worst, orc::check_detailed_balance(model, Kernel::glauber()));
    worst = std::max(worst, orc::check_detailed_balance(model, random_metropolis(rng)));
  }
  return within_budget({worst <= 1e-12, "max_violation=" + fmt(worst)}, t0, 10.0);
}

Outcome criterion_2() {
  const auto t0 = Clock::now();
  std::mt19937_64 rng(2);
  double worst = 0.0;
  for (int kind = 0; kind < 2; ++kind) {
    for (int k = 0; k < 1000; ++k) {
      const auto model = small_model(rng);
      const auto kernel = kind == 0 ? Kernel::glauber() : random_metropolis(rng);
      const auto x = SpinConfig::from_index(model.size(), rng() >> (64 - model.size()));
      const std::size_t i = rng() % model.size();
      worst = std::max(worst, std::fabs(orc::exact_kernel(model, kernel, x, i) -
                                        flip_probability(model, kernel, x, i)));
    }
  }
  return within_budget({worst <= 1e-12, "max_difference=" + fmt(worst)}, t0, 10.0);
}

Outcome criterion_3() {
  const auto t0 = Clock::now();
  GeneratorSpec spec;
  spec.n = 3;
  spec.max_degree = 2;
  spec.coupling_min = 0.1;
  spec.coupling_max = 0.6;
  spec.signs = SignScheme::kRandom;
  spec.field_max = 0.3;
  spec.width = 1.5;
  const auto model = random_model(spec, 3);
  const auto pi = orc::exact_distribution(model);
  int good = 0;
  double worst = 0.0;
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    SimConfig sim;
    sim.horizon = 5000.0;
    sim.seed = derive_seed(3, seed);
    const auto tr = simulate(model, Kernel::glauber(), sim).flips;
    const double tv =
        orc::total_variation(orc::occupation_distribution(tr, tr.horizon()), pi.probabilities());
    worst = std::max(worst, tv);
    good += tv <= 0.02 ? 1 : 0;
  }
  return within_budget({good >= 9, "seeds_within_0.02=" + std::to_string(good) +
                                       "/10 worst_tv=" + fmt(worst)},
                       t0, 60.0);
}

Outcome criterion_4() {
  const auto t0 = Clock::now();
  GeneratorSpec spec;
  spec.family = GraphFamily::kPath;
  spec.n = 4;
  const auto model = random_model(spec, 1);
  const auto start = SpinConfig::from_spins(std::vector<int>{1, -1, 1, -1});
  const auto pattern = FlipPattern::parse("ij");
  const std::size_t i = 1;
  const std::size_t j = 2;
  const std::uint64_t trials = 1000000;

  int ordered = 0;
  int small_within = 0;
  std::uint64_t hits_small = 0;
  std::ostringstream per_seed;
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    double dev[2];
    const double eps[2] = {0.1, 0.025};
    for (int k = 0; k < 2; ++k) {
      const auto mc = orc::mc_event_probability(model, Kernel::glauber(), start, i, j, pattern,
                                                 eps[k], trials, derive_seed(4, seed * 2 + k));
      const double lead = orc::event_leading_term(model, Kernel::glauber(), start, i, j,
                                                  pattern, eps[k]);
      dev[k] = std::fabs(mc.estimate / lead - 1.0);
      if (k == 1) hits_small += mc.hits;
    }
    ordered += dev[0] > dev[1] ? 1 : 0;
    small_within += dev[1] <= 0.15 ? 1 : 0;
    per_seed << " " << fmt(dev[0], 3) << "/" << fmt(dev[1], 3);
  }
  const double lead_small =
      orc::event_leading_term(model, Kernel::glauber(), start, i, j, pattern, 0.025);
  const double pooled =
      std::fabs(static_cast<double>(hits_small) / (10.0 * trials) / lead_small - 1.0);
  return within_budget({ordered >= 8 && pooled <= 0.15,
                        "seeds_ordered=" + std::to_string(ordered) +
                            "/10 pooled_dev_0.025=" + fmt(pooled) +
                            " seeds_dev_0.025_within_0.15=" + std::to_string(small_within) +
                            "/10 dev(0.1)/dev(0.025):" +
                            per_seed.str()},
                       t0, 300.0);
}

Outcome criterion_5() {
  const auto t0 = Clock::now();
  GeneratorSpec spec;
  spec.family = GraphFamily::kPath;
  spec.n = 4;
  spec.coupling_min = spec.coupling_max = 0.4;
  const auto model = random_model(spec, 1);
  const auto graph = dependency_graph(model);
  const CycleWindowConfig cfg{0.05, 2.0};
  const double windows = 2.0e5;
  const double horizon = cfg.spacing * windows + 8.0 * cfg.eps;

  int good = 0;
  double min_gap = std::numeric_limits<double>::infinity();
  std::int64_t nonzero = 0;
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    SimConfig sim;
    sim.horizon = horizon;
    sim.seed = derive_seed(5, seed);
    const auto tr = simulate(model, Kernel::glauber(), sim).flips;
    const auto acc = accumulate_cycle_statistics(tr, cfg, horizon, workers());
    double dense_floor = std::numeric_limits<double>::infinity();
    double null_top = -std::numeric_limits<double>::infinity();
    bool null_centered = true;
    for (std::size_t a = 0; a < 4; ++a) {
      for (std::size_t b = 0; b < 4; ++b) {
        if (a == b) continue;
        nonzero += acc.sum_squares(a, b);
        if (graph.has_edge(a, b)) {
          if (a < b) {
            dense_floor = std::min(dense_floor, std::max(acc.mean(a, b), acc.mean(b, a)));
          }
        } else {
          null_top = std::max(null_top, acc.mean(a, b));
          null_centered = null_centered &&
                          std::fabs(acc.mean(a, b)) <= 3.0 * acc.standard_error(a, b);
        }
      }
    }
    min_gap = std::min(min_gap, dense_floor - null_top);
    good += dense_floor > null_top && null_centered ? 1 : 0;
  }
  return within_budget({good >= 9, "seeds_separated=" + std::to_string(good) +
                                       "/10 min_gap=" + fmt(min_gap) +
                                       " nonzero_windows=" + std::to_string(nonzero)},
                       t0, 600.0);
}

Outcome criterion_6() {
  const auto t0 = Clock::now();
  harness::ExperimentConfig cfg;
  cfg.name = "criterion-6";
  GeneratorSpec spec;
  spec.n = 30;
  spec.max_degree = 3;
  spec.coupling_min = spec.coupling_max = 0.4;
  spec.signs = SignScheme::kRandom;
  spec.field_max = 0.2;
  spec.width = 2.0;
  spec.planted_matching = 2;
  cfg.generator = spec;
  cfg.sim.horizon = 2.2e5;
  cfg.structure.cycle.eps = CycleWindowConfig::default_eps(spec.max_degree);
  cfg.structure.t_bulk = 2.0e5;
  cfg.structure.t_match = 2.0e4;
  cfg.structure.jobs = 1;
  cfg.calibrate = true;
  cfg.calibration.horizon = 2.0e5;
  cfg.calibration.t_match = 2.0e4;
  cfg.learn_params = false;
  cfg.jobs = workers();
  cfg.seeds.clear();
  for (std::uint64_t s = 1; s <= 20; ++s) {
    cfg.seeds.push_back(s);
  }
  const auto report = harness::run_experiment(cfg);
  const double rate = report.exact_recovery_rate();
  std::string why;
  for (const auto& s : report.seeds) {
    if (!s.ok) {
      why = " first_error=\"" + s.error + "\"";
      break;
    }
  }
  return within_budget({rate >= 0.9, "exact_recovery=" + fmt(rate) + " tau_bulk=" +
                                         (report.tau_bulk ? fmt(*report.tau_bulk) : "-") + why},
                       t0, 1800.0);
}

Outcome criterion_7() {
  const auto t0 = Clock::now();
  const auto model = IsingModel::create(2, {{0, 1, 0.5}}, {0.0, 0.0});
  const double target = 0.462117;
  int good = 0;
  double worst = 0.0;
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    SimConfig sim;
    sim.horizon = 2.0e4;
    sim.seed = derive_seed(7, seed);
    const auto tr = simulate(model, Kernel::glauber(), sim).flips;
    const double d = conditional_difference(tr.occupation_time(0, 1, tr.horizon()), 0.01);
    const double err = std::isnan(d) ? std::numeric_limits<double>::infinity()
                                     : std::fabs(d - target);
    worst = std::max(worst, err);
    good += err <= 0.02 ? 1 : 0;
  }
  return within_budget({good >= 9, "seeds_within_0.02=" + std::to_string(good) +
                                       "/10 worst_error=" + fmt(worst)},
                       t0, 120.0);
}

Outcome criterion_8() {
  const auto t0 = Clock::now();
  std::mt19937_64 rng(8);
  double worst = 0.0;
  std::size_t checks = 0;
  for (int m = 0; m < 50; ++m) {
    const auto model = small_model(rng);
    const std::size_t n = model.size();
    const auto pi = orc::exact_distribution(model);
    for (const auto& kernel : {Kernel::glauber(), random_metropolis(rng)}) {
      for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < n; ++j) {
          if (i == j) continue;
          // every assignment of the remaining sites is a subcube
          for (std::uint64_t rest = 0; rest < (std::uint64_t{1} << n); ++rest) {
            if ((rest >> i & 1U) || (rest >> j & 1U)) continue;
            std::array<double, 4> rates{};
            for (std::size_t c = 0; c < 4; ++c) {
              std::uint64_t x = rest;
              x |= (c & 1U) ? std::uint64_t{1} << i : 0;
              x |= (c & 2U) ? std::uint64_t{1} << j : 0;
              rates[c] = orc::exact_kernel(pi, kernel, x, i);
            }
            worst = std::max(worst, std::fabs(coupling_from_rates(rates) - model.coupling(i, j)));
            ++checks;
          }
        }
      }
    }
  }
  return within_budget(
      {worst <= 1e-12, "subcubes=" + std::to_string(checks) + " max_error=" + fmt(worst)}, t0,
      10.0);
}

Outcome criterion_9() {
  const auto t0 = Clock::now();
  GeneratorSpec spec;
  spec.n = 10;
  spec.max_degree = 3;
  spec.coupling_min = spec.coupling_max = 0.4;
  spec.signs = SignScheme::kRandom;
  spec.field_max = 0.2;
  ParamConfig pc;
  pc.eps_rate = ParamConfig::default_eps(spec.max_degree);
  pc.spacing = 2.0;
  const double samples = 1.0e5;
  const double horizon = pc.spacing * samples + pc.eps_rate;
  const double fractions[3] = {1.0 / 16.0, 0.25, 1.0};

  int good = 0;
  double sum_error[3] = {0, 0, 0};
  double worst_a = 0.0;
  double worst_h = 0.0;
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    const auto model = random_model(spec, derive_seed(9, seed));
    SimConfig sim;
    sim.horizon = horizon;
    sim.seed = derive_seed(90, seed);
    const auto tr = simulate(model, Kernel::glauber(), sim).flips;
    const auto graph = dependency_graph(model);
    for (int k = 0; k < 3; ++k) {
      ParamConfig cfg = pc;
      cfg.t_param = horizon * fractions[k];
      const auto est = learn_parameters(tr, graph, cfg);
      const double ea = harness::coupling_max_error(model, est.couplings);
      const double eh = harness::field_max_error(model, est.fields);
      sum_error[k] += std::max(ea, eh);
      if (k == 2) {
        worst_a = std::max(worst_a, ea);
        worst_h = std::max(worst_h, eh);
        good += ea <= 0.05 && eh <= 0.05 ? 1 : 0;
      }
    }
  }
  const bool monotone = sum_error[0] > sum_error[1] && sum_error[1] > sum_error[2];
  return within_budget({good >= 8 && monotone,
                        "seeds_within_0.05=" + std::to_string(good) + "/10 worst_coupling=" +
                            fmt(worst_a) + " worst_field=" + fmt(worst_h) +
                            " mean_error(T/16,T/4,T)=" + fmt(sum_error[0] / 10) + "," +
                            fmt(sum_error[1] / 10) + "," + fmt(sum_error[2] / 10)},
                       t0, 1800.0);
}

Outcome criterion_10() {
  const auto t0 = Clock::now();
  double worst = 0.0;
  for (const auto& kernel : {Kernel::glauber(), Kernel::metropolis(1.0, 1.0),
                             Kernel::metropolis(1.0, 0.5), Kernel::metropolis(0.3, 0.8)}) {
    for (double width : {0.5, 1.0, 2.0}) {
      const KernelProfile profile(kernel, width);
      for (double alpha : {0.2, 0.5, 1.0, 2.0}) {
        const double closed = profile.z_star(alpha);
        worst = std::max(worst,
                         std::fabs(orc::z_star_numeric(profile, alpha) - closed) / closed);
      }
    }
  }
  return within_budget({worst <= 1e-10, "max_relative_error=" + fmt(worst)}, t0, 1.0);
}

Outcome criterion_11() {
  GeneratorSpec spec;
  spec.n = 100;
  spec.max_degree = 3;
  spec.signs = SignScheme::kRandom;
  spec.field_max = 0.2;
  const auto model = random_model(spec, 11);
  SimConfig sim;
  sim.horizon = 2.0e5;
  sim.seed = 11;
  const auto t0 = Clock::now();
  const auto r = simulate(model, Kernel::glauber(), sim);
  const double s = seconds_since(t0);
  const double rate = static_cast<double>(r.attempts) / s;
  return {rate >= 1.0e6, "attempts=" + std::to_string(r.attempts) +
                             " attempts_per_second=" + fmt(rate, 4) + " threshold=1e6"};
}

const std::vector<std::function<Outcome()>> kCriteria = {
    criterion_1, criterion_2, criterion_3, criterion_4,  criterion_5, criterion_6,
    criterion_7, criterion_8, criterion_9, criterion_10, criterion_11};

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Acceptance checks"};
  std::vector<int> selected;
  app.add_option("--criterion", selected, "Criterion number (repeatable); default all")
      ->check(CLI::Range(1, static_cast<int>(kCriteria.size())));
  CLI11_PARSE(app, argc, argv);
  if (selected.empty()) {
    for (int c = 1; c <= static_cast<int>(kCriteria.size()); ++c) {
      selected.push_back(c);
    }
  }
  int failed = 0;
  for (int c : selected) {
    Outcome o;
    try {
      o = kCriteria[static_cast<std::size_t>(c - 1)]();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    std::printf("criterion %d: %s %s\n", c, o.pass ? "PASS" : "FAIL", o.detail.c_str());
    std::fflush(stdout);
    failed += o.pass ? 0 : 1;
  }
  return failed == 0 ? 0 : 1;
}
