#include <gtest/gtest.h>

#include <cmath>

#include "isingflip/dynamics.hpp"
#include "isingflip/error.hpp"
#include "isingflip/generator.hpp"
#include "isingflip/rng.hpp"

using namespace isingflip;

TEST(LocalField, Examples) {
  const auto m = IsingModel::create(2, {{0, 1, 0.5}}, {0.0, 0.0});
  EXPECT_DOUBLE_EQ(local_field(m, SpinConfig::from_spins(std::vector<int>{-1, 1}), 0), 0.5);
  const auto z = IsingModel::zero(3);
  EXPECT_EQ(local_field(z, SpinConfig(3, -1), 2), 0.0);
  const auto h = IsingModel::create(2, {{0, 1, 0.5}}, {-0.2, 0.0});
  EXPECT_NEAR(local_field(h, SpinConfig::from_spins(std::vector<int>{1, -1}), 0), -0.7, 1e-15);
}

TEST(FlipProbability, Examples) {
  const auto z = IsingModel::zero(3);
  for (std::uint64_t x = 0; x < 8; ++x) {
    for (std::size_t i = 0; i < 3; ++i) {
      const auto c = SpinConfig::from_index(3, x);
      EXPECT_EQ(flip_probability(z, Kernel::glauber(), c, i), 0.5);
      EXPECT_EQ(flip_probability(z, Kernel::metropolis(1, 1), c, i), 1.0);
    }
  }
  const auto m = IsingModel::create(2, {{0, 1, 0.5}}, {0.0, 0.0});
  EXPECT_NEAR(flip_probability(m, Kernel::glauber(), SpinConfig::from_spins(std::vector<int>{-1, 1}), 0),
              0.7310585786300049, 1e-12);
}

TEST(FlipProbability, MetropolisRates) {
  const auto k = Kernel::metropolis(1.0, 0.5);
  EXPECT_DOUBLE_EQ(k.flip_probability(+1, 0.0), 0.5);
  EXPECT_DOUBLE_EQ(k.flip_probability(-1, 0.0), 0.5);
  EXPECT_DOUBLE_EQ(k.flip_probability(+1, -1.0), 0.5);
  EXPECT_NEAR(k.flip_probability(-1, -1.0), 0.5 * std::exp(-2.0), 1e-15);
  EXPECT_THROW(Kernel::metropolis(0.0, 1.0), Error);
  EXPECT_THROW(Kernel::metropolis(1.5, 1.0), Error);
}

TEST(KernelProfile, ClosedForms) {
  const KernelProfile g(Kernel::glauber(), 1.0);
  EXPECT_NEAR(g.kappa(), 0.06766764161830635, 1e-12);
  EXPECT_EQ(g.gamma(), 4.0);
  EXPECT_NEAR(g.z_star(1.0), std::exp(-0.5), 1e-15);
  EXPECT_NEAR(g.g(2.0), g.f(2.0) * g.f(2.0) / 2.0, 1e-15);
  EXPECT_DOUBLE_EQ(g.peak(), 1.0);

  const KernelProfile m(Kernel::metropolis(1.0, 0.5), 1.0);
  EXPECT_NEAR(m.z_star(1.0), 2.0 * std::exp(-0.5), 1e-12);
  EXPECT_NEAR(m.kappa(), 0.5 * std::exp(-2.0), 1e-15);
  EXPECT_NEAR(m.g(3.0), m.f(3.0) * m.f(3.0) / 3.0, 1e-15);

  const auto bounds = ModelBounds{3, 1.0, 0.4};
  EXPECT_EQ(kernel_profile(Kernel::glauber(), bounds).kappa(), g.kappa());
}

TEST(Rng, Deterministic) {
  Rng a(42);
  Rng b(42);
  for (int k = 0; k < 100; ++k) {
    ASSERT_EQ(a.next_u64(), b.next_u64());
  }
  Rng r(7);
  for (int k = 0; k < 10000; ++k) {
    const double u = r.uniform();
    ASSERT_GT(u, 0.0);
    ASSERT_LT(u, 1.0);
    ASSERT_LT(r.below(7), 7u);
  }
  EXPECT_NE(derive_seed(1, 0), derive_seed(1, 1));
  EXPECT_NE(derive_seed(1, 0), derive_seed(2, 0));
}

TEST(Simulate, BitIdenticalForSameInputs) {
  GeneratorSpec spec;
  spec.n = 12;
  spec.signs = SignScheme::kRandom;
  spec.field_max = 0.3;
  const auto model = random_model(spec, 3);
  SimConfig cfg;
  cfg.horizon = 200;
  cfg.seed = 99;
  cfg.initial = InitialKind::kSeededUniform;
  cfg.record_full = true;
  const auto a = simulate(model, Kernel::glauber(), cfg);
  const auto b = simulate(model, Kernel::glauber(), cfg);
  EXPECT_EQ(a.flips, b.flips);
  EXPECT_EQ(a.full->attempts, b.full->attempts);
  cfg.seed = 100;
  EXPECT_FALSE(simulate(model, Kernel::glauber(), cfg).flips == a.flips);
}

TEST(Simulate, FlipTraceIsFilteredFullTrace) {
  GeneratorSpec spec;
  spec.n = 6;
  const auto model = random_model(spec, 5);
  SimConfig cfg;
  cfg.horizon = 300;
  cfg.seed = 1;
  cfg.record_full = true;
  const auto r = simulate(model, Kernel::metropolis(1.0, 0.7), cfg);
  ASSERT_TRUE(r.full.has_value());
  EXPECT_EQ(r.attempts, r.full->attempts.size());
  EXPECT_EQ(flips_of(*r.full), r.flips);
  std::size_t flipped = 0;
  double last = 0.0;
  for (const auto& a : r.full->attempts) {
    EXPECT_GT(a.time, last);
    last = a.time;
    flipped += a.flipped ? 1 : 0;
  }
  EXPECT_EQ(flipped, r.flips.events().size());
  // attempts are a rate-n Poisson stream
  const double expected = 6.0 * 300.0;
  EXPECT_NEAR(static_cast<double>(r.attempts), expected, 5.0 * std::sqrt(expected));
}

TEST(Simulate, ZeroAttemptProbabilityForASite) {
  // P(site 0 never attempted in [0, 1]) = e^-1
  const auto model = IsingModel::zero(3);
  SimConfig cfg;
  cfg.horizon = 1.0;
  cfg.record_full = true;
  const int runs = 20000;
  int silent = 0;
  for (int k = 0; k < runs; ++k) {
    cfg.seed = derive_seed(17, static_cast<std::uint64_t>(k));
    const auto r = simulate(model, Kernel::glauber(), cfg);
    bool touched = false;
    for (const auto& a : r.full->attempts) {
      touched = touched || a.site == 0;
    }
    silent += touched ? 0 : 1;
  }
  const double p = std::exp(-1.0);
  const double se = std::sqrt(p * (1 - p) / runs);
  EXPECT_NEAR(static_cast<double>(silent) / runs, p, 4.0 * se);
}

TEST(Simulate, InitialConfigurations) {
  SimConfig cfg;
  cfg.horizon = 1.0;
  EXPECT_EQ(initial_configuration(5, cfg), SpinConfig(5, 1));
  cfg.initial = InitialKind::kExplicit;
  cfg.initial_config = SpinConfig::from_spins(std::vector<int>{1, -1, 1});
  EXPECT_EQ(initial_configuration(3, cfg), cfg.initial_config);
  EXPECT_THROW(initial_configuration(4, cfg), Error);
  cfg.initial = InitialKind::kSeededUniform;
  cfg.seed = 4;
  EXPECT_EQ(initial_configuration(64, cfg), initial_configuration(64, cfg));
}

TEST(Simulator, ReuseAcrossRuns) {
  const auto model = IsingModel::create(2, {{0, 1, 0.5}}, {0.0, 0.1});
  Simulator sim(model, Kernel::glauber(), 8);
  std::size_t calls = 0;
  sim.run_until(10.0, [&](double t, std::uint32_t site, bool) {
    EXPECT_LE(t, 10.0);
    EXPECT_LT(site, 2u);
    ++calls;
  });
  EXPECT_EQ(sim.time(), 10.0);
  EXPECT_GT(calls, 0u);
  sim.reset(SpinConfig(2, -1), 0.0);
  EXPECT_EQ(sim.config(), SpinConfig(2, -1));
  EXPECT_EQ(sim.time(), 0.0);
}
