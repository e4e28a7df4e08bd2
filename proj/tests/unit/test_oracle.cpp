#include <gtest/gtest.h>

#include <cmath>

#include "isingflip/error.hpp"
#include "isingflip/generator.hpp"
#include "isingflip/oracle.hpp"

using namespace isingflip;
namespace orc = isingflip::oracle;

namespace {

IsingModel mixed_model() {
  return IsingModel::create(4, {{0, 1, 0.5}, {1, 2, -0.3}, {2, 3, 0.8}, {0, 3, 0.2}},
                            {0.1, -0.4, 0.0, 0.25});
}

}  // namespace

TEST(ExactDistribution, Examples) {
  const auto z = orc::exact_distribution(IsingModel::zero(3));
  for (double p : z.probabilities()) {
    EXPECT_DOUBLE_EQ(p, 0.125);
  }
  const auto m = IsingModel::create(2, {{0, 1, 0.4}}, {0.0, 0.0});
  const auto pm = orc::pair_marginal(m, 0, 1);
  EXPECT_NEAR(pm[0] + pm[3], 0.6899744811276125, 1e-12);

  const auto half = IsingModel::create(2, {{0, 1, 0.5}}, {0.0, 0.0});
  const auto ph = orc::pair_marginal(half, 0, 1);
  EXPECT_NEAR(ph[0], 0.36552928931500245, 1e-12);
  EXPECT_NEAR(ph[1], 0.13447071068499755, 1e-12);
  EXPECT_NEAR(ph[2], ph[1], 1e-15);

  double total = 0.0;
  const auto mixed = orc::exact_distribution(mixed_model());
  for (double p : mixed.probabilities()) {
    total += p;
  }
  EXPECT_NEAR(total, 1.0, 1e-14);
  EXPECT_THROW(orc::exact_distribution(IsingModel::zero(21)), Error);
}

TEST(ExactDistribution, LargeParametersStayFinite) {
  const auto m = IsingModel::create(3, {{0, 1, 40.0}, {1, 2, 40.0}}, {30.0, 0.0, 0.0});
  const auto pi = orc::exact_distribution(m);
  EXPECT_NEAR(pi[7], 1.0, 1e-12);
  for (double p : pi.probabilities()) {
    EXPECT_TRUE(std::isfinite(p));
  }
}

TEST(DetailedBalance, BothKernelsHold) {
  const auto m = mixed_model();
  EXPECT_LT(orc::check_detailed_balance(m, Kernel::glauber()), 1e-12);
  EXPECT_LT(orc::check_detailed_balance(m, Kernel::metropolis(0.8, 0.3)), 1e-12);
}

TEST(DetailedBalance, CorruptedKernelIsCaught) {
  const auto m = mixed_model();
  const auto bad = [&](std::uint64_t x, std::size_t i) {
    const double p = flip_probability(m, Kernel::glauber(), SpinConfig::from_index(4, x), i);
    return p * p;
  };
  const double v = orc::check_detailed_balance(m, bad);
  EXPECT_GT(v, 1e-3);
  EXPECT_NEAR(v, 0.02659432761169616, 1e-12);
}

TEST(KernelEquivalence, DynamicsMatchesDistribution) {
  const auto m = mixed_model();
  const auto pi = orc::exact_distribution(m);
  for (const auto& k : {Kernel::glauber(), Kernel::metropolis(1.0, 1.0),
                        Kernel::metropolis(0.4, 0.9)}) {
    for (std::uint64_t x = 0; x < 16; ++x) {
      for (std::size_t i = 0; i < 4; ++i) {
        EXPECT_NEAR(orc::exact_kernel(pi, k, x, i),
                    flip_probability(m, k, SpinConfig::from_index(4, x), i), 1e-12);
      }
    }
  }
}

TEST(ZStar, NumericMatchesClosedForm) {
  const KernelProfile g(Kernel::glauber(), 1.0);
  EXPECT_NEAR(orc::z_star_numeric(g, 1.0), 0.6065306597126334, 1e-9);
  EXPECT_NEAR(orc::z_star_numeric(g, 2.0 * std::log(2.0)), 0.5, 1e-9);
  const KernelProfile m(Kernel::metropolis(1.0, 0.5), 1.0);
  EXPECT_NEAR(orc::z_star_numeric(m, 1.0), 1.2130613194252668, 1e-9);
  for (double a : {0.1, 0.7, 3.0}) {
    EXPECT_NEAR(orc::z_star_numeric(g, a), g.z_star(a), 1e-9);
    EXPECT_NEAR(orc::z_star_numeric(m, a), m.z_star(a), 1e-9);
  }
  EXPECT_THROW(orc::z_star_numeric(g, 0.0), Error);
}

TEST(EventProbability, SingleIntervalClosedForm) {
  // zero model, Glauber: each site flips at rate 1/2
  const auto z = IsingModel::zero(2);
  const double eps = 0.05;
  const auto r = orc::mc_event_probability(z, Kernel::glauber(), SpinConfig(2, 1), 0, 1,
                                           FlipPattern::parse("i"), eps, 200000, 3);
  const double exact = 0.5 * eps * std::exp(-eps);
  EXPECT_NEAR(exact, 0.02378073, 1e-8);
  EXPECT_NEAR(r.estimate, exact, 4.0 * r.standard_error);
  EXPECT_EQ(r.samples, 200000u);
}

TEST(EventProbability, LeadingTerm) {
  const auto z = IsingModel::zero(2);
  const auto p = FlipPattern::parse(kCyclePositive);
  EXPECT_NEAR(orc::event_leading_term(z, Kernel::glauber(), SpinConfig(2, 1), 0, 1, p, 0.1),
              std::pow(0.05, 8), 1e-22);
  const auto m = IsingModel::create(2, {{0, 1, 0.5}}, {0.0, 0.0});
  // ++ -> -+ -> ++ -> +- -> ++ ...
  const double a = 1.0 / (1.0 + std::exp(1.0));
  const double b = 1.0 / (1.0 + std::exp(-1.0));
  EXPECT_NEAR(orc::event_leading_term(m, Kernel::glauber(), SpinConfig(2, 1), 0, 1,
                                      FlipPattern::parse("iijj"), 1.0),
              a * b * a * b, 1e-14);
}

TEST(SpectralGap, Examples) {
  const auto z = IsingModel::zero(3);
  const std::vector<std::uint32_t> one{0};
  EXPECT_NEAR(orc::spectral_gap_numeric(z, one, Kernel::glauber()), 1.0, 1e-12);
  EXPECT_NEAR(orc::spectral_gap_numeric(z, one, Kernel::metropolis(1.0, 1.0)), 2.0, 1e-12);

  // independent sites: gap of the product is the smaller gap
  const auto f = IsingModel::create(2, {}, {0.3, -0.5});
  const auto k = Kernel::metropolis(1.0, 1.0);
  const double g0 = orc::spectral_gap_numeric(f, std::vector<std::uint32_t>{0}, k);
  const double g1 = orc::spectral_gap_numeric(f, std::vector<std::uint32_t>{1}, k);
  EXPECT_NEAR(g0, 1.0 + std::exp(-0.6), 1e-12);
  EXPECT_NEAR(orc::spectral_gap_numeric(f, std::vector<std::uint32_t>{0, 1}, k),
              std::min(g0, g1), 1e-12);

  const std::vector<std::uint32_t> tri{0, 1, 2};
  EXPECT_GT(orc::spectral_gap_numeric(mixed_model(), tri, Kernel::glauber()), 0.0);
  EXPECT_THROW(orc::spectral_gap_numeric(mixed_model(), std::vector<std::uint32_t>{0, 1, 2, 3},
                                         Kernel::glauber()),
               Error);
}

TEST(Occupation, ConvergesToStationary) {
  const auto m = mixed_model();
  SimConfig sim;
  sim.horizon = 4.0e4;
  sim.seed = 10;
  const auto tr = simulate(m, Kernel::glauber(), sim).flips;
  const auto occ = orc::occupation_distribution(tr, tr.horizon());
  const auto pi = orc::exact_distribution(m);
  EXPECT_LT(orc::total_variation(occ, pi.probabilities()), 0.02);

  const auto fixed = FlipTrace(SpinConfig(1, 1), 4.0, {{1.0, 0}});
  EXPECT_EQ(orc::occupation_distribution(fixed, 4.0), (std::vector<double>{0.75, 0.25}));
}
