#include <gtest/gtest.h>

#include <cmath>

#include "isingflip/dynamics.hpp"
#include "isingflip/error.hpp"
#include "isingflip/params.hpp"

using namespace isingflip;

namespace {

/// Exact rates of site i for a lone edge of strength a, ordered as in Subcube.
std::array<double, 4> exact_rates(const Kernel& k, double a) {
  std::array<double, 4> r{};
  const int xi[4] = {-1, 1, -1, 1};
  const int xj[4] = {-1, -1, 1, 1};
  for (std::size_t c = 0; c < 4; ++c) {
    r[c] = k.flip_probability(xi[c], a * xj[c]);
  }
  return r;
}

FlipTrace run(const IsingModel& m, double horizon, std::uint64_t seed) {
  SimConfig sim;
  sim.horizon = horizon;
  sim.seed = seed;
  return simulate(m, Kernel::glauber(), sim).flips;
}

}  // namespace

TEST(NeighborhoodCounts, KeysAndOrder) {
  NeighborhoodCounts c(3, {1, 5});
  EXPECT_EQ(c.width(), 3u);
  EXPECT_EQ(c.bit_of(1), 1u);
  EXPECT_EQ(c.bit_of(5), 2u);
  EXPECT_FALSE(c.bit_of(4).has_value());
  c.record(5, true);
  c.record(5, false);
  c.record(2, false);
  EXPECT_EQ(c.at(5).occupancy, 2u);
  EXPECT_EQ(c.at(5).flips, 1u);
  EXPECT_EQ(c.total(), 3u);
  EXPECT_THROW(c.at(8), Error);
  std::vector<std::uint64_t> seen;
  c.for_each([&](std::uint64_t k, const auto&) { seen.push_back(k); });
  EXPECT_EQ(seen, (std::vector<std::uint64_t>{2, 5}));
  EXPECT_THROW(NeighborhoodCounts(1, {1}), Error);
  EXPECT_THROW(NeighborhoodCounts(0, {3, 2}), Error);
}

TEST(NeighborhoodCounts, SparseBeyondDenseLimit) {
  std::vector<std::uint32_t> nb;
  for (std::uint32_t s = 1; s <= 25; ++s) {
    nb.push_back(s);
  }
  NeighborhoodCounts c(0, nb);
  const std::uint64_t key = (std::uint64_t{1} << 25) | 1U;
  c.record(key, true);
  c.record(4, false);
  EXPECT_EQ(c.at(key).flips, 1u);
  EXPECT_EQ(c.at(6).occupancy, 0u);
  std::vector<std::uint64_t> seen;
  c.for_each([&](std::uint64_t k, const auto&) { seen.push_back(k); });
  EXPECT_EQ(seen, (std::vector<std::uint64_t>{4, key}));
}

TEST(RateEstimate, Examples) {
  NeighborhoodCounts c(0, {});
  for (int k = 0; k < 1000; ++k) {
    c.record(1, k < 36);
  }
  EXPECT_NEAR(rate_estimate(c, 1, 0.05), 0.72, 1e-12);
  EXPECT_THROW(rate_estimate(c, 0, 0.05), Error);
}

TEST(SelectSubcube, PicksLargestMinimumAndBreaksTies) {
  NeighborhoodCounts c(0, {1, 2});
  // y indexes x_2; both subcubes equally filled
  for (std::uint64_t key = 0; key < 8; ++key) {
    for (int k = 0; k < 10; ++k) {
      c.record(key, false);
    }
  }
  const auto tie = select_subcube(c, 1, 5);
  EXPECT_EQ(tie.outside, 0u);
  EXPECT_EQ(tie.keys, (std::array<std::uint64_t, 4>{0, 1, 2, 3}));
  EXPECT_EQ(tie.min_count, 10u);

  for (std::uint64_t key = 4; key < 8; ++key) {
    c.record(key, false);
  }
  const auto upper = select_subcube(c, 1, 5);
  EXPECT_EQ(upper.outside, 1u);
  EXPECT_EQ(upper.keys, (std::array<std::uint64_t, 4>{4, 5, 6, 7}));

  const auto other = select_subcube(c, 2, 5);
  EXPECT_EQ(other.keys, (std::array<std::uint64_t, 4>{0, 1, 4, 5}));

  EXPECT_THROW(select_subcube(c, 1, 50), Error);
  EXPECT_THROW(select_subcube(c, 3, 5), Error);
}

TEST(CouplingFromRates, ExactRatesRecoverCoupling) {
  for (const auto& k : {Kernel::glauber(), Kernel::metropolis(1.0, 0.6)}) {
    for (double a : {0.3, -0.7, 1.1}) {
      EXPECT_NEAR(coupling_from_rates(exact_rates(k, a)), a, 1e-12);
    }
    const auto r = exact_rates(k, 0.3);
    EXPECT_NEAR((r[2] * r[1]) / (r[3] * r[0]), std::exp(1.2), 1e-12);
  }
}

TEST(CollectCounts, SampleTimesAndKeys) {
  // site 0 flips at 1.01 and again at 3.5; site 1 is -1 throughout
  const auto tr = FlipTrace(SpinConfig::from_spins(std::vector<int>{1, -1}), 10.0,
                            {{1.01, 0}, {3.5, 0}});
  ParamConfig cfg;
  cfg.eps_rate = 0.05;
  cfg.spacing = 1.0;
  const std::vector<std::uint32_t> nb{1};
  const auto c = collect_counts(tr, 0, nb, cfg);
  // samples at 1..9
  EXPECT_EQ(c.total(), 9u);
  EXPECT_EQ(c.at(1).occupancy, 7u);  // t = 1, 4..9
  EXPECT_EQ(c.at(1).flips, 1u);
  EXPECT_EQ(c.at(0).occupancy, 2u);
  EXPECT_EQ(c.at(0).flips, 0u);

  const auto still = FlipTrace(SpinConfig(2, 1), 10.0, {});
  const auto s = collect_counts(still, 1, std::vector<std::uint32_t>{0}, cfg);
  EXPECT_EQ(s.at(3).occupancy, 9u);
  EXPECT_EQ(s.at(3).flips, 0u);

  cfg.t_param = 20.0;
  EXPECT_THROW(collect_counts(still, 0, nb, cfg), Error);
  cfg.t_param = 0.5;
  EXPECT_THROW(collect_counts(still, 0, nb, cfg), Error);
}

TEST(LearnParameters, SingleEdge) {
  const auto model = IsingModel::create(2, {{0, 1, 0.3}}, {0.0, 0.0});
  const auto tr = run(model, 4.0e5, 21);
  ParamConfig cfg;
  const auto r = learn_parameters(tr, dependency_graph(model), cfg);
  ASSERT_EQ(r.couplings.size(), 1u);
  EXPECT_NEAR(r.couplings[0].value, 0.3, 0.05);
  const auto& e = r.report.edges[0];
  ASSERT_TRUE(e.forward && e.backward);
  EXPECT_GT(e.standard_error, 0.0);
  EXPECT_LT(e.standard_error, 0.025);
  for (double h : r.fields) {
    EXPECT_NEAR(h, 0.0, 0.05);
  }
}

TEST(LearnParameters, FieldOnly) {
  const auto model = IsingModel::create(1, {}, {0.4});
  const auto tr = run(model, 2.0e5, 5);
  const auto r = learn_parameters(tr, Graph(1), ParamConfig{});
  EXPECT_TRUE(r.couplings.empty());
  EXPECT_NEAR(r.fields[0], 0.4, 0.05);
  EXPECT_EQ(r.report.indeterminate_fields, 0u);
}

TEST(LearnParameters, EmptyGraph) {
  const auto tr = run(IsingModel::zero(4), 4.0e5, 2);
  const auto r = learn_parameters(tr, Graph(4), ParamConfig{});
  EXPECT_TRUE(r.couplings.empty());
  ASSERT_EQ(r.fields.size(), 4u);
  for (double h : r.fields) {
    EXPECT_NEAR(h, 0.0, 0.05);
  }
  EXPECT_EQ(r.model(4).couplings().size(), 0u);
}

TEST(LearnParameters, IndeterminateIsFlaggedNotFatal) {
  const auto tr = FlipTrace(SpinConfig(2, 1), 100.0, {});
  const auto g = Graph::from_edges(2, std::vector<Edge>{{0, 1}});
  const auto r = learn_parameters(tr, g, ParamConfig{});
  EXPECT_TRUE(r.couplings.empty());
  EXPECT_EQ(r.report.indeterminate_edges, 1u);
  EXPECT_EQ(r.report.indeterminate_fields, 2u);
  EXPECT_EQ(r.fields, (std::vector<double>{0.0, 0.0}));
  EXPECT_FALSE(r.report.edges[0].errors.empty());
}

TEST(ParamConfig, Validation) {
  EXPECT_DOUBLE_EQ(ParamConfig::default_eps(4), 0.05);
  EXPECT_DOUBLE_EQ(ParamConfig::default_eps(20), 0.025);
  ParamConfig c;
  c.eps_rate = 3.0;
  EXPECT_THROW(c.validate(), Error);
  c = {};
  c.min_samples = 0;
  EXPECT_THROW(c.validate(), Error);
}
