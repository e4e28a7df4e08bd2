#include "isingflip/oracle.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>

#include "isingflip/error.hpp"
#include "isingflip/simd/kernels.hpp"

namespace isingflip::oracle {

namespace {

void require_sites(std::size_t n, std::size_t limit, const char* what) {
  if (n > limit) {
    fail(ErrorKind::kTooLarge, std::string(what) + " supports at most " + std::to_string(limit) +
                                   " sites, model has " + std::to_string(n));
  }
}

/// Neumaier-compensated sum.
double stable_sum(std::span<const double> v) {
  double sum = 0.0;
  double comp = 0.0;
  for (double x : v) {
    const double t = sum + x;
    comp += std::fabs(sum) >= std::fabs(x) ? (sum - t) + x : (x - t) + sum;
    sum = t;
  }
  return sum + comp;
}

double kernel_from_pi(const Kernel& kernel, bool plus, double pi_x, double pi_y) {
  if (kernel.is_glauber()) {
    return pi_y / (pi_x + pi_y);
  }
  const double stay = plus ? kernel.r_plus() : kernel.r_minus();
  const double away = plus ? kernel.r_minus() : kernel.r_plus();
  return away * std::min(stay * pi_y / (away * pi_x), 1.0);
}

}  // namespace

ExactDistribution exact_distribution(const IsingModel& model) {
  const std::size_t n = model.size();
  require_sites(n, kMaxDistributionSites, "exact_distribution");
  std::vector<double> w(std::size_t{1} << n);
  simd::log_weights(n, model.couplings(), model.fields(), 0, w);
  const double top = *std::max_element(w.begin(), w.end());
  for (auto& x : w) {
    x = std::exp(x - top);
  }
  const double z = stable_sum(w);
  for (auto& x : w) {
    x /= z;
  }
  return ExactDistribution(n, std::move(w));
}

double exact_kernel(const ExactDistribution& pi, const Kernel& kernel, std::uint64_t index,
                    std::size_t i) {
  if (i >= pi.size()) {
    fail(ErrorKind::kOutOfRange, "site outside distribution");
  }
  const std::uint64_t flipped = index ^ (std::uint64_t{1} << i);
  return kernel_from_pi(kernel, ((index >> i) & 1U) != 0, pi[index], pi[flipped]);
}

double exact_kernel(const IsingModel& model, const Kernel& kernel, const SpinConfig& x,
                    std::size_t i) {
  if (x.size() != model.size()) {
    fail(ErrorKind::kInvalidArgument, "configuration size differs from the model");
  }
  return exact_kernel(exact_distribution(model), kernel, x.index(), i);
}

double check_detailed_balance(const IsingModel& model, const FlipRule& rule) {
  const std::size_t n = model.size();
  require_sites(n, kMaxBalanceSites, "check_detailed_balance");
  const auto pi = exact_distribution(model);
  double worst = 0.0;
  for (std::uint64_t x = 0; x < (std::uint64_t{1} << n); ++x) {
    for (std::size_t i = 0; i < n; ++i) {
      const std::uint64_t y = x ^ (std::uint64_t{1} << i);
      if (y < x) {
        continue;
      }
      worst = std::max(worst, std::fabs(pi[x] * rule(x, i) - pi[y] * rule(y, i)));
    }
  }
  return worst;
}

double check_detailed_balance(const IsingModel& model, const Kernel& kernel) {
  const std::size_t n = model.size();
  return check_detailed_balance(model, [&](std::uint64_t x, std::size_t i) {
    return flip_probability(model, kernel, SpinConfig::from_index(n, x), i);
  });
}

std::array<double, 4> pair_marginal(const ExactDistribution& pi, std::size_t i, std::size_t j) {
  if (i >= pi.size() || j >= pi.size() || i == j) {
    fail(ErrorKind::kOutOfRange, "pair_marginal needs two distinct sites of the model");
  }
  std::array<double, 4> out{};
  const auto p = pi.probabilities();
  for (std::uint64_t x = 0; x < p.size(); ++x) {
    const bool pi_plus = ((x >> i) & 1U) != 0;
    const bool pj_plus = ((x >> j) & 1U) != 0;
    out[(pi_plus ? 0U : 2U) + (pj_plus ? 0U : 1U)] += p[x];
  }
  return out;
}

std::array<double, 4> pair_marginal(const IsingModel& model, std::size_t i, std::size_t j) {
  return pair_marginal(exact_distribution(model), i, j);
}

double z_star_numeric(const KernelProfile& profile, double alpha) {
  if (!(alpha > 0.0) || !std::isfinite(alpha)) {
    fail(ErrorKind::kInvalidArgument, "alpha must be positive");
  }
  const double scale = std::exp(alpha);
  const auto h = [&](double z) { return profile.g(z) - profile.g(scale * z); };
  // g rises up to its peak and falls after it, so the root sits in [peak e^-alpha, peak]
  double lo = profile.peak() / scale;
  double hi = profile.peak();
  if (!(h(lo) < 0.0) || !(h(hi) > 0.0)) {
    fail(ErrorKind::kInfeasible, "z* bracket does not straddle a sign change");
  }
  for (int iter = 0; iter < 400 && hi - lo > 0.0; ++iter) {
    const double mid = 0.5 * (lo + hi);
    if (mid <= lo || mid >= hi) {
      break;
    }
    (h(mid) < 0.0 ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

McEstimate mc_event_probability(const IsingModel& model, const Kernel& kernel,
                                const SpinConfig& start, std::size_t i, std::size_t j,
                                const FlipPattern& pattern, double eps,
                                std::uint64_t samples, std::uint64_t seed) {
  if (i >= model.size() || j >= model.size() || i == j) {
    fail(ErrorKind::kInvalidArgument, "pattern sites must be two distinct model sites");
  }
  if (!(eps > 0.0) || samples == 0) {
    fail(ErrorKind::kInvalidArgument, "eps and samples must be positive");
  }
  Simulator sim(model, kernel, seed);
  std::uint64_t hits = 0;
  for (std::uint64_t s = 0; s < samples; ++s) {
    sim.reset(start, 0.0);
    bool ok = true;
    for (std::size_t k = 0; k < pattern.size() && ok; ++k) {
      const std::size_t active = pattern.first_at(k) ? i : j;
      const std::size_t quiet = pattern.first_at(k) ? j : i;
      std::size_t active_flips = 0;
      std::size_t quiet_flips = 0;
      sim.run_until(static_cast<double>(k + 1) * eps, [&](double, std::uint32_t site, bool flipped) {
        if (flipped) {
          active_flips += site == active ? 1 : 0;
          quiet_flips += site == quiet ? 1 : 0;
        }
      });
      ok = active_flips == 1 && quiet_flips == 0;
    }
    hits += ok ? 1 : 0;
  }
  McEstimate out;
  out.hits = hits;
  out.samples = samples;
  out.estimate = static_cast<double>(hits) / static_cast<double>(samples);
  out.standard_error =
      std::sqrt(out.estimate * (1.0 - out.estimate) / static_cast<double>(samples));
  return out;
}

double event_leading_term(const IsingModel& model, const Kernel& kernel,
                          const SpinConfig& start, std::size_t i, std::size_t j,
                          const FlipPattern& pattern, double eps) {
  if (start.size() != model.size() || i >= model.size() || j >= model.size()) {
    fail(ErrorKind::kInvalidArgument, "start configuration or sites do not fit the model");
  }
  const auto pi = exact_distribution(model);
  std::uint64_t x = start.index();
  double term = 1.0;
  for (std::size_t k = 0; k < pattern.size(); ++k) {
    const std::size_t site = pattern.first_at(k) ? i : j;
    term *= eps * exact_kernel(pi, kernel, x, site);
    x ^= std::uint64_t{1} << site;
  }
  return term;
}

double spectral_gap_numeric(const IsingModel& model, std::span<const std::uint32_t> component,
                            const Kernel& kernel) {
  if (component.empty()) {
    fail(ErrorKind::kInvalidArgument, "component must not be empty");
  }
  require_sites(component.size(), kMaxSpectralSites, "spectral_gap_numeric");
  const std::size_t c = component.size();
  std::vector<Coupling> inner;
  std::vector<double> fields;
  for (std::size_t a = 0; a < c; ++a) {
    if (component[a] >= model.size()) {
      fail(ErrorKind::kOutOfRange, "component site outside model");
    }
    fields.push_back(model.field(component[a]));
    for (std::size_t b = a + 1; b < c; ++b) {
      const double v = model.coupling(component[a], component[b]);
      if (v != 0.0) {
        inner.push_back({static_cast<std::uint32_t>(a), static_cast<std::uint32_t>(b), v});
      }
    }
  }
  const auto sub = IsingModel::create(c, std::move(inner), std::move(fields));
  const auto pi = exact_distribution(sub);
  const std::size_t states = std::size_t{1} << c;
  Eigen::MatrixXd sym = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(states),
                                              static_cast<Eigen::Index>(states));
  for (std::uint64_t x = 0; x < states; ++x) {
    double out_rate = 0.0;
    for (std::size_t i = 0; i < c; ++i) {
      const std::uint64_t y = x ^ (std::uint64_t{1} << i);
      const double rate = exact_kernel(pi, kernel, x, i);
      out_rate += rate;
      // D^{1/2} L D^{-1/2}, symmetric by detailed balance
      sym(static_cast<Eigen::Index>(x), static_cast<Eigen::Index>(y)) =
          -rate * std::sqrt(pi[x] / pi[y]);
    }
    sym(static_cast<Eigen::Index>(x), static_cast<Eigen::Index>(x)) = out_rate;
  }
  const Eigen::MatrixXd symmetric = 0.5 * (sym + sym.transpose());
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(symmetric, Eigen::EigenvaluesOnly);
  return solver.eigenvalues()(1);
}

std::vector<double> occupation_distribution(const FlipTrace& trace, double t_end) {
  require_sites(trace.size(), kMaxDistributionSites, "occupation_distribution");
  if (!(t_end > 0.0) || t_end > trace.horizon()) {
    fail(ErrorKind::kInvalidArgument, "occupation window must lie in (0, horizon]");
  }
  std::vector<double> out(std::size_t{1} << trace.size(), 0.0);
  std::uint64_t x = trace.initial().index();
  double now = 0.0;
  for (const auto& e : trace.events()) {
    if (e.time > t_end) {
      break;
    }
    out[x] += e.time - now;
    now = e.time;
    x ^= std::uint64_t{1} << e.site;
  }
  out[x] += t_end - now;
  for (auto& v : out) {
    v /= t_end;
  }
  return out;
}

double total_variation(std::span<const double> p, std::span<const double> q) {
  if (p.size() != q.size()) {
    fail(ErrorKind::kInvalidArgument, "distributions differ in size");
  }
  double s = 0.0;
  for (std::size_t k = 0; k < p.size(); ++k) {
    s += std::fabs(p[k] - q[k]);
  }
  return 0.5 * s;
}

}  // namespace isingflip::oracle
