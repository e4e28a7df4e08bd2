#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include "isingflip/dynamics.hpp"
#include "isingflip/model.hpp"
#include "isingflip/spins.hpp"
#include "isingflip/structure.hpp"
#include "isingflip/trace.hpp"

/// Brute-force references for small models. Everything here enumerates the
/// stationary distribution and never calls the dynamics' local-field path.
namespace isingflip::oracle {

inline constexpr std::size_t kMaxDistributionSites = 20;
inline constexpr std::size_t kMaxBalanceSites = 12;
inline constexpr std::size_t kMaxSpectralSites = 3;

class ExactDistribution {
 public:
  ExactDistribution(std::size_t n, std::vector<double> probabilities)
      : n_(n), p_(std::move(probabilities)) {}

  std::size_t size() const noexcept { return n_; }
  /// Index = packed spin bits (bit k set means x_k = +1).
  double operator[](std::uint64_t index) const { return p_[index]; }
  std::span<const double> probabilities() const noexcept { return p_; }

 private:
  std::size_t n_;
  std::vector<double> p_;
};

/// pi(x) ~ exp(x^T A x / 2 + h^T x), log-sum-exp normalized. n <= 20.
ExactDistribution exact_distribution(const IsingModel& model);

/// Flip probability of site i from configuration `index`, from pi values.
double exact_kernel(const ExactDistribution& pi, const Kernel& kernel, std::uint64_t index,
                    std::size_t i);
double exact_kernel(const IsingModel& model, const Kernel& kernel, const SpinConfig& x,
                    std::size_t i);

/// Flip probability of site i from a configuration index.
using FlipRule = std::function<double(std::uint64_t index, std::size_t i)>;

/// max over (x, i) of |pi(x) P_i(x, x^i) - pi(x^i) P_i(x^i, x)|; n <= 12.
/// The kernel's rule is evaluated through dynamics::flip_probability.
double check_detailed_balance(const IsingModel& model, const Kernel& kernel);
double check_detailed_balance(const IsingModel& model, const FlipRule& rule);

/// pi(x_i, x_j) in the order (+,+), (+,-), (-,+), (-,-).
std::array<double, 4> pair_marginal(const ExactDistribution& pi, std::size_t i,
                                    std::size_t j);
std::array<double, 4> pair_marginal(const IsingModel& model, std::size_t i, std::size_t j);

/// Bisection root of g(z) = g(e^alpha z) on either side of the peak of g.
double z_star_numeric(const KernelProfile& profile, double alpha);

struct McEstimate {
  double estimate = 0.0;
  double standard_error = 0.0;
  std::uint64_t hits = 0;
  std::uint64_t samples = 0;
};

/// Fraction of independent runs from `start` that realize the flip pattern
/// on (i, j) over consecutive intervals of length eps starting at time 0.
McEstimate mc_event_probability(const IsingModel& model, const Kernel& kernel,
                                const SpinConfig& start, std::size_t i, std::size_t j,
                                const FlipPattern& pattern, double eps,
                                std::uint64_t samples, std::uint64_t seed);

/// eps^m times the product of exact flip probabilities along the pattern's
/// flip path from `start`.
double event_leading_term(const IsingModel& model, const Kernel& kernel,
                          const SpinConfig& start, std::size_t i, std::size_t j,
                          const FlipPattern& pattern, double eps);

/// Spectral gap of the unit-rate chain on `component` alone (<= 3 sites);
/// couplings leaving the component are ignored.
double spectral_gap_numeric(const IsingModel& model, std::span<const std::uint32_t> component,
                            const Kernel& kernel);

/// Fraction of [0, t_end] spent in each of the 2^n configurations; n <= 20.
std::vector<double> occupation_distribution(const FlipTrace& trace, double t_end);

double total_variation(std::span<const double> p, std::span<const double> q);

}  // namespace isingflip::oracle
