#pragma once

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "isingflip/model.hpp"
#include "isingflip/rng.hpp"
#include "isingflip/spins.hpp"
#include "isingflip/trace.hpp"

namespace isingflip {

/// Reversible single-site rule. Glauber resamples the site from its
/// conditional law; Metropolis proposes a flip away from x_i with rate
/// r_{-x_i} and accepts by the stationary ratio.
class Kernel {
 public:
  static Kernel glauber() { return Kernel{}; }
  /// Both rates must lie in (0, 1].
  static Kernel metropolis(double r_plus, double r_minus);

  bool is_glauber() const noexcept { return glauber_; }
  double r_plus() const noexcept { return r_plus_; }
  double r_minus() const noexcept { return r_minus_; }
  std::string name() const;

  /// Probability that an update attempt changes spin `x_i` under local field S.
  double flip_probability(int x_i, double local_field) const noexcept {
    const double u = 2.0 * static_cast<double>(x_i) * local_field;
    if (glauber_) {
      return 1.0 / (1.0 + std::exp(u));
    }
    const double stay = x_i > 0 ? r_plus_ : r_minus_;
    const double away = x_i > 0 ? r_minus_ : r_plus_;
    return std::fmin(stay * std::exp(-u), away);
  }

  bool operator==(const Kernel&) const = default;

 private:
  bool glauber_ = true;
  double r_plus_ = 1.0;
  double r_minus_ = 1.0;
};

/// sum_{k != i} A_ik x_k + h_i over the stored neighbors of i.
double local_field(const IsingModel& model, const SpinConfig& config, std::size_t i);
double flip_probability(const IsingModel& model, const Kernel& kernel,
                        const SpinConfig& config, std::size_t i);

/// Site-consistency constants of a kernel under width bound lambda. The
/// argument z of f and g is the stationary ratio pi(x^i) / pi(x) seen from
/// x_i = -1, i.e. exp(2 S).
class KernelProfile {
 public:
  KernelProfile(const Kernel& kernel, double width);

  const Kernel& kernel() const noexcept { return kernel_; }
  double kappa() const noexcept { return kappa_; }
  double gamma() const noexcept { return 4.0; }
  /// Flip probability from x_i = -1.
  double f(double z) const;
  /// f(z)^2 / z: product of the flip probabilities in both directions.
  double g(double z) const;
  /// Closed-form root of g(z) = g(e^alpha z).
  double z_star(double alpha) const;
  /// Maximizer of g.
  double peak() const;

 private:
  Kernel kernel_;
  double kappa_ = 0.0;
};

KernelProfile kernel_profile(const Kernel& kernel, const ModelBounds& bounds);

enum class InitialKind { kAllPlus, kExplicit, kSeededUniform };

struct SimConfig {
  double horizon = 1.0;
  std::uint64_t seed = 0;
  InitialKind initial = InitialKind::kAllPlus;
  /// Used when initial == kExplicit.
  SpinConfig initial_config;
  /// Keep every update attempt, flipped or not.
  bool record_full = false;
};

struct UpdateAttempt {
  double time = 0.0;
  std::uint32_t site = 0;
  bool flipped = false;
  std::int8_t spin_after = 1;

  bool operator==(const UpdateAttempt&) const = default;
};

struct FullTrace {
  SpinConfig initial;
  double horizon = 0.0;
  std::vector<UpdateAttempt> attempts;
};

struct SimResult {
  FlipTrace flips;
  std::optional<FullTrace> full;
  std::uint64_t attempts = 0;
};

/// Event-driven chain: one rate-n exponential stream with a uniform site per
/// attempt. Reusable across runs via reset().
class Simulator {
 public:
  Simulator(const IsingModel& model, const Kernel& kernel, std::uint64_t seed);

  void reset(const SpinConfig& start, double time = 0.0);
  const SpinConfig& config() const noexcept { return config_; }
  double time() const noexcept { return time_; }
  Rng& rng() noexcept { return rng_; }

  /// Runs attempts with times in (time(), t_end], calling
  /// on_attempt(time, site, flipped) after each; leaves time() == t_end.
  template <class OnAttempt>
  void run_until(double t_end, OnAttempt&& on_attempt) {
    const double rate = static_cast<double>(n_);
    for (;;) {
      double next = time_ + rng_.exponential(rate);
      if (next > t_end) {
        break;
      }
      if (next <= time_) {
        next = std::nextafter(time_, std::numeric_limits<double>::infinity());
      }
      time_ = next;
      const auto site = static_cast<std::uint32_t>(rng_.below(n_));
      const int x = spins_[site];
      double field = fields_[site];
      for (std::size_t k = offsets_[site]; k < offsets_[site + 1]; ++k) {
        field += nbr_coupling_[k] * static_cast<double>(spins_[nbr_site_[k]]);
      }
      const double p = kernel_.flip_probability(x, field);
      const bool flipped = rng_.uniform() < p;
      if (flipped) {
        apply_flip(site);
      }
      on_attempt(time_, site, flipped);
    }
    time_ = t_end;
  }

 private:
  void apply_flip(std::uint32_t site) {
    spins_[site] = static_cast<std::int8_t>(-spins_[site]);
    config_.flip(site);
  }

  std::size_t n_ = 0;
  Kernel kernel_;
  Rng rng_;
  double time_ = 0.0;
  SpinConfig config_;
  std::vector<std::int8_t> spins_;
  std::vector<double> fields_;
  std::vector<std::size_t> offsets_;
  std::vector<std::uint32_t> nbr_site_;
  std::vector<double> nbr_coupling_;
};

SpinConfig initial_configuration(std::size_t n, const SimConfig& cfg);

/// Deterministic in (model, kernel, cfg).
SimResult simulate(const IsingModel& model, const Kernel& kernel, const SimConfig& cfg);

/// Flips contained in a full trace.
FlipTrace flips_of(const FullTrace& full);

}  // namespace isingflip
