#include "isingflip/dynamics.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "isingflip/error.hpp"

namespace isingflip {

Kernel Kernel::metropolis(double r_plus, double r_minus) {
  if (!(r_plus > 0.0 && r_plus <= 1.0) || !(r_minus > 0.0 && r_minus <= 1.0)) {
    fail(ErrorKind::kInvalidArgument, "Metropolis proposal rates must lie in (0, 1]");
  }
  Kernel k;
  k.glauber_ = false;
  k.r_plus_ = r_plus;
  k.r_minus_ = r_minus;
  return k;
}

std::string Kernel::name() const {
  if (glauber_) {
    return "glauber";
  }
  std::ostringstream os;
  os << "metropolis(r+=" << r_plus_ << ", r-=" << r_minus_ << ")";
  return os.str();
}

double local_field(const IsingModel& model, const SpinConfig& config, std::size_t i) {
  if (i >= model.size() || config.size() != model.size()) {
    fail(ErrorKind::kOutOfRange, "site " + std::to_string(i) + " or configuration size " +
                                     std::to_string(config.size()) + " does not fit the model");
  }
  double s = model.field(i);
  for (const auto& nb : model.neighbors(i)) {
    s += nb.coupling * static_cast<double>(config.spin(nb.site));
  }
  return s;
}

double flip_probability(const IsingModel& model, const Kernel& kernel,
                        const SpinConfig& config, std::size_t i) {
  return kernel.flip_probability(config.spin(i), local_field(model, config, i));
}

KernelProfile::KernelProfile(const Kernel& kernel, double width) : kernel_(kernel) {
  if (!(width >= 0.0)) {
    fail(ErrorKind::kInvalidArgument, "width bound must be >= 0");
  }
  const double e = std::exp(-2.0 * width);
  kappa_ = kernel.is_glauber() ? 0.5 * e : std::min(kernel.r_minus(), kernel.r_plus()) * e;
}

double KernelProfile::f(double z) const {
  if (kernel_.is_glauber()) {
    return z / (1.0 + z);
  }
  return std::min(kernel_.r_minus() * z, kernel_.r_plus());
}

double KernelProfile::g(double z) const {
  if (kernel_.is_glauber()) {
    return z / ((1.0 + z) * (1.0 + z));
  }
  const double rm = kernel_.r_minus();
  const double rp = kernel_.r_plus();
  return std::min(rm * rm * z, rp * rp / z);
}

double KernelProfile::z_star(double alpha) const {
  if (!(alpha > 0.0)) {
    fail(ErrorKind::kInvalidArgument, "alpha must be positive");
  }
  return peak() * std::exp(-0.5 * alpha);
}

double KernelProfile::peak() const {
  return kernel_.is_glauber() ? 1.0 : kernel_.r_plus() / kernel_.r_minus();
}

KernelProfile kernel_profile(const Kernel& kernel, const ModelBounds& bounds) {
  return KernelProfile(kernel, bounds.width);
}

Simulator::Simulator(const IsingModel& model, const Kernel& kernel, std::uint64_t seed)
    : n_(model.size()), kernel_(kernel), rng_(seed) {
  fields_.assign(model.fields().begin(), model.fields().end());
  offsets_.assign(n_ + 1, 0);
  for (std::size_t i = 0; i < n_; ++i) {
    offsets_[i + 1] = offsets_[i] + model.degree(i);
    for (const auto& nb : model.neighbors(i)) {
      nbr_site_.push_back(nb.site);
      nbr_coupling_.push_back(nb.coupling);
    }
  }
  reset(SpinConfig(n_, +1));
}

void Simulator::reset(const SpinConfig& start, double time) {
  if (start.size() != n_) {
    fail(ErrorKind::kInvalidArgument, "start configuration has " +
                                          std::to_string(start.size()) + " sites, model has " +
                                          std::to_string(n_));
  }
  config_ = start;
  spins_.resize(n_);
  for (std::size_t i = 0; i < n_; ++i) {
    spins_[i] = static_cast<std::int8_t>(start.spin(i));
  }
  time_ = time;
}

SpinConfig initial_configuration(std::size_t n, const SimConfig& cfg) {
  switch (cfg.initial) {
    case InitialKind::kAllPlus:
      return SpinConfig(n, +1);
    case InitialKind::kExplicit:
      if (cfg.initial_config.size() != n) {
        fail(ErrorKind::kInvalidArgument, "explicit initial configuration has " +
                                              std::to_string(cfg.initial_config.size()) +
                                              " sites, model has " + std::to_string(n));
      }
      return cfg.initial_config;
    case InitialKind::kSeededUniform: {
      Rng rng(derive_seed(cfg.seed, 0x1417));
      SpinConfig c(n, -1);
      for (std::size_t i = 0; i < n; ++i) {
        if ((rng.next_u64() >> 63) != 0) {
          c.set(i, +1);
        }
      }
      return c;
    }
  }
  return SpinConfig(n, +1);
}

SimResult simulate(const IsingModel& model, const Kernel& kernel, const SimConfig& cfg) {
  if (!(cfg.horizon > 0.0) || !std::isfinite(cfg.horizon)) {
    fail(ErrorKind::kInvalidArgument, "horizon must be positive and finite");
  }
  const SpinConfig start = initial_configuration(model.size(), cfg);
  Simulator sim(model, kernel, cfg.seed);
  sim.reset(start);

  SimResult result;
  std::vector<FlipEvent> events;
  std::optional<FullTrace> full;
  if (cfg.record_full) {
    full.emplace();
    full->initial = start;
    full->horizon = cfg.horizon;
  }
  std::uint64_t attempts = 0;
  sim.run_until(cfg.horizon, [&](double t, std::uint32_t site, bool flipped) {
    ++attempts;
    if (flipped) {
      events.push_back({t, site});
    }
    if (full) {
      full->attempts.push_back(
          {t, site, flipped, static_cast<std::int8_t>(sim.config().spin(site))});
    }
  });
  result.flips = FlipTrace(start, cfg.horizon, std::move(events));
  result.full = std::move(full);
  result.attempts = attempts;
  return result;
}

FlipTrace flips_of(const FullTrace& full) {
  std::vector<FlipEvent> events;
  SpinConfig x = full.initial;
  for (const auto& a : full.attempts) {
    if (a.site >= x.size()) {
      fail(ErrorKind::kOutOfRange, "attempt at site " + std::to_string(a.site));
    }
    if (a.flipped) {
      x.flip(a.site);
      events.push_back({a.time, a.site});
    }
    if (x.spin(a.site) != a.spin_after) {
      fail(ErrorKind::kInvalidArgument, "full trace spin record disagrees with replay at t=" +
                                            std::to_string(a.time));
    }
  }
  return FlipTrace(full.initial, full.horizon, std::move(events));
}

}  // namespace isingflip
