#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "isingflip/spins.hpp"

namespace isingflip {

struct FlipEvent {
  double time = 0.0;
  std::uint32_t site = 0;

  bool operator==(const FlipEvent&) const = default;
};

/// Order of the four joint states in occupation vectors and pair marginals:
/// (+,+), (+,-), (-,+), (-,-) for (x_i, x_j).
inline constexpr std::size_t kPlusPlus = 0;
inline constexpr std::size_t kPlusMinus = 1;
inline constexpr std::size_t kMinusPlus = 2;
inline constexpr std::size_t kMinusMinus = 3;

/// Initial configuration plus time-ordered spin flips over [0, horizon].
/// Spins at any time are derived by parity; flip counts use (t1, t2].
class FlipTrace {
 public:
  FlipTrace() = default;
  /// Validates strictly increasing times within [0, horizon] and site range.
  FlipTrace(SpinConfig initial, double horizon, std::vector<FlipEvent> events);

  std::size_t size() const noexcept { return initial_.size(); }
  double horizon() const noexcept { return horizon_; }
  const SpinConfig& initial() const noexcept { return initial_; }
  std::span<const FlipEvent> events() const noexcept { return events_; }

  /// Sorted flip times of site i.
  std::span<const double> site_times(std::size_t i) const {
    return {times_.data() + offsets_[i], times_.data() + offsets_[i + 1]};
  }

  /// Right-continuous: events at exactly t are applied.
  SpinConfig config_at(double t) const;
  int spin_at(std::size_t i, double t) const;
  /// |flips of i in (t1, t2]|
  std::size_t flip_count(std::size_t i, double t1, double t2) const;
  /// Fraction of [0, T] spent in each joint state of (x_i, x_j).
  std::array<double, 4> occupation_time(std::size_t i, std::size_t j, double T) const;
  /// Same over [t_begin, t_end].
  std::array<double, 4> occupation_time(std::size_t i, std::size_t j, double t_begin,
                                        double t_end) const;

  bool operator==(const FlipTrace& other) const {
    return initial_ == other.initial_ && horizon_ == other.horizon_ &&
           events_ == other.events_;
  }

 private:
  void check_site(std::size_t i) const;

  SpinConfig initial_;
  double horizon_ = 0.0;
  std::vector<FlipEvent> events_;
  std::vector<std::size_t> offsets_{0};
  std::vector<double> times_;
};

}  // namespace isingflip
