#include "isingflip/trace.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "isingflip/error.hpp"

namespace isingflip {

FlipTrace::FlipTrace(SpinConfig initial, double horizon, std::vector<FlipEvent> events)
    : initial_(std::move(initial)), horizon_(horizon), events_(std::move(events)) {
  if (!(horizon_ >= 0.0) || !std::isfinite(horizon_)) {
    fail(ErrorKind::kInvalidArgument, "trace horizon must be finite and >= 0");
  }
  const std::size_t n = initial_.size();
  std::vector<std::size_t> counts(n, 0);
  double last = -1.0;
  for (std::size_t k = 0; k < events_.size(); ++k) {
    const auto& e = events_[k];
    if (e.site >= n) {
      fail(ErrorKind::kOutOfRange, "event " + std::to_string(k) + " names site " +
                                       std::to_string(e.site) + " of " + std::to_string(n));
    }
    if (!(e.time >= 0.0) || e.time > horizon_) {
      fail(ErrorKind::kOutOfRange, "event " + std::to_string(k) + " time outside [0, horizon]");
    }
    if (!(e.time > last)) {
      fail(ErrorKind::kInvalidArgument, "event times must be strictly increasing (event " +
                                            std::to_string(k) + ")");
    }
    last = e.time;
    ++counts[e.site];
  }
  offsets_.assign(n + 1, 0);
  for (std::size_t i = 0; i < n; ++i) {
    offsets_[i + 1] = offsets_[i] + counts[i];
  }
  times_.resize(events_.size());
  std::vector<std::size_t> fill(offsets_.begin(), offsets_.end() - 1);
  for (const auto& e : events_) {
    times_[fill[e.site]++] = e.time;
  }
}

void FlipTrace::check_site(std::size_t i) const {
  if (i >= size()) {
    fail(ErrorKind::kOutOfRange, "site " + std::to_string(i) + " outside trace of " +
                                     std::to_string(size()) + " sites");
  }
}

int FlipTrace::spin_at(std::size_t i, double t) const {
  check_site(i);
  const auto ts = site_times(i);
  const auto flips = std::upper_bound(ts.begin(), ts.end(), t) - ts.begin();
  return (flips & 1) != 0 ? -initial_.spin(i) : initial_.spin(i);
}

SpinConfig FlipTrace::config_at(double t) const {
  if (!(t >= 0.0) || t > horizon_) {
    fail(ErrorKind::kOutOfRange, "time " + std::to_string(t) + " outside [0, horizon]");
  }
  SpinConfig c = initial_;
  for (std::size_t i = 0; i < size(); ++i) {
    const auto ts = site_times(i);
    if (((std::upper_bound(ts.begin(), ts.end(), t) - ts.begin()) & 1) != 0) {
      c.flip(i);
    }
  }
  return c;
}

std::size_t FlipTrace::flip_count(std::size_t i, double t1, double t2) const {
  check_site(i);
  if (!(t1 >= 0.0) || !(t2 >= t1) || t2 > horizon_) {
    fail(ErrorKind::kInvalidArgument, "invalid interval (" + std::to_string(t1) + ", " +
                                          std::to_string(t2) + "]");
  }
  const auto ts = site_times(i);
  const auto hi = std::upper_bound(ts.begin(), ts.end(), t2);
  const auto lo = std::upper_bound(ts.begin(), hi, t1);
  return static_cast<std::size_t>(hi - lo);
}

std::array<double, 4> FlipTrace::occupation_time(std::size_t i, std::size_t j,
                                                 double T) const {
  return occupation_time(i, j, 0.0, T);
}

std::array<double, 4> FlipTrace::occupation_time(std::size_t i, std::size_t j, double t_begin,
                                                 double t_end) const {
  check_site(i);
  check_site(j);
  if (!(t_end > t_begin) || !(t_begin >= 0.0)) {
    fail(ErrorKind::kInvalidArgument, "occupation window must have positive length");
  }
  if (t_end > horizon_) {
    fail(ErrorKind::kOutOfRange, "occupation window ends after the horizon");
  }
  const auto ti = site_times(i);
  const auto tj = site_times(j);
  auto a = std::upper_bound(ti.begin(), ti.end(), t_begin);
  auto b = std::upper_bound(tj.begin(), tj.end(), t_begin);
  bool plus_i = spin_at(i, t_begin) > 0;
  bool plus_j = spin_at(j, t_begin) > 0;
  std::array<double, 4> time{};
  double now = t_begin;
  const auto slot = [&] { return (plus_i ? 0U : 2U) + (plus_j ? 0U : 1U); };
  while (true) {
    const double next_i = a != ti.end() ? *a : INFINITY;
    const double next_j = b != tj.end() ? *b : INFINITY;
    const double next = std::min(next_i, next_j);
    if (next > t_end) {
      break;
    }
    time[slot()] += next - now;
    now = next;
    if (next_i == next) {
      plus_i = !plus_i;
      ++a;
    }
    if (next_j == next) {
      plus_j = !plus_j;
      ++b;
    }
  }
  time[slot()] += t_end - now;
  const double length = t_end - t_begin;
  for (auto& v : time) {
    v /= length;
  }
  return time;
}

}  // namespace isingflip
