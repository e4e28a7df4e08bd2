#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "isingflip/model.hpp"
#include "isingflip/trace.hpp"

namespace isingflip {

/// Sequence of flipping-site labels over {'i', 'j'}; one label per interval.
class FlipPattern {
 public:
  static FlipPattern parse(std::string_view labels);

  std::size_t size() const noexcept { return labels_.size(); }
  /// True when interval k (0-based) needs the flip from site i.
  bool first_at(std::size_t k) const { return labels_[k] == 'i'; }
  const std::string& str() const noexcept { return labels_; }
  /// Bit k set when interval k belongs to i. Only for length <= 8.
  std::uint8_t mask() const;

 private:
  std::string labels_;
};

inline constexpr std::string_view kCyclePositive = "iijjiijj";
inline constexpr std::string_view kCycleCrossed = "iijjjiij";
inline constexpr std::string_view kCycleReverse = "jiijjiij";

struct CycleWindowConfig {
  double eps = 0.05;
  double spacing = 2.0;

  /// min(0.05, 0.5 / d)
  static double default_eps(std::size_t max_degree);
  void validate() const;
};

enum class MatchSource { kTail, kReuse };

struct StructureConfig {
  CycleWindowConfig cycle;
  double tau_bulk = 1e-6;
  double tau_match = 0.2;
  /// Horizon of the cycle-statistic phase; 0 means the whole trace.
  double t_bulk = 0.0;
  /// Length of the matching phase; 0 means everything available.
  double t_match = 0.0;
  /// kTail: matching reads [t_bulk, t_bulk + t_match]; kReuse: [0, t_match].
  MatchSource match_source = MatchSource::kTail;
  /// Occupancy denominators below this mark a pair indeterminate.
  double min_occupancy = 0.01;
  std::size_t jobs = 1;

  void validate() const;
};

/// 1 iff on every interval k, (t+(k-1)eps, t+k eps], the labelled site flips
/// exactly once and the other not at all.
bool flip_sequence_indicator(const FlipTrace& trace, std::size_t i, std::size_t j,
                             double t, double eps, const FlipPattern& pattern);

/// Z = 1{iijjiijj} - 2 * 1{iijjjiij} + 1{jiijjiij}
int cycle_statistic(const FlipTrace& trace, std::size_t i, std::size_t j, double t,
                    double eps);

/// Windows starting at spacing * l, l = 1..floor((t_bulk - 8 eps) / spacing).
std::size_t window_count(double t_bulk, const CycleWindowConfig& cfg);

/// Per window l = first + w (w < count), the byte whose bit k is set when site
/// i flips exactly once in interval k; 0xFF if any interval holds >= 2 flips.
std::vector<std::uint8_t> window_codes(const FlipTrace& trace, std::size_t i,
                                       const CycleWindowConfig& cfg, std::size_t first,
                                       std::size_t count);

/// Running sums of Z per ordered pair (i, j).
class CycleAccumulator {
 public:
  explicit CycleAccumulator(std::size_t n = 0);

  std::size_t size() const noexcept { return n_; }
  void add(std::size_t i, std::size_t j, std::int64_t windows, std::int64_t sum,
           std::int64_t sum_squares);
  void merge(const CycleAccumulator& other);

  std::int64_t windows(std::size_t i, std::size_t j) const { return m_[at(i, j)]; }
  std::int64_t sum(std::size_t i, std::size_t j) const { return sum_[at(i, j)]; }
  std::int64_t sum_squares(std::size_t i, std::size_t j) const { return sq_[at(i, j)]; }
  double mean(std::size_t i, std::size_t j) const;
  /// Standard error of the mean; 0 with fewer than two windows.
  double standard_error(std::size_t i, std::size_t j) const;

 private:
  std::size_t at(std::size_t i, std::size_t j) const { return i * n_ + j; }

  std::size_t n_ = 0;
  std::vector<std::int64_t> m_;
  std::vector<std::int64_t> sum_;
  std::vector<std::int64_t> sq_;
};

/// Every ordered pair's Z over the windows in [0, t_bulk]; window blocks are
/// split across `jobs` workers and merged, so the result does not depend on it.
CycleAccumulator accumulate_cycle_statistics(const FlipTrace& trace,
                                             const CycleWindowConfig& cfg, double t_bulk,
                                             std::size_t jobs = 1);

struct BulkEdgeResult {
  Graph graph;
  /// Ordered pairs whose mean reached tau_bulk.
  std::vector<std::pair<std::uint32_t, std::uint32_t>> accepted;
  CycleAccumulator stats;
  std::size_t windows = 0;
};

BulkEdgeResult find_bulk_edges(const FlipTrace& trace, const StructureConfig& cfg);

struct PairSeparation {
  Edge pair;
  std::array<double, 4> occupancy{};
  /// |P(x_i=+ | x_j=+) - P(x_i=+ | x_j=-)|; NaN when indeterminate.
  double difference = 0.0;
  bool indeterminate = false;
};

/// |p++ / (p++ + p-+) - p+- / (p+- + p--)|, NaN when either denominator is
/// below min_occupancy.
double conditional_difference(const std::array<double, 4>& occupancy,
                              double min_occupancy);

struct MatchingResult {
  std::vector<Edge> edges;
  std::vector<Edge> indeterminate;
  std::vector<PairSeparation> pairs;
};

/// Occupation-time separation test on pairs of `isolated` over [t_begin, t_end].
MatchingResult find_matching(const FlipTrace& trace, std::span<const std::uint32_t> isolated,
                             const StructureConfig& cfg, double t_begin, double t_end);
/// Window taken from cfg (match_source, t_bulk, t_match).
MatchingResult find_matching(const FlipTrace& trace, std::span<const std::uint32_t> isolated,
                             const StructureConfig& cfg);

struct StructureResult {
  Graph graph;
  BulkEdgeResult bulk;
  std::vector<std::uint32_t> isolated;
  MatchingResult matching;
};

StructureResult learn_structure(const FlipTrace& trace, const StructureConfig& cfg);
/// Separate observations for the two phases; matching reads [0, t_match].
StructureResult learn_structure(const FlipTrace& bulk_trace, const FlipTrace& match_trace,
                                const StructureConfig& cfg);

}  // namespace isingflip
