#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "isingflip/model.hpp"
#include "isingflip/trace.hpp"

namespace isingflip {

struct ParamConfig {
  double eps_rate = 0.05;
  double spacing = 2.0;
  /// Horizon used for counting; 0 means the whole trace.
  double t_param = 0.0;
  std::size_t min_samples = 200;
  std::size_t jobs = 1;

  /// min(0.05, 0.5 / d)
  static double default_eps(std::size_t max_degree);
  void validate() const;
};

/// Neighbourhood S_i = {i} + neighbors. Keys pack bit 0 = x_i and bit k + 1 =
/// the k-th neighbor (ascending site order); a set bit means +1.
class NeighborhoodCounts {
 public:
  static constexpr std::size_t kMaxNeighbors = 62;
  static constexpr std::size_t kDenseLimit = 20;

  struct Entry {
    std::uint64_t occupancy = 0;  // N_z
    std::uint64_t flips = 0;      // N_{z,i}
  };

  NeighborhoodCounts(std::size_t site, std::vector<std::uint32_t> neighbors);

  std::size_t site() const noexcept { return site_; }
  std::span<const std::uint32_t> neighbors() const noexcept { return neighbors_; }
  /// |S_i|
  std::size_t width() const noexcept { return neighbors_.size() + 1; }
  /// Key bit of neighbor j, or nullopt when j is not a neighbor.
  std::optional<std::size_t> bit_of(std::size_t j) const;

  void record(std::uint64_t key, bool flipped);
  Entry at(std::uint64_t key) const;
  std::uint64_t total() const noexcept { return total_; }
  /// Visits every key with N_z > 0 in increasing key order.
  void for_each(const std::function<void(std::uint64_t, const Entry&)>& fn) const;

 private:
  std::size_t site_;
  std::vector<std::uint32_t> neighbors_;
  std::uint64_t total_ = 0;
  std::vector<Entry> dense_;
  std::unordered_map<std::uint64_t, Entry> sparse_;
};

/// Samples at t_l = spacing * l, l = 1..floor((T - eps_rate) / spacing): the
/// local configuration at t_l and whether i flips exactly once in
/// (t_l, t_l + eps_rate].
NeighborhoodCounts collect_counts(const FlipTrace& trace, std::size_t i,
                                  std::span<const std::uint32_t> neighbors,
                                  const ParamConfig& cfg);

/// N_{z,i} / (eps_rate * N_z)
double rate_estimate(const NeighborhoodCounts& counts, std::uint64_t key, double eps_rate);

/// Four completions of a fixed outside assignment y, indexed by
/// (x_i, x_j) = (-,-), (+,-), (-,+), (+,+).
struct Subcube {
  std::uint64_t outside = 0;
  std::array<std::uint64_t, 4> keys{};
  std::uint64_t min_count = 0;
};

/// y maximizing the smallest occupancy of its four completions; ties go to the
/// smallest packed y.
Subcube select_subcube(const NeighborhoodCounts& counts, std::size_t j,
                       std::size_t min_samples);

/// 1/4 ln[(p(-,+) / p(+,+)) / (p(-,-) / p(+,-))] with rates indexed as in
/// Subcube; exactly A_ij when the rates are exact.
double coupling_from_rates(const std::array<double, 4>& rates);

struct CouplingEstimate {
  double value = 0.0;
  /// Delta-method standard error from the flip counts.
  double standard_error = 0.0;
  Subcube subcube;
};

CouplingEstimate estimate_coupling(const NeighborhoodCounts& counts, std::size_t j,
                                   const ParamConfig& cfg);

struct FieldEstimate {
  double value = 0.0;
  std::size_t configurations = 0;
  std::uint64_t weight = 0;
};

/// Weighted over every outside configuration whose two x_i orientations both
/// have min_samples occupancy. `couplings[k]` is A_ik for the k-th neighbor.
FieldEstimate estimate_field(const NeighborhoodCounts& counts,
                             std::span<const double> couplings, const ParamConfig& cfg);

/// One field per entry of `counts`; pairs missing from `couplings` count as 0.
std::vector<double> estimate_fields(std::span<const NeighborhoodCounts> counts,
                                    std::span<const Coupling> couplings,
                                    const ParamConfig& cfg);

struct EdgeReport {
  Edge edge;
  double value = 0.0;
  std::optional<double> forward;   // from counts of u
  std::optional<double> backward;  // from counts of v
  std::uint64_t forward_min_count = 0;
  std::uint64_t backward_min_count = 0;
  double standard_error = 0.0;
  bool disagreement = false;
  std::vector<std::string> errors;
};

struct SiteReport {
  std::uint32_t site = 0;
  std::optional<double> field;
  std::size_t configurations = 0;
  std::uint64_t samples = 0;
  std::vector<std::string> errors;
};

struct ParamReport {
  std::vector<EdgeReport> edges;
  std::vector<SiteReport> sites;
  std::size_t indeterminate_edges = 0;
  std::size_t indeterminate_fields = 0;
};

struct ParamResult {
  /// Estimated couplings for edges with at least one direction available.
  std::vector<Coupling> couplings;
  /// Indeterminate fields are reported as 0 and flagged in the report.
  std::vector<double> fields;
  ParamReport report;

  /// Model assembled from the estimates (exact-zero couplings dropped).
  IsingModel model(std::size_t n) const;
};

ParamResult learn_parameters(const FlipTrace& trace, const Graph& graph,
                             const ParamConfig& cfg);

}  // namespace isingflip
