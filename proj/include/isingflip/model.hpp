#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <vector>

namespace isingflip {

/// Nonzero interaction A_ij = A_ji, stored with i < j.
struct Coupling {
  std::uint32_t i = 0;
  std::uint32_t j = 0;
  double value = 0.0;

  bool operator==(const Coupling&) const = default;
};

struct Neighbor {
  std::uint32_t site = 0;
  double coupling = 0.0;
};

/// Pairwise binary model pi(x) ~ exp(x^T A x / 2 + h^T x) with zero diagonal.
class IsingModel {
 public:
  IsingModel() = default;

  /// Normalizes (i, j) to i < j and sorts. Rejects self-loops, out-of-range
  /// sites, duplicate pairs, exact-zero or non-finite values.
  static IsingModel create(std::size_t n, std::vector<Coupling> couplings,
                           std::vector<double> fields);
  static IsingModel zero(std::size_t n);

  std::size_t size() const noexcept { return n_; }
  std::span<const Coupling> couplings() const noexcept { return couplings_; }
  std::span<const double> fields() const noexcept { return fields_; }
  double field(std::size_t i) const { return fields_[i]; }

  /// Neighbors of i sorted by site index.
  std::span<const Neighbor> neighbors(std::size_t i) const {
    return {adjacency_.data() + offsets_[i], adjacency_.data() + offsets_[i + 1]};
  }
  std::size_t degree(std::size_t i) const { return offsets_[i + 1] - offsets_[i]; }
  /// A_ij, or 0 when (i, j) is not an edge.
  double coupling(std::size_t i, std::size_t j) const;

  bool operator==(const IsingModel& other) const {
    return n_ == other.n_ && couplings_ == other.couplings_ && fields_ == other.fields_;
  }

 private:
  std::size_t n_ = 0;
  std::vector<Coupling> couplings_;
  std::vector<double> fields_;
  std::vector<std::size_t> offsets_{0};
  std::vector<Neighbor> adjacency_;
};

/// (d, lambda, alpha): maximum degree, width bound, nondegeneracy bound.
struct ModelBounds {
  std::size_t max_degree = 0;
  double width = 0.0;
  double min_coupling = 0.0;
};

enum class ViolationKind { kDegree, kWidth, kNondegeneracy };

struct BoundViolation {
  ViolationKind kind = ViolationKind::kDegree;
  std::uint32_t site = 0;
  std::optional<std::uint32_t> other;
  double value = 0.0;
  double bound = 0.0;

  std::string describe() const;
};

/// sum_j |A_ij| + |h_i|
double site_width(const IsingModel& model, std::size_t i);
/// Every violated bound, in site order.
std::vector<BoundViolation> validate_bounds(const IsingModel& model,
                                            const ModelBounds& bounds);
/// Tightest (d, lambda, alpha) the model satisfies; alpha = 0 without edges.
ModelBounds measured_bounds(const IsingModel& model);

struct Edge {
  std::uint32_t u = 0;
  std::uint32_t v = 0;

  auto operator<=>(const Edge&) const = default;
};

Edge make_edge(std::size_t a, std::size_t b);

/// Simple undirected graph on sites 0..n-1.
class Graph {
 public:
  explicit Graph(std::size_t n = 0) : n_(n) {}

  static Graph from_edges(std::size_t n, std::span<const Edge> edges);

  std::size_t size() const noexcept { return n_; }
  /// Order-insensitive; adding an existing edge is a no-op.
  void add_edge(std::size_t a, std::size_t b);
  bool has_edge(std::size_t a, std::size_t b) const;
  const std::set<Edge>& edges() const noexcept { return edges_; }
  std::vector<std::uint32_t> neighbors(std::size_t i) const;
  std::size_t degree(std::size_t i) const;

  bool operator==(const Graph&) const = default;

 private:
  std::size_t n_ = 0;
  std::set<Edge> edges_;
};

Graph dependency_graph(const IsingModel& model);

/// Edges of components with average degree > 1 are dense; the rest form a
/// matching of isolated edges.
struct DenseEdgeSplit {
  std::set<Edge> dense;
  std::set<Edge> isolated_matching;
  std::vector<std::uint32_t> isolated_vertices;
};

DenseEdgeSplit dense_edges(const Graph& graph);

}  // namespace isingflip
