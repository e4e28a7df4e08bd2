#include "isingflip/model.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

#include "isingflip/error.hpp"

namespace isingflip {

IsingModel IsingModel::create(std::size_t n, std::vector<Coupling> couplings,
                              std::vector<double> fields) {
  if (fields.size() != n) {
    fail(ErrorKind::kInvalidArgument, "expected " + std::to_string(n) + " fields, got " +
                                          std::to_string(fields.size()));
  }
  for (std::size_t i = 0; i < n; ++i) {
    if (!std::isfinite(fields[i])) {
      fail(ErrorKind::kInvalidArgument, "field " + std::to_string(i) + " is not finite");
    }
  }
  for (auto& c : couplings) {
    if (c.i >= n || c.j >= n) {
      fail(ErrorKind::kOutOfRange, "coupling (" + std::to_string(c.i) + ", " +
                                       std::to_string(c.j) + ") outside " + std::to_string(n) +
                                       " sites");
    }
    if (c.i == c.j) {
      fail(ErrorKind::kInvalidArgument, "self-coupling at site " + std::to_string(c.i));
    }
    if (c.value == 0.0 || !std::isfinite(c.value)) {
      fail(ErrorKind::kInvalidArgument, "coupling (" + std::to_string(c.i) + ", " +
                                            std::to_string(c.j) +
                                            ") must be finite and nonzero");
    }
    if (c.i > c.j) {
      std::swap(c.i, c.j);
    }
  }
  std::sort(couplings.begin(), couplings.end(), [](const Coupling& a, const Coupling& b) {
    return a.i != b.i ? a.i < b.i : a.j < b.j;
  });
  for (std::size_t k = 1; k < couplings.size(); ++k) {
    if (couplings[k].i == couplings[k - 1].i && couplings[k].j == couplings[k - 1].j) {
      fail(ErrorKind::kInvalidArgument, "duplicate coupling (" + std::to_string(couplings[k].i) +
                                            ", " + std::to_string(couplings[k].j) + ")");
    }
  }

  IsingModel m;
  m.n_ = n;
  m.fields_ = std::move(fields);
  std::vector<std::size_t> degree(n, 0);
  for (const auto& c : couplings) {
    ++degree[c.i];
    ++degree[c.j];
  }
  m.offsets_.assign(n + 1, 0);
  for (std::size_t i = 0; i < n; ++i) {
    m.offsets_[i + 1] = m.offsets_[i] + degree[i];
  }
  m.adjacency_.resize(m.offsets_[n]);
  std::vector<std::size_t> fill(m.offsets_.begin(), m.offsets_.end() - 1);
  for (const auto& c : couplings) {
    m.adjacency_[fill[c.i]++] = {c.j, c.value};
    m.adjacency_[fill[c.j]++] = {c.i, c.value};
  }
  for (std::size_t i = 0; i < n; ++i) {
    std::sort(m.adjacency_.begin() + static_cast<std::ptrdiff_t>(m.offsets_[i]),
              m.adjacency_.begin() + static_cast<std::ptrdiff_t>(m.offsets_[i + 1]),
              [](const Neighbor& a, const Neighbor& b) { return a.site < b.site; });
  }
  m.couplings_ = std::move(couplings);
  return m;
}

IsingModel IsingModel::zero(std::size_t n) { return create(n, {}, std::vector<double>(n, 0.0)); }

double IsingModel::coupling(std::size_t i, std::size_t j) const {
  if (i >= n_ || j >= n_) {
    fail(ErrorKind::kOutOfRange, "site outside model");
  }
  const auto nb = neighbors(i);
  const auto it = std::lower_bound(nb.begin(), nb.end(), j,
                                   [](const Neighbor& a, std::size_t s) { return a.site < s; });
  return it != nb.end() && it->site == j ? it->coupling : 0.0;
}

std::string BoundViolation::describe() const {
  std::ostringstream os;
  switch (kind) {
    case ViolationKind::kDegree:
      os << "site " << site << " has " << value << " neighbors, bound " << bound;
      break;
    case ViolationKind::kWidth:
      os << "site " << site << " has width " << value << ", bound " << bound;
      break;
    case ViolationKind::kNondegeneracy:
      os << "coupling (" << site << ", " << other.value_or(0) << ") has magnitude " << value
         << " below " << bound;
      break;
  }
  return os.str();
}

double site_width(const IsingModel& model, std::size_t i) {
  double w = std::fabs(model.field(i));
  for (const auto& nb : model.neighbors(i)) {
    w += std::fabs(nb.coupling);
  }
  return w;
}

std::vector<BoundViolation> validate_bounds(const IsingModel& model,
                                            const ModelBounds& bounds) {
  std::vector<BoundViolation> out;
  for (std::size_t i = 0; i < model.size(); ++i) {
    const auto site = static_cast<std::uint32_t>(i);
    if (model.degree(i) > bounds.max_degree) {
      out.push_back({ViolationKind::kDegree, site, std::nullopt,
                     static_cast<double>(model.degree(i)),
                     static_cast<double>(bounds.max_degree)});
    }
    const double w = site_width(model, i);
    if (w > bounds.width) {
      out.push_back({ViolationKind::kWidth, site, std::nullopt, w, bounds.width});
    }
    for (const auto& nb : model.neighbors(i)) {
      if (nb.site > i && std::fabs(nb.coupling) < bounds.min_coupling) {
        out.push_back({ViolationKind::kNondegeneracy, site, nb.site, std::fabs(nb.coupling),
                       bounds.min_coupling});
      }
    }
  }
  return out;
}

ModelBounds measured_bounds(const IsingModel& model) {
  ModelBounds b;
  for (std::size_t i = 0; i < model.size(); ++i) {
    b.max_degree = std::max(b.max_degree, model.degree(i));
    b.width = std::max(b.width, site_width(model, i));
  }
  if (!model.couplings().empty()) {
    b.min_coupling = std::fabs(model.couplings().front().value);
    for (const auto& c : model.couplings()) {
      b.min_coupling = std::min(b.min_coupling, std::fabs(c.value));
    }
  }
  return b;
}

Edge make_edge(std::size_t a, std::size_t b) {
  return a < b ? Edge{static_cast<std::uint32_t>(a), static_cast<std::uint32_t>(b)}
               : Edge{static_cast<std::uint32_t>(b), static_cast<std::uint32_t>(a)};
}

Graph Graph::from_edges(std::size_t n, std::span<const Edge> edges) {
  Graph g(n);
  for (const auto& e : edges) {
    g.add_edge(e.u, e.v);
  }
  return g;
}

void Graph::add_edge(std::size_t a, std::size_t b) {
  if (a >= n_ || b >= n_) {
    fail(ErrorKind::kOutOfRange, "edge (" + std::to_string(a) + ", " + std::to_string(b) +
                                     ") outside " + std::to_string(n_) + " sites");
  }
  if (a == b) {
    fail(ErrorKind::kInvalidArgument, "self-loop at site " + std::to_string(a));
  }
  edges_.insert(make_edge(a, b));
}

bool Graph::has_edge(std::size_t a, std::size_t b) const {
  if (a == b || a >= n_ || b >= n_) {
    return false;
  }
  return edges_.count(make_edge(a, b)) != 0;
}

std::vector<std::uint32_t> Graph::neighbors(std::size_t i) const {
  std::vector<std::uint32_t> out;
  for (const auto& e : edges_) {
    if (e.u == i) {
      out.push_back(e.v);
    } else if (e.v == i) {
      out.push_back(e.u);
    }
  }
  std::sort(out.begin(), out.end());
  return out;
}

std::size_t Graph::degree(std::size_t i) const {
  std::size_t d = 0;
  for (const auto& e : edges_) {
    d += static_cast<std::size_t>(e.u == i) + static_cast<std::size_t>(e.v == i);
  }
  return d;
}

Graph dependency_graph(const IsingModel& model) {
  Graph g(model.size());
  for (const auto& c : model.couplings()) {
    g.add_edge(c.i, c.j);
  }
  return g;
}

namespace {

std::size_t find_root(std::vector<std::size_t>& parent, std::size_t x) {
  while (parent[x] != x) {
    parent[x] = parent[parent[x]];
    x = parent[x];
  }
  return x;
}

}  // namespace

DenseEdgeSplit dense_edges(const Graph& graph) {
  const std::size_t n = graph.size();
  std::vector<std::size_t> parent(n);
  std::iota(parent.begin(), parent.end(), std::size_t{0});
  std::vector<std::size_t> degree(n, 0);
  for (const auto& e : graph.edges()) {
    ++degree[e.u];
    ++degree[e.v];
    const auto a = find_root(parent, e.u);
    const auto b = find_root(parent, e.v);
    if (a != b) {
      parent[a] = b;
    }
  }
  std::vector<std::size_t> vertices(n, 0);
  std::vector<std::size_t> edges(n, 0);
  for (std::size_t v = 0; v < n; ++v) {
    ++vertices[find_root(parent, v)];
  }
  for (const auto& e : graph.edges()) {
    ++edges[find_root(parent, e.u)];
  }
  DenseEdgeSplit out;
  for (const auto& e : graph.edges()) {
    const auto r = find_root(parent, e.u);
    // average degree 2E/V > 1
    if (2 * edges[r] > vertices[r]) {
      out.dense.insert(e);
    } else {
      out.isolated_matching.insert(e);
    }
  }
  for (std::size_t v = 0; v < n; ++v) {
    if (degree[v] == 0) {
      out.isolated_vertices.push_back(static_cast<std::uint32_t>(v));
    }
  }
  return out;
}

}  // namespace isingflip
