#include "isingflip/generator.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>

#include "isingflip/error.hpp"
#include "isingflip/rng.hpp"

namespace isingflip {

std::string to_string(GraphFamily family) {
  switch (family) {
    case GraphFamily::kEmpty:
      return "empty";
    case GraphFamily::kBoundedDegree:
      return "bounded-degree";
    case GraphFamily::kRegular:
      return "regular";
    case GraphFamily::kMatching:
      return "matching";
    case GraphFamily::kPath:
      return "path";
    case GraphFamily::kGrid:
      return "grid";
  }
  return "unknown";
}

GraphFamily parse_family(std::string_view name) {
  for (auto f : {GraphFamily::kEmpty, GraphFamily::kBoundedDegree, GraphFamily::kRegular,
                 GraphFamily::kMatching, GraphFamily::kPath, GraphFamily::kGrid}) {
    if (to_string(f) == name) {
      return f;
    }
  }
  fail(ErrorKind::kInvalidArgument, "unknown graph family '" + std::string(name) + "'");
}

std::string to_string(SignScheme signs) {
  switch (signs) {
    case SignScheme::kPositive:
      return "positive";
    case SignScheme::kNegative:
      return "negative";
    case SignScheme::kRandom:
      return "random";
  }
  return "unknown";
}

SignScheme parse_signs(std::string_view name) {
  for (auto s : {SignScheme::kPositive, SignScheme::kNegative, SignScheme::kRandom}) {
    if (to_string(s) == name) {
      return s;
    }
  }
  fail(ErrorKind::kInvalidArgument, "unknown sign scheme '" + std::string(name) + "'");
}

namespace {

std::size_t family_degree(const GeneratorSpec& spec) {
  switch (spec.family) {
    case GraphFamily::kEmpty:
      return 0;
    case GraphFamily::kMatching:
      return 1;
    case GraphFamily::kPath:
      return 2;
    case GraphFamily::kGrid:
      return 4;
    case GraphFamily::kBoundedDegree:
    case GraphFamily::kRegular:
      return spec.max_degree;
  }
  return spec.max_degree;
}

}  // namespace

void GeneratorSpec::validate() const {
  if (n == 0) {
    fail(ErrorKind::kInvalidArgument, "generator needs n >= 1");
  }
  if (2 * planted_matching > n) {
    fail(ErrorKind::kInfeasible, "planted matching needs " + std::to_string(2 * planted_matching) +
                                     " sites, only " + std::to_string(n) + " available");
  }
  if (!(coupling_min > 0.0) || !(coupling_max >= coupling_min) || !std::isfinite(coupling_max)) {
    fail(ErrorKind::kInvalidArgument, "coupling range must satisfy 0 < min <= max");
  }
  if (!(field_max >= 0.0) || !std::isfinite(field_max)) {
    fail(ErrorKind::kInvalidArgument, "field_max must be finite and >= 0");
  }
  const std::size_t d = std::max(family_degree(*this), planted_matching > 0 ? std::size_t{1} : 0);
  const double worst = static_cast<double>(d) * coupling_max + field_max;
  if (worst > width * (1.0 + 1e-12)) {
    fail(ErrorKind::kInfeasible, "degree " + std::to_string(d) + " with couplings up to " +
                                     std::to_string(coupling_max) + " and fields up to " +
                                     std::to_string(field_max) + " can exceed width " +
                                     std::to_string(width));
  }
}

ModelBounds GeneratorSpec::bounds() const {
  ModelBounds b;
  b.max_degree = std::max(family_degree(*this), planted_matching > 0 ? std::size_t{1} : 0);
  b.width = std::isfinite(width) ? width
                                 : static_cast<double>(b.max_degree) * coupling_max + field_max;
  b.min_coupling = coupling_min;
  return b;
}

namespace {

using EdgeSet = std::set<Edge>;

EdgeSet bounded_degree_edges(std::size_t m, const GeneratorSpec& spec, Rng& rng) {
  if (m < 2 || spec.max_degree == 0) {
    return {};
  }
  const std::size_t target = spec.edge_count != 0 ? spec.edge_count : m * spec.max_degree / 2;
  if (target > m * spec.max_degree / 2 || target > m * (m - 1) / 2) {
    fail(ErrorKind::kInfeasible, "cannot place " + std::to_string(target) + " edges on " +
                                     std::to_string(m) + " sites with degree <= " +
                                     std::to_string(spec.max_degree));
  }
  // pairs are drawn among sites with spare degree; a stalled attempt restarts
  for (std::size_t attempt = 0; attempt < spec.max_attempts; ++attempt) {
    EdgeSet edges;
    std::vector<std::size_t> degree(m, 0);
    std::vector<std::size_t> open(m);
    std::iota(open.begin(), open.end(), 0);
    std::size_t misses = 0;
    while (edges.size() < target && open.size() >= 2 && misses < 64 + 4 * open.size()) {
      const auto ka = rng.below(open.size());
      const auto kb = rng.below(open.size());
      const auto a = open[ka];
      const auto b = open[kb];
      if (a == b || !edges.insert(make_edge(a, b)).second) {
        ++misses;
        continue;
      }
      misses = 0;
      ++degree[a];
      ++degree[b];
      // drop the higher index first so the lower one stays valid
      for (auto k : {std::max(ka, kb), std::min(ka, kb)}) {
        if (degree[open[k]] >= spec.max_degree) {
          open[k] = open.back();
          open.pop_back();
        }
      }
    }
    if (edges.size() == target) {
      return edges;
    }
  }
  fail(ErrorKind::kInfeasible, "bounded-degree sampling found no graph with " +
                                   std::to_string(target) + " edges in " +
                                   std::to_string(spec.max_attempts) + " attempts");
}

EdgeSet regular_edges(std::size_t m, std::size_t d, std::size_t attempts, Rng& rng) {
  if (d == 0 || m == 0) {
    return {};
  }
  if (d >= m || (m * d) % 2 != 0) {
    fail(ErrorKind::kInfeasible, "no " + std::to_string(d) + "-regular graph on " +
                                     std::to_string(m) + " sites");
  }
  std::vector<std::size_t> stubs;
  for (std::size_t v = 0; v < m; ++v) {
    stubs.insert(stubs.end(), d, v);
  }
  for (std::size_t attempt = 0; attempt < attempts; ++attempt) {
    for (std::size_t k = stubs.size(); k > 1; --k) {
      std::swap(stubs[k - 1], stubs[rng.below(k)]);
    }
    EdgeSet edges;
    bool simple = true;
    for (std::size_t k = 0; k + 1 < stubs.size() && simple; k += 2) {
      simple = stubs[k] != stubs[k + 1] && edges.insert(make_edge(stubs[k], stubs[k + 1])).second;
    }
    if (simple) {
      return edges;
    }
  }
  fail(ErrorKind::kInfeasible, "regular sampling found no simple graph in " +
                                   std::to_string(attempts) + " attempts");
}

EdgeSet matching_edges(std::size_t m, std::size_t offset, Rng& rng) {
  if (m % 2 != 0) {
    fail(ErrorKind::kInfeasible, "a perfect matching needs an even site count, got " +
                                     std::to_string(m));
  }
  std::vector<std::size_t> order(m);
  std::iota(order.begin(), order.end(), offset);
  for (std::size_t k = order.size(); k > 1; --k) {
    std::swap(order[k - 1], order[rng.below(k)]);
  }
  EdgeSet edges;
  for (std::size_t k = 0; k + 1 < order.size(); k += 2) {
    edges.insert(make_edge(order[k], order[k + 1]));
  }
  return edges;
}

EdgeSet grid_edges(std::size_t m, std::size_t rows) {
  if (rows == 0 || m % rows != 0) {
    fail(ErrorKind::kInfeasible, "grid rows must divide the site count");
  }
  const std::size_t cols = m / rows;
  EdgeSet edges;
  for (std::size_t r = 0; r < rows; ++r) {
    for (std::size_t c = 0; c < cols; ++c) {
      const std::size_t v = r * cols + c;
      if (c + 1 < cols) {
        edges.insert(make_edge(v, v + 1));
      }
      if (r + 1 < rows) {
        edges.insert(make_edge(v, v + cols));
      }
    }
  }
  return edges;
}

}  // namespace

IsingModel random_model(const GeneratorSpec& spec, std::uint64_t seed) {
  spec.validate();
  Rng rng(seed);
  const std::size_t m = spec.n - 2 * spec.planted_matching;
  EdgeSet edges;
  switch (spec.family) {
    case GraphFamily::kEmpty:
      break;
    case GraphFamily::kBoundedDegree:
      edges = bounded_degree_edges(m, spec, rng);
      break;
    case GraphFamily::kRegular:
      edges = regular_edges(m, spec.max_degree, spec.max_attempts, rng);
      break;
    case GraphFamily::kMatching:
      edges = matching_edges(m, 0, rng);
      break;
    case GraphFamily::kPath:
      for (std::size_t v = 0; v + 1 < m; ++v) {
        edges.insert(make_edge(v, v + 1));
      }
      break;
    case GraphFamily::kGrid:
      edges = grid_edges(m, spec.grid_rows);
      break;
  }
  for (std::size_t k = 0; k < spec.planted_matching; ++k) {
    edges.insert(make_edge(m + 2 * k, m + 2 * k + 1));
  }

  std::vector<Coupling> couplings;
  couplings.reserve(edges.size());
  for (const auto& e : edges) {
    double magnitude = spec.coupling_min;
    if (spec.coupling_max > spec.coupling_min) {
      magnitude += (spec.coupling_max - spec.coupling_min) * rng.uniform();
    }
    double sign = 1.0;
    if (spec.signs == SignScheme::kNegative) {
      sign = -1.0;
    } else if (spec.signs == SignScheme::kRandom) {
      sign = rng.below(2) == 0 ? 1.0 : -1.0;
    }
    couplings.push_back({e.u, e.v, sign * magnitude});
  }
  std::vector<double> fields(spec.n, 0.0);
  if (spec.field_max > 0.0) {
    for (auto& h : fields) {
      h = spec.field_max * (2.0 * rng.uniform() - 1.0);
    }
  }
  auto model = IsingModel::create(spec.n, std::move(couplings), std::move(fields));
  const auto violations = validate_bounds(model, spec.bounds());
  if (!violations.empty()) {
    fail(ErrorKind::kInfeasible, "generated model violates its bounds: " +
                                     violations.front().describe());
  }
  return model;
}

}  // namespace isingflip
