#include "isingflip/params.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <sstream>

#include "isingflip/error.hpp"
#include "isingflip/parallel.hpp"

namespace isingflip {

namespace {

std::string key_name(std::size_t site, std::uint64_t key) {
  std::ostringstream os;
  os << "site " << site << ", local configuration 0x" << std::hex << key;
  return os.str();
}

/// Inserts `y` into the bit positions of `mask`, lowest first (software pdep).
std::uint64_t deposit(std::uint64_t y, std::uint64_t mask) {
  std::uint64_t out = 0;
  for (std::uint64_t bit = 1; mask != 0; bit <<= 1) {
    const std::uint64_t low = mask & (~mask + 1);
    if ((y & bit) != 0) {
      out |= low;
    }
    mask &= mask - 1;
  }
  return out;
}

/// Inverse of deposit.
std::uint64_t extract(std::uint64_t x, std::uint64_t mask) {
  std::uint64_t out = 0;
  for (std::uint64_t bit = 1; mask != 0; bit <<= 1) {
    const std::uint64_t low = mask & (~mask + 1);
    if ((x & low) != 0) {
      out |= bit;
    }
    mask &= mask - 1;
  }
  return out;
}

std::uint64_t width_mask(std::size_t width) {
  return width >= 64 ? ~std::uint64_t{0} : (std::uint64_t{1} << width) - 1;
}

}  // namespace

double ParamConfig::default_eps(std::size_t max_degree) {
  return max_degree == 0 ? 0.05 : std::min(0.05, 0.5 / static_cast<double>(max_degree));
}

void ParamConfig::validate() const {
  if (!(eps_rate > 0.0) || !(spacing > 0.0) || !std::isfinite(spacing)) {
    fail(ErrorKind::kInvalidArgument, "eps_rate and spacing must be positive");
  }
  if (!(eps_rate < spacing)) {
    fail(ErrorKind::kInvalidArgument, "eps_rate must be below spacing");
  }
  if (min_samples < 1) {
    fail(ErrorKind::kInvalidArgument, "min_samples must be >= 1");
  }
  if (!(t_param >= 0.0)) {
    fail(ErrorKind::kInvalidArgument, "t_param must be >= 0");
  }
}

NeighborhoodCounts::NeighborhoodCounts(std::size_t site, std::vector<std::uint32_t> neighbors)
    : site_(site), neighbors_(std::move(neighbors)) {
  if (neighbors_.size() > kMaxNeighbors) {
    fail(ErrorKind::kTooLarge, "site " + std::to_string(site) + " has " +
                                   std::to_string(neighbors_.size()) + " neighbors, limit " +
                                   std::to_string(kMaxNeighbors));
  }
  for (std::size_t k = 0; k < neighbors_.size(); ++k) {
    if (neighbors_[k] == site || (k > 0 && neighbors_[k] <= neighbors_[k - 1])) {
      fail(ErrorKind::kInvalidArgument,
           "neighbors must be strictly increasing and exclude the site itself");
    }
  }
  if (width() <= kDenseLimit) {
    dense_.resize(std::size_t{1} << width());
  }
}

std::optional<std::size_t> NeighborhoodCounts::bit_of(std::size_t j) const {
  const auto it = std::lower_bound(neighbors_.begin(), neighbors_.end(), j);
  if (it == neighbors_.end() || *it != j) {
    return std::nullopt;
  }
  return static_cast<std::size_t>(it - neighbors_.begin()) + 1;
}

void NeighborhoodCounts::record(std::uint64_t key, bool flipped) {
  Entry& e = dense_.empty() ? sparse_[key] : dense_[key];
  ++e.occupancy;
  e.flips += flipped ? 1 : 0;
  ++total_;
}

NeighborhoodCounts::Entry NeighborhoodCounts::at(std::uint64_t key) const {
  if (key & ~width_mask(width())) {
    fail(ErrorKind::kOutOfRange, "key has bits beyond the neighbourhood");
  }
  if (!dense_.empty()) {
    return dense_[key];
  }
  const auto it = sparse_.find(key);
  return it == sparse_.end() ? Entry{} : it->second;
}

void NeighborhoodCounts::for_each(
    const std::function<void(std::uint64_t, const Entry&)>& fn) const {
  if (!dense_.empty()) {
    for (std::uint64_t k = 0; k < dense_.size(); ++k) {
      if (dense_[k].occupancy > 0) {
        fn(k, dense_[k]);
      }
    }
    return;
  }
  std::vector<std::uint64_t> keys;
  keys.reserve(sparse_.size());
  for (const auto& [k, e] : sparse_) {
    keys.push_back(k);
  }
  std::sort(keys.begin(), keys.end());
  for (auto k : keys) {
    fn(k, sparse_.at(k));
  }
}

NeighborhoodCounts collect_counts(const FlipTrace& trace, std::size_t i,
                                  std::span<const std::uint32_t> neighbors,
                                  const ParamConfig& cfg) {
  cfg.validate();
  if (i >= trace.size()) {
    fail(ErrorKind::kOutOfRange, "site " + std::to_string(i) + " outside trace");
  }
  std::vector<std::uint32_t> sorted(neighbors.begin(), neighbors.end());
  std::sort(sorted.begin(), sorted.end());
  for (auto s : sorted) {
    if (s >= trace.size()) {
      fail(ErrorKind::kOutOfRange, "neighbor " + std::to_string(s) + " outside trace");
    }
  }
  NeighborhoodCounts counts(i, sorted);

  const double horizon = cfg.t_param > 0.0 ? cfg.t_param : trace.horizon();
  if (horizon > trace.horizon()) {
    fail(ErrorKind::kInsufficientSamples, "trace horizon " + std::to_string(trace.horizon()) +
                                              " is shorter than t_param " +
                                              std::to_string(horizon));
  }
  const double usable = horizon - cfg.eps_rate;
  std::size_t samples = usable >= cfg.spacing
                            ? static_cast<std::size_t>(std::floor(usable / cfg.spacing))
                            : 0;
  while (samples > 0 &&
         cfg.spacing * static_cast<double>(samples) + cfg.eps_rate > horizon) {
    --samples;
  }
  if (samples == 0) {
    fail(ErrorKind::kInsufficientSamples, "trace too short for a single rate sample");
  }

  // members[0] is i itself, then the neighbors in key-bit order
  std::vector<std::span<const double>> times;
  times.push_back(trace.site_times(i));
  for (auto s : sorted) {
    times.push_back(trace.site_times(s));
  }
  std::vector<std::size_t> pos(times.size(), 0);
  std::uint64_t initial_bits = 0;
  for (std::size_t b = 0; b < times.size(); ++b) {
    const std::size_t site = b == 0 ? i : sorted[b - 1];
    if (trace.initial().is_plus(site)) {
      initial_bits |= std::uint64_t{1} << b;
    }
  }

  for (std::size_t l = 1; l <= samples; ++l) {
    const double t = cfg.spacing * static_cast<double>(l);
    std::uint64_t parity = 0;
    for (std::size_t b = 0; b < times.size(); ++b) {
      const auto ts = times[b];
      while (pos[b] < ts.size() && ts[pos[b]] <= t) {
        ++pos[b];
      }
      parity |= static_cast<std::uint64_t>(pos[b] & 1U) << b;
    }
    const double hi = t + cfg.eps_rate;
    std::size_t ahead = pos[0];
    std::size_t flips = 0;
    while (ahead < times[0].size() && times[0][ahead] <= hi && flips < 2) {
      ++flips;
      ++ahead;
    }
    counts.record(initial_bits ^ parity, flips == 1);
  }
  return counts;
}

double rate_estimate(const NeighborhoodCounts& counts, std::uint64_t key, double eps_rate) {
  const auto e = counts.at(key);
  if (e.occupancy == 0) {
    fail(ErrorKind::kInsufficientSamples, "no samples at " + key_name(counts.site(), key));
  }
  return static_cast<double>(e.flips) / (eps_rate * static_cast<double>(e.occupancy));
}

Subcube select_subcube(const NeighborhoodCounts& counts, std::size_t j,
                       std::size_t min_samples) {
  const auto bj = counts.bit_of(j);
  if (!bj) {
    fail(ErrorKind::kInvalidArgument, "site " + std::to_string(j) + " is not a neighbor of " +
                                          std::to_string(counts.site()));
  }
  const std::uint64_t jbit = std::uint64_t{1} << *bj;
  const std::uint64_t outside_mask = width_mask(counts.width()) & ~std::uint64_t{1} & ~jbit;

  const auto completions = [&](std::uint64_t y) {
    Subcube s;
    s.outside = y;
    const std::uint64_t base = deposit(y, outside_mask);
    s.keys = {base, base | 1U, base | jbit, base | jbit | 1U};
    s.min_count = counts.at(s.keys[0]).occupancy;
    for (std::size_t k = 1; k < 4; ++k) {
      s.min_count = std::min(s.min_count, counts.at(s.keys[k]).occupancy);
    }
    return s;
  };

  std::vector<std::uint64_t> candidates;
  if (counts.width() <= NeighborhoodCounts::kDenseLimit) {
    const std::uint64_t cubes = std::uint64_t{1} << (counts.width() - 2);
    for (std::uint64_t y = 0; y < cubes; ++y) {
      candidates.push_back(y);
    }
  } else {
    counts.for_each([&](std::uint64_t key, const NeighborhoodCounts::Entry&) {
      candidates.push_back(extract(key, outside_mask));
    });
    std::sort(candidates.begin(), candidates.end());
    candidates.erase(std::unique(candidates.begin(), candidates.end()), candidates.end());
    if (candidates.empty() || candidates.front() != 0) {
      candidates.insert(candidates.begin(), 0);
    }
  }
  Subcube best = completions(candidates.front());
  for (std::size_t k = 1; k < candidates.size(); ++k) {
    const Subcube s = completions(candidates[k]);
    if (s.min_count > best.min_count) {
      best = s;
    }
  }
  if (best.min_count < min_samples) {
    fail(ErrorKind::kInsufficientSamples,
         "no subcube for edge (" + std::to_string(counts.site()) + ", " + std::to_string(j) +
             ") reaches " + std::to_string(min_samples) + " samples; best has " +
             std::to_string(best.min_count));
  }
  return best;
}

double coupling_from_rates(const std::array<double, 4>& r) {
  return 0.25 * std::log((r[2] * r[1]) / (r[3] * r[0]));
}

CouplingEstimate estimate_coupling(const NeighborhoodCounts& counts, std::size_t j,
                                   const ParamConfig& cfg) {
  CouplingEstimate out;
  out.subcube = select_subcube(counts, j, cfg.min_samples);
  std::array<double, 4> rates{};
  double variance = 0.0;
  for (std::size_t k = 0; k < 4; ++k) {
    const auto e = counts.at(out.subcube.keys[k]);
    if (e.flips == 0) {
      fail(ErrorKind::kInsufficientSamples,
           "undefined rate ratio: no flips at " + key_name(counts.site(), out.subcube.keys[k]));
    }
    rates[k] = rate_estimate(counts, out.subcube.keys[k], cfg.eps_rate);
    variance += 1.0 / static_cast<double>(e.flips);
  }
  out.value = coupling_from_rates(rates);
  out.standard_error = 0.25 * std::sqrt(variance);
  return out;
}

FieldEstimate estimate_field(const NeighborhoodCounts& counts,
                             std::span<const double> couplings, const ParamConfig& cfg) {
  if (couplings.size() != counts.neighbors().size()) {
    fail(ErrorKind::kInvalidArgument, "one coupling per neighbor required");
  }
  FieldEstimate out;
  double weighted = 0.0;
  counts.for_each([&](std::uint64_t key, const NeighborhoodCounts::Entry& minus) {
    if ((key & 1U) != 0) {
      return;
    }
    const auto plus = counts.at(key | 1U);
    if (minus.occupancy < cfg.min_samples || plus.occupancy < cfg.min_samples ||
        minus.flips == 0 || plus.flips == 0) {
      return;
    }
    double interaction = 0.0;
    for (std::size_t k = 0; k < couplings.size(); ++k) {
      interaction += couplings[k] * (((key >> (k + 1)) & 1U) != 0 ? 1.0 : -1.0);
    }
    const double candidate = 0.5 * std::log(rate_estimate(counts, key, cfg.eps_rate) /
                                            rate_estimate(counts, key | 1U, cfg.eps_rate)) -
                             interaction;
    const std::uint64_t w = minus.occupancy + plus.occupancy;
    weighted += static_cast<double>(w) * candidate;
    out.weight += w;
    ++out.configurations;
  });
  if (out.configurations == 0) {
    fail(ErrorKind::kInsufficientSamples,
         "no local configuration of site " + std::to_string(counts.site()) +
             " has both orientations sampled " + std::to_string(cfg.min_samples) + " times");
  }
  out.value = weighted / static_cast<double>(out.weight);
  return out;
}

namespace {

std::vector<double> aligned_couplings(const NeighborhoodCounts& counts,
                                      const std::map<Edge, double>& lookup) {
  std::vector<double> out;
  for (auto s : counts.neighbors()) {
    const auto it = lookup.find(make_edge(counts.site(), s));
    out.push_back(it == lookup.end() ? 0.0 : it->second);
  }
  return out;
}

}  // namespace

std::vector<double> estimate_fields(std::span<const NeighborhoodCounts> counts,
                                    std::span<const Coupling> couplings,
                                    const ParamConfig& cfg) {
  std::map<Edge, double> lookup;
  for (const auto& c : couplings) {
    lookup[make_edge(c.i, c.j)] = c.value;
  }
  std::vector<double> out;
  out.reserve(counts.size());
  for (const auto& c : counts) {
    out.push_back(estimate_field(c, aligned_couplings(c, lookup), cfg).value);
  }
  return out;
}

IsingModel ParamResult::model(std::size_t n) const {
  std::vector<Coupling> kept;
  for (const auto& c : couplings) {
    if (c.value != 0.0) {
      kept.push_back(c);
    }
  }
  return IsingModel::create(n, std::move(kept), fields);
}

ParamResult learn_parameters(const FlipTrace& trace, const Graph& graph,
                             const ParamConfig& cfg) {
  cfg.validate();
  const std::size_t n = trace.size();
  if (graph.size() != n) {
    fail(ErrorKind::kInvalidArgument, "graph has " + std::to_string(graph.size()) +
                                          " sites, trace has " + std::to_string(n));
  }
  std::vector<std::vector<std::uint32_t>> neighbors(n);
  for (const auto& e : graph.edges()) {
    neighbors[e.u].push_back(e.v);
    neighbors[e.v].push_back(e.u);
  }
  std::vector<std::optional<NeighborhoodCounts>> counts(n);
  parallel_chunks(n, cfg.jobs, [&](std::size_t begin, std::size_t end, std::size_t) {
    for (std::size_t i = begin; i < end; ++i) {
      std::sort(neighbors[i].begin(), neighbors[i].end());
      counts[i].emplace(collect_counts(trace, i, neighbors[i], cfg));
    }
  });

  ParamResult out;
  std::map<Edge, double> lookup;
  for (const auto& e : graph.edges()) {
    EdgeReport rep;
    rep.edge = e;
    double se_f = 0.0;
    double se_b = 0.0;
    try {
      const auto f = estimate_coupling(*counts[e.u], e.v, cfg);
      rep.forward = f.value;
      rep.forward_min_count = f.subcube.min_count;
      se_f = f.standard_error;
    } catch (const Error& err) {
      rep.errors.emplace_back(err.what());
    }
    try {
      const auto b = estimate_coupling(*counts[e.v], e.u, cfg);
      rep.backward = b.value;
      rep.backward_min_count = b.subcube.min_count;
      se_b = b.standard_error;
    } catch (const Error& err) {
      rep.errors.emplace_back(err.what());
    }
    if (rep.forward && rep.backward) {
      rep.value = 0.5 * (*rep.forward + *rep.backward);
      const double combined = std::sqrt(se_f * se_f + se_b * se_b);
      rep.standard_error = 0.5 * combined;
      rep.disagreement = std::fabs(*rep.forward - *rep.backward) > 2.0 * combined;
    } else if (rep.forward || rep.backward) {
      rep.value = rep.forward ? *rep.forward : *rep.backward;
      rep.standard_error = rep.forward ? se_f : se_b;
    }
    if (rep.forward || rep.backward) {
      out.couplings.push_back({e.u, e.v, rep.value});
      lookup[e] = rep.value;
    } else {
      ++out.report.indeterminate_edges;
    }
    out.report.edges.push_back(std::move(rep));
  }

  out.fields.assign(n, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    SiteReport rep;
    rep.site = static_cast<std::uint32_t>(i);
    rep.samples = counts[i]->total();
    try {
      const auto f = estimate_field(*counts[i], aligned_couplings(*counts[i], lookup), cfg);
      rep.field = f.value;
      rep.configurations = f.configurations;
      out.fields[i] = f.value;
    } catch (const Error& err) {
      rep.errors.emplace_back(err.what());
      ++out.report.indeterminate_fields;
    }
    out.report.sites.push_back(std::move(rep));
  }
  return out;
}

}  // namespace isingflip
