#include "isingflip/structure.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>

#include "isingflip/error.hpp"
#include "isingflip/parallel.hpp"
#include "isingflip/simd/kernels.hpp"

namespace isingflip {

namespace {

constexpr std::size_t kCycleLength = 8;
constexpr std::size_t kWindowBlock = std::size_t{1} << 15;

double window_start(const CycleWindowConfig& cfg, std::size_t l) {
  return cfg.spacing * static_cast<double>(l);
}

double interval_edge(double start, double eps, std::size_t k) {
  return start + static_cast<double>(k) * eps;
}

}  // namespace

FlipPattern FlipPattern::parse(std::string_view labels) {
  if (labels.empty()) {
    fail(ErrorKind::kInvalidArgument, "flip pattern must not be empty");
  }
  for (char c : labels) {
    if (c != 'i' && c != 'j') {
      fail(ErrorKind::kInvalidArgument,
           "flip pattern '" + std::string(labels) + "' may only contain 'i' and 'j'");
    }
  }
  FlipPattern p;
  p.labels_ = std::string(labels);
  return p;
}

std::uint8_t FlipPattern::mask() const {
  if (labels_.size() > 8) {
    fail(ErrorKind::kInvalidArgument, "mask() needs a pattern of length <= 8");
  }
  std::uint8_t m = 0;
  for (std::size_t k = 0; k < labels_.size(); ++k) {
    if (labels_[k] == 'i') {
      m = static_cast<std::uint8_t>(m | (1U << k));
    }
  }
  return m;
}

double CycleWindowConfig::default_eps(std::size_t max_degree) {
  return max_degree == 0 ? 0.05 : std::min(0.05, 0.5 / static_cast<double>(max_degree));
}

void CycleWindowConfig::validate() const {
  if (!(eps > 0.0) || !std::isfinite(eps)) {
    fail(ErrorKind::kInvalidArgument, "eps must be positive");
  }
  if (!(8.0 * eps < spacing)) {
    fail(ErrorKind::kInvalidArgument, "windows overlap: 8 * eps must be below spacing");
  }
  if (!(8.0 * eps < 1.0)) {
    fail(ErrorKind::kInvalidArgument, "8 * eps must be below 1");
  }
  if (!std::isfinite(spacing)) {
    fail(ErrorKind::kInvalidArgument, "spacing must be finite");
  }
}

void StructureConfig::validate() const {
  cycle.validate();
  if (!(tau_bulk > 0.0) || !(tau_match > 0.0)) {
    fail(ErrorKind::kInvalidArgument, "thresholds must be positive");
  }
  if (!(t_bulk >= 0.0) || !(t_match >= 0.0)) {
    fail(ErrorKind::kInvalidArgument, "phase horizons must be >= 0");
  }
  if (!(min_occupancy >= 0.0 && min_occupancy < 0.5)) {
    fail(ErrorKind::kInvalidArgument, "min_occupancy must lie in [0, 0.5)");
  }
}

bool flip_sequence_indicator(const FlipTrace& trace, std::size_t i, std::size_t j, double t,
                             double eps, const FlipPattern& pattern) {
  if (i == j) {
    fail(ErrorKind::kInvalidArgument, "flip pattern needs two distinct sites");
  }
  const double end = interval_edge(t, eps, pattern.size());
  if (!(t >= 0.0) || !(eps > 0.0) || end > trace.horizon()) {
    fail(ErrorKind::kOutOfRange, "window exceeds the trace horizon");
  }
  for (std::size_t k = 0; k < pattern.size(); ++k) {
    const double lo = interval_edge(t, eps, k);
    const double hi = interval_edge(t, eps, k + 1);
    const std::size_t active = pattern.first_at(k) ? i : j;
    const std::size_t quiet = pattern.first_at(k) ? j : i;
    if (trace.flip_count(active, lo, hi) != 1 || trace.flip_count(quiet, lo, hi) != 0) {
      return false;
    }
  }
  return true;
}

int cycle_statistic(const FlipTrace& trace, std::size_t i, std::size_t j, double t,
                    double eps) {
  static const FlipPattern positive = FlipPattern::parse(kCyclePositive);
  static const FlipPattern crossed = FlipPattern::parse(kCycleCrossed);
  static const FlipPattern reverse = FlipPattern::parse(kCycleReverse);
  return static_cast<int>(flip_sequence_indicator(trace, i, j, t, eps, positive)) -
         2 * static_cast<int>(flip_sequence_indicator(trace, i, j, t, eps, crossed)) +
         static_cast<int>(flip_sequence_indicator(trace, i, j, t, eps, reverse));
}

std::size_t window_count(double t_bulk, const CycleWindowConfig& cfg) {
  const double span = t_bulk - 8.0 * cfg.eps;
  if (!(span >= cfg.spacing)) {
    return 0;
  }
  auto count = static_cast<std::size_t>(std::floor(span / cfg.spacing));
  while (count > 0 &&
         interval_edge(window_start(cfg, count), cfg.eps, kCycleLength) > t_bulk) {
    --count;
  }
  return count;
}

namespace {

void fill_codes(std::span<const double> times, const CycleWindowConfig& cfg, std::size_t first,
                std::size_t count, std::uint8_t* out) {
  auto it = std::upper_bound(times.begin(), times.end(), window_start(cfg, first));
  for (std::size_t w = 0; w < count; ++w) {
    const double start = window_start(cfg, first + w);
    while (it != times.end() && *it <= start) {
      ++it;
    }
    std::uint8_t code = 0;
    for (std::size_t k = 0; k < kCycleLength; ++k) {
      const double hi = interval_edge(start, cfg.eps, k + 1);
      std::size_t c = 0;
      while (it != times.end() && *it <= hi) {
        ++c;
        ++it;
      }
      if (c == 1) {
        code = static_cast<std::uint8_t>(code | (1U << k));
      } else if (c > 1) {
        code = 0xFF;
      }
    }
    out[w] = code;
  }
}

}  // namespace

std::vector<std::uint8_t> window_codes(const FlipTrace& trace, std::size_t i,
                                       const CycleWindowConfig& cfg, std::size_t first,
                                       std::size_t count) {
  if (i >= trace.size()) {
    fail(ErrorKind::kOutOfRange, "site outside trace");
  }
  if (first == 0) {
    fail(ErrorKind::kInvalidArgument, "window indices start at 1");
  }
  if (count > 0 &&
      interval_edge(window_start(cfg, first + count - 1), cfg.eps, kCycleLength) > trace.horizon()) {
    fail(ErrorKind::kOutOfRange, "window exceeds the trace horizon");
  }
  std::vector<std::uint8_t> out(count);
  fill_codes(trace.site_times(i), cfg, first, count, out.data());
  return out;
}

CycleAccumulator::CycleAccumulator(std::size_t n)
    : n_(n), m_(n * n, 0), sum_(n * n, 0), sq_(n * n, 0) {}

void CycleAccumulator::add(std::size_t i, std::size_t j, std::int64_t windows, std::int64_t sum,
                           std::int64_t sum_squares) {
  m_[at(i, j)] += windows;
  sum_[at(i, j)] += sum;
  sq_[at(i, j)] += sum_squares;
}

void CycleAccumulator::merge(const CycleAccumulator& other) {
  if (other.n_ != n_) {
    fail(ErrorKind::kInvalidArgument, "accumulator size mismatch");
  }
  for (std::size_t k = 0; k < m_.size(); ++k) {
    m_[k] += other.m_[k];
    sum_[k] += other.sum_[k];
    sq_[k] += other.sq_[k];
  }
}

double CycleAccumulator::mean(std::size_t i, std::size_t j) const {
  const auto m = windows(i, j);
  return m == 0 ? 0.0 : static_cast<double>(sum(i, j)) / static_cast<double>(m);
}

double CycleAccumulator::standard_error(std::size_t i, std::size_t j) const {
  const auto m = static_cast<double>(windows(i, j));
  if (m < 2.0) {
    return 0.0;
  }
  const double mu = mean(i, j);
  const double var =
      std::max(0.0, (static_cast<double>(sum_squares(i, j)) / m - mu * mu) * m / (m - 1.0));
  return std::sqrt(var / m);
}

CycleAccumulator accumulate_cycle_statistics(const FlipTrace& trace,
                                             const CycleWindowConfig& cfg, double t_bulk,
                                             std::size_t jobs) {
  cfg.validate();
  if (t_bulk > trace.horizon()) {
    fail(ErrorKind::kOutOfRange, "bulk horizon exceeds the trace");
  }
  const std::size_t n = trace.size();
  const std::size_t windows = window_count(t_bulk, cfg);
  const std::size_t blocks = (windows + kWindowBlock - 1) / kWindowBlock;
  const std::size_t workers = resolve_jobs(jobs, std::max<std::size_t>(blocks, 1));
  std::vector<CycleAccumulator> partial(workers, CycleAccumulator(n));

  parallel_chunks(blocks, workers, [&](std::size_t begin, std::size_t end, std::size_t chunk) {
    CycleAccumulator& acc = partial[chunk];
    std::vector<std::uint8_t> codes(n * kWindowBlock);
    std::vector<char> active(n);
    for (std::size_t b = begin; b < end; ++b) {
      const std::size_t first = 1 + b * kWindowBlock;
      const std::size_t count = std::min(kWindowBlock, windows - b * kWindowBlock);
      for (std::size_t i = 0; i < n; ++i) {
        std::uint8_t* row = codes.data() + i * kWindowBlock;
        fill_codes(trace.site_times(i), cfg, first, count, row);
        active[i] = std::any_of(row, row + count, [](std::uint8_t c) { return c != 0; });
      }
      const auto m = static_cast<std::int64_t>(count);
      for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = i + 1; j < n; ++j) {
          simd::PatternCounts pc;
          if (active[i] && active[j]) {
            simd::cycle_scan(codes.data() + i * kWindowBlock, codes.data() + j * kWindowBlock,
                             count, pc);
          }
          std::int64_t fs = 0, fq = 0, bs = 0, bq = 0;
          for (std::size_t p = 0; p < simd::kCycleMasks.size(); ++p) {
            const std::int64_t wgt = simd::kCycleWeights[p];
            fs += wgt * static_cast<std::int64_t>(pc.forward[p]);
            fq += wgt * wgt * static_cast<std::int64_t>(pc.forward[p]);
            bs += wgt * static_cast<std::int64_t>(pc.backward[p]);
            bq += wgt * wgt * static_cast<std::int64_t>(pc.backward[p]);
          }
          acc.add(i, j, m, fs, fq);
          acc.add(j, i, m, bs, bq);
        }
      }
    }
  });

  CycleAccumulator total(n);
  for (const auto& p : partial) {
    total.merge(p);
  }
  return total;
}

namespace {

double bulk_horizon(const FlipTrace& trace, const StructureConfig& cfg) {
  const double t = cfg.t_bulk > 0.0 ? cfg.t_bulk : trace.horizon();
  if (t > trace.horizon()) {
    fail(ErrorKind::kInsufficientSamples, "trace horizon " + std::to_string(trace.horizon()) +
                                              " is shorter than t_bulk " + std::to_string(t));
  }
  return t;
}

}  // namespace

BulkEdgeResult find_bulk_edges(const FlipTrace& trace, const StructureConfig& cfg) {
  cfg.validate();
  const double t_bulk = bulk_horizon(trace, cfg);
  const std::size_t windows = window_count(t_bulk, cfg.cycle);
  if (windows == 0) {
    fail(ErrorKind::kInsufficientSamples, "trace too short for a single cycle window");
  }
  BulkEdgeResult out;
  out.windows = windows;
  out.stats = accumulate_cycle_statistics(trace, cfg.cycle, t_bulk, cfg.jobs);
  out.graph = Graph(trace.size());
  for (std::size_t i = 0; i < trace.size(); ++i) {
    for (std::size_t j = 0; j < trace.size(); ++j) {
      if (i != j && out.stats.mean(i, j) >= cfg.tau_bulk) {
        out.accepted.emplace_back(static_cast<std::uint32_t>(i), static_cast<std::uint32_t>(j));
        out.graph.add_edge(i, j);
      }
    }
  }
  return out;
}

double conditional_difference(const std::array<double, 4>& p, double min_occupancy) {
  const double plus_j = p[kPlusPlus] + p[kMinusPlus];
  const double minus_j = p[kPlusMinus] + p[kMinusMinus];
  if (plus_j < min_occupancy || minus_j < min_occupancy || plus_j <= 0.0 || minus_j <= 0.0) {
    return std::numeric_limits<double>::quiet_NaN();
  }
  return std::fabs(p[kPlusPlus] / plus_j - p[kPlusMinus] / minus_j);
}

MatchingResult find_matching(const FlipTrace& trace, std::span<const std::uint32_t> isolated,
                             const StructureConfig& cfg, double t_begin, double t_end) {
  cfg.validate();
  if (!(t_end > t_begin) || t_end > trace.horizon()) {
    fail(ErrorKind::kInsufficientSamples, "matching window [" + std::to_string(t_begin) + ", " +
                                              std::to_string(t_end) +
                                              "] is empty or exceeds the trace");
  }
  std::vector<std::uint32_t> sites(isolated.begin(), isolated.end());
  std::sort(sites.begin(), sites.end());
  sites.erase(std::unique(sites.begin(), sites.end()), sites.end());
  MatchingResult out;
  for (std::size_t a = 0; a < sites.size(); ++a) {
    for (std::size_t b = a + 1; b < sites.size(); ++b) {
      PairSeparation ps;
      ps.pair = make_edge(sites[a], sites[b]);
      ps.occupancy = trace.occupation_time(ps.pair.u, ps.pair.v, t_begin, t_end);
      ps.difference = conditional_difference(ps.occupancy, cfg.min_occupancy);
      ps.indeterminate = std::isnan(ps.difference);
      if (ps.indeterminate) {
        out.indeterminate.push_back(ps.pair);
      } else if (ps.difference >= cfg.tau_match) {
        out.edges.push_back(ps.pair);
      }
      out.pairs.push_back(ps);
    }
  }
  return out;
}

MatchingResult find_matching(const FlipTrace& trace, std::span<const std::uint32_t> isolated,
                             const StructureConfig& cfg) {
  if (cfg.match_source == MatchSource::kReuse) {
    const double end = cfg.t_match > 0.0 ? cfg.t_match : trace.horizon();
    return find_matching(trace, isolated, cfg, 0.0, end);
  }
  if (!(cfg.t_bulk > 0.0)) {
    fail(ErrorKind::kInvalidArgument,
         "tail matching needs t_bulk > 0; set t_bulk or use match_source = reuse");
  }
  const double end = cfg.t_match > 0.0 ? cfg.t_bulk + cfg.t_match : trace.horizon();
  return find_matching(trace, isolated, cfg, cfg.t_bulk, end);
}

namespace {

StructureResult combine(BulkEdgeResult bulk, std::size_t n,
                        const std::function<MatchingResult(std::span<const std::uint32_t>)>& match) {
  StructureResult out;
  out.graph = bulk.graph;
  for (std::size_t v = 0; v < n; ++v) {
    if (bulk.graph.degree(v) == 0) {
      out.isolated.push_back(static_cast<std::uint32_t>(v));
    }
  }
  if (out.isolated.size() >= 2) {
    out.matching = match(out.isolated);
    for (const auto& e : out.matching.edges) {
      out.graph.add_edge(e.u, e.v);
    }
  }
  out.bulk = std::move(bulk);
  return out;
}

}  // namespace

StructureResult learn_structure(const FlipTrace& trace, const StructureConfig& cfg) {
  return combine(find_bulk_edges(trace, cfg), trace.size(),
                 [&](std::span<const std::uint32_t> iso) { return find_matching(trace, iso, cfg); });
}

StructureResult learn_structure(const FlipTrace& bulk_trace, const FlipTrace& match_trace,
                                const StructureConfig& cfg) {
  if (bulk_trace.size() != match_trace.size()) {
    fail(ErrorKind::kInvalidArgument, "phase traces cover different site counts");
  }
  return combine(find_bulk_edges(bulk_trace, cfg), bulk_trace.size(),
                 [&](std::span<const std::uint32_t> iso) {
                   const double end = cfg.t_match > 0.0 ? cfg.t_match : match_trace.horizon();
                   return find_matching(match_trace, iso, cfg, 0.0, end);
                 });
}

}  // namespace isingflip
