#pragma once

#include <cstddef>
#include <cstdint>
#include <limits>
#include <string>
#include <string_view>

#include "isingflip/model.hpp"

namespace isingflip {

enum class GraphFamily {
  kEmpty,
  kBoundedDegree,  // uniform edge proposals, rejecting those that exceed d
  kRegular,        // configuration model, every site of degree d
  kMatching,       // random perfect matching
  kPath,
  kGrid,
};

enum class SignScheme { kPositive, kNegative, kRandom };

std::string to_string(GraphFamily family);
GraphFamily parse_family(std::string_view name);
std::string to_string(SignScheme signs);
SignScheme parse_signs(std::string_view name);

struct GeneratorSpec {
  GraphFamily family = GraphFamily::kBoundedDegree;
  std::size_t n = 0;
  std::size_t max_degree = 3;
  /// Target edge count for kBoundedDegree; 0 means floor(n * d / 2).
  std::size_t edge_count = 0;
  /// kGrid: row count (n must be divisible by it).
  std::size_t grid_rows = 0;
  /// Isolated edges planted on the last 2k sites; the family fills the rest.
  std::size_t planted_matching = 0;
  /// Magnitudes are drawn uniformly from [coupling_min, coupling_max].
  double coupling_min = 0.4;
  double coupling_max = 0.4;
  SignScheme signs = SignScheme::kPositive;
  /// Fields are drawn uniformly from [-field_max, field_max].
  double field_max = 0.0;
  /// Width bound lambda checked against the worst case d * a_max + h_max.
  double width = std::numeric_limits<double>::infinity();
  std::size_t max_attempts = 1000;

  void validate() const;
  ModelBounds bounds() const;
};

/// Deterministic in (spec, seed); the result satisfies spec.bounds().
IsingModel random_model(const GeneratorSpec& spec, std::uint64_t seed);

}  // namespace isingflip
