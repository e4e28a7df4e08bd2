#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <span>

#include "isingflip/model.hpp"
#include "isingflip/simd/dispatch.hpp"

namespace isingflip::simd {

/// i-masks of the three cycle patterns over the eight intervals.
inline constexpr std::array<std::uint8_t, 3> kCycleMasks = {0x33, 0x63, 0x66};
/// Weight of each pattern in Z.
inline constexpr std::array<int, 3> kCycleWeights = {1, -2, 1};

/// Windows where (a, b) realizes pattern p for the pair (i, j) [forward] and
/// for (j, i) [backward].
struct PatternCounts {
  std::array<std::uint64_t, 3> forward{};
  std::array<std::uint64_t, 3> backward{};
};

/// a[w] == m and b[w] == ~m counts as forward; the swapped match as backward.
void cycle_scan(const std::uint8_t* a, const std::uint8_t* b, std::size_t count,
                PatternCounts& out);
void cycle_scan(const std::uint8_t* a, const std::uint8_t* b, std::size_t count,
                PatternCounts& out, Level level);

/// out[k] = x^T A x / 2 + h^T x for the configuration with index first + k.
void log_weights(std::size_t n, std::span<const Coupling> couplings,
                 std::span<const double> fields, std::uint64_t first, std::span<double> out);
void log_weights(std::size_t n, std::span<const Coupling> couplings,
                 std::span<const double> fields, std::uint64_t first, std::span<double> out,
                 Level level);

namespace detail {
void cycle_scan_scalar(const std::uint8_t* a, const std::uint8_t* b, std::size_t count,
                       PatternCounts& out);
void cycle_scan_avx2(const std::uint8_t* a, const std::uint8_t* b, std::size_t count,
                     PatternCounts& out);
void log_weights_scalar(std::size_t n, std::span<const Coupling> couplings,
                        std::span<const double> fields, std::uint64_t first,
                        std::span<double> out);
void log_weights_avx2(std::size_t n, std::span<const Coupling> couplings,
                      std::span<const double> fields, std::uint64_t first,
                      std::span<double> out);
}  // namespace detail

}  // namespace isingflip::simd
