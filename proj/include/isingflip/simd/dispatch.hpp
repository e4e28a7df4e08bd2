#pragma once

#include <optional>
#include <string_view>

namespace isingflip::simd {

enum class Level { kScalar, kAvx2 };

const char* to_string(Level level) noexcept;
std::optional<Level> parse_level(std::string_view name) noexcept;

/// Best level the CPU supports.
Level detected_level() noexcept;

/// Level used by the kernels: detected_level(), lowered by ISINGFLIP_SIMD
/// (scalar|avx2) or set_level(). Requests above the detected level are capped.
Level active_level() noexcept;
void set_level(Level level) noexcept;
void reset_level() noexcept;

}  // namespace isingflip::simd
