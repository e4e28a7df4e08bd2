#include "isingflip/simd/dispatch.hpp"

#include <atomic>
#include <cstdlib>

namespace isingflip::simd {

namespace {

constexpr int kUnset = -1;
std::atomic<int> g_override{kUnset};

Level cap(Level requested) noexcept {
  return static_cast<int>(requested) > static_cast<int>(detected_level()) ? detected_level()
                                                                           : requested;
}

Level from_environment() noexcept {
  if (const char* env = std::getenv("ISINGFLIP_SIMD")) {
    if (auto level = parse_level(env)) {
      return cap(*level);
    }
  }
  return detected_level();
}

}  // namespace

const char* to_string(Level level) noexcept {
  switch (level) {
    case Level::kScalar:
      return "scalar";
    case Level::kAvx2:
      return "avx2";
  }
  return "scalar";
}

std::optional<Level> parse_level(std::string_view name) noexcept {
  if (name == "scalar") {
    return Level::kScalar;
  }
  if (name == "avx2") {
    return Level::kAvx2;
  }
  return std::nullopt;
}

Level detected_level() noexcept {
#if defined(__x86_64__) || defined(__i386__)
  static const Level level = __builtin_cpu_supports("avx2") ? Level::kAvx2 : Level::kScalar;
  return level;
#else
  return Level::kScalar;
#endif
}

Level active_level() noexcept {
  const int forced = g_override.load(std::memory_order_relaxed);
  if (forced != kUnset) {
    return static_cast<Level>(forced);
  }
  static const Level env_level = from_environment();
  return env_level;
}

void set_level(Level level) noexcept {
  g_override.store(static_cast<int>(cap(level)), std::memory_order_relaxed);
}

void reset_level() noexcept { g_override.store(kUnset, std::memory_order_relaxed); }

}  // namespace isingflip::simd
