#pragma once

#include <filesystem>
#include <string>
#include <string_view>

#include "isingflip/trace.hpp"

namespace isingflip {

enum class TraceFormat { kJsonl, kBinary };

/// Header line {"n", "horizon", "initial"} then one {"t", "s"} line per flip.
std::string trace_to_jsonl(const FlipTrace& trace);
FlipTrace trace_from_jsonl(std::string_view text);

/// "FLT1", u32 n, f64 horizon, ceil(n/8) bytes of spins (bit set = +1,
/// LSB first), u64 count, then count x (f64 time, u32 site). Little-endian.
std::string trace_to_binary(const FlipTrace& trace);
FlipTrace trace_from_binary(std::string_view bytes);

/// Sniffs the magic bytes.
FlipTrace trace_from_bytes(std::string_view bytes);

void save_trace(const FlipTrace& trace, const std::filesystem::path& path,
                TraceFormat format);
/// Format chosen from the extension: ".jsonl" is text, anything else binary.
void save_trace(const FlipTrace& trace, const std::filesystem::path& path);
FlipTrace load_trace(const std::filesystem::path& path);

}  // namespace isingflip
