#pragma once

#include <cstddef>
#include <functional>

namespace isingflip {

/// Splits [0, count) into at most `jobs` contiguous chunks and runs
/// fn(begin, end, chunk) on each, one thread per chunk. jobs == 0 means the
/// hardware concurrency. The first exception thrown by a chunk is rethrown.
void parallel_chunks(std::size_t count, std::size_t jobs,
                     const std::function<void(std::size_t, std::size_t, std::size_t)>& fn);

std::size_t resolve_jobs(std::size_t jobs, std::size_t count);

}  // namespace isingflip
