#include "isingflip/parallel.hpp"

#include <algorithm>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace isingflip {

std::size_t resolve_jobs(std::size_t jobs, std::size_t count) {
  if (jobs == 0) {
    jobs = std::max<std::size_t>(1, std::thread::hardware_concurrency());
  }
  return std::max<std::size_t>(1, std::min(jobs, count));
}

void parallel_chunks(std::size_t count, std::size_t jobs,
                     const std::function<void(std::size_t, std::size_t, std::size_t)>& fn) {
  if (count == 0) {
    return;
  }
  const std::size_t chunks = resolve_jobs(jobs, count);
  if (chunks == 1) {
    fn(0, count, 0);
    return;
  }
  std::exception_ptr first_error;
  std::mutex error_mutex;
  std::vector<std::thread> workers;
  workers.reserve(chunks);
  for (std::size_t c = 0; c < chunks; ++c) {
    const std::size_t begin = count * c / chunks;
    const std::size_t end = count * (c + 1) / chunks;
    workers.emplace_back([&, begin, end, c] {
      try {
        fn(begin, end, c);
      } catch (...) {
        std::lock_guard<std::mutex> lock(error_mutex);
        if (!first_error) {
          first_error = std::current_exception();
        }
      }
    });
  }
  for (auto& w : workers) {
    w.join();
  }
  if (first_error) {
    std::rethrow_exception(first_error);
  }
}

}  // namespace isingflip
