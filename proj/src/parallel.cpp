#include "dichotome/parallel.hpp"

#include <algorithm>
#include <atomic>
#include <cstdlib>
#include <exception>
#include <mutex>
#include <string>
#include <thread>
#include <vector>

namespace dichotome {
namespace {

std::size_t default_threads() {
  if (const char* env = std::getenv("DICHOTOME_THREADS")) {
    try {
      const long n = std::stol(env);
      if (n > 0) return static_cast<std::size_t>(n);
    } catch (const std::exception&) {
    }
  }
  return std::max(1u, std::thread::hardware_concurrency());
}

std::atomic<std::size_t>& thread_setting() {
  static std::atomic<std::size_t> n{default_threads()};
  return n;
}

// Runs `work(worker)` on `workers` threads and rethrows the first exception.
void run_workers(std::size_t workers, const std::function<void(std::size_t)>& work) {
  if (workers <= 1) {
    work(0);
    return;
  }
  std::exception_ptr failure;
  std::mutex failure_mutex;
  std::vector<std::jthread> pool;
  pool.reserve(workers);
  for (std::size_t w = 0; w < workers; ++w) {
    pool.emplace_back([&, w] {
      try {
        work(w);
      } catch (...) {
        std::lock_guard lock(failure_mutex);
        if (!failure) failure = std::current_exception();
      }
    });
  }
  pool.clear();
  if (failure) std::rethrow_exception(failure);
}

}  // namespace

std::size_t thread_count() { return thread_setting().load(); }

void set_thread_count(std::size_t n) { thread_setting().store(std::max<std::size_t>(1, n)); }

void parallel_rows(std::ptrdiff_t rows, const std::function<void(std::ptrdiff_t, std::ptrdiff_t)>& body) {
  if (rows <= 0) return;
  const auto workers = std::min<std::size_t>(thread_count(), static_cast<std::size_t>(rows));
  const std::ptrdiff_t chunk = (rows + static_cast<std::ptrdiff_t>(workers) - 1) /
                               static_cast<std::ptrdiff_t>(workers);
  run_workers(workers, [&](std::size_t w) {
    const std::ptrdiff_t begin = static_cast<std::ptrdiff_t>(w) * chunk;
    const std::ptrdiff_t end = std::min(rows, begin + chunk);
    if (begin < end) body(begin, end);
  });
}

void parallel_for(std::size_t n, const std::function<void(std::size_t)>& body) {
  if (n == 0) return;
  const auto workers = std::min(thread_count(), n);
  std::atomic<std::size_t> next{0};
  run_workers(workers, [&](std::size_t) {
    for (std::size_t i = next.fetch_add(1); i < n; i = next.fetch_add(1)) body(i);
  });
}

}  // namespace dichotome
