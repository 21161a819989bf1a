#pragma once

#include <cstddef>
#include <functional>

namespace dichotome {

/// Worker cap used by parallel_rows. Defaults to DICHOTOME_THREADS when set,
/// otherwise the hardware concurrency.
std::size_t thread_count();
void set_thread_count(std::size_t n);

/// Splits [0, rows) into contiguous chunks and runs body(begin, end) on each,
/// one chunk per worker. Bodies must only write rows they own.
void parallel_rows(std::ptrdiff_t rows, const std::function<void(std::ptrdiff_t, std::ptrdiff_t)>& body);

/// Runs body(i) for every i in [0, n), distributing indices over workers.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& body);

}  // namespace dichotome
