// SPDX-License-Identifier: MIT
#pragma once

#include <cstdint>
#include <cstdlib>
#include <string>
#include <thread>
#include <vector>

namespace scf {

// Worker count for data-parallel loops. Controlled by the SCF_THREADS
// environment variable; 0 or unset means one worker per hardware thread.
inline unsigned worker_count() {
  unsigned n = 0;
  if (const char* env = std::getenv("SCF_THREADS")) {
    char* end = nullptr;
    const long v = std::strtol(env, &end, 10);
    if (end != env && v > 0) n = static_cast<unsigned>(v);
  }
  if (n == 0) n = std::thread::hardware_concurrency();
  return n == 0 ? 1 : n;
}

namespace detail {
inline thread_local bool inside_parallel_region = false;
}

// Runs body(i) for i in [begin, end), statically chunked over workers.
// Every iteration writes disjoint state, so the split never changes
// results. Nested calls from inside a worker run serially.
template <class Body>
inline void parallel_for(std::int64_t begin, std::int64_t end, Body&& body) {
  const std::int64_t n = end - begin;
  if (n <= 0) return;
  const unsigned workers = worker_count();
  if (workers <= 1 || n == 1 || detail::inside_parallel_region) {
    for (std::int64_t i = begin; i < end; ++i) body(i);
    return;
  }
  const unsigned used = static_cast<unsigned>(
      n < static_cast<std::int64_t>(workers) ? n : workers);
  std::vector<std::thread> pool;
  pool.reserve(used);
  for (unsigned w = 0; w < used; ++w) {
    const std::int64_t lo = begin + n * w / used;
    const std::int64_t hi = begin + n * (w + 1) / used;
    pool.emplace_back([lo, hi, &body] {
      detail::inside_parallel_region = true;
      for (std::int64_t i = lo; i < hi; ++i) body(i);
      detail::inside_parallel_region = false;
    });
  }
  for (auto& t : pool) t.join();
}

// Number of chunks parallel_chunks will use for n items.
inline unsigned chunk_count(std::int64_t n) {
  if (n <= 0) return 0;
  const unsigned workers =
      detail::inside_parallel_region ? 1 : worker_count();
  if (workers <= 1 || n == 1) return 1;
  return static_cast<unsigned>(n < static_cast<std::int64_t>(workers)
                                   ? n
                                   : workers);
}

// Runs body(chunk, lo, hi) once per worker chunk, chunk < chunk_count(n).
// Intended for reductions into per-chunk buffers whose merge is exact in
// any order (integer counts): totals are then identical for every worker
// count.
template <class Body>
inline void parallel_chunks(std::int64_t begin, std::int64_t end, Body&& body) {
  const std::int64_t n = end - begin;
  if (n <= 0) return;
  const unsigned used = chunk_count(n);
  if (used <= 1) {
    body(0u, begin, end);
    return;
  }
  std::vector<std::thread> pool;
  pool.reserve(used);
  for (unsigned w = 0; w < used; ++w) {
    const std::int64_t lo = begin + n * w / used;
    const std::int64_t hi = begin + n * (w + 1) / used;
    pool.emplace_back([w, lo, hi, &body] {
      detail::inside_parallel_region = true;
      body(w, lo, hi);
      detail::inside_parallel_region = false;
    });
  }
  for (auto& t : pool) t.join();
}

}  // namespace scf
