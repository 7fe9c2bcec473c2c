#pragma once

#include <algorithm>
#include <cstdlib>
#include <thread>
#include <vector>

namespace qmarkov {

// QMARKOV_THREADS overrides; defaults to the hardware count
inline int thread_count() {
  if (const char* env = std::getenv("QMARKOV_THREADS")) {
    int v = std::atoi(env);
    if (v > 0) return v;
  }
  return std::max(1u, std::thread::hardware_concurrency());
}

// static partition of [0, n); each index is touched by exactly one thread,
// so disjoint writes give identical results for any thread count
template <class F>
void parallel_for(long n, F&& f) {
  const int T = static_cast<int>(std::min<long>(thread_count(), n));
  if (T <= 1) {
    for (long i = 0; i < n; ++i) f(i);
    return;
  }
  std::vector<std::thread> pool;
  const long chunk = (n + T - 1) / T;
  for (int t = 0; t < T; ++t) {
    long lo = t * chunk, hi = std::min(n, lo + chunk);
    if (lo >= hi) break;
    pool.emplace_back([lo, hi, &f] {
      for (long i = lo; i < hi; ++i) f(i);
    });
  }
  for (auto& th : pool) th.join();
}

}  // namespace qmarkov
