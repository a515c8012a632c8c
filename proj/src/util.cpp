#include "cmaccm/util.hpp"

#include <algorithm>
#include <cstdlib>
#include <thread>
#include <vector>

namespace cmaccm {

int thread_count() {
  if (const char* env = std::getenv("CMACCM_THREADS")) {
    int n = std::atoi(env);
    if (n >= 1) return std::min(n, 256);
  }
  return 1;
}

void parallel_for(std::size_t n, const std::function<void(std::size_t)>& fn) {
  const int threads = thread_count();
  if (threads <= 1 || n < 4096) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::vector<std::thread> pool;
  pool.reserve(threads);
  const std::size_t chunk = (n + threads - 1) / threads;
  for (int t = 0; t < threads; ++t) {
    const std::size_t lo = t * chunk;
    const std::size_t hi = std::min(n, lo + chunk);
    if (lo >= hi) break;
    pool.emplace_back([lo, hi, &fn] {
      for (std::size_t i = lo; i < hi; ++i) fn(i);
    });
  }
  for (auto& th : pool) th.join();
}

}  // namespace cmaccm
