#include "mfof/parallel.hpp"

#include <algorithm>
#include <thread>
#include <vector>

namespace mfof {

namespace {
int g_threads = 1;
}

int default_threads() { return g_threads; }
void set_default_threads(int threads) { g_threads = std::max(1, threads); }

void parallel_for(std::size_t n, int threads, const std::function<void(std::size_t, std::size_t)>& body) {
  const std::size_t t = threads > 0 ? threads : g_threads;
  if (t == 1 || n < 2 * t) {
    body(0, n);
    return;
  }
  std::vector<std::thread> pool;
  const std::size_t chunk = (n + t - 1) / t;
  for (std::size_t k = 0; k < t; ++k) {
    std::size_t lo = k * chunk, hi = std::min(n, lo + chunk);
    if (lo >= hi) break;
    pool.emplace_back(body, lo, hi);
  }
  for (auto& th : pool) th.join();
}

}  // namespace mfof
