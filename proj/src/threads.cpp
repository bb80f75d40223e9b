#include "dmlab/threads.hpp"

#include <algorithm>
#include <cstdlib>
#include <thread>
#include <vector>

namespace dmlab {

int hardwareThreads() {
  unsigned n = std::thread::hardware_concurrency();
  return n == 0 ? 1 : static_cast<int>(n);
}

int resolveThreadCount(int requested) {
  if (requested > 0) return requested;
  if (const char* env = std::getenv("DMLAB_THREADS")) {
    int n = std::atoi(env);
    if (n > 0) return n;
  }
  return hardwareThreads();
}

void parallelFor(std::int64_t n, int threads,
                 const std::function<void(std::int64_t, std::int64_t)>& chunk) {
  if (n <= 0) return;
  threads = static_cast<int>(
      std::max<std::int64_t>(1, std::min<std::int64_t>(threads, n)));
  if (threads == 1) {
    chunk(0, n);
    return;
  }
  std::vector<std::thread> pool;
  pool.reserve(threads);
  std::int64_t base = n / threads;
  std::int64_t extra = n % threads;
  std::int64_t begin = 0;
  for (int t = 0; t < threads; ++t) {
    std::int64_t len = base + (t < extra ? 1 : 0);
    std::int64_t end = begin + len;
    pool.emplace_back([&chunk, begin, end] { chunk(begin, end); });
    begin = end;
  }
  for (auto& th : pool) th.join();
}

}  // namespace dmlab
