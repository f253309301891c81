#pragma once

#include <cstdlib>
#include <thread>
#include <vector>

namespace scarot {

/// Worker cap: SCAROT_THREADS if set (minimum 1), hardware concurrency
/// otherwise.
inline int thread_budget() {
  if (const char* env = std::getenv("SCAROT_THREADS")) {
    int n = std::atoi(env);
    if (n >= 1) return n;
  }
  unsigned hw = std::thread::hardware_concurrency();
  return hw == 0 ? 1 : static_cast<int>(hw);
}

/// Runs f(i) for i in [0, n) across at most thread_budget() threads.
/// Callers write results into per-index slots and reduce sequentially,
/// keeping outcomes independent of scheduling.
template <class F>
void parallel_for(int n, F&& f) {
  const int workers = std::min(n, thread_budget());
  if (workers <= 1) {
    for (int i = 0; i < n; ++i) f(i);
    return;
  }
  std::vector<std::thread> pool;
  pool.reserve(workers);
  for (int w = 0; w < workers; ++w) {
    pool.emplace_back([&, w] {
      for (int i = w; i < n; i += workers) f(i);
    });
  }
  for (auto& t : pool) t.join();
}

}  // namespace scarot
