#ifndef RDABC_PARALLEL_HPP_
#define RDABC_PARALLEL_HPP_

#include <exception>
#include <functional>
#include <thread>
#include <vector>

namespace rdabc {

// Runs body(i) for i in [0, n) on up to `threads` workers.  Work units must be
// independent; results must not depend on scheduling (callers pass per-unit
// seeds).  The first exception thrown by any unit is rethrown.
inline void parallel_for(int n, int threads, const std::function<void(int)>& body) {
  if (n <= 0) return;
  if (threads <= 0) threads = static_cast<int>(std::thread::hardware_concurrency());
  threads = std::max(1, std::min(threads, n));
  if (threads == 1) {
    for (int i = 0; i < n; ++i) body(i);
    return;
  }
  std::vector<std::thread> pool;
  std::vector<std::exception_ptr> errors(static_cast<std::size_t>(threads));
  for (int t = 0; t < threads; ++t) {
    pool.emplace_back([&, t] {
      try {
        for (int i = t; i < n; i += threads) body(i);
      } catch (...) {
        errors[static_cast<std::size_t>(t)] = std::current_exception();
      }
    });
  }
  for (auto& th : pool) th.join();
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
}

}  // namespace rdabc

#endif  // RDABC_PARALLEL_HPP_
