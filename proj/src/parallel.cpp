#include "stinla/parallel.hpp"

#include <atomic>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace stinla {

void parallel_for(Index n, int threads, const std::function<void(Index)>& fn) {
  if (n <= 0) return;
  if (threads <= 1 || n == 1) {
    for (Index i = 0; i < n; ++i) fn(i);
    return;
  }
  const int workers = int(std::min<Index>(threads, n));
  std::atomic<Index> next{0};
  std::exception_ptr first_error;
  std::mutex error_mutex;
  auto run = [&]() {
    while (true) {
      const Index i = next.fetch_add(1);
      if (i >= n) return;
      try {
        fn(i);
      } catch (...) {
        std::lock_guard<std::mutex> lock(error_mutex);
        if (!first_error) first_error = std::current_exception();
      }
    }
  };
  std::vector<std::thread> pool;
  pool.reserve(workers);
  for (int t = 0; t < workers; ++t) pool.emplace_back(run);
  for (auto& t : pool) t.join();
  if (first_error) std::rethrow_exception(first_error);
}

}  // namespace stinla
