#include "semilab/parallel.hpp"

#include <algorithm>
#include <atomic>
#include <exception>
#include <thread>
#include <vector>

namespace semilab {

namespace {
std::atomic<unsigned> g_workers{1};
}

void set_workers(unsigned count) { g_workers = std::max(1u, count); }

unsigned workers() { return g_workers; }

void parallel_for(std::size_t count, const std::function<void(std::size_t)>& fn) {
  const std::size_t threads = std::min<std::size_t>(workers(), count);
  if (threads <= 1) {
    for (std::size_t i = 0; i < count; ++i) fn(i);
    return;
  }
  std::vector<std::exception_ptr> errors(count);
  std::atomic<std::size_t> next{0};
  auto run = [&] {
    for (std::size_t i; (i = next++) < count;) {
      try {
        fn(i);
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  };
  std::vector<std::thread> pool;
  pool.reserve(threads);
  for (std::size_t t = 0; t < threads; ++t) pool.emplace_back(run);
  for (auto& th : pool) th.join();
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
}

}  // namespace semilab
