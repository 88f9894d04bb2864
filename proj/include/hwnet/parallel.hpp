#pragma once

#include <algorithm>
#include <exception>
#include <thread>
#include <vector>

namespace hwnet {

// Runs fn(r) for r in [0, count) on up to hardware_concurrency threads.
template <class Fn>
void parallel_for(int count, Fn&& fn) {
  if (count <= 0) return;
  const unsigned workers =
      std::max(1u, std::min<unsigned>(std::thread::hardware_concurrency(), static_cast<unsigned>(count)));
  if (workers == 1) {
    for (int r = 0; r < count; ++r) fn(r);
    return;
  }
  std::vector<std::thread> pool;
  std::vector<std::exception_ptr> errors(workers);
  for (unsigned w = 0; w < workers; ++w) {
    pool.emplace_back([&, w] {
      try {
        for (int r = static_cast<int>(w); r < count; r += static_cast<int>(workers)) fn(r);
      } catch (...) {
        errors[w] = std::current_exception();
      }
    });
  }
  for (auto& th : pool) th.join();
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
}

}  // namespace hwnet
