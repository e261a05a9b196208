#pragma once

#include <algorithm>
#include <atomic>
#include <exception>
#include <functional>
#include <optional>
#include <thread>
#include <vector>

namespace invcarson {

/// Runs fn(i) for i in [0, count) on up to workers threads and returns the
/// results in index order. The exception of the lowest failing index is
/// rethrown after all work finishes.
template <class R>
std::vector<R> parallel_map(int count, int workers, const std::function<R(int)>& fn) {
  std::vector<std::optional<R>> slots(static_cast<std::size_t>(std::max(count, 0)));
  std::vector<std::exception_ptr> errors(slots.size());
  std::atomic<int> next{0};
  auto work = [&] {
    for (int i = next++; i < count; i = next++) {
      try {
        slots[i].emplace(fn(i));
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  };
  const int n = std::clamp(workers, 1, std::max(count, 1));
  if (n == 1) {
    work();
  } else {
    std::vector<std::thread> pool;
    pool.reserve(n);
    for (int t = 0; t < n; ++t) pool.emplace_back(work);
    for (auto& t : pool) t.join();
  }
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
  std::vector<R> out;
  out.reserve(slots.size());
  for (auto& s : slots) out.push_back(std::move(*s));
  return out;
}

/// Worker count used when none is given: the hardware concurrency, at least 1.
inline int default_workers() { return std::max(1u, std::thread::hardware_concurrency()); }

} // namespace invcarson
