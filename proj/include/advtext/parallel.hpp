#pragma once

#include <algorithm>
#include <atomic>
#include <cstddef>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace advtext {

/// Runs fn(i) for every i in [0, n) on up to `jobs` threads. Work items must
/// write only to their own slot. If any item throws, the exception of the
/// lowest failing index is rethrown together with that index.
template <typename Fn>
void parallel_for(std::size_t n, std::size_t jobs, Fn&& fn, std::size_t* failed_index = nullptr) {
  std::size_t first_failure = n;
  std::exception_ptr failure;
  std::mutex mu;
  auto run_one = [&](std::size_t i) {
    try {
      fn(i);
    } catch (...) {
      std::lock_guard lock(mu);
      if (i < first_failure) {
        first_failure = i;
        failure = std::current_exception();
      }
    }
  };
  if (jobs <= 1 || n <= 1) {
    for (std::size_t i = 0; i < n; ++i) run_one(i);
  } else {
    std::atomic<std::size_t> next{0};
    std::vector<std::thread> pool;
    const std::size_t workers = std::min(jobs, n);
    pool.reserve(workers);
    for (std::size_t w = 0; w < workers; ++w) {
      pool.emplace_back([&] {
        for (std::size_t i = next++; i < n; i = next++) run_one(i);
      });
    }
    for (auto& t : pool) t.join();
  }
  if (failure) {
    if (failed_index) *failed_index = first_failure;
    std::rethrow_exception(failure);
  }
}

}  // namespace advtext
