// Copyright (C) 2026 The tse Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <algorithm>
#include <atomic>
#include <cstddef>
#include <exception>
#include <thread>
#include <vector>

namespace tse {

/// Runs fn(i) for i in [0, n) on up to `workers` threads. Returns one
/// exception slot per index (null on success) so callers decide the policy.
template <typename Fn>
std::vector<std::exception_ptr> parallel_for(std::size_t n, int workers, Fn&& fn) {
  std::vector<std::exception_ptr> errors(n);
  auto run_one = [&](std::size_t i) {
    try {
      fn(i);
    } catch (...) {
      errors[i] = std::current_exception();
    }
  };
  const std::size_t threads = std::min<std::size_t>(n, static_cast<std::size_t>(std::max(workers, 1)));
  if (threads <= 1) {
    for (std::size_t i = 0; i < n; ++i) run_one(i);
    return errors;
  }
  std::atomic<std::size_t> next{0};
  {
    std::vector<std::jthread> pool;
    pool.reserve(threads);
    for (std::size_t t = 0; t < threads; ++t) {
      pool.emplace_back([&] {
        for (std::size_t i = next++; i < n; i = next++) run_one(i);
      });
    }
  }
  return errors;
}

/// parallel_for that rethrows the lowest-index failure.
template <typename Fn>
void parallel_for_all(std::size_t n, int workers, Fn&& fn) {
  for (auto& e : parallel_for(n, workers, std::forward<Fn>(fn))) {
    if (e) std::rethrow_exception(e);
  }
}

}  // namespace tse
