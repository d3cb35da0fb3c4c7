// Copyright 2026 The miplgp Authors. All Rights Reserved.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <algorithm>
#include <atomic>
#include <cstddef>
#include <cstdlib>
#include <exception>
#include <mutex>
#include <string>
#include <thread>
#include <vector>

namespace miplgp {

namespace detail {
inline std::atomic<int>& max_threads_storage() {
  static std::atomic<int> value{1};
  return value;
}
}  // namespace detail

inline int max_threads() { return detail::max_threads_storage().load(); }

inline void set_max_threads(int n) { detail::max_threads_storage().store(std::max(1, n)); }

// Reads MIPLGP_THREADS; unset or invalid values leave the cap at 1.
inline void configure_threads_from_env() {
  const char* raw = std::getenv("MIPLGP_THREADS");
  if (raw == nullptr) return;
  try {
    set_max_threads(std::stoi(raw));
  } catch (const std::exception&) {
  }
}

// Runs body(i) for i in [0, count). Each index is handled by exactly one
// worker, so results written to per-index slots stay deterministic.
template <typename Body>
void parallel_for(std::size_t count, Body&& body) {
  const auto workers =
      std::min<std::size_t>(count, static_cast<std::size_t>(max_threads()));
  if (workers <= 1) {
    for (std::size_t i = 0; i < count; ++i) body(i);
    return;
  }
  std::exception_ptr failure;
  std::mutex failure_mutex;
  std::vector<std::thread> pool;
  pool.reserve(workers);
  for (std::size_t w = 0; w < workers; ++w) {
    pool.emplace_back([&, w] {
      for (std::size_t i = w; i < count; i += workers) {
        try {
          body(i);
        } catch (...) {
          std::lock_guard lock(failure_mutex);
          if (!failure) failure = std::current_exception();
        }
      }
    });
  }
  for (auto& t : pool) t.join();
  if (failure) std::rethrow_exception(failure);
}

}  // namespace miplgp
