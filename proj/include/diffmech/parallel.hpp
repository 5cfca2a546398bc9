// Copyright 2026 The diffmech Authors.
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

#include <cstddef>
#include <exception>
#include <mutex>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace diffmech {

/// kSerial is the reference path; kParallel must produce bit-identical
/// results (every task owns its random stream and results are reduced in
/// index order).
enum class Execution { kSerial, kParallel };

struct ExecutionOptions {
  Execution mode = Execution::kParallel;
  /// 0 = OpenMP default.
  int jobs = 0;
};

inline int worker_count(const ExecutionOptions& exec) {
#ifdef _OPENMP
  if (exec.mode == Execution::kParallel) {
    return exec.jobs > 0 ? exec.jobs : omp_get_max_threads();
  }
#endif
  (void)exec;
  return 1;
}

/// Calls fn(index, worker) for index in [0, count). `worker` is in
/// [0, worker_count(exec)) and identifies per-thread scratch. The first
/// exception thrown by any task is rethrown after the loop.
template <class Fn>
void parallel_for(std::size_t count, const ExecutionOptions& exec, Fn&& fn) {
  if (exec.mode == Execution::kSerial || worker_count(exec) == 1) {
    for (std::size_t i = 0; i < count; ++i) fn(i, 0);
    return;
  }
#ifdef _OPENMP
  std::exception_ptr error;
  std::mutex error_mu;
  const auto n = static_cast<long long>(count);
#pragma omp parallel for schedule(dynamic) num_threads(worker_count(exec))
  for (long long i = 0; i < n; ++i) {
    try {
      fn(static_cast<std::size_t>(i), omp_get_thread_num());
    } catch (...) {
      std::lock_guard lock(error_mu);
      if (!error) error = std::current_exception();
    }
  }
  if (error) std::rethrow_exception(error);
#endif
}

}  // namespace diffmech
