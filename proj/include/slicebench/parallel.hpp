#pragma once

#include <functional>

namespace slicebench {

/// Worker cap from SLICEBENCH_THREADS, else the hardware concurrency.
int worker_count();

/// Runs body(i) for i in [0, n). Work is spread over worker_count() threads
/// unless called from inside another parallel_for, in which case it runs
/// inline. Callers must make body(i) independent of scheduling.
void parallel_for(int n, const std::function<void(int)>& body);

}  // namespace slicebench
