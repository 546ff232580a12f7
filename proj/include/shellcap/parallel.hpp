#pragma once

// Thin wrapper over the OpenMP runtime. Every parallel kernel in the library
// reduces in a fixed order, so results do not depend on the thread count.

namespace shellcap {

/// Sets the worker count for subsequent kernels; 0 restores the runtime
/// default (OMP_NUM_THREADS or the hardware concurrency).
void set_threads(int n);

int max_threads();

}  // namespace shellcap
