#pragma once

namespace blurforge {

// Resolves the worker-pool size: an explicit --threads value wins, then the
// BLURFORGE_THREADS environment variable, then hardware parallelism.
// Returns the value that was applied to the OpenMP runtime.
int configure_threads(int requested = 0);

// Currently configured thread count.
int thread_count();

}  // namespace blurforge
