#pragma once

namespace jpr {

/// Worker count for OpenMP regions: omp_get_max_threads(), capped by the
/// JPR_THREADS environment variable when it holds a positive integer.
int worker_threads();

}  // namespace jpr
