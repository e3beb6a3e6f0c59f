#include "jpr/parallel.hpp"

#include <omp.h>

#include <algorithm>
#include <cstdlib>

namespace jpr {

int worker_threads() {
    int threads = omp_get_max_threads();
    if (const char* env = std::getenv("JPR_THREADS")) {
        char* end = nullptr;
        const long cap = std::strtol(env, &end, 10);
        if (end != env && *end == '\0' && cap > 0) threads = std::min<long>(threads, cap);
    }
    return std::max(threads, 1);
}

}  // namespace jpr
