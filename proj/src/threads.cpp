#include "blurforge/threads.hpp"

#include <omp.h>

#include <cstdlib>
#include <string>

namespace blurforge {

int configure_threads(int requested) {
    int n = requested;
    if (n <= 0) {
        if (const char* env = std::getenv("BLURFORGE_THREADS")) {
            try {
                n = std::stoi(env);
            } catch (...) {
                n = 0;
            }
        }
    }
    if (n <= 0) n = omp_get_max_threads();
    omp_set_num_threads(n);
    return n;
}

int thread_count() {
    return omp_get_max_threads();
}

}  // namespace blurforge
