#include "m4pipe/threads.hpp"

#include <omp.h>

#include <cstdlib>
#include <string>

namespace m4 {

static int resolve_thread_count() {
    const char* env = std::getenv("M4PIPE_THREADS");
    if (env == nullptr) return omp_get_max_threads();
    try {
        int n = std::stoi(env);
        if (n > 0) return n;
    } catch (...) {
        // fall through to default on unparsable values
    }
    return omp_get_max_threads();
}

int thread_count() {
    static const int n = resolve_thread_count();
    return n;
}

}  // namespace m4
