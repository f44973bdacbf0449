#pragma once

#include <exception>
#include <mutex>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace cusp {

// OpenMP loop wrapper. Exceptions thrown by the body are captured and
// rethrown on the calling thread after the loop completes.
template <typename F>
void parallel_for(long n, F&& body) {
#ifdef _OPENMP
    std::exception_ptr err;
    std::mutex err_mutex;
#pragma omp parallel for schedule(dynamic)
    for (long i = 0; i < n; ++i) {
        try {
            body(i);
        } catch (...) {
            std::lock_guard<std::mutex> lock(err_mutex);
            if (!err) err = std::current_exception();
        }
    }
    if (err) std::rethrow_exception(err);
#else
    for (long i = 0; i < n; ++i) body(i);
#endif
}

// Serial reference loop with the identical contract, kept so tests and the
// benchmark can compare against the OpenMP path.
template <typename F>
void serial_for(long n, F&& body) {
    for (long i = 0; i < n; ++i) body(i);
}

inline int max_threads() {
#ifdef _OPENMP
    return omp_get_max_threads();
#else
    return 1;
#endif
}

}  // namespace cusp
