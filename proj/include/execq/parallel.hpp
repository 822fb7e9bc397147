#pragma once

#include <cstddef>
#include <exception>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace execq {

// Runs f(i) for i in [0, n). threads <= 1 is the serial reference path and
// bypasses OpenMP entirely; any thread count must produce identical output,
// so bodies may only write state owned by index i. Exceptions thrown by the
// body are funneled out of the parallel region and rethrown on the calling
// thread (letting one escape an OpenMP region would terminate the process).
template <typename F>
void parallel_for(std::size_t n, int threads, F&& f) {
#ifdef _OPENMP
    if (threads > 1) {
        std::exception_ptr error = nullptr;
#pragma omp parallel for schedule(static) num_threads(threads)
        for (long long i = 0; i < static_cast<long long>(n); ++i) {
            try {
                f(static_cast<std::size_t>(i));
            } catch (...) {
#pragma omp critical(execq_parallel_for_error)
                if (!error) error = std::current_exception();
            }
        }
        if (error) std::rethrow_exception(error);
        return;
    }
#else
    (void)threads;
#endif
    for (std::size_t i = 0; i < n; ++i) f(i);
}

inline int hardware_threads() {
#ifdef _OPENMP
    return omp_get_max_threads();
#else
    return 1;
#endif
}

}  // namespace execq
