#include "dcfl/parallel.hpp"

#include <exception>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace dcfl {

void serial_for(std::size_t n, const std::function<void(std::size_t)>& body) {
    for (std::size_t i = 0; i < n; ++i) body(i);
}

void parallel_for(std::size_t n, int workers, const std::function<void(std::size_t)>& body) {
#ifdef _OPENMP
    if (workers > 1 && n > 1) {
        const long long count = static_cast<long long>(n);
        std::exception_ptr first_error = nullptr;
#pragma omp parallel for num_threads(workers) schedule(static)
        for (long long i = 0; i < count; ++i) {
            try {
                body(static_cast<std::size_t>(i));
            } catch (...) {
#pragma omp critical(dcfl_parallel_error)
                if (!first_error) first_error = std::current_exception();
            }
        }
        if (first_error) std::rethrow_exception(first_error);
        return;
    }
#else
    (void)workers;
#endif
    serial_for(n, body);
}

}  // namespace dcfl
