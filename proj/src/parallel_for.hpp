#pragma once

#include <cstddef>
#include <exception>
#include <vector>

namespace mathdef::detail {

/// OpenMP loop over [0, n). Exceptions cannot cross the parallel region, so
/// each index records its own and the lowest-index failure is rethrown after
/// the loop. That keeps error reporting identical to a serial loop.
template <typename Fn>
void parallel_for(std::size_t n, Fn&& fn) {
    std::vector<std::exception_ptr> errors(n);
    const auto count = static_cast<long long>(n);
#pragma omp parallel for schedule(dynamic, 8)
    for (long long i = 0; i < count; ++i) {
        try {
            fn(static_cast<std::size_t>(i));
        } catch (...) {
            errors[static_cast<std::size_t>(i)] = std::current_exception();
        }
    }
    for (auto& e : errors) {
        if (e) std::rethrow_exception(e);
    }
}

template <typename Fn>
void serial_for(std::size_t n, Fn&& fn) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
}

}  // namespace mathdef::detail
