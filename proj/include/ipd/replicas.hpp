#pragma once
#include <cstddef>
#include <exception>
#include <type_traits>
#include <vector>

#include <omp.h>

namespace ipd {

// 0 leaves the OpenMP default in place.
void set_workers(int n);
int workers();

// out[r] = f(r). Results depend only on r, never on the schedule.
template <class F>
auto parallel_map(size_t n, F&& f) -> std::vector<std::invoke_result_t<F&, size_t>> {
    std::vector<std::invoke_result_t<F&, size_t>> out(n);
    std::exception_ptr err;
#pragma omp parallel for schedule(dynamic, 1)
    for (long long r = 0; r < static_cast<long long>(n); ++r) {
        try {
            out[size_t(r)] = f(size_t(r));
        } catch (...) {
#pragma omp critical(ipd_parallel_map_error)
            if (!err) err = std::current_exception();
        }
    }
    if (err) std::rethrow_exception(err);
    return out;
}

template <class F>
auto serial_map(size_t n, F&& f) -> std::vector<std::invoke_result_t<F&, size_t>> {
    std::vector<std::invoke_result_t<F&, size_t>> out(n);
    for (size_t r = 0; r < n; ++r) out[r] = f(r);
    return out;
}

}  // namespace ipd
