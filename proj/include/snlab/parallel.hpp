#pragma once

#include <cstddef>
#include <exception>
#include <vector>

namespace snlab {

enum class Exec { Serial, Parallel };

// Runs fn(i) for i in [0, n) and stores results by index, so the output never
// depends on thread scheduling. The first exception thrown by any task is
// rethrown on the calling thread after the loop finishes.
template <class R, class Fn>
std::vector<R> map_indexed(std::size_t n, Fn&& fn, Exec exec = Exec::Parallel) {
    std::vector<R> out(n);
    if (exec == Exec::Serial) {
        for (std::size_t i = 0; i < n; ++i) out[i] = fn(i);
        return out;
    }
    std::exception_ptr err = nullptr;
    const long long nn = static_cast<long long>(n);
#pragma omp parallel for schedule(dynamic, 1)
    for (long long i = 0; i < nn; ++i) {
        try {
            out[static_cast<std::size_t>(i)] = fn(static_cast<std::size_t>(i));
        } catch (...) {
#pragma omp critical(snlab_map_indexed_err)
            if (!err) err = std::current_exception();
        }
    }
    if (err) std::rethrow_exception(err);
    return out;
}

int max_threads();

}  // namespace snlab
