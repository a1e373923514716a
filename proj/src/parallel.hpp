#pragma once

#include <algorithm>
#include <cstddef>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace alertmon::detail {

// Runs fn(i) for i in [0, n) over contiguous chunks. fn must only write to
// per-index state; the first exception thrown is rethrown on the caller.
template <typename Fn>
void parallel_for(std::size_t n, Fn&& fn, std::size_t min_chunk = 256)
{
    const std::size_t hw = std::max(1U, std::thread::hardware_concurrency());
    const std::size_t workers = std::min(hw, (n + min_chunk - 1) / std::max<std::size_t>(1, min_chunk));
    if (workers <= 1) {
        for (std::size_t i = 0; i < n; ++i)
            fn(i);
        return;
    }
    std::exception_ptr error;
    std::mutex error_mutex;
    const std::size_t chunk = (n + workers - 1) / workers;
    {
        std::vector<std::jthread> threads;
        threads.reserve(workers);
        for (std::size_t w = 0; w < workers; ++w) {
            const std::size_t begin = w * chunk;
            const std::size_t end = std::min(n, begin + chunk);
            if (begin >= end)
                break;
            threads.emplace_back([&, begin, end] {
                try {
                    for (std::size_t i = begin; i < end; ++i)
                        fn(i);
                } catch (...) {
                    std::lock_guard lock(error_mutex);
                    if (!error)
                        error = std::current_exception();
                }
            });
        }
    }
    if (error)
        std::rethrow_exception(error);
}

} // namespace alertmon::detail
