#pragma once

#include <algorithm>
#include <atomic>
#include <cstddef>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace netaipw {

inline std::size_t resolve_threads(std::size_t requested) {
    if (requested != 0) return requested;
    return std::max<std::size_t>(1, std::thread::hardware_concurrency());
}

/// Calls fn(i) for i in [0, count) on up to `threads` workers pulling indices
/// from a shared counter. The first exception is rethrown after all workers
/// stop; remaining indices are skipped once one is raised.
template <class Fn>
void parallel_for(std::size_t count, std::size_t threads, Fn&& fn) {
    threads = std::min(resolve_threads(threads), count);
    if (threads <= 1) {
        for (std::size_t i = 0; i < count; ++i) fn(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::atomic<bool> failed{false};
    std::exception_ptr error;
    std::mutex error_mutex;
    {
        std::vector<std::jthread> workers;
        workers.reserve(threads);
        for (std::size_t t = 0; t < threads; ++t) {
            workers.emplace_back([&] {
                for (std::size_t i = next++; i < count && !failed; i = next++) {
                    try {
                        fn(i);
                    } catch (...) {
                        std::lock_guard lock(error_mutex);
                        if (!error) error = std::current_exception();
                        failed = true;
                    }
                }
            });
        }
    }
    if (error) std::rethrow_exception(error);
}

}  // namespace netaipw
