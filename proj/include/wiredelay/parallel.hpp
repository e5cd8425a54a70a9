#pragma once

#include <cstdint>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace wiredelay {

/// Runs fn(t) for t in [0, n). Work is sharded by index across `workers`
/// threads (worker w takes t = w, w + workers, ...), so each index is always
/// processed by a deterministic function of (t, its own RNG stream), and
/// results must be written into caller-owned slot t. Reductions done slot by
/// slot afterwards are therefore bitwise independent of the worker count.
/// The first exception thrown by any worker is rethrown on the caller thread.
template <typename Fn>
void parallel_for_indexed(std::uint64_t n, int workers, Fn&& fn) {
    if (workers < 1) workers = 1;
    if (workers == 1 || n <= 1) {
        for (std::uint64_t t = 0; t < n; ++t) fn(t);
        return;
    }
    std::exception_ptr first_error;
    std::mutex error_mutex;
    std::vector<std::thread> pool;
    pool.reserve(static_cast<std::size_t>(workers));
    for (int w = 0; w < workers; ++w) {
        pool.emplace_back([&, w]() {
            try {
                for (std::uint64_t t = static_cast<std::uint64_t>(w); t < n;
                     t += static_cast<std::uint64_t>(workers)) {
                    fn(t);
                }
            } catch (...) {
                std::lock_guard<std::mutex> lock(error_mutex);
                if (!first_error) first_error = std::current_exception();
            }
        });
    }
    for (auto& th : pool) th.join();
    if (first_error) std::rethrow_exception(first_error);
}

}  // namespace wiredelay
