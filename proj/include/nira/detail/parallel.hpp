#pragma once

#include <algorithm>
#include <atomic>
#include <cstddef>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace nira::detail {

// Runs fn(i) for i in [0, count) on up to `threads` workers. Work items are claimed dynamically,
// so callers must write results into per-item slots to keep output order independent of scheduling.
template <class Fn>
void parallel_for(std::size_t count, unsigned threads, Fn&& fn)
{
    threads = std::max(1u, threads);
    if (threads == 1 || count <= 1) {
        for (std::size_t i = 0; i < count; ++i) fn(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::exception_ptr error;
    std::mutex error_mutex;
    auto worker = [&] {
        for (;;) {
            const std::size_t i = next.fetch_add(1);
            if (i >= count) return;
            try {
                fn(i);
            } catch (...) {
                std::lock_guard lock(error_mutex);
                if (!error) error = std::current_exception();
                next.store(count);
            }
        }
    };
    {
        std::vector<std::jthread> pool;
        const std::size_t n = std::min<std::size_t>(threads, count);
        for (std::size_t t = 0; t < n; ++t) pool.emplace_back(worker);
    }
    if (error) std::rethrow_exception(error);
}

} // namespace nira::detail
