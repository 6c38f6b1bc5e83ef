#pragma once

#include <algorithm>
#include <atomic>
#include <cstddef>
#include <exception>
#include <functional>
#include <mutex>
#include <thread>
#include <vector>

namespace jshm {

/// Run fn(0) .. fn(n_tasks-1) across up to n_threads workers. Tasks own all
/// their state; the first exception, if any, is rethrown on the caller.
inline void parallel_for_index(std::size_t n_tasks, unsigned n_threads,
                               const std::function<void(std::size_t)>& fn) {
    if (n_tasks == 0) return;
    if (n_threads <= 1 || n_tasks == 1) {
        for (std::size_t i = 0; i < n_tasks; ++i) fn(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::atomic<bool> failed{false};
    std::exception_ptr error;
    std::mutex error_mutex;
    auto worker = [&]() {
        while (true) {
            const std::size_t i = next.fetch_add(1);
            if (i >= n_tasks || failed.load()) return;
            try {
                fn(i);
            } catch (...) {
                std::scoped_lock lock(error_mutex);
                if (!error) error = std::current_exception();
                failed.store(true);
                return;
            }
        }
    };
    std::vector<std::thread> threads;
    const unsigned nw = std::min<unsigned>(n_threads, static_cast<unsigned>(n_tasks));
    threads.reserve(nw);
    for (unsigned t = 0; t < nw; ++t) threads.emplace_back(worker);
    for (auto& t : threads) t.join();
    if (error) std::rethrow_exception(error);
}

inline unsigned default_thread_count() {
    const unsigned hc = std::thread::hardware_concurrency();
    return hc == 0 ? 2u : hc;
}

}  // namespace jshm
