#pragma once

// Minimal indexed parallel loop. Work item i writes only to slot i, so
// results are reduced in index order afterwards and the outcome is identical
// for any thread count.

#include <atomic>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace padnet {

template <class Fn>
void parallel_for(std::size_t n, int threads, Fn&& fn) {
    if (threads <= 1 || n <= 1) {
        for (std::size_t i = 0; i < n; ++i) fn(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::exception_ptr error;
    std::mutex error_mutex;
    auto worker = [&] {
        for (;;) {
            std::size_t i = next.fetch_add(1);
            if (i >= n) return;
            try {
                fn(i);
            } catch (...) {
                std::lock_guard<std::mutex> lock(error_mutex);
                if (!error) error = std::current_exception();
                return;
            }
        }
    };
    std::size_t nworkers = std::min<std::size_t>(std::size_t(threads), n);
    std::vector<std::thread> pool;
    pool.reserve(nworkers);
    for (std::size_t i = 0; i < nworkers; ++i) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
    if (error) std::rethrow_exception(error);
}

}  // namespace padnet
