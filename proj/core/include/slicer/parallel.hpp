#pragma once

#include <cstddef>
#include <cstdlib>
#include <thread>
#include <vector>

namespace slicer {

// Worker count from SLICER_THREADS (default 1). Work items are independent
// and written to preassigned slots, so the output is identical at any count.
inline std::size_t worker_count() {
    const char* env = std::getenv("SLICER_THREADS");
    if (!env) return 1;
    const long n = std::strtol(env, nullptr, 10);
    if (n <= 1) return 1;
    const unsigned hw = std::thread::hardware_concurrency();
    return static_cast<std::size_t>(hw > 0 && n > hw ? hw : n);
}

template <typename Fn>
void parallel_for(std::size_t n, Fn&& fn) {
    const std::size_t workers = worker_count();
    if (workers <= 1 || n <= 1) {
        for (std::size_t i = 0; i < n; ++i) fn(i);
        return;
    }
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (std::size_t w = 0; w < workers; ++w) {
        pool.emplace_back([&, w] {
            for (std::size_t i = w; i < n; i += workers) fn(i);
        });
    }
    for (std::thread& t : pool) t.join();
}

} // namespace slicer
