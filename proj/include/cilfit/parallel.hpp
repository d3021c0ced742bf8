#pragma once

#include <cstdlib>
#include <functional>
#include <thread>
#include <vector>

namespace cilfit {

// Worker count: CILFIT_WORKERS env var, else hardware concurrency.
inline int default_workers() {
    if (const char* env = std::getenv("CILFIT_WORKERS")) {
        int n = std::atoi(env);
        if (n >= 1) return n;
    }
    unsigned hc = std::thread::hardware_concurrency();
    return hc > 0 ? static_cast<int>(hc) : 1;
}

// Static block partition of [0, n). fn(i) must be safe to run concurrently
// for distinct i; results must not depend on scheduling.
inline void parallel_for(std::size_t n, const std::function<void(std::size_t)>& fn,
                         int workers = 0) {
    if (workers <= 0) workers = default_workers();
    if (workers == 1 || n <= 1) {
        for (std::size_t i = 0; i < n; ++i) fn(i);
        return;
    }
    std::size_t nthreads = std::min<std::size_t>(static_cast<std::size_t>(workers), n);
    std::vector<std::thread> pool;
    pool.reserve(nthreads);
    for (std::size_t t = 0; t < nthreads; ++t) {
        pool.emplace_back([&, t] {
            for (std::size_t i = t; i < n; i += nthreads) fn(i);
        });
    }
    for (auto& th : pool) th.join();
}

}  // namespace cilfit
