#pragma once

#include <cstdint>
#include <functional>
#include <stdexcept>
#include <thread>
#include <vector>

namespace satrdo {

// Number of usable hardware threads; never zero.
inline int hardware_jobs() {
    unsigned n = std::thread::hardware_concurrency();
    return n == 0 ? 1 : static_cast<int>(n);
}

// Runs body(begin, end) over contiguous chunks of [0, n). All parallelism in
// this project writes to disjoint output slots, so the result is identical
// for any job count.
inline void parallel_for(int64_t n, int jobs,
                         const std::function<void(int64_t, int64_t)>& body) {
    if (n <= 0) return;
    if (jobs <= 0) throw std::invalid_argument("parallel_for: jobs must be >= 1");
    int64_t workers = std::min<int64_t>(jobs, n);
    if (workers == 1) {
        body(0, n);
        return;
    }
    std::vector<std::thread> pool;
    pool.reserve(static_cast<size_t>(workers));
    int64_t chunk = (n + workers - 1) / workers;
    for (int64_t w = 0; w < workers; ++w) {
        int64_t begin = w * chunk;
        int64_t end = std::min(n, begin + chunk);
        if (begin >= end) break;
        pool.emplace_back([&body, begin, end] { body(begin, end); });
    }
    for (auto& t : pool) t.join();
}

}  // namespace satrdo
