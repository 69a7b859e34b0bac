#pragma once

#include <algorithm>
#include <functional>
#include <thread>
#include <vector>

namespace cinefit::runtime {

// Process-wide execution knobs, set once by the CLI (or tests) before work starts.
// Every parallel kernel assigns each output row to exactly one thread and keeps the
// per-row summation order fixed, so results are bit-identical for any thread count.
// Deterministic mode additionally forces serial execution and zeroes wallclock
// columns in emitted CSVs.
inline int& thread_count() {
    static int n = 1;
    return n;
}

inline bool& deterministic() {
    static bool d = false;
    return d;
}

inline void configure(int threads, bool det) {
    thread_count() = det ? 1 : std::max(1, threads);
    deterministic() = det;
}

// Splits [0, n) into contiguous blocks, one per worker.
inline void parallel_for(int n, const std::function<void(int, int)>& body) {
    const int nt = std::min(thread_count(), n);
    if (nt <= 1) {
        body(0, n);
        return;
    }
    std::vector<std::thread> workers;
    workers.reserve(static_cast<size_t>(nt));
    const int chunk = (n + nt - 1) / nt;
    for (int i = 0; i < nt; ++i) {
        const int lo = i * chunk;
        const int hi = std::min(n, lo + chunk);
        if (lo >= hi) break;
        workers.emplace_back(body, lo, hi);
    }
    for (auto& w : workers) w.join();
}

}  // namespace cinefit::runtime
