#pragma once

#include <algorithm>
#include <cstdlib>
#include <functional>
#include <thread>
#include <vector>

namespace qconf {

/// Worker thread cap: QCONF_THREADS if set, else hardware concurrency,
/// clamped to [1, 16].
inline int worker_threads() {
    int n = 0;
    if (const char* env = std::getenv("QCONF_THREADS")) n = std::atoi(env);
    if (n <= 0) n = static_cast<int>(std::thread::hardware_concurrency());
    return std::clamp(n, 1, 16);
}

/// Runs fn(block_index, begin, end) over [0, count) split into contiguous
/// blocks, one per worker. Each block writes only its own state, so results
/// combined in block order are identical for every thread count.
inline void parallel_blocks(long count, const std::function<void(int, long, long)>& fn) {
    const int workers = static_cast<int>(std::min<long>(worker_threads(), std::max<long>(count, 1)));
    if (workers <= 1) {
        fn(0, 0, count);
        return;
    }
    std::vector<std::thread> pool;
    pool.reserve(workers);
    const long chunk = (count + workers - 1) / workers;
    for (int w = 0; w < workers; ++w) {
        const long b = w * chunk;
        const long e = std::min(count, b + chunk);
        if (b >= e) break;
        pool.emplace_back(fn, w, b, e);
    }
    for (auto& t : pool) t.join();
}

} // namespace qconf
