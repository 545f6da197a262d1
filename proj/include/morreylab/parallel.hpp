#pragma once

#include <algorithm>
#include <atomic>
#include <cstddef>
#include <functional>
#include <thread>
#include <vector>

namespace morreylab {

// Results must not depend on the thread count: work is cut into chunks of a
// fixed size, each chunk is evaluated sequentially, and reductions fold the
// per-chunk results in chunk order.
namespace par {

inline std::atomic<int>& thread_count_ref() {
    static std::atomic<int> k{1};
    return k;
}

inline void set_threads(int k) { thread_count_ref().store(k < 1 ? 1 : k); }
inline int threads() { return thread_count_ref().load(); }

constexpr std::size_t kChunk = 1024;

// fn(begin, end) on disjoint chunks; chunk boundaries are thread-count
// independent.
inline void for_chunks(std::size_t n, const std::function<void(std::size_t, std::size_t)>& fn) {
    if (n == 0) return;
    const std::size_t nchunks = (n + kChunk - 1) / kChunk;
    const int k = std::min<std::size_t>(threads(), nchunks);
    if (k <= 1) {
        for (std::size_t c = 0; c < nchunks; ++c)
            fn(c * kChunk, std::min(n, (c + 1) * kChunk));
        return;
    }
    std::atomic<std::size_t> next{0};
    auto worker = [&] {
        for (;;) {
            std::size_t c = next.fetch_add(1);
            if (c >= nchunks) return;
            fn(c * kChunk, std::min(n, (c + 1) * kChunk));
        }
    };
    std::vector<std::thread> pool;
    pool.reserve(k - 1);
    for (int t = 0; t + 1 < k; ++t) pool.emplace_back(worker);
    worker();
    for (auto& th : pool) th.join();
}

// Max reduction with deterministic tie-break: smallest index wins.
inline std::pair<double, std::size_t> max_reduce(std::size_t n,
                                                 const std::function<double(std::size_t)>& eval) {
    if (n == 0) return {0.0, 0};
    const std::size_t nchunks = (n + kChunk - 1) / kChunk;
    std::vector<double> best(nchunks, 0.0);
    std::vector<std::size_t> arg(nchunks, 0);
    for_chunks(n, [&](std::size_t b, std::size_t e) {
        const std::size_t c = b / kChunk;
        double m = eval(b);
        std::size_t mi = b;
        for (std::size_t i = b + 1; i < e; ++i) {
            const double v = eval(i);
            if (v > m) { m = v; mi = i; }
        }
        best[c] = m;
        arg[c] = mi;
    });
    double m = best[0];
    std::size_t mi = arg[0];
    for (std::size_t c = 1; c < nchunks; ++c)
        if (best[c] > m) { m = best[c]; mi = arg[c]; }
    return {m, mi};
}

} // namespace par
} // namespace morreylab
