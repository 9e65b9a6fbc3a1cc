#pragma once

#include <cstddef>
#include <cstdlib>
#include <functional>
#include <thread>
#include <vector>

namespace netrepair {

// Worker count: NETREPAIR_THREADS env var if set, else hardware concurrency.
inline unsigned thread_count() {
    if (const char* env = std::getenv("NETREPAIR_THREADS")) {
        long v = std::strtol(env, nullptr, 10);
        if (v >= 1) return static_cast<unsigned>(v);
    }
    unsigned hw = std::thread::hardware_concurrency();
    return hw ? hw : 1;
}

// Splits [0,n) into fixed-size chunks and runs fn(chunk_index, begin, end)
// over them on a small thread pool. The chunk decomposition depends only on
// n and chunk_size, never on the number of workers, so callers that combine
// per-chunk partial results in chunk order get the same answer at any thread
// count. With one worker everything runs inline on the calling thread.
inline void parallel_chunks(std::size_t n, std::size_t chunk_size,
                            const std::function<void(std::size_t, std::size_t, std::size_t)>& fn) {
    if (n == 0) return;
    if (chunk_size == 0) chunk_size = 1;
    const std::size_t n_chunks = (n + chunk_size - 1) / chunk_size;
    unsigned workers = thread_count();
    if (workers > n_chunks) workers = static_cast<unsigned>(n_chunks);

    if (workers <= 1) {
        for (std::size_t c = 0; c < n_chunks; ++c) {
            std::size_t b = c * chunk_size;
            std::size_t e = b + chunk_size < n ? b + chunk_size : n;
            fn(c, b, e);
        }
        return;
    }

    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (unsigned w = 0; w < workers; ++w) {
        pool.emplace_back([&, w]() {
            for (std::size_t c = w; c < n_chunks; c += workers) {
                std::size_t b = c * chunk_size;
                std::size_t e = b + chunk_size < n ? b + chunk_size : n;
                fn(c, b, e);
            }
        });
    }
    for (auto& t : pool) t.join();
}

} // namespace netrepair
