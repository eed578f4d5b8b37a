#pragma once

// Fixed-block parallel helper. Work is split into deterministic blocks and
// results are combined strictly in block-index order, so outputs are
// bit-identical for any worker count. SYNCMARK_THREADS caps the pool.

#include <atomic>
#include <cstdlib>
#include <exception>
#include <mutex>
#include <string>
#include <thread>
#include <vector>

namespace syncmark::par {

inline int worker_count() {
    if (const char* env = std::getenv("SYNCMARK_THREADS")) {
        char* end = nullptr;
        const long v = std::strtol(env, &end, 10);
        if (end != env && v >= 1 && v <= 4096) return static_cast<int>(v);
    }
    const unsigned hc = std::thread::hardware_concurrency();
    return hc == 0 ? 1 : static_cast<int>(hc);
}

// Evaluates fn(block) for every block in [0, blocks); the returned vector is
// indexed by block regardless of which thread ran it.
template <typename Result, typename Fn>
std::vector<Result> run_blocks(std::size_t blocks, Fn&& fn, int workers = 0) {
    std::vector<Result> out(blocks);
    if (blocks == 0) return out;

    int w = workers > 0 ? workers : worker_count();
    if (static_cast<std::size_t>(w) > blocks) w = static_cast<int>(blocks);
    if (w <= 1) {
        for (std::size_t b = 0; b < blocks; ++b) out[b] = fn(b);
        return out;
    }

    std::atomic<std::size_t> cursor{0};
    std::exception_ptr failure;
    std::mutex failure_mutex;
    auto worker = [&] {
        for (;;) {
            const std::size_t b = cursor.fetch_add(1);
            if (b >= blocks) return;
            try {
                out[b] = fn(b);
            } catch (...) {
                std::lock_guard<std::mutex> lock(failure_mutex);
                if (!failure) failure = std::current_exception();
                return;
            }
        }
    };
    std::vector<std::thread> pool;
    pool.reserve(w);
    for (int i = 0; i < w; ++i) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
    if (failure) std::rethrow_exception(failure);
    return out;
}

} // namespace syncmark::par
