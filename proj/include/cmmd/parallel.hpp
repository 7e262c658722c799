#pragma once

#include <cstddef>
#include <cstdlib>
#include <thread>
#include <vector>

namespace cmmd {

/// Worker count for internally parallel loops, overridable via the
/// CMMD_THREADS environment variable. Defaults to 1: results are identical
/// either way since parallel loops only split disjoint output rows.
inline std::size_t thread_count() {
    static const std::size_t n = [] {
        if (const char* env = std::getenv("CMMD_THREADS")) {
            const long v = std::strtol(env, nullptr, 10);
            if (v >= 1) return static_cast<std::size_t>(v);
        }
        return static_cast<std::size_t>(1);
    }();
    return n;
}

/// Runs body(i) for i in [0, n), split across thread_count() workers.
template <typename Body>
void parallel_for(std::size_t n, const Body& body) {
    const std::size_t workers = std::min(thread_count(), n == 0 ? 1 : n);
    if (workers <= 1) {
        for (std::size_t i = 0; i < n; ++i) body(i);
        return;
    }
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (std::size_t w = 0; w < workers; ++w)
        pool.emplace_back([&, w] {
            for (std::size_t i = w; i < n; i += workers) body(i);
        });
    for (auto& t : pool) t.join();
}

}  // namespace cmmd
