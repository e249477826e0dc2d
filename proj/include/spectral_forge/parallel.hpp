#pragma once

#include <algorithm>
#include <cstdlib>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace spectral_forge {

// Worker count: SPECTRAL_FORGE_THREADS caps it, hardware concurrency otherwise.
inline unsigned worker_count() {
    unsigned hw = std::max(1u, std::thread::hardware_concurrency());
    if (const char* env = std::getenv("SPECTRAL_FORGE_THREADS")) {
        long cap = std::strtol(env, nullptr, 10);
        if (cap >= 1) return std::min<unsigned>(hw, static_cast<unsigned>(cap));
    }
    return hw;
}

// Evaluates fn(i) for i in [0, n) into slot i. Results are ordered by index
// regardless of scheduling; the first exception (lowest index) is rethrown.
template <class T, class Fn>
std::vector<T> parallel_map(std::size_t n, Fn&& fn) {
    std::vector<T> out(n);
    std::vector<std::exception_ptr> errors(n);
    unsigned workers = std::min<std::size_t>(worker_count(), std::max<std::size_t>(n, 1));
    auto run = [&](unsigned w) {
        for (std::size_t i = w; i < n; i += workers) {
            try {
                out[i] = fn(i);
            } catch (...) {
                errors[i] = std::current_exception();
            }
        }
    };
    if (workers <= 1) {
        run(0);
    } else {
        std::vector<std::thread> pool;
        for (unsigned w = 0; w < workers; ++w) pool.emplace_back(run, w);
        for (auto& t : pool) t.join();
    }
    for (auto& e : errors)
        if (e) std::rethrow_exception(e);
    return out;
}

}  // namespace spectral_forge
