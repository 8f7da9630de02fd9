#pragma once

#include <algorithm>
#include <cstdlib>
#include <exception>
#include <string>
#include <thread>
#include <vector>

namespace partfuse {

/// Worker budget: PARTFUSE_THREADS if set and positive, hardware concurrency
/// otherwise (the env value 0 also means auto).
inline unsigned thread_budget() {
    if (const char* env = std::getenv("PARTFUSE_THREADS")) {
        char* end = nullptr;
        long v = std::strtol(env, &end, 10);
        if (end != env && *end == '\0' && v > 0) return static_cast<unsigned>(v);
    }
    unsigned hc = std::thread::hardware_concurrency();
    return hc ? hc : 1u;
}

/// Runs body(i) for i in [0, n). Bodies must only write to their own index;
/// output ordering is then independent of the execution schedule.
template <typename F>
void parallel_for(std::size_t n, F&& body) {
    unsigned budget = thread_budget();
    std::size_t workers = std::min<std::size_t>(budget, n);
    if (workers <= 1 || n < 64) {
        for (std::size_t i = 0; i < n; ++i) body(i);
        return;
    }
    std::vector<std::thread> threads;
    threads.reserve(workers);
    std::vector<std::exception_ptr> errors(workers);
    for (std::size_t w = 0; w < workers; ++w) {
        std::size_t lo = n * w / workers;
        std::size_t hi = n * (w + 1) / workers;
        threads.emplace_back([&, lo, hi, w] {
            try {
                for (std::size_t i = lo; i < hi; ++i) body(i);
            } catch (...) {
                errors[w] = std::current_exception();
            }
        });
    }
    for (auto& t : threads) t.join();
    for (auto& e : errors) {
        if (e) std::rethrow_exception(e);
    }
}

} // namespace partfuse
