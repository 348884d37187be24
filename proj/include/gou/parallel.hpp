#pragma once

// Deterministic data-parallel map over path indices.
//
// Worker w handles the contiguous block of indices assigned to it, writes
// results into a slot per index, and all reductions run afterwards in index
// order. Output is therefore independent of the worker count.

#include <algorithm>
#include <cstddef>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace gou {

/// Resolve a requested worker count (0 = hardware concurrency).
inline int resolve_workers(int requested) {
    if (requested > 0) return requested;
    const unsigned hw = std::thread::hardware_concurrency();
    return hw == 0 ? 1 : static_cast<int>(hw);
}

/// out[i] = fn(i) for i in [0, n) on `workers` threads.
template <class T, class F>
std::vector<T> parallel_map(std::size_t n, int workers, F&& fn) {
    std::vector<T> out(n);
    const std::size_t w = std::min<std::size_t>(std::max(1, workers), std::max<std::size_t>(n, 1));
    if (w <= 1) {
        for (std::size_t i = 0; i < n; ++i) out[i] = fn(i);
        return out;
    }
    std::exception_ptr error;
    std::mutex error_mutex;
    std::vector<std::thread> pool;
    pool.reserve(w);
    for (std::size_t k = 0; k < w; ++k) {
        const std::size_t begin = n * k / w, end = n * (k + 1) / w;
        pool.emplace_back([&, begin, end] {
            try {
                for (std::size_t i = begin; i < end; ++i) out[i] = fn(i);
            } catch (...) {
                std::lock_guard<std::mutex> lock(error_mutex);
                if (!error) error = std::current_exception();
            }
        });
    }
    for (auto& t : pool) t.join();
    if (error) std::rethrow_exception(error);
    return out;
}

/// Pairwise (cascade) sum of v[begin, end).
template <class V>
double pairwise_sum(const V& v, std::size_t begin, std::size_t end) {
    if (end - begin <= 16) {
        double s = 0.0;
        for (std::size_t i = begin; i < end; ++i) s += v[i];
        return s;
    }
    const std::size_t mid = begin + (end - begin) / 2;
    return pairwise_sum(v, begin, mid) + pairwise_sum(v, mid, end);
}

template <class V>
double pairwise_sum(const V& v) {
    return pairwise_sum(v, 0, v.size());
}

}  // namespace gou
