#include "igabem/core.hpp"

#include <atomic>

namespace igabem {

namespace {
int g_threads = 0; // 0 = hardware_concurrency
}

int default_thread_count() {
    if (g_threads > 0) return g_threads;
    unsigned hc = std::thread::hardware_concurrency();
    return hc > 0 ? static_cast<int>(hc) : 1;
}

void set_default_thread_count(int n) { g_threads = n; }

void parallel_for(std::size_t n, int nthreads, const std::function<void(std::size_t)>& fn) {
    if (nthreads <= 0) nthreads = default_thread_count();
    if (nthreads <= 1 || n <= 1) {
        for (std::size_t i = 0; i < n; ++i) fn(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    auto worker = [&] {
        for (;;) {
            std::size_t i = next.fetch_add(1, std::memory_order_relaxed);
            if (i >= n) return;
            fn(i);
        }
    };
    std::vector<std::thread> pool;
    int nt = static_cast<int>(std::min<std::size_t>(static_cast<std::size_t>(nthreads), n));
    pool.reserve(nt - 1);
    for (int t = 1; t < nt; ++t) pool.emplace_back(worker);
    worker();
    for (auto& th : pool) th.join();
}

} // namespace igabem
