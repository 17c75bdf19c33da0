#include "igabem/simd/kernel_batch.hpp"

#include <atomic>
#include <cstdlib>
#include <cstring>

namespace igabem::simd {

namespace {

struct Impl {
    KernelBatchFn fn;
    const char* name;
};

bool avx2_available() {
#if defined(__x86_64__) || defined(_M_X64)
    return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
#else
    return false;
#endif
}

Impl select(const char* request) {
#if defined(__x86_64__) || defined(_M_X64)
    if (request && std::strcmp(request, "scalar") == 0) return {kernel_batch_scalar, "scalar"};
    if (request && std::strcmp(request, "avx2") == 0) {
        if (!avx2_available())
            throw std::runtime_error("IGABEM_SIMD=avx2 requested but CPU lacks AVX2/FMA");
        return {kernel_batch_avx2, "avx2"};
    }
    if (avx2_available()) return {kernel_batch_avx2, "avx2"};
#else
    (void)request;
    if (request && std::strcmp(request, "avx2") == 0)
        throw std::runtime_error("IGABEM_SIMD=avx2 requested on a non-x86 build");
#endif
    return {kernel_batch_scalar, "scalar"};
}

std::atomic<const Impl*> g_impl{nullptr};

const Impl* impl() {
    const Impl* cur = g_impl.load(std::memory_order_acquire);
    if (cur) return cur;
    static Impl chosen = select(std::getenv("IGABEM_SIMD"));
    g_impl.store(&chosen, std::memory_order_release);
    return &chosen;
}

} // namespace

KernelBatchFn active_kernel_batch() { return impl()->fn; }

const char* active_kernel_batch_name() { return impl()->name; }

void force_kernel_batch(const std::string& name) {
    static Impl forced{nullptr, nullptr};
    forced = select(name == "auto" ? nullptr : name.c_str());
    g_impl.store(&forced, std::memory_order_release);
}

} // namespace igabem::simd
