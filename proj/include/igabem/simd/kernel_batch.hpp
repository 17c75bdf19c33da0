#ifndef IGABEM_SIMD_KERNEL_BATCH_HPP
#define IGABEM_SIMD_KERNEL_BATCH_HPP

#include "igabem/core.hpp"

namespace igabem::simd {

// Batched evaluation of the Helmholtz BEM kernels over quadrature points.
// All arrays are SoA of length n. dy = y - x.
struct KernelBatchIn {
    double k = 0.0;
    Vec3 x;
    // source-side data, read only when with_x is set
    Vec3 n_x, v1, v2;
    bool with_x = false;
    const double* yx = nullptr;
    const double* yy = nullptr;
    const double* yz = nullptr;
    const double* nyx = nullptr;
    const double* nyy = nullptr;
    const double* nyz = nullptr;
    int n = 0;
};

struct KernelBatchOut {
    // Phi_k and dPhi_k/dn(y)
    double *phi_re, *phi_im;
    double *dky_re, *dky_im;
    // statics: Phi_0, dPhi_0/dn(y)
    double *phi0, *d0y;
    // with_x only; may be null otherwise
    double *dkx_re = nullptr, *dkx_im = nullptr; // dPhi_k/dn(x)
    double *d0x = nullptr;                       // dPhi_0/dn(x)
    double *h0 = nullptr;                        // d2Phi_0/dn(y)dn(x)
    double *hm_re = nullptr, *hm_im = nullptr;   // d2Phi_k - d2Phi_0 (stable)
    double *v1ny = nullptr, *v2ny = nullptr;     // v_a . n(y)
    double *v1dy = nullptr, *v2dy = nullptr;     // v_a . (y - x)
    double *nxny = nullptr, *nxdy = nullptr;     // n(x).n(y), n(x).(y-x)
};

using KernelBatchFn = void (*)(const KernelBatchIn&, const KernelBatchOut&);

void kernel_batch_scalar(const KernelBatchIn& in, const KernelBatchOut& out);
#if defined(__x86_64__) || defined(_M_X64)
void kernel_batch_avx2(const KernelBatchIn& in, const KernelBatchOut& out);
#endif

// Runtime-selected implementation (env IGABEM_SIMD = auto|scalar|avx2).
KernelBatchFn active_kernel_batch();
const char* active_kernel_batch_name();
void force_kernel_batch(const std::string& name);

} // namespace igabem::simd

#endif
