#if defined(__x86_64__) || defined(_M_X64)

#include "igabem/simd/kernel_batch.hpp"

#include <immintrin.h>

namespace igabem::simd {

namespace {

constexpr double inv4pi = 1.0 / (4.0 * 3.14159265358979323846264338327950288);

// sin/cos via pi/2 range reduction (3-part split) and minimax polynomials on
// [-pi/4, pi/4]; adequate for |x| up to ~1e6 which covers k*R in assembly.
struct SinCos4 {
    __m256d s, c;
};

inline SinCos4 sincos4(__m256d x) {
    const __m256d two_over_pi = _mm256_set1_pd(0.63661977236758134308);
    const __m256d pio2_1 = _mm256_set1_pd(1.57079632673412561417e+00);
    const __m256d pio2_2 = _mm256_set1_pd(6.07710050630396597660e-11);
    const __m256d pio2_3 = _mm256_set1_pd(2.02226624879595063154e-21);

    __m256d q = _mm256_round_pd(_mm256_mul_pd(x, two_over_pi),
                                _MM_FROUND_TO_NEAREST_INT | _MM_FROUND_NO_EXC);
    __m256d z = _mm256_fnmadd_pd(q, pio2_1, x);
    z = _mm256_fnmadd_pd(q, pio2_2, z);
    z = _mm256_fnmadd_pd(q, pio2_3, z);

    const __m256d z2 = _mm256_mul_pd(z, z);

    // sin(z) = z + z^3 P(z^2)
    __m256d ps = _mm256_set1_pd(1.58962301576546568060e-10);
    ps = _mm256_fmadd_pd(ps, z2, _mm256_set1_pd(-2.50507477628578072866e-8));
    ps = _mm256_fmadd_pd(ps, z2, _mm256_set1_pd(2.75573136213857245213e-6));
    ps = _mm256_fmadd_pd(ps, z2, _mm256_set1_pd(-1.98412698295895385996e-4));
    ps = _mm256_fmadd_pd(ps, z2, _mm256_set1_pd(8.33333333332211858878e-3));
    ps = _mm256_fmadd_pd(ps, z2, _mm256_set1_pd(-1.66666666666666307295e-1));
    const __m256d sinz = _mm256_fmadd_pd(_mm256_mul_pd(z, z2), ps, z);

    // cos(z) = 1 - z^2/2 + z^4 Q(z^2)
    __m256d pc = _mm256_set1_pd(-1.13585365213876817300e-11);
    pc = _mm256_fmadd_pd(pc, z2, _mm256_set1_pd(2.08757008419747316778e-9));
    pc = _mm256_fmadd_pd(pc, z2, _mm256_set1_pd(-2.75573141792967388112e-7));
    pc = _mm256_fmadd_pd(pc, z2, _mm256_set1_pd(2.48015872888517179954e-5));
    pc = _mm256_fmadd_pd(pc, z2, _mm256_set1_pd(-1.38888888888730564116e-3));
    pc = _mm256_fmadd_pd(pc, z2, _mm256_set1_pd(4.16666666666665929218e-2));
    __m256d cosz = _mm256_fmadd_pd(_mm256_mul_pd(z2, z2), pc,
                                   _mm256_fnmadd_pd(z2, _mm256_set1_pd(0.5),
                                                    _mm256_set1_pd(1.0)));

    // quadrant j = q mod 4 (q may be negative)
    const __m256d four = _mm256_set1_pd(4.0);
    __m256d j = _mm256_fnmadd_pd(_mm256_floor_pd(_mm256_div_pd(q, four)), four, q);
    const __m256d j1 = _mm256_cmp_pd(j, _mm256_set1_pd(0.5), _CMP_GT_OQ);
    const __m256d j2 = _mm256_cmp_pd(j, _mm256_set1_pd(1.5), _CMP_GT_OQ);
    const __m256d j3 = _mm256_cmp_pd(j, _mm256_set1_pd(2.5), _CMP_GT_OQ);

    // swap sin/cos in quadrants 1 and 3
    const __m256d swap = _mm256_xor_pd(j1, _mm256_andnot_pd(j3, j2)); // j==1 || j==3
    const __m256d s_base = _mm256_blendv_pd(sinz, cosz, swap);
    const __m256d c_base = _mm256_blendv_pd(cosz, sinz, swap);
    // sign of sin negative in quadrants 2,3 ; sign of cos negative in 1,2
    const __m256d sign = _mm256_set1_pd(-0.0);
    const __m256d s_neg = _mm256_and_pd(j2, sign);                       // j >= 2
    const __m256d c_neg = _mm256_and_pd(_mm256_andnot_pd(j3, j1), sign); // j==1 || j==2

    SinCos4 out;
    out.s = _mm256_xor_pd(s_base, s_neg);
    out.c = _mm256_xor_pd(c_base, c_neg);
    return out;
}

inline __m256d dot3(__m256d ax, __m256d ay, __m256d az, __m256d bx, __m256d by, __m256d bz) {
    return _mm256_fmadd_pd(ax, bx, _mm256_fmadd_pd(ay, by, _mm256_mul_pd(az, bz)));
}

} // namespace

void kernel_batch_avx2(const KernelBatchIn& in, const KernelBatchOut& out) {
    const int n4 = in.n & ~3;
    const __m256d xk = _mm256_set1_pd(in.k);
    const __m256d xx = _mm256_set1_pd(in.x.x);
    const __m256d xy = _mm256_set1_pd(in.x.y);
    const __m256d xz = _mm256_set1_pd(in.x.z);
    const __m256d c_inv4pi = _mm256_set1_pd(inv4pi);
    const __m256d one = _mm256_set1_pd(1.0);

    for (int i = 0; i < n4; i += 4) {
        const __m256d dx = _mm256_sub_pd(_mm256_loadu_pd(in.yx + i), xx);
        const __m256d dy = _mm256_sub_pd(_mm256_loadu_pd(in.yy + i), xy);
        const __m256d dz = _mm256_sub_pd(_mm256_loadu_pd(in.yz + i), xz);
        const __m256d nyx = _mm256_loadu_pd(in.nyx + i);
        const __m256d nyy = _mm256_loadu_pd(in.nyy + i);
        const __m256d nyz = _mm256_loadu_pd(in.nyz + i);

        const __m256d R2 = dot3(dx, dy, dz, dx, dy, dz);
        const __m256d R = _mm256_sqrt_pd(R2);
        const __m256d invR = _mm256_div_pd(one, R);
        const __m256d invR2 = _mm256_mul_pd(invR, invR);
        const __m256d kR = _mm256_mul_pd(xk, R);

        const SinCos4 sc = sincos4(kR);
        const __m256d phi0 = _mm256_mul_pd(c_inv4pi, invR);
        const __m256d phre = _mm256_mul_pd(phi0, sc.c);
        const __m256d phim = _mm256_mul_pd(phi0, sc.s);
        _mm256_storeu_pd(out.phi_re + i, phre);
        _mm256_storeu_pd(out.phi_im + i, phim);
        _mm256_storeu_pd(out.phi0 + i, phi0);

        // E1 = Phi (ikR - 1) + Phi_0; series below kR = 0.5
        const __m256d t2 = _mm256_mul_pd(kR, kR);
        const __m256d e1_re_d = _mm256_mul_pd(
            phi0, _mm256_sub_pd(_mm256_sub_pd(one, sc.c), _mm256_mul_pd(kR, sc.s)));
        const __m256d e1_im_d = _mm256_mul_pd(phi0, _mm256_fmsub_pd(kR, sc.c, sc.s));
        __m256d ser_re = _mm256_set1_pd(1.0 / 43545600.0);
        ser_re = _mm256_fmadd_pd(ser_re, t2, _mm256_set1_pd(-1.0 / 403200.0));
        ser_re = _mm256_fmadd_pd(ser_re, t2, _mm256_set1_pd(1.0 / 5760.0));
        ser_re = _mm256_fmadd_pd(ser_re, t2, _mm256_set1_pd(-1.0 / 144.0));
        ser_re = _mm256_fmadd_pd(ser_re, t2, _mm256_set1_pd(1.0 / 8.0));
        ser_re = _mm256_fmadd_pd(ser_re, t2, _mm256_set1_pd(-1.0 / 2.0));
        ser_re = _mm256_mul_pd(_mm256_mul_pd(ser_re, t2), phi0);
        __m256d ser_im = _mm256_set1_pd(1.0 / 518918400.0);
        ser_im = _mm256_fmadd_pd(ser_im, t2, _mm256_set1_pd(-1.0 / 3991680.0));
        ser_im = _mm256_fmadd_pd(ser_im, t2, _mm256_set1_pd(1.0 / 45360.0));
        ser_im = _mm256_fmadd_pd(ser_im, t2, _mm256_set1_pd(-1.0 / 840.0));
        ser_im = _mm256_fmadd_pd(ser_im, t2, _mm256_set1_pd(1.0 / 30.0));
        ser_im = _mm256_fmadd_pd(ser_im, t2, _mm256_set1_pd(-1.0 / 3.0));
        ser_im = _mm256_mul_pd(_mm256_mul_pd(_mm256_mul_pd(ser_im, t2), kR), phi0);
        const __m256d small = _mm256_cmp_pd(kR, _mm256_set1_pd(0.5), _CMP_LT_OQ);
        const __m256d e1_re = _mm256_blendv_pd(e1_re_d, ser_re, small);
        const __m256d e1_im = _mm256_blendv_pd(e1_im_d, ser_im, small);

        const __m256d dn_y = _mm256_mul_pd(dot3(dx, dy, dz, nyx, nyy, nyz), invR);
        // (ikR - 1) phi / R = (E1 - Phi_0) / R
        const __m256d t_re = _mm256_mul_pd(_mm256_sub_pd(e1_re, phi0), invR);
        const __m256d t_im = _mm256_mul_pd(e1_im, invR);
        _mm256_storeu_pd(out.dky_re + i, _mm256_mul_pd(t_re, dn_y));
        _mm256_storeu_pd(out.dky_im + i, _mm256_mul_pd(t_im, dn_y));
        const __m256d mphi0invR = _mm256_sub_pd(_mm256_setzero_pd(), _mm256_mul_pd(phi0, invR));
        _mm256_storeu_pd(out.d0y + i, _mm256_mul_pd(mphi0invR, dn_y));

        if (!in.with_x) continue;

        const __m256d nxx = _mm256_set1_pd(in.n_x.x);
        const __m256d nxy_ = _mm256_set1_pd(in.n_x.y);
        const __m256d nxz = _mm256_set1_pd(in.n_x.z);
        const __m256d dn_x = _mm256_sub_pd(_mm256_setzero_pd(),
                                           _mm256_mul_pd(dot3(dx, dy, dz, nxx, nxy_, nxz), invR));
        _mm256_storeu_pd(out.dkx_re + i, _mm256_mul_pd(t_re, dn_x));
        _mm256_storeu_pd(out.dkx_im + i, _mm256_mul_pd(t_im, dn_x));
        _mm256_storeu_pd(out.d0x + i, _mm256_mul_pd(mphi0invR, dn_x));

        const __m256d nxny = dot3(nxx, nxy_, nxz, nyx, nyy, nyz);
        const __m256d dd = _mm256_mul_pd(dn_x, dn_y);
        _mm256_storeu_pd(out.nxny + i, nxny);
        _mm256_storeu_pd(out.nxdy + i, dot3(dx, dy, dz, nxx, nxy_, nxz));
        const __m256d v1x = _mm256_set1_pd(in.v1.x), v1y = _mm256_set1_pd(in.v1.y),
                      v1z = _mm256_set1_pd(in.v1.z);
        const __m256d v2x = _mm256_set1_pd(in.v2.x), v2y = _mm256_set1_pd(in.v2.y),
                      v2z = _mm256_set1_pd(in.v2.z);
        _mm256_storeu_pd(out.v1ny + i, dot3(v1x, v1y, v1z, nyx, nyy, nyz));
        _mm256_storeu_pd(out.v2ny + i, dot3(v2x, v2y, v2z, nyx, nyy, nyz));
        _mm256_storeu_pd(out.v1dy + i, dot3(v1x, v1y, v1z, dx, dy, dz));
        _mm256_storeu_pd(out.v2dy + i, dot3(v2x, v2y, v2z, dx, dy, dz));

        const __m256d three = _mm256_set1_pd(3.0);
        _mm256_storeu_pd(out.h0 + i,
                         _mm256_mul_pd(_mm256_mul_pd(phi0, invR2),
                                       _mm256_fmadd_pd(three, dd, nxny)));

        const __m256d kkR2phi_re = _mm256_mul_pd(t2, phre);
        const __m256d kkR2phi_im = _mm256_mul_pd(t2, phim);
        // hm = -(1/R^2)[nxny E1 + (k^2R^2 phi + 3 E1) dd]
        const __m256d hm_re = _mm256_sub_pd(
            _mm256_setzero_pd(),
            _mm256_mul_pd(invR2,
                          _mm256_fmadd_pd(nxny, e1_re,
                                          _mm256_mul_pd(_mm256_fmadd_pd(three, e1_re, kkR2phi_re),
                                                        dd))));
        const __m256d hm_im = _mm256_sub_pd(
            _mm256_setzero_pd(),
            _mm256_mul_pd(invR2,
                          _mm256_fmadd_pd(nxny, e1_im,
                                          _mm256_mul_pd(_mm256_fmadd_pd(three, e1_im, kkR2phi_im),
                                                        dd))));
        _mm256_storeu_pd(out.hm_re + i, hm_re);
        _mm256_storeu_pd(out.hm_im + i, hm_im);
    }

    if (n4 < in.n) {
        // scalar tail
        KernelBatchIn tail = in;
        tail.n = in.n - n4;
        tail.yx = in.yx + n4;
        tail.yy = in.yy + n4;
        tail.yz = in.yz + n4;
        tail.nyx = in.nyx + n4;
        tail.nyy = in.nyy + n4;
        tail.nyz = in.nyz + n4;
        KernelBatchOut o = out;
        auto shift = [&](double*& p) { if (p) p += n4; };
        shift(o.phi_re); shift(o.phi_im); shift(o.dky_re); shift(o.dky_im);
        shift(o.phi0); shift(o.d0y);
        shift(o.dkx_re); shift(o.dkx_im); shift(o.d0x); shift(o.h0);
        shift(o.hm_re); shift(o.hm_im);
        shift(o.v1ny); shift(o.v2ny); shift(o.v1dy); shift(o.v2dy);
        shift(o.nxny); shift(o.nxdy);
        kernel_batch_scalar(tail, o);
    }
}

} // namespace igabem::simd

#endif
