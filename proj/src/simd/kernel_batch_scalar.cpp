#include "igabem/simd/kernel_batch.hpp"

namespace igabem::simd {

namespace {
constexpr double inv4pi = 1.0 / (4.0 * 3.14159265358979323846264338327950288);
}

void kernel_batch_scalar(const KernelBatchIn& in, const KernelBatchOut& out) {
    const double k = in.k;
    const Vec3 x = in.x;
    for (int i = 0; i < in.n; ++i) {
        const double dx = in.yx[i] - x.x;
        const double dy = in.yy[i] - x.y;
        const double dz = in.yz[i] - x.z;
        const double R2 = dx * dx + dy * dy + dz * dz;
        const double R = std::sqrt(R2);
        const double invR = 1.0 / R;
        const double invR2 = invR * invR;
        const double kR = k * R;
        const double c = std::cos(kR);
        const double s = std::sin(kR);

        const double phi0 = inv4pi * invR;
        const double phre = phi0 * c;
        const double phim = phi0 * s;
        out.phi_re[i] = phre;
        out.phi_im[i] = phim;
        out.phi0[i] = phi0;

        // E1 = Phi (ikR - 1) + Phi_0; series keeps small kR free of cancellation
        double e1_re, e1_im;
        if (kR < 0.5) {
            const double t2 = kR * kR;
            e1_re = phi0 * t2 *
                    (-1.0 / 2 +
                     t2 * (1.0 / 8 +
                           t2 * (-1.0 / 144 +
                                 t2 * (1.0 / 5760 +
                                       t2 * (-1.0 / 403200 + t2 * (1.0 / 43545600))))));
            e1_im = phi0 * kR * t2 *
                    (-1.0 / 3 +
                     t2 * (1.0 / 30 +
                           t2 * (-1.0 / 840 +
                                 t2 * (1.0 / 45360 +
                                       t2 * (-1.0 / 3991680 + t2 * (1.0 / 518918400))))));
        } else {
            e1_re = phi0 * (1.0 - c - kR * s);
            e1_im = phi0 * (kR * c - s);
        }

        // dR/dn(y) = (y-x).n(y)/R ; dR/dn(x) = -(y-x).n(x)/R  (d = x - y convention folded in)
        const double dn_y = (dx * in.nyx[i] + dy * in.nyy[i] + dz * in.nyz[i]) * invR;
        // (ikR - 1) phi / R = (E1 - Phi_0) / R
        const double t_re = (e1_re - phi0) * invR;
        const double t_im = e1_im * invR;
        out.dky_re[i] = t_re * dn_y;
        out.dky_im[i] = t_im * dn_y;
        out.d0y[i] = -phi0 * invR * dn_y;

        if (!in.with_x) continue;

        const double dn_x = -(dx * in.n_x.x + dy * in.n_x.y + dz * in.n_x.z) * invR;
        out.dkx_re[i] = t_re * dn_x;
        out.dkx_im[i] = t_im * dn_x;
        out.d0x[i] = -phi0 * invR * dn_x;

        const double nxny = in.n_x.x * in.nyx[i] + in.n_x.y * in.nyy[i] + in.n_x.z * in.nyz[i];
        const double dd = dn_x * dn_y;
        out.nxny[i] = nxny;
        out.nxdy[i] = dx * in.n_x.x + dy * in.n_x.y + dz * in.n_x.z;
        out.v1ny[i] = in.v1.x * in.nyx[i] + in.v1.y * in.nyy[i] + in.v1.z * in.nyz[i];
        out.v2ny[i] = in.v2.x * in.nyx[i] + in.v2.y * in.nyy[i] + in.v2.z * in.nyz[i];
        out.v1dy[i] = in.v1.x * dx + in.v1.y * dy + in.v1.z * dz;
        out.v2dy[i] = in.v2.x * dx + in.v2.y * dy + in.v2.z * dz;

        // H_0 = Phi_0/R^2 (nxny + 3 dd)
        out.h0[i] = phi0 * invR2 * (nxny + 3.0 * dd);

        // H_k - H_0 = -(1/R^2)[nxny E1 + (k^2 R^2 Phi + 3 E1) dd]
        const double kk = k * k;
        out.hm_re[i] = -invR2 * (nxny * e1_re + (kk * R2 * phre + 3.0 * e1_re) * dd);
        out.hm_im[i] = -invR2 * (nxny * e1_im + (kk * R2 * phim + 3.0 * e1_im) * dd);
    }
}

} // namespace igabem::simd
