#include "igabem/kernels.hpp"

namespace igabem {

namespace {
constexpr double four_pi = 4.0 * pi;
}

Complex greens(double k, const Vec3& x, const Vec3& y) {
    const double R = dist(x, y);
    if (R <= 0.0) throw std::domain_error("greens: coincident points");
    return std::polar(1.0 / (four_pi * R), k * R);
}

Complex e1_kernel(double k, double R) {
    const double kR = k * R;
    const double phi0 = 1.0 / (four_pi * R);
    if (std::abs(kR) < 0.5) {
        // sum_{m>=2} (m-1)/m! (i kR)^m, split into even/odd powers of t = kR
        const double t2 = kR * kR;
        const double re =
            t2 * (-1.0 / 2 +
                  t2 * (1.0 / 8 +
                        t2 * (-1.0 / 144 +
                              t2 * (1.0 / 5760 +
                                    t2 * (-1.0 / 403200 + t2 * (1.0 / 43545600))))));
        const double im =
            kR * t2 *
            (-1.0 / 3 +
             t2 * (1.0 / 30 +
                   t2 * (-1.0 / 840 +
                         t2 * (1.0 / 45360 + t2 * (-1.0 / 3991680 + t2 * (1.0 / 518918400))))));
        return Complex(phi0 * re, phi0 * im);
    }
    const double c = std::cos(kR), s = std::sin(kR);
    return Complex(phi0 * (1.0 - c - kR * s), phi0 * (kR * c - s));
}

KernelEval greens_derivs(double k, const Vec3& x, const Vec3& y, const Vec3& n_x,
                         const Vec3& n_y) {
    const Vec3 d = x - y;
    const double R = norm(d);
    if (R <= 0.0) throw std::domain_error("greens_derivs: coincident points");
    const double invR = 1.0 / R;
    const double phi0 = invR / four_pi;
    const Complex phi = std::polar(phi0, k * R);
    const double drdnx = dot(d, n_x) * invR;
    const double drdny = -dot(d, n_y) * invR;

    // Phi (ikR - 1) = E1 - Phi_0, free of small-kR cancellation
    const Complex phi_ikrm1 = e1_kernel(k, R) - phi0;

    KernelEval out;
    out.R = R;
    out.phi = phi;
    out.dphi_dny = phi_ikrm1 * invR * drdny;
    out.dphi_dnx = phi_ikrm1 * invR * drdnx;
    out.d2phi = -(invR * invR) *
                (dot(n_x, n_y) * phi_ikrm1 +
                 (k * k * R * R * phi + 3.0 * phi_ikrm1) * drdnx * drdny);
    return out;
}

double jump_term(DomainSide side, double static_double_layer_integral) {
    if (side == DomainSide::Exterior) return -1.0 - static_double_layer_integral;
    return -static_double_layer_integral;
}

PsiEval psi_family_1(double k, const Vec3& x, const Vec3& n_x, const Vec3& x1, const Vec3& y,
                     const Vec3& n_y) {
    if (!(k > 0.0)) throw std::invalid_argument("psi_family_1: requires k > 0");
    const double C1 = dist(x, x1);
    const double C2 = dot(x - x1, n_x);
    if (std::abs(C2) < 1e-14 * std::max(C1, 1.0))
        throw std::invalid_argument("psi_family_1: (x-x1).n(x) must be nonzero");

    const Vec3 d = y - x1;
    const double R1 = norm(d);
    const double arg = k * (R1 - C1);
    const double sn = std::sin(arg), cs = std::cos(arg);
    const double invR1 = 1.0 / R1;

    PsiEval out;
    out.psi1 = C1 * cs * invR1 + sn / (k * R1);
    out.psi2 = C1 * C1 * sn / (C2 * k * R1);
    // radial derivatives, chained through dR1/dn(y) = (y - x1).n(y) / R1
    const double dR1dny = dot(d, n_y) * invR1;
    const double dpsi1_dR1 =
        -C1 * k * sn * invR1 - C1 * cs * invR1 * invR1 + cs * invR1 - sn / (k * R1 * R1);
    const double dpsi2_dR1 = C1 * C1 / C2 * (cs * invR1 - sn / (k * R1 * R1));
    out.dpsi1_dny = dpsi1_dR1 * dR1dny;
    out.dpsi2_dny = dpsi2_dR1 * dR1dny;
    return out;
}

PsiEval psi_family_2(double k, const Vec3& x, const Vec3& n_x, const Vec3& x1, const Vec3& x2,
                     const Vec3& y, const Vec3& n_y) {
    const double r1 = dist(x1, x);
    const double r2 = dist(x2, x);
    const Complex ikr1m1{-1.0, k * r1}, ikr2m1{-1.0, k * r2};
    const double a1 = dot(x1 - x, n_x);
    const double a2 = dot(x2 - x, n_x);
    const Complex C1 = 1.0 - (r2 * r2 * ikr1m1 * a1) / (r1 * r1 * ikr2m1 * a2);
    const Complex C2 = C1 / (r2 * r2) * ikr2m1 * a2;
    if (std::abs(C1) < 1e-14 || std::abs(C2) < 1e-14)
        throw std::invalid_argument("psi_family_2: degenerate offset points (C1 or C2 zero)");

    const KernelEval k1 = greens_derivs(k, x1, y, n_x /*unused for dny*/, n_y);
    const KernelEval k2 = greens_derivs(k, x2, y, n_x, n_y);
    const Complex g1x = greens(k, x1, x);
    const Complex g2x = greens(k, x2, x);

    PsiEval out;
    out.psi1 = k1.phi / (C1 * g1x) + (1.0 - 1.0 / C1) * k2.phi / g2x;
    out.psi2 = (k1.phi / g1x - k2.phi / g2x) / C2;
    out.dpsi1_dny = k1.dphi_dny / (C1 * g1x) + (1.0 - 1.0 / C1) * k2.dphi_dny / g2x;
    out.dpsi2_dny = (k1.dphi_dny / g1x - k2.dphi_dny / g2x) / C2;
    return out;
}

Vec3 psi3_direction(const Vec3& n, double theta1, double theta2) {
    const double n1 = n.x, n2 = n.y, n3 = n.z;
    Vec3 d;
    if (std::abs(n1) < 1.0 / std::sqrt(2.0)) {
        const double c = std::sqrt(3.0) / (2.0 * std::sqrt(1.0 - n1 * n1));
        const double ct = std::cos(theta1), st = std::sin(theta1);
        d = Vec3{(1.0 - n1 * n1) * ct, -n1 * n2 * ct + n3 * st, -n1 * n3 * ct - n2 * st} * c -
            0.5 * n;
    } else {
        const double c = std::sqrt(3.0) / (2.0 * std::sqrt(1.0 - n2 * n2));
        const double ct = std::cos(theta2), st = std::sin(theta2);
        d = Vec3{-n1 * n2 * st - n3 * ct, (1.0 - n2 * n2) * st, -n2 * n3 * st + n1 * ct} * c -
            0.5 * n;
    }
    return d;
}

PsiEval psi_family_3(double k, const Vec3& x, const Vec3& n_x, const Vec3& y, const Vec3& n_y,
                     double theta1, double theta2) {
    if (!(k > 0.0)) throw std::invalid_argument("psi_family_3: requires k > 0");
    const Vec3 d1 = psi3_direction(n_x, theta1, theta2);
    const Vec3 d2 = d1 + n_x;
    const Vec3 dy = y - x;
    const Complex e1 = std::polar(1.0, k * dot(d1, dy));
    const Complex e2 = std::polar(1.0, k * dot(d2, dy));

    PsiEval out;
    out.psi1 = 0.5 * (e1 + e2);
    out.psi2 = iu / k * (e1 - e2);
    const Complex de1 = iu * k * dot(d1, n_y) * e1;
    const Complex de2 = iu * k * dot(d2, n_y) * e2;
    out.dpsi1_dny = 0.5 * (de1 + de2);
    out.dpsi2_dny = iu / k * (de1 - de2);
    return out;
}

} // namespace igabem
