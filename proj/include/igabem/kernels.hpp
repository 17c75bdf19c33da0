#ifndef IGABEM_KERNELS_HPP
#define IGABEM_KERNELS_HPP

#include "igabem/core.hpp"

namespace igabem {

struct Wavenumber {
    double k = 0.0; // 1/m
    static constexpr double c_f = 1500.0; // m/s

    double omega() const { return k * c_f; }
    double frequency() const { return omega() / (2.0 * pi); }
    double wavelength() const { return 2.0 * pi / k; }

    static Wavenumber from_frequency(double f) { return {2.0 * pi * f / c_f}; }
};

// Free-space kernel Phi_k = e^{ikR}/(4 pi R) and its normal derivatives.
struct KernelEval {
    Complex phi;
    Complex dphi_dny; // d Phi / d n(y)
    Complex dphi_dnx; // d Phi / d n(x)
    Complex d2phi;    // d^2 Phi / d n(y) d n(x)
    double R = 0.0;
};

Complex greens(double k, const Vec3& x, const Vec3& y);
KernelEval greens_derivs(double k, const Vec3& x, const Vec3& y, const Vec3& n_x,
                         const Vec3& n_y);

// [e^{ikR}(ikR - 1) + 1] / (4 pi R); series evaluation near kR = 0.
// Equals Phi_k*(ikR-1) + Phi_0, the regularized double-layer difference factor:
//   dPhi_k/dn(y) - dPhi_0/dn(y) = e1_kernel * dR/dn(y) / R.
Complex e1_kernel(double k, double R);

enum class DomainSide { Exterior, Interior };

// C^{+/-}(x) for x on Gamma, from the static double-layer integral I0.
double jump_term(DomainSide side, double static_double_layer_integral);

// Regularizing pair (Psi_1, Psi_2) and their y-normal derivatives.
struct PsiEval {
    Complex psi1, psi2;
    Complex dpsi1_dny, dpsi2_dny;
};

// Family 1 (interior-standing-wave pair around offset point x1).
PsiEval psi_family_1(double k, const Vec3& x, const Vec3& n_x, const Vec3& x1, const Vec3& y,
                     const Vec3& n_y);

// Family 2 (radiating pair built from fundamental solutions at x1, x2).
PsiEval psi_family_2(double k, const Vec3& x, const Vec3& n_x, const Vec3& x1, const Vec3& x2,
                     const Vec3& y, const Vec3& n_y);

// Family 3 (plane-wave pair; needs no exterior points).
PsiEval psi_family_3(double k, const Vec3& x, const Vec3& n_x, const Vec3& y, const Vec3& n_y,
                     double theta1 = -pi / 2, double theta2 = -pi);

// Direction d1 used by family 3; |d1| = 1 and d1.n = -1/2.
Vec3 psi3_direction(const Vec3& n_x, double theta1 = -pi / 2, double theta2 = -pi);

} // namespace igabem

#endif
