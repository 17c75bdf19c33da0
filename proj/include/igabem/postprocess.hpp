#ifndef IGABEM_POSTPROCESS_HPP
#define IGABEM_POSTPROCESS_HPP

#include "igabem/assembly.hpp"

namespace igabem {

// Surface traces (p, dp/dn) feeding the representation integrals. Either
// closures over surface points, or a coefficient vector plus a dp/dn closure.
struct SurfaceTraces {
    std::function<Complex(const Element&, double xi, double eta, const SurfaceFrame&)> p;
    std::function<Complex(const Element&, double xi, double eta, const SurfaceFrame&)> dpdn;

    static SurfaceTraces from_coefficients(const SurfaceMesh& mesh, const Eigen::VectorXcd& u,
                                           std::function<Complex(const Vec3&, const Vec3&)> dpdn);
    static SurfaceTraces from_fields(std::function<Complex(const Vec3&)> p,
                                     std::function<Complex(const Vec3&, const Vec3&)> dpdn);
};

struct FieldEval {
    Complex value;
    bool near_surface = false; // within 1e-6 * diameter of the surface
};

// Kirchhoff representation p(x) = int_G [p dPhi/dn(y) - Phi dp/dn] dG(y).
FieldEval field_at(const SurfaceMesh& mesh, const SurfaceTraces& traces, double k, const Vec3& x,
                   const QuadConfig& cfg = {});

// p0(xh) = -(1/4pi) int_G [ik p xh.n + dp/dn] e^{-ik xh.y} dG(y)
std::vector<Complex> far_field(const SurfaceMesh& mesh, const SurfaceTraces& traces, double k,
                               const std::vector<Vec3>& directions, int n_eqp1 = 0);

// TS = 20 log10(|p0| / |P_inc|); -inf sentinel for p0 = 0
double target_strength(Complex p0, double P_inc);

struct L2Error {
    double absolute = 0.0;
    double relative = 0.0; // absolute / ||p_exact||, 0 when that norm vanishes
    double norm_exact = 0.0;
};

L2Error l2_surface_error(const SurfaceMesh& mesh, const Eigen::VectorXcd& u,
                         const std::function<Complex(const Vec3&)>& exact, int n_extra = 2);

// || |A| - |B| ||_2 / || |B| ||_2 * 100
double far_field_l2_error_percent(const std::vector<Complex>& a, const std::vector<Complex>& b);

struct SweepEntry {
    double phi_deg, theta_deg;
    Complex p0;
    double ts;
};

void write_sweep_csv(const std::vector<SweepEntry>& sweep, std::ostream& os);

} // namespace igabem

#endif
