#ifndef IGABEM_ANALYTIC_HPP
#define IGABEM_ANALYTIC_HPP

#include "igabem/kernels.hpp"

namespace igabem {

// Spherical Bessel/Hankel values and first derivatives at x > 0.
struct SphericalBessel {
    double j, jp;   // j_n, j_n'
    double y, yp;   // y_n, y_n'
    Complex h, hp;  // h_n^(1) = j_n + i y_n
};

SphericalBessel spherical_bessel(int n, double x);

// Pulsating unit sphere: p = e^{ikR}/(4 pi R), g = e^{ik}(ik-1)/(4 pi) on R=1.
Complex pulsating_sphere_pressure(double k, const Vec3& x);
Complex pulsating_sphere_neumann(double k);

// Manufactured solution from interior point sources, p = sum C_n Phi_k(x, y_n).
struct MfsSolution {
    double k = 1.0;
    std::vector<Vec3> sources;
    std::vector<Complex> coefficients;

    // default coefficients C_n = cos(n-1), n = 1..N
    static MfsSolution with_default_coefficients(double k, std::vector<Vec3> sources);
    // 27 sources on the (side/4){-1,0,1}^3 grid
    static MfsSolution cube_grid(double k, double side);
    // N sources uniformly spaced on the x-axis between x_start and x_end
    static MfsSolution line(double k, int n, double x_start, double x_end);

    Complex pressure(const Vec3& x) const;
    Complex normal_derivative(const Vec3& x, const Vec3& n) const;
    Complex far_field(const Vec3& direction) const; // (1/4pi) sum C_n e^{-ik xhat.y_n}
};

enum class EigenKind { SphereDirichlet, SphereNeumann, CubeDirichlet, CubeNeumann };

struct EigenfrequencyTable {
    EigenKind kind;
    std::vector<double> values; // dimensionless kR0 or ka, sorted ascending
};

// ka = pi sqrt(n1^2+n2^2+n3^2); Dirichlet requires positive n_i.
EigenfrequencyTable cube_eigenfrequencies(EigenKind kind, double a, double k_max);

// roots of j_n (Dirichlet) or j_n' (Neumann) up to k_max*R0, bisection to 1e-12
EigenfrequencyTable sphere_eigenfrequencies(EigenKind kind, double R0, double k_max);

// Rigid-sphere plane-wave scattering, partial-wave series.
struct RigidSphereScattering {
    double k, R0, P_inc;
    Vec3 d_s;
    int max_terms = 200;
    double term_tol = 1e-14;

    Complex scattered(const Vec3& x) const;      // |x| >= R0
    Complex total(const Vec3& x) const;          // p_inc + scattered
    Complex far_field(const Vec3& direction) const;
    Complex total_radial_derivative(const Vec3& x) const; // d p_tot / dr
};

} // namespace igabem

#endif
