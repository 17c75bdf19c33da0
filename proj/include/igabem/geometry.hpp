#ifndef IGABEM_GEOMETRY_HPP
#define IGABEM_GEOMETRY_HPP

#include "igabem/mesh.hpp"

#include <optional>

namespace igabem {

enum class GeometryKind { SpherePar1, SpherePar2, Torus, Cube };

struct GeometrySpec {
    GeometryKind kind = GeometryKind::SpherePar1;
    double radius = 1.0;          // spheres
    double r_major = 2.0, r_minor = 1.0; // torus
    double side = 1.0;            // cube

    int min_degree() const;
    SurfaceMesh build() const;
};

// Unit-degree constructors; radius/side scale the exact control nets.
SurfaceMesh make_sphere_par1(double radius);  // 1 patch, 8 elements, degree 2, two poles
SurfaceMesh make_sphere_par2(double radius);  // 6 patches, degree 4, no degeneracies
SurfaceMesh make_torus(double r_major, double r_minor); // 1 patch, 16 elements, degree 2
SurfaceMesh make_cube(double side);           // 6 bilinear patches

// Mesh family: degree-elevate the coarsest parametrization to `degree`
// (continuity of initial knot lines preserved), then uniformly refine
// `refinements-1` times inserting midpoints with multiplicity degree-continuity.
SurfaceMesh build_mesh(const GeometrySpec& geom, int refinements, int degree,
                       std::optional<int> continuity = std::nullopt);

struct NacaCoefficients {
    double a0 = 0.0, a1 = 0.0, a2 = 0.0, a3 = 0.0, a4 = 0.0;
};

// Thickness-function coefficients from the closed trailing-edge conditions
//   f_t(1)=0, f_t(0.3)=t/2, f_t'(0.3)=0, a0=0.2969, f_t'(1)=-5t*slope.
NacaCoefficients solve_naca_coefficients(double trailing_edge_slope = 0.243895);

// f_t(x) = 5t (a0 sqrt(x) + a1 x + a2 x^2 + a3 x^3 + a4 x^4), 0 <= x <= 1
double naca_thickness(const NacaCoefficients& c, double t, double x);
double naca_thickness_deriv(const NacaCoefficients& c, double t, double x);
double naca_thickness_deriv2(const NacaCoefficients& c, double t, double x);

} // namespace igabem

#endif
