#ifndef IGABEM_QUADRATURE_HPP
#define IGABEM_QUADRATURE_HPP

#include "igabem/kernels.hpp"
#include "igabem/mesh.hpp"

#include <iosfwd>

namespace igabem {

enum class QuadScheme { OldAdaptive, NewAdaptive };

struct QuadConfig {
    QuadScheme scheme = QuadScheme::NewAdaptive;
    double s1 = 1.4;
    int n_eqp1 = 0;
    int n_eqp2 = 50;
    int max_depth = 30; // quadtree recursion cap
};

// Parametric quadrature point; weight carries every Jacobian factor except
// the surface Jacobian.
struct QuadPoint {
    double xi, eta, weight;
};

struct GaussRule {
    std::vector<double> nodes, weights; // on [-1, 1]
};

const GaussRule& gauss_legendre(int n);

// Element not containing the source: fixed subdivision rule
// n_div = (1 + round(s1 h / l))^2 equal parametric cells, (p+1+n_eqp1) x
// (q+1+n_eqp1) Gauss points each. h = largest element diagonal, l = distance
// from element center to the source.
void regular_points_old(const SurfaceMesh& mesh, const Element& el, const Vec3& source,
                        const QuadConfig& cfg, std::vector<QuadPoint>& out);

// Element not containing the source: quadtree subdivision until s1 h/l < 1
// per cell, then round((p+1)(s1 h/l + 1)) points per direction. Throws if the
// recursion cap is exceeded (source effectively on the element).
void regular_points_new(const SurfaceMesh& mesh, const Element& el, const Vec3& source,
                        const QuadConfig& cfg, std::vector<QuadPoint>& out);

void regular_points(const SurfaceMesh& mesh, const Element& el, const Vec3& source,
                    const QuadConfig& cfg, std::vector<QuadPoint>& out);

// Leaf cells of the quadtree for the new scheme: (xi0, xi1, eta0, eta1, s1 h/l).
struct QuadtreeLeaf {
    double xi0, xi1, eta0, eta1, ratio;
};
std::vector<QuadtreeLeaf> quadtree_leaves(const SurfaceMesh& mesh, const Element& el,
                                          const Vec3& source, const QuadConfig& cfg);

// Element containing the source parameter: fan of 2..4 triangles from the
// source, Duffy-transformed to the unit square, subdivided n_div,r x
// n_div,theta with 2(p_max+1) Gauss points per direction per cell.
void singular_points(const SurfaceMesh& mesh, const Element& el, double xi_src, double eta_src,
                     const QuadConfig& cfg, std::vector<QuadPoint>& out);

// Surface integral of f(frame_y) over the whole mesh with a source point x on
// the surface; elements whose closed parametric rectangle contains one of the
// anchors use the polar scheme, all others the regular scheme.
Complex integrate_with_source(const SurfaceMesh& mesh, const std::vector<DofAnchor>& anchors,
                              const Vec3& x, const QuadConfig& cfg,
                              const std::function<Complex(const SurfaceFrame&)>& f);

// Static double-layer integral over the closed surface, = -c0/(4 pi).
// Throws if the mesh is open.
double solid_angle_integral(const SurfaceMesh& mesh, const std::vector<DofAnchor>& anchors,
                            const Vec3& x, const QuadConfig& cfg);

// Diagnostics dump: element_id, xi, eta, weight rows for a given source.
void dump_quadrature_csv(const SurfaceMesh& mesh, const std::vector<DofAnchor>& anchors,
                         const Vec3& x, const QuadConfig& cfg, std::ostream& os);

} // namespace igabem

#endif
