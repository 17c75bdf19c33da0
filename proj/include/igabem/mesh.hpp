#ifndef IGABEM_MESH_HPP
#define IGABEM_MESH_HPP

#include "igabem/nurbs.hpp"

#include <iosfwd>

namespace igabem {

// Parametric location of a degree of freedom inside one owning patch
// (the Greville abscissa of one of its merged local basis functions).
struct DofAnchor {
    int patch = 0;
    double xi = 0.0, eta = 0.0;
};

struct Element {
    int patch = 0;
    double xi0 = 0.0, xi1 = 0.0, eta0 = 0.0, eta1 = 0.0;
    std::vector<int> dofs;      // global ids, local ordering (i fastest)
    Vec3 corners[4];            // (xi0,eta0),(xi1,eta0),(xi1,eta1),(xi0,eta1)
    Vec3 center;
    double h_diag = 0.0;        // largest physical diagonal

    double xi_mid() const { return 0.5 * (xi0 + xi1); }
    double eta_mid() const { return 0.5 * (eta0 + eta1); }
    double area_param() const { return (xi1 - xi0) * (eta1 - eta0); }
    bool contains_param(double xi, double eta, double tol = 0.0) const {
        return xi >= xi0 - tol && xi <= xi1 + tol && eta >= eta0 - tol && eta <= eta1 + tol;
    }
};

// Conforming multi-patch surface: coincident control points on patch
// boundaries are identified into single global degrees of freedom.
struct SurfaceMesh {
    std::vector<NurbsPatch> patches;
    std::vector<Element> elements;
    std::vector<std::vector<int>> patch_dof_map; // per patch: local cp index -> global dof
    std::vector<std::vector<DofAnchor>> dof_anchors;
    int n_dofs = 0;
    bool closed = false;
    double diameter = 0.0;    // bounding-box diagonal of the control net

    SurfaceFrame frame(int patch, double xi, double eta) const {
        return patches[patch].frame(xi, eta);
    }
    Vec3 point(int patch, double xi, double eta) const { return patches[patch].point(xi, eta); }

    int n_elements() const { return static_cast<int>(elements.size()); }

    // Elements of the given patch whose closed parametric rectangle contains (xi,eta).
    std::vector<int> elements_containing(int patch, double xi, double eta,
                                         double tol = 1e-12) const;

    double max_h() const;
};

SurfaceMesh build_conforming_mesh(std::vector<NurbsPatch> patches, double merge_tol_rel = 1e-10);

// Tessellation export, legacy ASCII VTK polydata (POINTS/POLYGONS).
void write_vtk(const SurfaceMesh& mesh, std::ostream& os, int per_element = 4);
void write_vtk_file(const SurfaceMesh& mesh, const std::string& path, int per_element = 4);

} // namespace igabem

#endif
