#include "igabem/mesh.hpp"

#include <algorithm>
#include <fstream>
#include <map>
#include <numeric>
#include <ostream>
#include <sstream>

namespace igabem {

std::vector<int> SurfaceMesh::elements_containing(int patch, double xi, double eta,
                                                  double tol) const {
    std::vector<int> out;
    for (int e = 0; e < n_elements(); ++e) {
        const Element& el = elements[e];
        if (el.patch == patch && el.contains_param(xi, eta, tol)) out.push_back(e);
    }
    return out;
}

double SurfaceMesh::max_h() const {
    double h = 0.0;
    for (const Element& el : elements) h = std::max(h, el.h_diag);
    return h;
}

namespace {

struct CpRef {
    int patch, i, j;
};

// Union-find over all control points, merging pairs closer than tol.
class UnionFind {
public:
    explicit UnionFind(std::size_t n) : parent_(n) {
        std::iota(parent_.begin(), parent_.end(), std::size_t{0});
    }
    std::size_t find(std::size_t a) {
        while (parent_[a] != a) {
            parent_[a] = parent_[parent_[a]];
            a = parent_[a];
        }
        return a;
    }
    void unite(std::size_t a, std::size_t b) { parent_[find(a)] = find(b); }

private:
    std::vector<std::size_t> parent_;
};

} // namespace

SurfaceMesh build_conforming_mesh(std::vector<NurbsPatch> patches, double merge_tol_rel) {
    SurfaceMesh mesh;
    for (auto& p : patches) p.validate();
    mesh.patches = std::move(patches);

    // gather all control points with flat ids
    std::vector<CpRef> refs;
    std::vector<Vec3> pts;
    std::vector<std::size_t> patch_offset(mesh.patches.size() + 1, 0);
    for (std::size_t pi = 0; pi < mesh.patches.size(); ++pi) {
        const NurbsPatch& p = mesh.patches[pi];
        patch_offset[pi + 1] = patch_offset[pi] + static_cast<std::size_t>(p.nu) * p.nv;
        for (int j = 0; j < p.nv; ++j)
            for (int i = 0; i < p.nu; ++i) {
                refs.push_back({static_cast<int>(pi), i, j});
                pts.push_back(p.control_points[p.index(i, j)]);
            }
    }

    Vec3 lo = pts.empty() ? Vec3{} : pts[0], hi = lo;
    for (const Vec3& q : pts) {
        lo = {std::min(lo.x, q.x), std::min(lo.y, q.y), std::min(lo.z, q.z)};
        hi = {std::max(hi.x, q.x), std::max(hi.y, q.y), std::max(hi.z, q.z)};
    }
    mesh.diameter = norm(hi - lo);
    const double tol = merge_tol_rel * std::max(mesh.diameter, 1e-30);

    // merge coincident control points: sort by x and scan a sliding window
    const std::size_t N = pts.size();
    std::vector<std::size_t> order(N);
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::sort(order.begin(), order.end(),
              [&](std::size_t a, std::size_t b) { return pts[a].x < pts[b].x; });
    UnionFind uf(N);
    for (std::size_t a = 0; a < N; ++a) {
        for (std::size_t b = a + 1; b < N; ++b) {
            if (pts[order[b]].x - pts[order[a]].x > tol) break;
            if (dist(pts[order[a]], pts[order[b]]) <= tol) uf.unite(order[a], order[b]);
        }
    }

    // near-miss interface detection: boundary points of distinct patches that
    // almost coincide indicate a non-matching interface
    {
        const double near = 1e3 * tol;
        auto is_boundary = [&](const CpRef& r) {
            const NurbsPatch& p = mesh.patches[r.patch];
            return r.i == 0 || r.i == p.nu - 1 || r.j == 0 || r.j == p.nv - 1;
        };
        for (std::size_t a = 0; a < N; ++a) {
            for (std::size_t b = a + 1; b < N; ++b) {
                if (pts[order[b]].x - pts[order[a]].x > near) break;
                const std::size_t ia = order[a], ib = order[b];
                if (refs[ia].patch == refs[ib].patch) continue;
                const double d = dist(pts[ia], pts[ib]);
                if (d > tol && d <= near && is_boundary(refs[ia]) && is_boundary(refs[ib])) {
                    std::ostringstream msg;
                    msg << "build_conforming_mesh: non-matching interface between patch "
                        << refs[ia].patch << " and patch " << refs[ib].patch << " (gap " << d
                        << ", tol " << tol << ")";
                    throw std::runtime_error(msg.str());
                }
            }
        }
    }

    // renumber representatives to 0..n_dofs-1
    std::vector<int> dof_of(N, -1);
    int ndofs = 0;
    for (std::size_t f = 0; f < N; ++f) {
        const std::size_t r = uf.find(f);
        if (dof_of[r] < 0) dof_of[r] = ndofs++;
        dof_of[f] = dof_of[r];
    }
    mesh.n_dofs = ndofs;

    mesh.patch_dof_map.resize(mesh.patches.size());
    for (std::size_t pi = 0; pi < mesh.patches.size(); ++pi) {
        const NurbsPatch& p = mesh.patches[pi];
        mesh.patch_dof_map[pi].resize(static_cast<std::size_t>(p.nu) * p.nv);
    }
    for (std::size_t f = 0; f < N; ++f) {
        const CpRef& r = refs[f];
        const NurbsPatch& p = mesh.patches[r.patch];
        mesh.patch_dof_map[r.patch][p.index(r.i, r.j)] = dof_of[f];
    }

    // one anchor per (dof, owning local function)
    mesh.dof_anchors.assign(ndofs, {});
    for (std::size_t pi = 0; pi < mesh.patches.size(); ++pi) {
        const NurbsPatch& p = mesh.patches[pi];
        const auto gx = p.knots_xi.greville();
        const auto ge = p.knots_eta.greville();
        for (int j = 0; j < p.nv; ++j)
            for (int i = 0; i < p.nu; ++i) {
                const int g = mesh.patch_dof_map[pi][p.index(i, j)];
                mesh.dof_anchors[g].push_back({static_cast<int>(pi), gx[i], ge[j]});
            }
    }

    // nonzero-measure knot spans -> elements
    for (std::size_t pi = 0; pi < mesh.patches.size(); ++pi) {
        const NurbsPatch& p = mesh.patches[pi];
        const int dp = p.degree_xi(), dq = p.degree_eta();
        for (const auto& se : p.knots_eta.breaks()) {
            for (const auto& sx : p.knots_xi.breaks()) {
                Element el;
                el.patch = static_cast<int>(pi);
                el.xi0 = sx[0];
                el.xi1 = sx[1];
                el.eta0 = se[0];
                el.eta1 = se[1];
                const int fu = p.knots_xi.find_span(0.5 * (sx[0] + sx[1])) - dp;
                const int fv = p.knots_eta.find_span(0.5 * (se[0] + se[1])) - dq;
                el.dofs.reserve(static_cast<std::size_t>(dp + 1) * (dq + 1));
                for (int j = 0; j <= dq; ++j)
                    for (int i = 0; i <= dp; ++i)
                        el.dofs.push_back(mesh.patch_dof_map[pi][p.index(fu + i, fv + j)]);
                el.corners[0] = p.point(sx[0], se[0]);
                el.corners[1] = p.point(sx[1], se[0]);
                el.corners[2] = p.point(sx[1], se[1]);
                el.corners[3] = p.point(sx[0], se[1]);
                el.center = p.point(0.5 * (sx[0] + sx[1]), 0.5 * (se[0] + se[1]));
                el.h_diag = std::max(dist(el.corners[0], el.corners[2]),
                                     dist(el.corners[1], el.corners[3]));
                if (el.area_param() <= 0.0)
                    throw std::runtime_error("build_conforming_mesh: zero-measure element");
                mesh.elements.push_back(std::move(el));
            }
        }
    }

    // closedness: every non-collapsed boundary segment must be shared by two sides
    {
        std::map<std::pair<int, int>, int> seg_count;
        for (std::size_t pi = 0; pi < mesh.patches.size(); ++pi) {
            const NurbsPatch& p = mesh.patches[pi];
            auto add_segment = [&](int g0, int g1) {
                if (g0 == g1) return; // collapsed (polar) edge
                seg_count[{std::min(g0, g1), std::max(g0, g1)}] += 1;
            };
            for (int i = 0; i + 1 < p.nu; ++i) {
                add_segment(mesh.patch_dof_map[pi][p.index(i, 0)],
                            mesh.patch_dof_map[pi][p.index(i + 1, 0)]);
                add_segment(mesh.patch_dof_map[pi][p.index(i, p.nv - 1)],
                            mesh.patch_dof_map[pi][p.index(i + 1, p.nv - 1)]);
            }
            for (int j = 0; j + 1 < p.nv; ++j) {
                add_segment(mesh.patch_dof_map[pi][p.index(0, j)],
                            mesh.patch_dof_map[pi][p.index(0, j + 1)]);
                add_segment(mesh.patch_dof_map[pi][p.index(p.nu - 1, j)],
                            mesh.patch_dof_map[pi][p.index(p.nu - 1, j + 1)]);
            }
        }
        mesh.closed = true;
        for (const auto& [seg, c] : seg_count) {
            if (c == 1) {
                mesh.closed = false;
                break;
            }
        }
    }

    return mesh;
}

void write_vtk(const SurfaceMesh& mesh, std::ostream& os, int per_element) {
    const int n = std::max(per_element, 1);
    std::vector<Vec3> points;
    std::vector<std::array<int, 4>> quads;
    for (const Element& el : mesh.elements) {
        const NurbsPatch& p = mesh.patches[el.patch];
        const int base = static_cast<int>(points.size());
        for (int j = 0; j <= n; ++j) {
            for (int i = 0; i <= n; ++i) {
                const double xi = el.xi0 + (el.xi1 - el.xi0) * i / n;
                const double eta = el.eta0 + (el.eta1 - el.eta0) * j / n;
                points.push_back(p.point(xi, eta));
            }
        }
        for (int j = 0; j < n; ++j)
            for (int i = 0; i < n; ++i) {
                const int a = base + i + (n + 1) * j;
                quads.push_back({a, a + 1, a + n + 2, a + n + 1});
            }
    }
    os << "# vtk DataFile Version 3.0\n";
    os << "igabem surface tessellation\n";
    os << "ASCII\n";
    os << "DATASET POLYDATA\n";
    os << "POINTS " << points.size() << " float64\n";
    os.precision(17);
    for (const Vec3& q : points) os << q.x << " " << q.y << " " << q.z << "\n";
    os << "POLYGONS " << quads.size() << " " << 5 * quads.size() << "\n";
    for (const auto& q : quads) os << "4 " << q[0] << " " << q[1] << " " << q[2] << " " << q[3] << "\n";
}

void write_vtk_file(const SurfaceMesh& mesh, const std::string& path, int per_element) {
    std::ofstream os(path);
    if (!os) throw std::runtime_error("write_vtk_file: cannot open " + path);
    write_vtk(mesh, os, per_element);
}

} // namespace igabem
