#include "igabem/quadrature.hpp"

#include <map>
#include <mutex>
#include <ostream>

namespace igabem {

namespace {

double paper_round(double x) { return std::floor(x + 0.5); }

GaussRule compute_gauss(int n) {
    GaussRule r;
    r.nodes.resize(n);
    r.weights.resize(n);
    for (int i = 0; i < (n + 1) / 2; ++i) {
        // Newton on P_n from the Chebyshev-like initial guess
        double x = std::cos(pi * (i + 0.75) / (n + 0.5));
        double pp = 0.0;
        for (int it = 0; it < 100; ++it) {
            double p0 = 1.0, p1 = x;
            if (n == 1) p1 = x;
            for (int j = 2; j <= n; ++j) {
                const double p2 = ((2 * j - 1) * x * p1 - (j - 1) * p0) / j;
                p0 = p1;
                p1 = p2;
            }
            const double pn = (n == 1) ? x : p1;
            const double pm = (n == 1) ? 1.0 : p0;
            pp = n * (x * pn - pm) / (x * x - 1.0);
            const double dx = pn / pp;
            x -= dx;
            if (std::abs(dx) < 1e-16) break;
        }
        r.nodes[i] = -x;
        r.nodes[n - 1 - i] = x;
        const double w = 2.0 / ((1.0 - x * x) * pp * pp);
        r.weights[i] = w;
        r.weights[n - 1 - i] = w;
    }
    if (n % 2 == 1) r.nodes[n / 2] = 0.0;
    return r;
}

} // namespace

const GaussRule& gauss_legendre(int n) {
    if (n < 1) throw std::invalid_argument("gauss_legendre: n must be >= 1");
    static std::map<int, GaussRule> cache;
    static std::mutex mtx;
    std::lock_guard<std::mutex> lock(mtx);
    auto it = cache.find(n);
    if (it == cache.end()) it = cache.emplace(n, compute_gauss(n)).first;
    return it->second;
}

namespace {

void emit_tensor_gauss(double xi0, double xi1, double eta0, double eta1, int nx, int ny,
                       std::vector<QuadPoint>& out) {
    const GaussRule& gx = gauss_legendre(nx);
    const GaussRule& gy = gauss_legendre(ny);
    const double jx = 0.5 * (xi1 - xi0), jy = 0.5 * (eta1 - eta0);
    const double cx = 0.5 * (xi1 + xi0), cy = 0.5 * (eta1 + eta0);
    for (int j = 0; j < ny; ++j)
        for (int i = 0; i < nx; ++i)
            out.push_back({cx + jx * gx.nodes[i], cy + jy * gy.nodes[j],
                           gx.weights[i] * gy.weights[j] * jx * jy});
}

struct CellGeom {
    double h;   // largest physical diagonal
    double l;   // physical distance cell center -> source
};

CellGeom cell_geom(const NurbsPatch& p, double xi0, double xi1, double eta0, double eta1,
                   const Vec3& source) {
    const Vec3 c00 = p.point(xi0, eta0);
    const Vec3 c10 = p.point(xi1, eta0);
    const Vec3 c11 = p.point(xi1, eta1);
    const Vec3 c01 = p.point(xi0, eta1);
    const Vec3 ctr = p.point(0.5 * (xi0 + xi1), 0.5 * (eta0 + eta1));
    CellGeom g;
    g.h = std::max(dist(c00, c11), dist(c10, c01));
    g.l = dist(ctr, source);
    return g;
}

template <class LeafFn>
void quadtree_recurse(const NurbsPatch& p, double xi0, double xi1, double eta0, double eta1,
                      const Vec3& source, const QuadConfig& cfg, int depth, const LeafFn& leaf) {
    const CellGeom g = cell_geom(p, xi0, xi1, eta0, eta1, source);
    const double ratio = (g.l > 0.0) ? cfg.s1 * g.h / g.l : std::numeric_limits<double>::infinity();
    if (ratio >= 1.0) {
        if (depth >= cfg.max_depth)
            throw std::runtime_error(
                "regular_points_new: recursion cap exceeded (source effectively on element)");
        const double xm = 0.5 * (xi0 + xi1), em = 0.5 * (eta0 + eta1);
        quadtree_recurse(p, xi0, xm, eta0, em, source, cfg, depth + 1, leaf);
        quadtree_recurse(p, xm, xi1, eta0, em, source, cfg, depth + 1, leaf);
        quadtree_recurse(p, xi0, xm, em, eta1, source, cfg, depth + 1, leaf);
        quadtree_recurse(p, xm, xi1, em, eta1, source, cfg, depth + 1, leaf);
        return;
    }
    leaf(xi0, xi1, eta0, eta1, ratio);
}

} // namespace

void regular_points_old(const SurfaceMesh& mesh, const Element& el, const Vec3& source,
                        const QuadConfig& cfg, std::vector<QuadPoint>& out) {
    const NurbsPatch& p = mesh.patches[el.patch];
    const double l = dist(el.center, source);
    const double ratio = (l > 0.0) ? cfg.s1 * el.h_diag / l : std::numeric_limits<double>::infinity();
    if (!std::isfinite(ratio))
        throw std::runtime_error("regular_points_old: source coincides with element center");
    const int ndiv1 = 1 + static_cast<int>(paper_round(ratio));
    const int nx = p.degree_xi() + 1 + cfg.n_eqp1;
    const int ny = p.degree_eta() + 1 + cfg.n_eqp1;
    const double dx = (el.xi1 - el.xi0) / ndiv1;
    const double de = (el.eta1 - el.eta0) / ndiv1;
    for (int j = 0; j < ndiv1; ++j)
        for (int i = 0; i < ndiv1; ++i)
            emit_tensor_gauss(el.xi0 + i * dx, el.xi0 + (i + 1) * dx, el.eta0 + j * de,
                              el.eta0 + (j + 1) * de, nx, ny, out);
}

void regular_points_new(const SurfaceMesh& mesh, const Element& el, const Vec3& source,
                        const QuadConfig& cfg, std::vector<QuadPoint>& out) {
    const NurbsPatch& p = mesh.patches[el.patch];
    const int dp = p.degree_xi(), dq = p.degree_eta();
    quadtree_recurse(p, el.xi0, el.xi1, el.eta0, el.eta1, source, cfg, 0,
                     [&](double x0, double x1, double e0, double e1, double ratio) {
                         const int nx = std::max(
                             1, static_cast<int>(paper_round((dp + 1) * (ratio + 1.0))));
                         const int ny = std::max(
                             1, static_cast<int>(paper_round((dq + 1) * (ratio + 1.0))));
                         emit_tensor_gauss(x0, x1, e0, e1, nx, ny, out);
                     });
}

std::vector<QuadtreeLeaf> quadtree_leaves(const SurfaceMesh& mesh, const Element& el,
                                          const Vec3& source, const QuadConfig& cfg) {
    std::vector<QuadtreeLeaf> leaves;
    quadtree_recurse(mesh.patches[el.patch], el.xi0, el.xi1, el.eta0, el.eta1, source, cfg, 0,
                     [&](double x0, double x1, double e0, double e1, double ratio) {
                         leaves.push_back({x0, x1, e0, e1, ratio});
                     });
    return leaves;
}

void regular_points(const SurfaceMesh& mesh, const Element& el, const Vec3& source,
                    const QuadConfig& cfg, std::vector<QuadPoint>& out) {
    if (cfg.scheme == QuadScheme::OldAdaptive)
        regular_points_old(mesh, el, source, cfg, out);
    else
        regular_points_new(mesh, el, source, cfg, out);
}

void singular_points(const SurfaceMesh& mesh, const Element& el, double xi_src, double eta_src,
                     const QuadConfig& cfg, std::vector<QuadPoint>& out) {
    const NurbsPatch& p = mesh.patches[el.patch];
    const double snap = 1e-12;
    double xs = xi_src, es = eta_src;
    if (std::abs(xs - el.xi0) < snap * (el.xi1 - el.xi0)) xs = el.xi0;
    if (std::abs(xs - el.xi1) < snap * (el.xi1 - el.xi0)) xs = el.xi1;
    if (std::abs(es - el.eta0) < snap * (el.eta1 - el.eta0)) es = el.eta0;
    if (std::abs(es - el.eta1) < snap * (el.eta1 - el.eta0)) es = el.eta1;
    if (!el.contains_param(xs, es))
        throw std::invalid_argument("singular_points: source outside the closed element");

    const int pmax = std::max(p.degree_xi(), p.degree_eta());
    const double s2 = static_cast<double>(pmax + 1 + cfg.n_eqp2) / (2.0 * (pmax + 1));
    const int ndiv_r = static_cast<int>(std::ceil(s2));
    const int ng = 2 * (pmax + 1);
    const GaussRule& g = gauss_legendre(ng);

    // element corners in parameter space, counterclockwise, v[4] = v[0]
    const double vx[5] = {el.xi0, el.xi1, el.xi1, el.xi0, el.xi0};
    const double ve[5] = {el.eta0, el.eta0, el.eta1, el.eta1, el.eta0};

    for (int tri = 0; tri < 4; ++tri) {
        const double ax = vx[tri] - xs, ae = ve[tri] - es;
        const double bx = vx[tri + 1] - xs, be = ve[tri + 1] - es;
        const double area2 = ax * be - ae * bx; // twice the triangle area
        if (std::abs(area2) < 1e-14 * el.area_param()) continue; // collapsed triangle

        // interior angle at the source in the parameter plane
        const double na = std::hypot(ax, ae), nb = std::hypot(bx, be);
        const double cosang = std::clamp((ax * bx + ae * be) / (na * nb), -1.0, 1.0);
        const double theta_dir = std::acos(cosang);
        const int ndiv_t =
            std::max(1, static_cast<int>(std::ceil(s2 * theta_dir / (0.5 * pi))));

        const double dvx = vx[tri + 1] - vx[tri];
        const double dve = ve[tri + 1] - ve[tri];
        const double J3 = 1.0 / (4.0 * ndiv_t * ndiv_r);

        for (int jr = 0; jr < ndiv_r; ++jr) {
            const double r0 = static_cast<double>(jr) / ndiv_r;
            const double r1 = static_cast<double>(jr + 1) / ndiv_r;
            for (int jt = 0; jt < ndiv_t; ++jt) {
                const double t0 = static_cast<double>(jt) / ndiv_t;
                const double t1 = static_cast<double>(jt + 1) / ndiv_t;
                for (int b = 0; b < ng; ++b) {
                    const double theta = t0 + 0.5 * (t1 - t0) * (g.nodes[b] + 1.0);
                    const double fx = ax + dvx * theta; // xi_v,i - xi_x + (...)theta
                    const double fe = ae + dve * theta;
                    const double jtheta = fx * dve - fe * dvx;
                    for (int a = 0; a < ng; ++a) {
                        const double rho = r0 + 0.5 * (r1 - r0) * (g.nodes[a] + 1.0);
                        const double J2 = rho * jtheta;
                        out.push_back({xs + rho * fx, es + rho * fe,
                                       g.weights[a] * g.weights[b] * J3 * std::abs(J2)});
                    }
                }
            }
        }
    }
    if (out.empty())
        throw std::invalid_argument("singular_points: all triangles collapsed");
}

Complex integrate_with_source(const SurfaceMesh& mesh, const std::vector<DofAnchor>& anchors,
                              const Vec3& x, const QuadConfig& cfg,
                              const std::function<Complex(const SurfaceFrame&)>& f) {
    Complex total = 0.0;
    std::vector<QuadPoint> pts;
    for (int e = 0; e < mesh.n_elements(); ++e) {
        const Element& el = mesh.elements[e];
        pts.clear();
        const DofAnchor* inside = nullptr;
        for (const DofAnchor& a : anchors) {
            if (a.patch == el.patch && el.contains_param(a.xi, a.eta, 1e-12)) {
                inside = &a;
                break;
            }
        }
        if (inside)
            singular_points(mesh, el, inside->xi, inside->eta, cfg, pts);
        else
            regular_points(mesh, el, x, cfg, pts);
        const NurbsPatch& p = mesh.patches[el.patch];
        Complex sum = 0.0;
        for (const QuadPoint& q : pts) {
            const SurfaceFrame fr = p.frame(q.xi, q.eta);
            if (fr.degenerate) continue;
            sum += q.weight * fr.jacobian * f(fr);
        }
        total += sum;
    }
    return total;
}

double solid_angle_integral(const SurfaceMesh& mesh, const std::vector<DofAnchor>& anchors,
                            const Vec3& x, const QuadConfig& cfg) {
    if (!mesh.closed)
        throw std::runtime_error("solid_angle_integral: undefined on an open surface");
    const Complex v = integrate_with_source(mesh, anchors, x, cfg, [&](const SurfaceFrame& fr) {
        const Vec3 d = x - fr.point;
        const double R2 = norm2(d);
        const double R = std::sqrt(R2);
        // dPhi_0/dn(y) = (x-y).n(y) / (4 pi R^3)
        return Complex(dot(d, fr.normal) / (4.0 * pi * R2 * R), 0.0);
    });
    return v.real();
}

void dump_quadrature_csv(const SurfaceMesh& mesh, const std::vector<DofAnchor>& anchors,
                         const Vec3& x, const QuadConfig& cfg, std::ostream& os) {
    os << "element_id,xi,eta,weight\n";
    os.precision(17);
    std::vector<QuadPoint> pts;
    for (int e = 0; e < mesh.n_elements(); ++e) {
        const Element& el = mesh.elements[e];
        pts.clear();
        const DofAnchor* inside = nullptr;
        for (const DofAnchor& a : anchors) {
            if (a.patch == el.patch && el.contains_param(a.xi, a.eta, 1e-12)) {
                inside = &a;
                break;
            }
        }
        if (inside)
            singular_points(mesh, el, inside->xi, inside->eta, cfg, pts);
        else
            regular_points(mesh, el, x, cfg, pts);
        for (const QuadPoint& q : pts)
            os << e << "," << q.xi << "," << q.eta << "," << q.weight << "\n";
    }
}

} // namespace igabem
