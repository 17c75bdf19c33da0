#include "igabem/geometry.hpp"

#include <Eigen/Dense>

namespace igabem {

namespace {

const double s2inv = 1.0 / std::sqrt(2.0);

// full-circle quadratic NURBS data: 9 control points over 4 quarter arcs
struct Circle9 {
    double cx[9], cy[9], w[9];
};

Circle9 unit_circle9() {
    Circle9 c;
    const double X[9] = {1, 1, 0, -1, -1, -1, 0, 1, 1};
    const double Y[9] = {0, 1, 1, 1, 0, -1, -1, -1, 0};
    for (int i = 0; i < 9; ++i) {
        c.cx[i] = X[i];
        c.cy[i] = Y[i];
        c.w[i] = (i % 2 == 0) ? 1.0 : s2inv;
    }
    return c;
}

KnotVector circle_knots() {
    return KnotVector({0, 0, 0, 0.25, 0.25, 0.5, 0.5, 0.75, 0.75, 1, 1, 1}, 2);
}

KnotVector half_circle_knots() {
    return KnotVector({0, 0, 0, 0.5, 0.5, 1, 1, 1}, 2);
}

KnotVector bezier_knots(int p) {
    std::vector<double> v(2 * (p + 1), 0.0);
    for (int i = 0; i <= p; ++i) v[p + 1 + i] = 1.0;
    return KnotVector(v, p);
}

} // namespace

SurfaceMesh make_sphere_par1(double radius) {
    if (!(radius > 0.0)) throw std::invalid_argument("make_sphere_par1: radius must be positive");
    const Circle9 az = unit_circle9();
    // meridian from south pole to north pole: (r, z) arc of two quarters
    const double mr[5] = {0, 1, 1, 1, 0};
    const double mz[5] = {-1, -1, 0, 1, 1};
    const double mw[5] = {1, s2inv, 1, s2inv, 1};

    NurbsPatch p;
    p.knots_xi = circle_knots();
    p.knots_eta = half_circle_knots();
    p.nu = 9;
    p.nv = 5;
    p.control_points.resize(45);
    p.weights.resize(45);
    for (int j = 0; j < 5; ++j) {
        for (int i = 0; i < 9; ++i) {
            p.control_points[p.index(i, j)] =
                Vec3{radius * mr[j] * az.cx[i], radius * mr[j] * az.cy[i], radius * mz[j]};
            p.weights[p.index(i, j)] = az.w[i] * mw[j];
        }
    }
    return build_conforming_mesh({p});
}

SurfaceMesh make_sphere_par2(double radius) {
    if (!(radius > 0.0)) throw std::invalid_argument("make_sphere_par2: radius must be positive");
    const double s3 = std::sqrt(3.0);
    const double s6 = std::sqrt(6.0);

    // weighted control points (wx, wy, wz, w) of the +z tile, 5x5, degree 4
    double W[5][5], X[5][5], Y[5][5], Z[5][5];
    auto set = [&](int i, int j, double wx, double wy, double wz, double w) {
        X[i][j] = wx;
        Y[i][j] = wy;
        Z[i][j] = wz;
        W[i][j] = w;
    };
    set(0, 0, 4 * (1 - s3), 4 * (1 - s3), 4 * (s3 - 1), 4 * (3 - s3));
    set(1, 0, -std::sqrt(2.0), std::sqrt(2.0) * (s3 - 4), std::sqrt(2.0) * (4 - s3),
        std::sqrt(2.0) * (3 * s3 - 2));
    set(2, 0, 0, 4 * (1 - 2 * s3) / 3, 4 * (2 * s3 - 1) / 3, 4 * (5 - s3) / 3);
    set(1, 1, -(3 * s3 - 2) / 2, (2 - 3 * s3) / 2, (s3 + 6) / 2, (s3 + 6) / 2);
    set(2, 1, 0, std::sqrt(2.0) * (2 * s3 - 7) / 3, 5 * s6 / 3, std::sqrt(2.0) * (s3 + 6) / 3);
    set(2, 2, 0, 0, 4 * (5 - s3) / 3, 4 * (5 * s3 - 1) / 9);
    // symmetry about the y=x plane for (i,j) in {(1,2),(1,3),(2,3)} (1-based)
    for (auto [i, j] : {std::pair{0, 1}, std::pair{0, 2}, std::pair{1, 2}})
        set(i, j, Y[j][i], X[j][i], Z[j][i], W[j][i]);
    // symmetry about the x=0 plane, i=4,5 (1-based)
    for (int i = 3; i <= 4; ++i)
        for (int j = 0; j <= 2; ++j) set(i, j, -X[4 - i][j], Y[4 - i][j], Z[4 - i][j], W[4 - i][j]);
    // symmetry about the y=0 plane, j=4,5 (1-based)
    for (int i = 0; i <= 4; ++i)
        for (int j = 3; j <= 4; ++j) set(i, j, X[i][4 - j], -Y[i][4 - j], Z[i][4 - j], W[i][4 - j]);

    NurbsPatch base;
    base.knots_xi = bezier_knots(4);
    base.knots_eta = bezier_knots(4);
    base.nu = 5;
    base.nv = 5;
    base.control_points.resize(25);
    base.weights.resize(25);
    for (int j = 0; j < 5; ++j) {
        for (int i = 0; i < 5; ++i) {
            const double w = W[i][j];
            base.weights[base.index(i, j)] = w;
            base.control_points[base.index(i, j)] =
                Vec3{radius * X[i][j] / w, radius * Y[i][j] / w, radius * Z[i][j] / w};
        }
    }

    // remaining 5 faces by exact signed-permutation rotations of the +z tile
    using Map = Vec3 (*)(const Vec3&);
    static const Map maps[6] = {
        [](const Vec3& v) { return v; },                          // +z
        [](const Vec3& v) { return Vec3{v.x, -v.y, -v.z}; },      // -z
        [](const Vec3& v) { return Vec3{v.z, v.y, -v.x}; },       // +x
        [](const Vec3& v) { return Vec3{-v.z, v.y, v.x}; },       // -x
        [](const Vec3& v) { return Vec3{v.x, v.z, -v.y}; },       // +y
        [](const Vec3& v) { return Vec3{v.x, -v.z, v.y}; },       // -y
    };
    std::vector<NurbsPatch> patches;
    patches.reserve(6);
    for (const Map m : maps) {
        NurbsPatch q = base;
        for (auto& cp : q.control_points) cp = m(cp);
        patches.push_back(std::move(q));
    }
    return build_conforming_mesh(std::move(patches));
}

SurfaceMesh make_torus(double r_major, double r_minor) {
    if (!(r_major > r_minor && r_minor > 0.0))
        throw std::invalid_argument("make_torus: requires r_major > r_minor > 0");
    const Circle9 az = unit_circle9();
    // minor circle in the (rho, z) half-plane, starting at the outer equator
    const double ro = r_major, ri = r_minor;
    const double rho[9] = {ro + ri, ro + ri, ro, ro - ri, ro - ri, ro - ri, ro, ro + ri, ro + ri};
    const double zz[9] = {0, ri, ri, ri, 0, -ri, -ri, -ri, 0};

    NurbsPatch p;
    p.knots_xi = circle_knots();
    p.knots_eta = circle_knots();
    p.nu = 9;
    p.nv = 9;
    p.control_points.resize(81);
    p.weights.resize(81);
    for (int j = 0; j < 9; ++j) {
        for (int i = 0; i < 9; ++i) {
            p.control_points[p.index(i, j)] = Vec3{rho[j] * az.cx[i], rho[j] * az.cy[i], zz[j]};
            p.weights[p.index(i, j)] = az.w[i] * ((j % 2 == 0) ? 1.0 : s2inv);
        }
    }
    return build_conforming_mesh({p});
}

SurfaceMesh make_cube(double side) {
    if (!(side > 0.0)) throw std::invalid_argument("make_cube: side must be positive");
    const double h = 0.5 * side;
    // each face oriented so d_xi x d_eta points outward
    auto face = [&](const Vec3& origin, const Vec3& du, const Vec3& dv) {
        NurbsPatch p;
        p.knots_xi = bezier_knots(1);
        p.knots_eta = bezier_knots(1);
        p.nu = 2;
        p.nv = 2;
        p.control_points = {origin, origin + du, origin + dv, origin + du + dv};
        p.weights = {1, 1, 1, 1};
        return p;
    };
    const double s = side;
    std::vector<NurbsPatch> faces = {
        face({h, -h, -h}, {0, s, 0}, {0, 0, s}),   // +x
        face({-h, h, -h}, {0, -s, 0}, {0, 0, s}),  // -x
        face({-h, h, -h}, {0, 0, s}, {s, 0, 0}),   // +y
        face({-h, -h, h}, {0, 0, -s}, {s, 0, 0}),  // -y
        face({-h, -h, h}, {s, 0, 0}, {0, s, 0}),   // +z
        face({-h, h, -h}, {s, 0, 0}, {0, -s, 0}),  // -z
    };
    return build_conforming_mesh(std::move(faces));
}

int GeometrySpec::min_degree() const {
    switch (kind) {
        case GeometryKind::SpherePar1: return 2;
        case GeometryKind::SpherePar2: return 4;
        case GeometryKind::Torus: return 2;
        case GeometryKind::Cube: return 1;
    }
    return 1;
}

SurfaceMesh GeometrySpec::build() const {
    switch (kind) {
        case GeometryKind::SpherePar1: return make_sphere_par1(radius);
        case GeometryKind::SpherePar2: return make_sphere_par2(radius);
        case GeometryKind::Torus: return make_torus(r_major, r_minor);
        case GeometryKind::Cube: return make_cube(side);
    }
    throw std::logic_error("GeometrySpec: unknown kind");
}

SurfaceMesh build_mesh(const GeometrySpec& geom, int refinements, int degree,
                       std::optional<int> continuity) {
    if (refinements < 1) throw std::invalid_argument("build_mesh: refinements must be >= 1");
    if (degree < geom.min_degree())
        throw std::invalid_argument("build_mesh: degree below geometry minimum");
    const int cont = continuity.value_or(degree - 1);
    if (cont < 0 || cont > degree - 1)
        throw std::invalid_argument("build_mesh: continuity must be in [0, degree-1]");
    const int mult = degree - cont;

    SurfaceMesh base = geom.build();
    std::vector<NurbsPatch> patches;
    patches.reserve(base.patches.size());
    for (const NurbsPatch& p : base.patches) {
        NurbsPatch q = p.elevated(degree, degree);
        for (int r = 1; r < refinements; ++r) q = q.uniformly_refined(mult, mult);
        patches.push_back(std::move(q));
    }
    return build_conforming_mesh(std::move(patches));
}

NacaCoefficients solve_naca_coefficients(double trailing_edge_slope) {
    NacaCoefficients c;
    c.a0 = 0.2969;
    // conditions on F(x) = a0 sqrt(x) + a1 x + ... + a4 x^4 (the 5t factor cancels)
    const double xr = 0.3, sq = std::sqrt(xr);
    Eigen::Matrix4d A;
    Eigen::Vector4d b;
    A << 1, 1, 1, 1,                      // F(1) = 0
        xr, xr * xr, xr * xr * xr, xr * xr * xr * xr, // F(0.3) = 0.1
        1, 2 * xr, 3 * xr * xr, 4 * xr * xr * xr,     // F'(0.3) = 0
        1, 2, 3, 4;                       // F'(1) = -slope
    b << -c.a0, 0.1 - c.a0 * sq, -c.a0 / (2 * sq), -trailing_edge_slope - c.a0 / 2;
    const Eigen::Vector4d x = A.fullPivLu().solve(b);
    c.a1 = x[0];
    c.a2 = x[1];
    c.a3 = x[2];
    c.a4 = x[3];
    return c;
}

double naca_thickness(const NacaCoefficients& c, double t, double x) {
    if (x < 0.0 || x > 1.0) throw std::domain_error("naca_thickness: x outside [0,1]");
    return 5 * t * (c.a0 * std::sqrt(x) + x * (c.a1 + x * (c.a2 + x * (c.a3 + x * c.a4))));
}

double naca_thickness_deriv(const NacaCoefficients& c, double t, double x) {
    if (x <= 0.0 || x > 1.0) throw std::domain_error("naca_thickness_deriv: x outside (0,1]");
    return 5 * t *
           (0.5 * c.a0 / std::sqrt(x) + c.a1 + x * (2 * c.a2 + x * (3 * c.a3 + x * 4 * c.a4)));
}

double naca_thickness_deriv2(const NacaCoefficients& c, double t, double x) {
    if (x <= 0.0 || x > 1.0) throw std::domain_error("naca_thickness_deriv2: x outside (0,1]");
    return 5 * t * (-0.25 * c.a0 / (x * std::sqrt(x)) + 2 * c.a2 + x * (6 * c.a3 + x * 12 * c.a4));
}

} // namespace igabem
