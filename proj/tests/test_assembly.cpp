#include "igabem/assembly.hpp"

#include "igabem/analytic.hpp"
#include "igabem/geometry.hpp"
#include "igabem/postprocess.hpp"

#include <doctest.h>

#include <chrono>
#include <random>

using namespace igabem;

namespace {

BoundaryCondition pulsating_bc(double k) {
    return BoundaryCondition::neumann(
        [k](const Vec3&, const Vec3&) { return pulsating_sphere_neumann(k); },
        [k](const Vec3& x) { return pulsating_sphere_pressure(k, x); });
}

double solve_relative_error(const SurfaceMesh& mesh, double k, const BieFormulation& form,
                            const BoundaryCondition& bc, const QuadConfig& cfg = {}) {
    BemSystem sys = assemble(mesh, k, form, bc, cfg);
    solve(sys);
    return l2_surface_error(mesh, sys.solution.col(0), bc.p_exact).relative;
}

} // namespace

TEST_CASE("incident direction: published angles and unit length") {
    const Vec3 d = incident_direction(240.0, 30.0);
    CHECK(d.x == doctest::Approx(0.4330127018922193).epsilon(1e-12));
    CHECK(d.y == doctest::Approx(0.75).epsilon(1e-12));
    CHECK(d.z == doctest::Approx(-0.5).epsilon(1e-12));
    CHECK(norm(incident_direction(0, 0) - Vec3{-1, 0, 0}) < 1e-15);

    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> ua(0, 360), ub(-90, 90);
    for (int t = 0; t < 50; ++t)
        CHECK(std::abs(norm(incident_direction(ua(rng), ub(rng))) - 1.0) < 1e-14);
}

TEST_CASE("neumann_rigid: orthogonal direction, k=0, finite differences") {
    const double k = 1.3;
    const Vec3 d{-1, 0, 0};
    CHECK(std::abs(neumann_rigid(k, 1.0, d, {0.3, 0.4, 0.5}, {0, 0, 1})) < 1e-16);
    CHECK(std::abs(neumann_rigid(0.0, 1.0, d, {0.3, 0.4, 0.5}, {1, 0, 0})) < 1e-16);

    std::mt19937_64 rng(7);
    std::normal_distribution<double> g(0.0, 1.0);
    const double h = 1e-6;
    for (int t = 0; t < 20; ++t) {
        const Vec3 x{g(rng), g(rng), g(rng)};
        const Vec3 n = normalized(Vec3{g(rng), g(rng), g(rng)});
        const Complex fd =
            (plane_wave(k, 1.0, d, x + h * n) - plane_wave(k, 1.0, d, x - h * n)) / (2 * h);
        CHECK(std::abs(neumann_rigid(k, 1.0, d, x, n) + fd) < 1e-6 * std::abs(fd) + 1e-12);
    }
}

TEST_CASE("collocation points: one per dof, cube corners, pole handling") {
    const SurfaceMesh cube = make_cube(1.0);
    BieFormulation cbie;
    const auto cps = collocation_points(cube, cbie);
    CHECK(cps.size() == static_cast<std::size_t>(cube.n_dofs));
    // p = 1 Greville points are the corners
    for (const auto& cp : cps) {
        CHECK(std::abs(std::abs(cp.x.x) - 0.5) < 1e-14);
        CHECK(std::abs(std::abs(cp.x.y) - 0.5) < 1e-14);
        CHECK(std::abs(std::abs(cp.x.z) - 0.5) < 1e-14);
        CHECK_FALSE(cp.perturbed);
    }

    // BM on the cube shifts the collocation points off the edges
    BieFormulation bm;
    bm.kind = BieKind::BM;
    const auto cps_bm = collocation_points(cube, bm);
    for (const auto& cp : cps_bm) {
        CHECK(cp.perturbed);
        CHECK_FALSE(cp.frame.degenerate);
    }

    // sphere parametrization 1: poles perturbed only when a frame is needed
    const SurfaceMesh s1 = make_sphere_par1(1.0);
    const auto cps_cbie = collocation_points(s1, cbie);
    int degenerate = 0;
    for (const auto& cp : cps_cbie) degenerate += cp.frame.degenerate ? 1 : 0;
    CHECK(degenerate == 2); // untouched poles
    const auto cps_bm2 = collocation_points(s1, bm);
    for (const auto& cp : cps_bm2) CHECK_FALSE(cp.frame.degenerate);
}

TEST_CASE("solver: identity, random residual oracle, rcond report") {
    BemSystem sys;
    sys.A = Eigen::MatrixXcd::Identity(5, 5);
    sys.rhs = Eigen::MatrixXcd::Random(5, 2);
    solve(sys);
    CHECK((sys.solution - sys.rhs).norm() < 1e-15);

    std::mt19937_64 rng(17);
    BemSystem r;
    r.A = Eigen::MatrixXcd::Random(50, 50) + 10.0 * Eigen::MatrixXcd::Identity(50, 50);
    r.rhs = Eigen::MatrixXcd::Random(50, 3);
    const SolveInfo info = solve(r);
    CHECK(info.residual < 1e-12);
    CHECK(info.rcond > 1e-4);
}

TEST_CASE("pulsating sphere patch test: collocation CBIE on the coarse 6-patch sphere") {
    const SurfaceMesh mesh = make_sphere_par2(1.0);
    const double k = 1.0;
    BieFormulation form; // CCBIE exterior
    const double err = solve_relative_error(mesh, k, form, pulsating_bc(k));
    CHECK(err < 1e-8);
}

TEST_CASE("pulsating sphere: regularized formulations reach machine precision") {
    const SurfaceMesh mesh = make_sphere_par2(1.0);
    const double k = 1.0;
    for (BieKind kind : {BieKind::RCBIE1, BieKind::RCBIE2}) {
        BieFormulation form;
        form.kind = kind;
        const double err = solve_relative_error(mesh, k, form, pulsating_bc(k));
        CHECK(err < 1e-13);
    }
}

TEST_CASE("rigid CBIE row-sum identity at k=0 on the sphere") {
    const SurfaceMesh mesh = make_sphere_par2(1.0);
    BieFormulation form;
    const BoundaryCondition bc = BoundaryCondition::rigid_plane_wave(1.0, {-1, 0, 0});
    BemSystem sys = assemble(mesh, 0.0, form, bc);
    const Eigen::VectorXcd ones = Eigen::VectorXcd::Ones(mesh.n_dofs);
    const Eigen::VectorXcd r = sys.A * ones;
    for (int i = 0; i < mesh.n_dofs; ++i) CHECK(std::abs(r[i] - Complex(-1.0)) < 1e-6);
}

TEST_CASE("plain-jump CBIE variant matches the regularized operator") {
    // smooth geometry: explicit solid-angle jump terms must give the same rows
    const SurfaceMesh mesh = make_sphere_par2(1.0);
    const double k = 1.0;
    BieFormulation plain;
    plain.plain_cbie_jump = true;
    const double err = solve_relative_error(mesh, k, plain, pulsating_bc(k));
    CHECK(err < 1e-5); // jump term itself carries quadrature error
}

TEST_CASE("best approximation: reproduction, optimality, nesting") {
    const SurfaceMesh mesh = make_sphere_par2(1.0);
    // constant trace lies in the space
    const Eigen::VectorXcd u =
        best_approximation(mesh, [](const Vec3&) { return Complex(2.5, -1.0); });
    const double err =
        l2_surface_error(mesh, u, [](const Vec3&) { return Complex(2.5, -1.0); }).relative;
    CHECK(err < 1e-12);

    // projection beats random perturbations of itself
    const double k = 2.0;
    const MfsSolution sol = MfsSolution::cube_grid(k, 1.0);
    auto trace = [&sol](const Vec3& x) { return sol.pressure(x); };
    const Eigen::VectorXcd ba = best_approximation(mesh, trace);
    const double e0 = l2_surface_error(mesh, ba, trace).absolute;
    std::mt19937_64 rng(23);
    std::normal_distribution<double> g(0.0, 1.0);
    for (int t = 0; t < 10; ++t) {
        Eigen::VectorXcd pert = ba;
        for (int i = 0; i < pert.size(); ++i) pert[i] += 1e-3 * Complex(g(rng), g(rng));
        CHECK(l2_surface_error(mesh, pert, trace).absolute >= e0);
    }

    // projection error non-increasing under refinement
    GeometrySpec gs;
    gs.kind = GeometryKind::SpherePar2;
    const SurfaceMesh fine = build_mesh(gs, 2, 4);
    const double e_fine = l2_surface_error(fine, best_approximation(fine, trace), trace).absolute;
    CHECK(e_fine <= e0 * (1 + 1e-12));
}

TEST_CASE("formulation equivalence on the rigid sphere") {
    GeometrySpec gs;
    gs.kind = GeometryKind::SpherePar2;
    const SurfaceMesh mesh = build_mesh(gs, 2, 4);
    const double k = 1.0;
    const Vec3 d = incident_direction(240.0, 30.0);
    const BoundaryCondition bc = BoundaryCondition::rigid_plane_wave(1.0, d);
    const RigidSphereScattering an{k, 1.0, 1.0, d};
    auto exact = [&an](const Vec3& x) { return an.total(x); };

    double errs[3];
    int i = 0;
    for (BieKind kind : {BieKind::CBIE, BieKind::RCBIE2, BieKind::RCBIE3}) {
        BieFormulation form;
        form.kind = kind;
        BemSystem sys = assemble(mesh, k, form, bc);
        solve(sys);
        errs[i++] = l2_surface_error(mesh, sys.solution.col(0), exact).relative;
    }
    const double emax = *std::max_element(errs, errs + 3);
    for (int a = 0; a < 3; ++a)
        for (int b = 0; b < 3; ++b) CHECK(std::abs(errs[a] - errs[b]) <= 10.0 * emax);
    // and the solves are actually accurate on this mesh
    CHECK(emax < 1e-3);
}

TEST_CASE("galerkin CBIE matches collocation quality on the pulsating sphere") {
    const SurfaceMesh mesh = make_sphere_par2(1.0);
    const double k = 1.0;
    BieFormulation form;
    form.disc = Discretization::Galerkin;
    const double err = solve_relative_error(mesh, k, form, pulsating_bc(k));
    CHECK(err < 1e-8);
}

TEST_CASE("interior torus problem: galerkin CBIE converges to the manufactured field") {
    GeometrySpec gs;
    gs.kind = GeometryKind::Torus;
    const double k = 2.0;
    const double c = k / std::sqrt(3.0);
    auto p_fn = [c](const Vec3& x) {
        return Complex(std::sin(c * x.x) * std::sin(c * x.y) * std::sin(c * x.z), 0.0);
    };
    auto g_fn = [c](const Vec3& x, const Vec3& n) {
        const double gx = c * std::cos(c * x.x) * std::sin(c * x.y) * std::sin(c * x.z);
        const double gy = c * std::sin(c * x.x) * std::cos(c * x.y) * std::sin(c * x.z);
        const double gz = c * std::sin(c * x.x) * std::sin(c * x.y) * std::cos(c * x.z);
        return Complex(gx * n.x + gy * n.y + gz * n.z, 0.0);
    };
    BieFormulation form;
    form.disc = Discretization::Galerkin;
    form.domain = DomainSide::Interior;
    const BoundaryCondition bc = BoundaryCondition::neumann(g_fn, p_fn);

    // the discrete solution tracks the best approximation closely
    const SurfaceMesh m1 = build_mesh(gs, 1, 2);
    const SurfaceMesh m2 = build_mesh(gs, 2, 2);
    const double e1 = solve_relative_error(m1, k, form, bc);
    const double e2 = solve_relative_error(m2, k, form, bc);
    CHECK(e2 < e1);
    const double eba2 =
        l2_surface_error(m2, best_approximation(m2, p_fn, 2), p_fn).relative;
    CHECK(e2 <= 1.5 * eba2);
}

TEST_CASE("multiple right-hand sides share one factorization") {
    GeometrySpec gs;
    gs.kind = GeometryKind::SpherePar2;
    const SurfaceMesh mesh = build_mesh(gs, 2, 4); // 24 elements
    const double k = 1.0;
    std::vector<Vec3> dirs;
    for (int i = 0; i < 8; ++i) dirs.push_back(incident_direction(45.0 * i, 0.0));
    const BoundaryCondition bc = BoundaryCondition::rigid_plane_waves(1.0, dirs);
    BieFormulation form;
    BemSystem sys = assemble(mesh, k, form, bc);
    CHECK(sys.rhs.cols() == 8);
    const SolveInfo info = solve(sys);
    CHECK(info.residual < 1e-10);

    // column 0 equals the single-direction solve
    const BoundaryCondition bc1 = BoundaryCondition::rigid_plane_wave(1.0, dirs[0]);
    BemSystem sys1 = assemble(mesh, k, form, bc1);
    solve(sys1);
    CHECK((sys.solution.col(0) - sys1.solution.col(0)).norm() < 1e-12);
}

TEST_CASE("monostatic trick: 3601 right-hand sides cost well under twice one") {
    GeometrySpec gs;
    gs.kind = GeometryKind::SpherePar2;
    const SurfaceMesh mesh = build_mesh(gs, 4, 4); // 728 dofs
    const double k = 1.0;
    BieFormulation form;

    auto run = [&](int n_dirs) {
        std::vector<Vec3> dirs;
        for (int i = 0; i < n_dirs; ++i)
            dirs.push_back(incident_direction(0.5 * i * 180.0 / std::max(1, n_dirs - 1), 0.0));
        const auto t0 = std::chrono::steady_clock::now();
        BemSystem sys = assemble(mesh, k, form, BoundaryCondition::rigid_plane_waves(1.0, dirs));
        solve(sys);
        return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    };
    const double t1 = run(1);
    const double t3601 = run(3601);
    CHECK(t3601 < 2.0 * t1);
}

TEST_CASE("assembled matrices are square and finite for every formulation") {
    const SurfaceMesh mesh = make_sphere_par2(1.0);
    const double k = 1.5;
    const BoundaryCondition bc = BoundaryCondition::rigid_plane_wave(1.0, {-1, 0, 0});
    for (BieKind kind : {BieKind::CBIE, BieKind::HBIE, BieKind::BM, BieKind::RCBIE1,
                         BieKind::RCBIE2, BieKind::RCBIE3}) {
        BieFormulation form;
        form.kind = kind;
        BemSystem sys = assemble(mesh, k, form, bc);
        CHECK(sys.A.rows() == mesh.n_dofs);
        CHECK(sys.A.cols() == mesh.n_dofs);
        CHECK(sys.A.allFinite());
        CHECK(sys.rhs.allFinite());
    }
}

TEST_CASE("BM requires k > 0 with the default coupling") {
    const SurfaceMesh mesh = make_cube(1.0);
    BieFormulation form;
    form.kind = BieKind::BM;
    const BoundaryCondition bc = BoundaryCondition::rigid_plane_wave(1.0, {-1, 0, 0});
    CHECK_THROWS_AS(assemble(mesh, 0.0, form, bc), std::invalid_argument);
    form.coupling_alpha = Complex(0.0, 0.5);
    CHECK_NOTHROW(assemble(mesh, 0.0, form, bc));
}
