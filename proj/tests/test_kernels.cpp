#include "igabem/kernels.hpp"

#include <doctest.h>

#include <random>

using namespace igabem;

namespace {

Vec3 random_unit(std::mt19937_64& rng) {
    std::normal_distribution<double> g(0.0, 1.0);
    Vec3 v{g(rng), g(rng), g(rng)};
    return v / norm(v);
}

} // namespace

TEST_CASE("greens: closed-form values and symmetry") {
    // Laplace limit
    CHECK(greens(0.0, {0, 0, 0}, {2, 0, 0}).real() == doctest::Approx(1.0 / (8 * pi)));
    CHECK(greens(0.0, {0, 0, 0}, {2, 0, 0}).imag() == 0.0);

    const Complex v = greens(1.0, {1, 0, 0}, {0, 0, 0});
    CHECK(v.real() == doctest::Approx(0.0429938).epsilon(1e-5));
    CHECK(v.imag() == doctest::Approx(0.0669612).epsilon(1e-5));

    std::mt19937_64 rng(5);
    std::normal_distribution<double> g(0.0, 1.0);
    for (int t = 0; t < 20; ++t) {
        const Vec3 x{g(rng), g(rng), g(rng)}, y{g(rng), g(rng), g(rng)};
        CHECK(std::abs(greens(1.3, x, y) - greens(1.3, y, x)) < 1e-16);
    }
    CHECK_THROWS_AS(greens(1.0, {1, 2, 3}, {1, 2, 3}), std::domain_error);
}

TEST_CASE("greens_derivs: finite-difference oracle on random configurations") {
    std::mt19937_64 rng(77);
    std::normal_distribution<double> g(0.0, 1.0);
    const double h = 1e-6;
    const double k = 1.7;
    int checked = 0;
    for (int t = 0; t < 1000; ++t) {
        const Vec3 x{g(rng), g(rng), g(rng)};
        Vec3 y{g(rng), g(rng), g(rng)};
        if (dist(x, y) < 0.3) continue;
        const Vec3 nx = random_unit(rng), ny = random_unit(rng);
        const KernelEval ke = greens_derivs(k, x, y, nx, ny);

        const Complex fd_ny = (greens(k, x, y + h * ny) - greens(k, x, y - h * ny)) / (2 * h);
        CHECK(std::abs(ke.dphi_dny - fd_ny) < 1e-6 * std::abs(fd_ny) + 1e-12);

        const Complex fd_nx = (greens(k, x + h * nx, y) - greens(k, x - h * nx, y)) / (2 * h);
        CHECK(std::abs(ke.dphi_dnx - fd_nx) < 1e-6 * std::abs(fd_nx) + 1e-12);

        // mixed second difference: larger step, h^2 rounding would swamp 1e-6
        const double h2 = 1e-4;
        const Complex pp = greens(k, x + h2 * nx, y + h2 * ny);
        const Complex pm = greens(k, x + h2 * nx, y - h2 * ny);
        const Complex mp = greens(k, x - h2 * nx, y + h2 * ny);
        const Complex mm = greens(k, x - h2 * nx, y - h2 * ny);
        const Complex fd2 = (pp - pm - mp + mm) / (4 * h2 * h2);
        CHECK(std::abs(ke.d2phi - fd2) < 1e-5 * std::abs(ke.d2phi) + 1e-9);
        ++checked;
    }
    CHECK(checked > 800);
}

TEST_CASE("greens_derivs: k=0 with orthogonal normal vanishes") {
    const Vec3 x{1, 0, 0}, y{0, 0, 0};
    const KernelEval ke = greens_derivs(0.0, x, y, {1, 0, 0}, {0, 1, 0});
    CHECK(std::abs(ke.dphi_dny) < 1e-18);
}

TEST_CASE("e1_kernel: stable difference matches the direct formula") {
    // crossing the series threshold must be seamless
    for (double kR : {1e-6, 1e-4, 1e-2, 0.019, 0.021, 0.1, 1.0, 10.0}) {
        const double R = 0.5;
        const double k = kR / R;
        const Complex direct =
            (std::polar(1.0, kR) * Complex(-1.0, kR) + 1.0) / (4.0 * pi * R);
        const Complex mine = e1_kernel(k, R);
        const double scale = std::max(std::abs(mine), 1e-300);
        if (kR >= 1e-3) CHECK(std::abs(mine - direct) < 1e-9 * scale);
        // small-argument magnitude follows the leading term -(kR)^2/(8 pi R)
        if (kR < 0.05) {
            const double lead = kR * kR / (8.0 * pi * R);
            CHECK(std::abs(mine.real() + lead) < 0.05 * lead);
        }
    }
}

TEST_CASE("jump_term: smooth, edge and vertex values") {
    CHECK(jump_term(DomainSide::Exterior, -0.5) == doctest::Approx(-0.5));
    CHECK(jump_term(DomainSide::Interior, -0.5) == doctest::Approx(0.5));
    CHECK(jump_term(DomainSide::Exterior, -0.125) == doctest::Approx(-0.875));
    CHECK(jump_term(DomainSide::Exterior, -0.25) == doctest::Approx(-0.75));
}

namespace {

// verify the defining constraints of a regularizing pair at y -> x by finite
// differences along the normal
void check_psi_constraints(double k, const Vec3& x, const Vec3& n,
                           const std::function<PsiEval(const Vec3&)>& eval) {
    const PsiEval at_x = eval(x);
    CHECK(std::abs(at_x.psi1 - 1.0) < 1e-12);
    CHECK(std::abs(at_x.psi2) < 1e-12);
    const double h = 1e-6;
    const Complex d1 = (eval(x + h * n).psi1 - eval(x - h * n).psi1) / (2 * h);
    const Complex d2 = (eval(x + h * n).psi2 - eval(x - h * n).psi2) / (2 * h);
    CHECK(std::abs(d1) < 1e-5);
    CHECK(std::abs(d2 - 1.0) < 1e-5);
    (void)k;
}

} // namespace

TEST_CASE("psi family 1: constraints and derivative consistency") {
    const double k = 2.3;
    std::mt19937_64 rng(19);
    for (int t = 0; t < 20; ++t) {
        const Vec3 n = random_unit(rng);
        const Vec3 x = random_unit(rng) * 2.0;
        const Vec3 x1 = x - n; // default offset
        check_psi_constraints(k, x, n, [&](const Vec3& y) {
            return psi_family_1(k, x, n, x1, y, n);
        });
        // analytic normal derivative against finite differences in y
        const Vec3 y = x + Vec3{0.3, -0.2, 0.4};
        const Vec3 ny = random_unit(rng);
        const double h = 1e-6;
        const PsiEval pe = psi_family_1(k, x, n, x1, y, ny);
        const Complex fd1 = (psi_family_1(k, x, n, x1, y + h * ny, ny).psi1 -
                             psi_family_1(k, x, n, x1, y - h * ny, ny).psi1) /
                            (2 * h);
        const Complex fd2 = (psi_family_1(k, x, n, x1, y + h * ny, ny).psi2 -
                             psi_family_1(k, x, n, x1, y - h * ny, ny).psi2) /
                            (2 * h);
        CHECK(std::abs(pe.dpsi1_dny - fd1) < 1e-6 * (1 + std::abs(fd1)));
        CHECK(std::abs(pe.dpsi2_dny - fd2) < 1e-6 * (1 + std::abs(fd2)));
    }
    CHECK_THROWS(psi_family_1(0.0, {1, 0, 0}, {1, 0, 0}, {0, 0, 0}, {0, 1, 0}, {0, 1, 0}));
    // C2 = 0 configuration rejected
    CHECK_THROWS(psi_family_1(1.0, {1, 0, 0}, {0, 0, 1}, {0, 0, 0}, {0, 1, 0}, {0, 1, 0}));
}

TEST_CASE("psi family 2: constraints and derivative consistency") {
    const double k = 1.1;
    std::mt19937_64 rng(29);
    for (int t = 0; t < 20; ++t) {
        const Vec3 n = random_unit(rng);
        const Vec3 x = random_unit(rng) * 1.5;
        const Vec3 x1 = x - 0.5 * n, x2 = x - n; // defaults
        check_psi_constraints(k, x, n, [&](const Vec3& y) {
            return psi_family_2(k, x, n, x1, x2, y, n);
        });
        const Vec3 y = x + Vec3{-0.2, 0.5, 0.1};
        const Vec3 ny = random_unit(rng);
        const double h = 1e-6;
        const PsiEval pe = psi_family_2(k, x, n, x1, x2, y, ny);
        const Complex fd2 = (psi_family_2(k, x, n, x1, x2, y + h * ny, ny).psi2 -
                             psi_family_2(k, x, n, x1, x2, y - h * ny, ny).psi2) /
                            (2 * h);
        CHECK(std::abs(pe.dpsi2_dny - fd2) < 1e-6 * (1 + std::abs(fd2)));
    }
}

TEST_CASE("psi family 3: direction properties and constraints") {
    const double k = 3.0;
    std::mt19937_64 rng(37);
    for (int t = 0; t < 1000; ++t) {
        const Vec3 n = random_unit(rng);
        const Vec3 d1 = psi3_direction(n);
        CHECK(std::abs(norm(d1) - 1.0) < 1e-12);
        CHECK(dot(d1, n) == doctest::Approx(-0.5).epsilon(1e-12));
        const Vec3 d2 = d1 + n;
        CHECK(std::abs(norm(d2) - 1.0) < 1e-12);
    }
    for (int t = 0; t < 10; ++t) {
        const Vec3 n = random_unit(rng);
        const Vec3 x = random_unit(rng);
        check_psi_constraints(k, x, n, [&](const Vec3& y) {
            return psi_family_3(k, x, n, y, n);
        });
    }
}

TEST_CASE("psi family 3: plane-wave factors satisfy helmholtz by finite differences") {
    const double k = 2.0;
    std::mt19937_64 rng(41);
    const double h = 1e-4;
    for (int t = 0; t < 10; ++t) {
        const Vec3 n = random_unit(rng);
        const Vec3 x{0.2, -0.1, 0.5};
        auto psi1 = [&](const Vec3& y) { return psi_family_3(k, x, n, y, n).psi1; };
        const Vec3 y = x + Vec3{0.4, 0.2, -0.3};
        Complex lap{};
        for (int d = 0; d < 3; ++d) {
            Vec3 e{};
            e[d] = h;
            lap += (psi1(y + e) - 2.0 * psi1(y) + psi1(y - e)) / (h * h);
        }
        CHECK(std::abs(lap + k * k * psi1(y)) < 1e-5);
    }
}
