#include "igabem/analytic.hpp"

#include <algorithm>

namespace igabem {

SphericalBessel spherical_bessel(int n, double x) {
    if (!(x > 0.0)) throw std::domain_error("spherical_bessel: requires x > 0");
    if (n < 0) throw std::domain_error("spherical_bessel: requires n >= 0");

    const double j0 = std::sin(x) / x;
    const double y0 = -std::cos(x) / x;
    const double j1 = std::sin(x) / (x * x) - std::cos(x) / x;
    const double y1 = -std::cos(x) / (x * x) - std::sin(x) / x;

    // y_n: upward recurrence (stable)
    double ym1 = y0, yn = (n == 0) ? y0 : y1;
    for (int m = 1; m < n; ++m) {
        const double yp1 = (2 * m + 1) / x * yn - ym1;
        ym1 = yn;
        yn = yp1;
    }

    // j_n: upward when n < x, else downward (Miller) normalized by j0
    double jn, jnm1;
    if (n == 0) {
        jn = j0;
        jnm1 = std::cos(x) / x; // j_{-1}
    } else if (static_cast<double>(n) < x) {
        double a = j0, b = j1;
        for (int m = 1; m < n; ++m) {
            const double c = (2 * m + 1) / x * b - a;
            a = b;
            b = c;
        }
        jn = b;
        jnm1 = a;
    } else {
        const int start = n + 16 + static_cast<int>(2.0 * std::sqrt(static_cast<double>(n)));
        double fp1 = 0.0, f = 1e-30, target_n = 0.0, target_nm1 = 0.0;
        for (int m = start; m >= 0; --m) {
            const double fm1 = (2 * m + 3) / x * f - fp1;
            fp1 = f;
            f = fm1;
            if (m == n) target_n = f;
            if (m == n - 1) target_nm1 = f;
            if (std::abs(f) > 1e250) {
                fp1 /= 1e250;
                f /= 1e250;
                target_n /= 1e250;
                target_nm1 /= 1e250;
            }
        }
        const double scale = j0 / f;
        jn = target_n * scale;
        jnm1 = (n == 0) ? j0 : target_nm1 * scale;
    }

    SphericalBessel out;
    out.j = jn;
    out.y = yn;
    out.jp = jnm1 - (n + 1) / x * jn;
    const double ynm1 = (n == 0) ? std::sin(x) / x /* y_{-1} = j_0 */ : ym1;
    out.yp = ynm1 - (n + 1) / x * yn;
    out.h = Complex(out.j, out.y);
    out.hp = Complex(out.jp, out.yp);
    return out;
}

Complex pulsating_sphere_pressure(double k, const Vec3& x) {
    const double R = norm(x);
    return std::polar(1.0 / (4.0 * pi * R), k * R);
}

Complex pulsating_sphere_neumann(double k) {
    return std::polar(1.0 / (4.0 * pi), k) * Complex(-1.0, k);
}

MfsSolution MfsSolution::with_default_coefficients(double k, std::vector<Vec3> sources) {
    MfsSolution s;
    s.k = k;
    s.coefficients.resize(sources.size());
    for (std::size_t n = 0; n < sources.size(); ++n)
        s.coefficients[n] = std::cos(static_cast<double>(n)); // C_n = cos(n-1), 1-based
    s.sources = std::move(sources);
    return s;
}

MfsSolution MfsSolution::cube_grid(double k, double side) {
    std::vector<Vec3> pts;
    const double c[3] = {-1.0, 0.0, 1.0};
    for (int l = 0; l < 3; ++l)
        for (int j = 0; j < 3; ++j)
            for (int i = 0; i < 3; ++i)
                pts.push_back(Vec3{c[i], c[j], c[l]} * (side / 4.0));
    return with_default_coefficients(k, std::move(pts));
}

MfsSolution MfsSolution::line(double k, int n, double x_start, double x_end) {
    std::vector<Vec3> pts;
    for (int i = 0; i < n; ++i) {
        const double t = (n == 1) ? 0.0 : static_cast<double>(i) / (n - 1);
        pts.push_back(Vec3{x_start + (x_end - x_start) * t, 0.0, 0.0});
    }
    return with_default_coefficients(k, std::move(pts));
}

Complex MfsSolution::pressure(const Vec3& x) const {
    Complex s{};
    for (std::size_t n = 0; n < sources.size(); ++n) s += coefficients[n] * greens(k, x, sources[n]);
    return s;
}

Complex MfsSolution::normal_derivative(const Vec3& x, const Vec3& nrm) const {
    Complex s{};
    for (std::size_t n = 0; n < sources.size(); ++n) {
        const Vec3 d = x - sources[n];
        const double R = norm(d);
        if (R <= 0.0) throw std::domain_error("MfsSolution: point coincides with a source");
        // d/dn(x) Phi_k(x, y_n) = Phi/R (ikR-1) (x-y_n).n / R
        const Complex phi = std::polar(1.0 / (4.0 * pi * R), k * R);
        s += coefficients[n] * phi / R * Complex(-1.0, k * R) * (dot(d, nrm) / R);
    }
    return s;
}

Complex MfsSolution::far_field(const Vec3& direction) const {
    Complex s{};
    for (std::size_t n = 0; n < sources.size(); ++n)
        s += coefficients[n] * std::polar(1.0, -k * dot(direction, sources[n]));
    return s / (4.0 * pi);
}

EigenfrequencyTable cube_eigenfrequencies(EigenKind kind, double a, double k_max) {
    if (!(a > 0.0)) throw std::invalid_argument("cube_eigenfrequencies: a must be positive");
    const bool dirichlet = kind == EigenKind::CubeDirichlet;
    const double ka_max = k_max * a;
    const int nmax = static_cast<int>(ka_max / pi) + 1;
    std::vector<double> vals;
    const int lo = dirichlet ? 1 : 0;
    for (int n1 = lo; n1 <= nmax; ++n1)
        for (int n2 = lo; n2 <= nmax; ++n2)
            for (int n3 = lo; n3 <= nmax; ++n3) {
                const double ka = pi * std::sqrt(double(n1 * n1 + n2 * n2 + n3 * n3));
                if (ka > 0.0 && ka <= ka_max) vals.push_back(ka);
            }
    std::sort(vals.begin(), vals.end());
    vals.erase(std::unique(vals.begin(), vals.end(),
                           [](double x, double y) { return std::abs(x - y) < 1e-12; }),
               vals.end());
    return {kind, std::move(vals)};
}

namespace {

// bisection refinement of a bracketed root
template <class F>
double bisect(F f, double a, double b) {
    double fa = f(a);
    for (int it = 0; it < 200; ++it) {
        const double m = 0.5 * (a + b);
        if (b - a < 1e-12) return m;
        const double fm = f(m);
        if ((fa < 0) == (fm < 0)) {
            a = m;
            fa = fm;
        } else {
            b = m;
        }
    }
    return 0.5 * (a + b);
}

} // namespace

EigenfrequencyTable sphere_eigenfrequencies(EigenKind kind, double R0, double k_max) {
    if (!(R0 > 0.0)) throw std::invalid_argument("sphere_eigenfrequencies: R0 must be positive");
    const bool dirichlet = kind == EigenKind::SphereDirichlet;
    const double xmax = k_max * R0;
    std::vector<double> vals;
    for (int n = 0;; ++n) {
        auto f = [&](double x) {
            const SphericalBessel b = spherical_bessel(n, x);
            return dirichlet ? b.j : b.jp;
        };
        // scan for sign changes; first root of j_n is above ~n
        const double x0 = 1e-6;
        const double dx = 0.02;
        bool found_any = false;
        double prev_x = x0, prev_f = f(x0);
        for (double x = x0 + dx; x <= xmax; x += dx) {
            const double fx = f(x);
            if ((prev_f < 0) != (fx < 0)) {
                const double r = bisect(f, prev_x, x);
                if (r > 1e-3) {
                    vals.push_back(r);
                    found_any = true;
                }
            }
            prev_x = x;
            prev_f = fx;
        }
        if (!found_any && n > xmax) break;
        if (n > xmax + 2) break;
    }
    std::sort(vals.begin(), vals.end());
    return {kind, std::move(vals)};
}

namespace {

// Legendre polynomials P_0..P_n at t
void legendre_all(int n, double t, std::vector<double>& P) {
    P.resize(n + 1);
    P[0] = 1.0;
    if (n >= 1) P[1] = t;
    for (int m = 2; m <= n; ++m) P[m] = ((2 * m - 1) * t * P[m - 1] - (m - 1) * P[m - 2]) / m;
}

} // namespace

Complex RigidSphereScattering::scattered(const Vec3& x) const {
    const double r = norm(x);
    const double cg = dot(x, d_s) / r; // angle to the propagation direction
    std::vector<double> P;
    legendre_all(max_terms, cg, P);
    Complex sum{};
    Complex in{1.0, 0.0}; // i^n
    int below = 0;
    for (int n = 0; n <= max_terms; ++n) {
        const SphericalBessel bR = spherical_bessel(n, k * R0);
        const SphericalBessel br = spherical_bessel(n, k * r);
        const Complex term = -P_inc * (2 * n + 1) * in * (bR.jp / bR.hp) * br.h * P[n];
        sum += term;
        below = (std::abs(term) < term_tol * std::max(std::abs(sum), 1e-300)) ? below + 1 : 0;
        if (below >= 3) return sum;
        in *= iu;
    }
    throw std::runtime_error("RigidSphereScattering: series did not converge");
}

Complex RigidSphereScattering::total(const Vec3& x) const {
    return scattered(x) + P_inc * std::polar(1.0, k * dot(d_s, x));
}

Complex RigidSphereScattering::far_field(const Vec3& direction) const {
    const Vec3 xh = normalized(direction);
    const double cg = dot(xh, d_s);
    std::vector<double> P;
    legendre_all(max_terms, cg, P);
    Complex sum{};
    Complex in{1.0, 0.0};
    int below = 0;
    for (int n = 0; n <= max_terms; ++n) {
        const SphericalBessel bR = spherical_bessel(n, k * R0);
        // lim r e^{-ikr} h_n(kr) = (-i)^{n+1}/k
        const Complex lim = std::pow(Complex(0.0, -1.0), n + 1) / k;
        const Complex term = -P_inc * (2 * n + 1) * in * (bR.jp / bR.hp) * lim * P[n];
        sum += term;
        below = (std::abs(term) < term_tol * std::max(std::abs(sum), 1e-300)) ? below + 1 : 0;
        if (below >= 3) return sum;
        in *= iu;
    }
    throw std::runtime_error("RigidSphereScattering: far-field series did not converge");
}

Complex RigidSphereScattering::total_radial_derivative(const Vec3& x) const {
    const double r = norm(x);
    const double cg = dot(x, d_s) / r;
    std::vector<double> P;
    legendre_all(max_terms, cg, P);
    Complex sum{};
    Complex in{1.0, 0.0};
    int below = 0;
    for (int n = 0; n <= max_terms; ++n) {
        const SphericalBessel bR = spherical_bessel(n, k * R0);
        const SphericalBessel br = spherical_bessel(n, k * r);
        // d/dr of p_inc expansion + scattered expansion
        const Complex term =
            P_inc * (2 * n + 1) * in * k * (br.jp - (bR.jp / bR.hp) * br.hp) * P[n];
        sum += term;
        below = (std::abs(term) < term_tol * std::max(std::abs(sum), 1e-300)) ? below + 1 : 0;
        if (below >= 3) return sum;
        in *= iu;
    }
    throw std::runtime_error("RigidSphereScattering: derivative series did not converge");
}

} // namespace igabem
