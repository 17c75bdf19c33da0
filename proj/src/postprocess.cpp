#include "igabem/postprocess.hpp"

#include <limits>
#include <ostream>

namespace igabem {

SurfaceTraces SurfaceTraces::from_coefficients(
    const SurfaceMesh& mesh, const Eigen::VectorXcd& u,
    std::function<Complex(const Vec3&, const Vec3&)> dpdn) {
    SurfaceTraces t;
    const Eigen::VectorXcd coeffs = u;
    t.p = [&mesh, coeffs](const Element& el, double xi, double eta, const SurfaceFrame&) {
        return eval_trace(mesh, coeffs, el, xi, eta);
    };
    if (dpdn) {
        t.dpdn = [f = std::move(dpdn)](const Element&, double, double, const SurfaceFrame& fr) {
            return f(fr.point, fr.normal);
        };
    } else {
        t.dpdn = [](const Element&, double, double, const SurfaceFrame&) { return Complex{}; };
    }
    return t;
}

SurfaceTraces SurfaceTraces::from_fields(std::function<Complex(const Vec3&)> p,
                                         std::function<Complex(const Vec3&, const Vec3&)> dpdn) {
    SurfaceTraces t;
    t.p = [f = std::move(p)](const Element&, double, double, const SurfaceFrame& fr) {
        return f(fr.point);
    };
    t.dpdn = [f = std::move(dpdn)](const Element&, double, double, const SurfaceFrame& fr) {
        return f(fr.point, fr.normal);
    };
    return t;
}

FieldEval field_at(const SurfaceMesh& mesh, const SurfaceTraces& traces, double k, const Vec3& x,
                   const QuadConfig& cfg) {
    FieldEval out;
    double min_dist = std::numeric_limits<double>::max();
    Complex total{};
    std::vector<QuadPoint> pts;
    for (const Element& el : mesh.elements) {
        pts.clear();
        regular_points_new(mesh, el, x, cfg, pts);
        const NurbsPatch& p = mesh.patches[el.patch];
        Complex sum{};
        for (const QuadPoint& q : pts) {
            const SurfaceFrame fr = p.frame(q.xi, q.eta);
            if (fr.degenerate) continue;
            const KernelEval ke = greens_derivs(k, x, fr.point, fr.normal, fr.normal);
            min_dist = std::min(min_dist, ke.R);
            const Complex pv = traces.p(el, q.xi, q.eta, fr);
            const Complex tv = traces.dpdn(el, q.xi, q.eta, fr);
            sum += q.weight * fr.jacobian * (pv * ke.dphi_dny - ke.phi * tv);
        }
        total += sum;
    }
    out.value = total;
    out.near_surface = min_dist < 1e-6 * mesh.diameter;
    return out;
}

std::vector<Complex> far_field(const SurfaceMesh& mesh, const SurfaceTraces& traces, double k,
                               const std::vector<Vec3>& directions, int n_eqp1) {
    std::vector<Complex> out(directions.size(), Complex{});
    for (const Element& el : mesh.elements) {
        const NurbsPatch& p = mesh.patches[el.patch];
        const int nx = p.degree_xi() + 1 + n_eqp1 + 2;
        const int ny = p.degree_eta() + 1 + n_eqp1 + 2;
        const GaussRule& gx = gauss_legendre(nx);
        const GaussRule& gy = gauss_legendre(ny);
        const double jx = 0.5 * (el.xi1 - el.xi0), jy = 0.5 * (el.eta1 - el.eta0);
        for (int oj = 0; oj < ny; ++oj) {
            for (int oi = 0; oi < nx; ++oi) {
                const double xi = el.xi_mid() + jx * gx.nodes[oi];
                const double eta = el.eta_mid() + jy * gy.nodes[oj];
                const SurfaceFrame fr = p.frame(xi, eta);
                if (fr.degenerate) continue;
                const double w = gx.weights[oi] * gy.weights[oj] * jx * jy * fr.jacobian;
                const Complex pv = traces.p(el, xi, eta, fr);
                const Complex tv = traces.dpdn(el, xi, eta, fr);
                for (std::size_t d = 0; d < directions.size(); ++d) {
                    const Vec3& xh = directions[d];
                    const Complex e = std::polar(1.0, -k * dot(xh, fr.point));
                    out[d] += w * e * (iu * k * pv * dot(xh, fr.normal) + tv);
                }
            }
        }
    }
    for (auto& v : out) v *= -1.0 / (4.0 * pi);
    return out;
}

double target_strength(Complex p0, double P_inc) {
    if (P_inc == 0.0) throw std::invalid_argument("target_strength: P_inc must be nonzero");
    const double a = std::abs(p0);
    if (a == 0.0) return -std::numeric_limits<double>::infinity();
    return 20.0 * std::log10(a / std::abs(P_inc));
}

L2Error l2_surface_error(const SurfaceMesh& mesh, const Eigen::VectorXcd& u,
                         const std::function<Complex(const Vec3&)>& exact, int n_extra) {
    double num = 0.0, den = 0.0;
    for (const Element& el : mesh.elements) {
        const NurbsPatch& p = mesh.patches[el.patch];
        const int nx = p.degree_xi() + 1 + n_extra;
        const int ny = p.degree_eta() + 1 + n_extra;
        const GaussRule& gx = gauss_legendre(nx);
        const GaussRule& gy = gauss_legendre(ny);
        const double jx = 0.5 * (el.xi1 - el.xi0), jy = 0.5 * (el.eta1 - el.eta0);
        for (int oj = 0; oj < ny; ++oj) {
            for (int oi = 0; oi < nx; ++oi) {
                const double xi = el.xi_mid() + jx * gx.nodes[oi];
                const double eta = el.eta_mid() + jy * gy.nodes[oj];
                const SurfaceFrame fr = p.frame(xi, eta);
                if (fr.degenerate) continue;
                const double w = gx.weights[oi] * gy.weights[oj] * jx * jy * fr.jacobian;
                const Complex ph = eval_trace(mesh, u, el, xi, eta);
                const Complex pe = exact(fr.point);
                num += w * std::norm(ph - pe);
                den += w * std::norm(pe);
            }
        }
    }
    L2Error e;
    e.absolute = std::sqrt(num);
    e.norm_exact = std::sqrt(den);
    e.relative = den > 0.0 ? e.absolute / e.norm_exact : 0.0;
    return e;
}

double far_field_l2_error_percent(const std::vector<Complex>& a, const std::vector<Complex>& b) {
    if (a.size() != b.size())
        throw std::invalid_argument("far_field_l2_error_percent: direction grids differ");
    double num = 0.0, den = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        const double d = std::abs(a[i]) - std::abs(b[i]);
        num += d * d;
        den += std::abs(b[i]) * std::abs(b[i]);
    }
    return 100.0 * std::sqrt(num / den);
}

void write_sweep_csv(const std::vector<SweepEntry>& sweep, std::ostream& os) {
    os << "phi_deg,theta_deg,re_p0,im_p0,abs_p0,TS_dB\n";
    os.precision(17);
    for (const auto& s : sweep)
        os << s.phi_deg << "," << s.theta_deg << "," << s.p0.real() << "," << s.p0.imag() << ","
           << std::abs(s.p0) << "," << s.ts << "\n";
}

} // namespace igabem
