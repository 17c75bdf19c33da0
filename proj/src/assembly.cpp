#include "igabem/assembly.hpp"

#include "igabem/simd/kernel_batch.hpp"

#include <atomic>
#include <chrono>

namespace igabem {

const char* to_string(BieKind k) {
    switch (k) {
        case BieKind::CBIE: return "CBIE";
        case BieKind::HBIE: return "HBIE";
        case BieKind::BM: return "BM";
        case BieKind::RCBIE1: return "RCBIE1";
        case BieKind::RCBIE2: return "RCBIE2";
        case BieKind::RCBIE3: return "RCBIE3";
    }
    return "?";
}

const char* to_string(Discretization d) {
    return d == Discretization::Collocation ? "collocation" : "galerkin";
}

Vec3 incident_direction(double alpha_s_deg, double beta_s_deg) {
    const double a = deg2rad(alpha_s_deg), b = deg2rad(beta_s_deg);
    return Vec3{-std::cos(b) * std::cos(a), -std::cos(b) * std::sin(a), -std::sin(b)};
}

Complex plane_wave(double k, double P_inc, const Vec3& d_s, const Vec3& x) {
    return P_inc * std::polar(1.0, k * dot(d_s, x));
}

Complex neumann_rigid(double k, double P_inc, const Vec3& d_s, const Vec3& x, const Vec3& n) {
    return -iu * k * dot(d_s, n) * plane_wave(k, P_inc, d_s, x);
}

BoundaryCondition BoundaryCondition::rigid_plane_wave(double P_inc, const Vec3& d_s) {
    BoundaryCondition bc;
    bc.kind = Kind::RigidPlaneWave;
    bc.P_inc = P_inc;
    bc.directions = {normalized(d_s)};
    return bc;
}

BoundaryCondition BoundaryCondition::rigid_plane_waves(double P_inc, std::vector<Vec3> d_s) {
    BoundaryCondition bc;
    bc.kind = Kind::RigidPlaneWave;
    bc.P_inc = P_inc;
    for (auto& d : d_s) d = normalized(d);
    bc.directions = std::move(d_s);
    return bc;
}

BoundaryCondition BoundaryCondition::neumann(std::function<Complex(const Vec3&, const Vec3&)> g,
                                             std::function<Complex(const Vec3&)> p_exact) {
    BoundaryCondition bc;
    bc.kind = Kind::NeumannFromField;
    bc.g = std::move(g);
    bc.p_exact = std::move(p_exact);
    return bc;
}

namespace {

constexpr int kMaxLoc = 128;

// geometry + rational basis values at one parametric point
inline void geom_basis_point(const NurbsPatch& p, double xi, double eta, Vec3& pos, Vec3& nrm,
                             double& jac, double* B) {
    const int dp = p.degree_xi(), dq = p.degree_eta();
    double bu[2 * 16], bv[2 * 16];
    const int fu = eval_basis(p.knots_xi, xi, 1, bu);
    const int fv = eval_basis(p.knots_eta, eta, 1, bv);
    Vec3 A{}, Au{}, Av{};
    double W = 0.0, Wu = 0.0, Wv = 0.0;
    int a = 0;
    for (int j = 0; j <= dq; ++j) {
        for (int i = 0; i <= dp; ++i, ++a) {
            const int id = p.index(fu + i, fv + j);
            const double w = p.weights[id];
            const double cb = bu[i] * bv[j] * w;
            const double cu = bu[dp + 1 + i] * bv[j] * w;
            const double cv = bu[i] * bv[dq + 1 + j] * w;
            const Vec3& P = p.control_points[id];
            A += cb * P;
            Au += cu * P;
            Av += cv * P;
            W += cb;
            Wu += cu;
            Wv += cv;
            B[a] = cb;
        }
    }
    const double invW = 1.0 / W;
    pos = A * invW;
    const Vec3 dxi = (Au - Wu * pos) * invW;
    const Vec3 deta = (Av - Wv * pos) * invW;
    const Vec3 cr = cross(dxi, deta);
    jac = norm(cr);
    nrm = (jac > 1e-300) ? cr / jac : Vec3{0, 0, 1};
    for (int q = 0; q < a; ++q) B[q] *= invW;
}

struct Workspace {
    std::vector<QuadPoint> pts;
    std::vector<double> yx, yy, yz, nyx, nyy, nyz, wj;
    std::vector<double> B; // [a * n + i]
    std::vector<double> phi_re, phi_im, dky_re, dky_im, phi0, d0y;
    std::vector<double> dkx_re, dkx_im, d0x, h0, hm_re, hm_im;
    std::vector<double> v1ny, v2ny, v1dy, v2dy, nxny, nxdy;
    std::vector<double> wk_re, wk_im; // per-point kernel weight for the basis dot
    std::vector<Complex> gvals;

    void ensure(int n, int nloc, bool with_x) {
        const std::size_t nn = static_cast<std::size_t>(n);
        for (auto* v : {&yx, &yy, &yz, &nyx, &nyy, &nyz, &wj, &phi_re, &phi_im, &dky_re, &dky_im,
                        &phi0, &d0y, &wk_re, &wk_im})
            if (v->size() < nn) v->resize(nn);
        if (B.size() < nn * nloc) B.resize(nn * nloc);
        if (with_x)
            for (auto* v : {&dkx_re, &dkx_im, &d0x, &h0, &hm_re, &hm_im, &v1ny, &v2ny, &v1dy,
                            &v2dy, &nxny, &nxdy})
                if (v->size() < nn) v->resize(nn);
    }
};

struct SourceContext {
    Vec3 x;
    bool with_frame = false;
    SurfaceFrame fr;
    std::vector<DofAnchor> anchors; // classification anchors (elements containing them are singular)
    std::vector<int> sdofs;         // dofs active at the evaluation location
    std::vector<double> sR, sDv1, sDv2;
    // regularization data (RCBIE)
    Vec3 x1, x2, d1, d2;
    double C1r = 0.0, C2r = 0.0;
};

// basis values and tangential v-derivatives at the source location
void source_basis(const SurfaceMesh& mesh, const DofAnchor& at, bool with_frame,
                  const SurfaceFrame& fr, SourceContext& src) {
    const NurbsPatch& p = mesh.patches[at.patch];
    const int dp = p.degree_xi(), dq = p.degree_eta();
    double bu[2 * 16], bv[2 * 16];
    const int fu = eval_basis(p.knots_xi, at.xi, 1, bu);
    const int fv = eval_basis(p.knots_eta, at.eta, 1, bv);
    const int nloc = (dp + 1) * (dq + 1);
    src.sdofs.resize(nloc);
    src.sR.resize(nloc);
    src.sDv1.assign(nloc, 0.0);
    src.sDv2.assign(nloc, 0.0);

    double W = 0.0, Wu = 0.0, Wv = 0.0;
    double cb[kMaxLoc], cu[kMaxLoc], cv[kMaxLoc];
    int a = 0;
    for (int j = 0; j <= dq; ++j) {
        for (int i = 0; i <= dp; ++i, ++a) {
            const int id = p.index(fu + i, fv + j);
            const double w = p.weights[id];
            cb[a] = bu[i] * bv[j] * w;
            cu[a] = bu[dp + 1 + i] * bv[j] * w;
            cv[a] = bu[i] * bv[dq + 1 + j] * w;
            W += cb[a];
            Wu += cu[a];
            Wv += cv[a];
            src.sdofs[a] = mesh.patch_dof_map[at.patch][id];
        }
    }
    const double invW = 1.0 / W;
    for (int q = 0; q < nloc; ++q) src.sR[q] = cb[q] * invW;
    if (!with_frame) return;

    // dR/dxi = (cu - R Wu)/W, dR/deta = (cv - R Wv)/W
    const double st = std::sin(fr.theta), ct = std::cos(fr.theta);
    const double inv_hxi = 1.0 / fr.h_xi, inv_heta = 1.0 / fr.h_eta;
    for (int q = 0; q < nloc; ++q) {
        const double dxi = (cu[q] - src.sR[q] * Wu) * invW;
        const double det = (cv[q] - src.sR[q] * Wv) * invW;
        src.sDv1[q] = inv_hxi * dxi;
        src.sDv2[q] = -ct / (st)*inv_hxi * dxi + inv_heta / st * det;
    }
}

struct FormulationData {
    BieKind kind;
    DomainSide domain;
    bool plain_jump = false;
    Complex alpha{};    // BM weight on the HBIE part
    double k = 0.0;
    bool with_x = false;       // kernels need source frame data
    bool needs_psi = false;
    int psi_family = 0;
};

Complex free_coefficient(const FormulationData& fd, const SourceContext& src) {
    const bool ext = fd.domain == DomainSide::Exterior;
    switch (fd.kind) {
        case BieKind::CBIE:
        case BieKind::BM:
            return ext ? Complex(-1.0) : Complex(0.0);
        case BieKind::HBIE:
            return Complex(0.0);
        case BieKind::RCBIE1: {
            const double C1 = src.C1r;
            const Complex e = std::polar(1.0, 2.0 * fd.k * C1);
            const Complex base = ext ? Complex(0.0) : Complex(2.0);
            return 0.5 * (base - (1.0 + iu / (fd.k * C1)) * (1.0 - e));
        }
        case BieKind::RCBIE2:
            return ext ? Complex(0.0) : Complex(1.0);
        case BieKind::RCBIE3:
            return ext ? Complex(-1.0) : Complex(0.0);
    }
    return {};
}

Complex rcbie1_rhs_coefficient(const FormulationData& fd, const SourceContext& src) {
    const double C1 = src.C1r, C2 = src.C2r;
    const Complex e = std::polar(1.0, 2.0 * fd.k * C1);
    return iu * C1 / (2.0 * fd.k * C2) * (1.0 - e);
}

struct AtomicStats {
    std::atomic<long long> n_qp_regular{0};
    std::atomic<long long> n_qp_singular{0};
};

struct RowScalars {
    double S0 = 0.0;                  // int d0y
    double Sh = 0.0, Shv1 = 0.0, Shv2 = 0.0; // int h0 {1, v1.dy, v2.dy}
    double A1 = 0.0, A2 = 0.0;        // int d0x v_a.ny
    double Sxx = 0.0;                 // int d0x nx.ny
    double Sh0dy = 0.0;               // int h0 nx.dy
    Complex Spsi{};                   // int (-psi1 dky + dpsi1' phi)
    Complex Sg{};                     // int (psi2 dky - dpsi2' phi)
    Complex rhs_phi_g{};              // int phi g(y)
    Complex rhs_dkx_g{};              // int dkx g(y)
};

class RowAssembler {
public:
    RowAssembler(const SurfaceMesh& mesh, const FormulationData& fd, const BoundaryCondition& bc,
                 const QuadConfig& cfg)
        : mesh_(mesh), fd_(fd), bc_(bc), cfg_(cfg) {}

    // Accumulates one BIE row for the given source into row/rhs.
    void assemble_row(const SourceContext& src, Complex* row, Complex* rhs, Workspace& ws,
                      AtomicStats& stats) const {
        RowScalars sc;
        const bool neumann = !bc_.rigid();
        long long nreg = 0, nsing = 0;
        for (int e = 0; e < mesh_.n_elements(); ++e) {
            const Element& el = mesh_.elements[e];
            const DofAnchor* inside = nullptr;
            for (const DofAnchor& a : src.anchors) {
                if (a.patch == el.patch && el.contains_param(a.xi, a.eta, 1e-12)) {
                    inside = &a;
                    break;
                }
            }
            ws.pts.clear();
            if (inside) {
                singular_points(mesh_, el, inside->xi, inside->eta, cfg_, ws.pts);
                nsing += static_cast<long long>(ws.pts.size());
            } else {
                regular_points(mesh_, el, src.x, cfg_, ws.pts);
                nreg += static_cast<long long>(ws.pts.size());
            }
            accumulate_element(el, src, neumann, row, sc, ws);
        }
        stats.n_qp_regular.fetch_add(nreg, std::memory_order_relaxed);
        stats.n_qp_singular.fetch_add(nsing, std::memory_order_relaxed);
        finalize_row(src, sc, row, rhs);
    }

private:
    void accumulate_element(const Element& el, const SourceContext& src, bool neumann,
                            Complex* row, RowScalars& sc, Workspace& ws) const {
        const NurbsPatch& p = mesh_.patches[el.patch];
        const int n = static_cast<int>(ws.pts.size());
        const int nloc = static_cast<int>(el.dofs.size());
        ws.ensure(n, nloc, fd_.with_x);

        // geometry, normals, basis at all points
        double Btmp[kMaxLoc];
        for (int i = 0; i < n; ++i) {
            Vec3 pos, nrm;
            double jac;
            geom_basis_point(p, ws.pts[i].xi, ws.pts[i].eta, pos, nrm, jac, Btmp);
            ws.yx[i] = pos.x;
            ws.yy[i] = pos.y;
            ws.yz[i] = pos.z;
            ws.nyx[i] = nrm.x;
            ws.nyy[i] = nrm.y;
            ws.nyz[i] = nrm.z;
            ws.wj[i] = ws.pts[i].weight * jac;
            for (int a = 0; a < nloc; ++a) ws.B[static_cast<std::size_t>(a) * n + i] = Btmp[a];
        }

        simd::KernelBatchIn in;
        in.k = fd_.k;
        in.x = src.x;
        in.with_x = fd_.with_x;
        if (fd_.with_x) {
            in.n_x = src.fr.normal;
            in.v1 = src.fr.v1;
            in.v2 = src.fr.v2;
        }
        in.yx = ws.yx.data();
        in.yy = ws.yy.data();
        in.yz = ws.yz.data();
        in.nyx = ws.nyx.data();
        in.nyy = ws.nyy.data();
        in.nyz = ws.nyz.data();
        in.n = n;
        simd::KernelBatchOut out;
        out.phi_re = ws.phi_re.data();
        out.phi_im = ws.phi_im.data();
        out.dky_re = ws.dky_re.data();
        out.dky_im = ws.dky_im.data();
        out.phi0 = ws.phi0.data();
        out.d0y = ws.d0y.data();
        if (fd_.with_x) {
            out.dkx_re = ws.dkx_re.data();
            out.dkx_im = ws.dkx_im.data();
            out.d0x = ws.d0x.data();
            out.h0 = ws.h0.data();
            out.hm_re = ws.hm_re.data();
            out.hm_im = ws.hm_im.data();
            out.v1ny = ws.v1ny.data();
            out.v2ny = ws.v2ny.data();
            out.v1dy = ws.v1dy.data();
            out.v2dy = ws.v2dy.data();
            out.nxny = ws.nxny.data();
            out.nxdy = ws.nxdy.data();
        }
        simd::active_kernel_batch()(in, out);

        if (neumann && (ws.gvals.size() < static_cast<std::size_t>(n))) ws.gvals.resize(n);
        if (neumann) {
            for (int i = 0; i < n; ++i)
                ws.gvals[i] = bc_.g(Vec3{ws.yx[i], ws.yy[i], ws.yz[i]},
                                    Vec3{ws.nyx[i], ws.nyy[i], ws.nyz[i]});
        }

        // per-point complex weight multiplying R_j(y)
        const bool hbie_part = fd_.kind == BieKind::HBIE || fd_.kind == BieKind::BM;
        const bool dky_part = fd_.kind != BieKind::HBIE;
        const bool cbie_reg = fd_.kind == BieKind::CBIE || fd_.kind == BieKind::BM;
        for (int i = 0; i < n; ++i) {
            const double w = ws.wj[i];
            double wr = 0.0, wi = 0.0;
            if (dky_part) {
                wr = w * ws.dky_re[i];
                wi = w * ws.dky_im[i];
            }
            if (hbie_part) {
                const double hk_re = ws.hm_re[i] + ws.h0[i];
                const double hk_im = ws.hm_im[i];
                if (fd_.kind == BieKind::HBIE) {
                    wr = w * hk_re;
                    wi = w * hk_im;
                } else {
                    wr += w * (fd_.alpha.real() * hk_re - fd_.alpha.imag() * hk_im);
                    wi += w * (fd_.alpha.real() * hk_im + fd_.alpha.imag() * hk_re);
                }
            }
            ws.wk_re[i] = wr;
            ws.wk_im[i] = wi;
        }
        for (int a = 0; a < nloc; ++a) {
            const double* Ba = ws.B.data() + static_cast<std::size_t>(a) * n;
            double sr = 0.0, si = 0.0;
            for (int i = 0; i < n; ++i) {
                sr += ws.wk_re[i] * Ba[i];
                si += ws.wk_im[i] * Ba[i];
            }
            row[el.dofs[a]] += Complex(sr, si);
        }

        // scalar sums
        if (cbie_reg && !fd_.plain_jump) {
            double s = 0.0;
            for (int i = 0; i < n; ++i) s += ws.wj[i] * ws.d0y[i];
            sc.S0 += s;
        }
        if (hbie_part) {
            double sh = 0, sv1 = 0, sv2 = 0, a1 = 0, a2 = 0, sxx = 0, shdy = 0;
            for (int i = 0; i < n; ++i) {
                const double wh = ws.wj[i] * ws.h0[i];
                sh += wh;
                sv1 += wh * ws.v1dy[i];
                sv2 += wh * ws.v2dy[i];
                shdy += wh * ws.nxdy[i];
                const double wd = ws.wj[i] * ws.d0x[i];
                a1 += wd * ws.v1ny[i];
                a2 += wd * ws.v2ny[i];
                sxx += wd * ws.nxny[i];
            }
            sc.Sh += sh;
            sc.Shv1 += sv1;
            sc.Shv2 += sv2;
            sc.A1 += a1;
            sc.A2 += a2;
            sc.Sxx += sxx;
            sc.Sh0dy += shdy;
        }
        if (fd_.needs_psi) {
            Complex spsi{}, sg{};
            for (int i = 0; i < n; ++i) {
                const Vec3 y{ws.yx[i], ws.yy[i], ws.yz[i]};
                const Vec3 ny{ws.nyx[i], ws.nyy[i], ws.nyz[i]};
                PsiEval pe;
                switch (fd_.psi_family) {
                    case 1: pe = psi_family_1(fd_.k, src.x, src.fr.normal, src.x1, y, ny); break;
                    case 2:
                        pe = psi_family_2(fd_.k, src.x, src.fr.normal, src.x1, src.x2, y, ny);
                        break;
                    default: pe = psi_family_3(fd_.k, src.x, src.fr.normal, y, ny); break;
                }
                const Complex dky{ws.dky_re[i], ws.dky_im[i]};
                const Complex phi{ws.phi_re[i], ws.phi_im[i]};
                const double w = ws.wj[i];
                spsi += w * (-pe.psi1 * dky + pe.dpsi1_dny * phi);
                if (neumann) sg += w * (pe.psi2 * dky - pe.dpsi2_dny * phi);
            }
            sc.Spsi += spsi;
            sc.Sg += sg;
        }
        if (neumann) {
            Complex sphig{}, sdkxg{};
            for (int i = 0; i < n; ++i) {
                const double w = ws.wj[i];
                sphig += w * Complex(ws.phi_re[i], ws.phi_im[i]) * ws.gvals[i];
                if (hbie_part) sdkxg += w * Complex(ws.dkx_re[i], ws.dkx_im[i]) * ws.gvals[i];
            }
            sc.rhs_phi_g += sphig;
            sc.rhs_dkx_g += sdkxg;
        }
    }

    void finalize_row(const SourceContext& src, const RowScalars& sc, Complex* row,
                      Complex* rhs) const {
        const bool ext = fd_.domain == DomainSide::Exterior;
        const int nloc = static_cast<int>(src.sdofs.size());
        const bool hbie_part = fd_.kind == BieKind::HBIE || fd_.kind == BieKind::BM;
        const bool cbie_reg = fd_.kind == BieKind::CBIE || fd_.kind == BieKind::BM;
        const Complex hbie_w = fd_.kind == BieKind::HBIE ? Complex(1.0) : fd_.alpha;

        Complex diag{};
        if (cbie_reg) {
            if (fd_.plain_jump) {
                const double I0 = solid_angle_integral(mesh_, src.anchors, src.x, cfg_);
                diag += jump_term(ext ? DomainSide::Exterior : DomainSide::Interior, I0);
            } else {
                diag += free_coefficient({BieKind::CBIE, fd_.domain}, src) - sc.S0;
            }
        }
        if (fd_.needs_psi) diag += free_coefficient(fd_, src) + sc.Spsi;
        for (int a = 0; a < nloc; ++a) row[src.sdofs[a]] += diag * src.sR[a];
        if (hbie_part) {
            for (int a = 0; a < nloc; ++a) {
                const double t = -src.sR[a] * sc.Sh + src.sDv1[a] * (sc.A1 - sc.Shv1) +
                                 src.sDv2[a] * (sc.A2 - sc.Shv2);
                row[src.sdofs[a]] += hbie_w * t;
            }
        }

        // right-hand side(s)
        if (bc_.rigid()) {
            for (std::size_t c = 0; c < bc_.directions.size(); ++c) {
                const Vec3& d = bc_.directions[c];
                Complex r{};
                if (fd_.kind != BieKind::HBIE) r -= plane_wave(fd_.k, bc_.P_inc, d, src.x);
                // rigid HBIE right-hand side is -dp_inc/dn(x) = +g(x)
                if (hbie_part)
                    r += hbie_w * neumann_rigid(fd_.k, bc_.P_inc, d, src.x, src.fr.normal);
                rhs[c] += r;
            }
        } else {
            const Complex gx = src.with_frame ? bc_.g(src.x, src.fr.normal) : Complex(0.0);
            Complex r{};
            if (cbie_reg) r += sc.rhs_phi_g;
            if (fd_.needs_psi) {
                r += sc.rhs_phi_g + gx * sc.Sg;
                if (fd_.kind == BieKind::RCBIE1) r += rcbie1_rhs_coefficient(fd_, src) * gx;
            }
            if (hbie_part) {
                const double half = ext ? 1.0 : 0.0; // (1 +/- 1)/2
                r += hbie_w * (sc.rhs_dkx_g + gx * (half - sc.Sxx + sc.Sh0dy));
            }
            rhs[0] += r;
        }
    }

    const SurfaceMesh& mesh_;
    const FormulationData& fd_;
    const BoundaryCondition& bc_;
    const QuadConfig& cfg_;
};

FormulationData make_formulation_data(const BieFormulation& form, double k) {
    FormulationData fd;
    fd.kind = form.kind;
    fd.domain = form.domain;
    fd.plain_jump = form.plain_cbie_jump && form.kind == BieKind::CBIE;
    fd.k = k;
    fd.with_x = form.needs_source_frame();
    fd.needs_psi = form.kind == BieKind::RCBIE1 || form.kind == BieKind::RCBIE2 ||
                   form.kind == BieKind::RCBIE3;
    fd.psi_family = fd.needs_psi ? (static_cast<int>(form.kind) - static_cast<int>(BieKind::RCBIE1) + 1)
                                 : 0;
    if (form.kind == BieKind::BM) {
        if (!(k > 0.0) && !form.coupling_alpha)
            throw std::invalid_argument("BM: default coupling alpha = i/k requires k > 0");
        fd.alpha = form.alpha(k);
    }
    if (form.kind == BieKind::RCBIE1 && !(k > 0.0))
        throw std::invalid_argument("RCBIE1: requires k > 0");
    if (fd.needs_psi && fd.psi_family == 3 && !(k > 0.0))
        throw std::invalid_argument("RCBIE3: requires k > 0");
    return fd;
}

void setup_psi_offsets(const FormulationData& fd, SourceContext& src) {
    if (!fd.needs_psi) return;
    // offset points must lie outside the solution domain
    const double s = fd.domain == DomainSide::Exterior ? -1.0 : 1.0;
    const Vec3 n = src.fr.normal;
    if (fd.psi_family == 1) {
        src.x1 = src.x + s * n;
        src.C1r = dist(src.x, src.x1);
        src.C2r = dot(src.x - src.x1, n);
    } else if (fd.psi_family == 2) {
        src.x1 = src.x + 0.5 * s * n;
        src.x2 = src.x + s * n;
    } else {
        src.d1 = psi3_direction(n);
        src.d2 = src.d1 + n;
    }
}

} // namespace

std::vector<CollocationPoint> collocation_points(const SurfaceMesh& mesh,
                                                 const BieFormulation& form) {
    const bool needs_frame = form.needs_source_frame();
    const bool tangential = form.kind == BieKind::HBIE || form.kind == BieKind::BM;
    std::vector<CollocationPoint> out(mesh.n_dofs);

    auto sub_c1_line = [](const KnotVector& kv, double u) {
        if (std::abs(u - kv.front()) < 1e-12 || std::abs(u - kv.back()) < 1e-12) return true;
        const int mult = kv.multiplicity(u);
        return mult >= kv.degree; // continuity p - mult < 1
    };

    for (int d = 0; d < mesh.n_dofs; ++d) {
        const DofAnchor& a0 = mesh.dof_anchors[d][0];
        const NurbsPatch& p = mesh.patches[a0.patch];
        double xi = a0.xi, eta = a0.eta;
        bool pert = false;

        // the span the anchor lies in (shift target)
        auto span_of = [](const KnotVector& kv, double u) {
            const int s = kv.find_span(u);
            return std::array<double, 2>{kv.values[s], kv.values[s + 1]};
        };

        if (needs_frame) {
            bool g0_interface = false;
            if (!tangential) {
                // RCBIE: shift only where the surface normal itself is ambiguous
                const SurfaceFrame f0 = p.frame(xi, eta);
                for (std::size_t q = 1; q < mesh.dof_anchors[d].size() && !g0_interface; ++q) {
                    const DofAnchor& aq = mesh.dof_anchors[d][q];
                    const SurfaceFrame fq = mesh.patches[aq.patch].frame(aq.xi, aq.eta);
                    if (!f0.degenerate && !fq.degenerate &&
                        norm(f0.normal - fq.normal) > 1e-8)
                        g0_interface = true;
                }
            }
            const bool shift_lines = tangential || g0_interface;
            if (shift_lines && sub_c1_line(p.knots_xi, xi)) {
                const auto s = span_of(p.knots_xi, xi);
                const double h = (s[1] - s[0]) / (2.0 * p.degree_xi());
                xi = (std::abs(xi - s[1]) < std::abs(xi - s[0])) ? s[1] - h : s[0] + h;
                pert = true;
            }
            if (shift_lines && sub_c1_line(p.knots_eta, eta)) {
                const auto s = span_of(p.knots_eta, eta);
                const double h = (s[1] - s[0]) / (2.0 * p.degree_eta());
                eta = (std::abs(eta - s[1]) < std::abs(eta - s[0])) ? s[1] - h : s[0] + h;
                pert = true;
            }
        }

        SurfaceFrame fr = p.frame(xi, eta);
        if (needs_frame && fr.degenerate) {
            // polar point: shift in eta within its element, then xi if required
            const auto se = span_of(p.knots_eta, eta);
            const double he = (se[1] - se[0]) / (2.0 * p.degree_eta());
            eta = (std::abs(eta - se[1]) < std::abs(eta - se[0])) ? se[1] - he : se[0] + he;
            pert = true;
            fr = p.frame(xi, eta);
            if (fr.degenerate) {
                const auto sx = span_of(p.knots_xi, xi);
                const double hx = (sx[1] - sx[0]) / (2.0 * p.degree_xi());
                xi = (std::abs(xi - sx[1]) < std::abs(xi - sx[0])) ? sx[1] - hx : sx[0] + hx;
                fr = p.frame(xi, eta);
            }
            if (fr.degenerate)
                throw std::runtime_error("collocation_points: unresolvable degeneracy at dof " +
                                         std::to_string(d));
        }
        if (needs_frame && pert) {
            // a shifted point must not remain on a patch boundary: a closed
            // seam would give it a second parametric preimage that the
            // singular-element classification could not see
            bool moved = false;
            if (std::abs(xi - p.knots_xi.front()) < 1e-12 ||
                std::abs(xi - p.knots_xi.back()) < 1e-12) {
                const auto sx = span_of(p.knots_xi, xi);
                const double hx = (sx[1] - sx[0]) / (2.0 * p.degree_xi());
                xi = (std::abs(xi - sx[1]) < std::abs(xi - sx[0])) ? sx[1] - hx : sx[0] + hx;
                moved = true;
            }
            if (std::abs(eta - p.knots_eta.front()) < 1e-12 ||
                std::abs(eta - p.knots_eta.back()) < 1e-12) {
                const auto se = span_of(p.knots_eta, eta);
                const double he = (se[1] - se[0]) / (2.0 * p.degree_eta());
                eta = (std::abs(eta - se[1]) < std::abs(eta - se[0])) ? se[1] - he : se[0] + he;
                moved = true;
            }
            if (moved) fr = p.frame(xi, eta);
        }

        CollocationPoint cp;
        cp.dof = d;
        cp.eval = {a0.patch, xi, eta};
        cp.perturbed = pert;
        cp.frame = fr;
        cp.x = fr.point;
        out[d] = cp;
    }
    return out;
}

BemSystem assemble(const SurfaceMesh& mesh, double k, const BieFormulation& form,
                   const BoundaryCondition& bc, const QuadConfig& cfg, int threads) {
    const auto t0 = std::chrono::steady_clock::now();
    const FormulationData fd = make_formulation_data(form, k);
    if (!bc.rigid() && !bc.g) throw std::invalid_argument("assemble: Neumann data missing");
    if (bc.rigid() && form.domain == DomainSide::Interior)
        throw std::invalid_argument("assemble: rigid scattering is an exterior problem");

    const int n = mesh.n_dofs;
    const int nrhs = bc.n_rhs();
    BemSystem sys;
    sys.A = Eigen::MatrixXcd::Zero(n, n);
    sys.rhs = Eigen::MatrixXcd::Zero(n, nrhs);

    if (threads <= 0) threads = default_thread_count();
    AtomicStats astats;

    if (form.disc == Discretization::Collocation) {
        const auto cps = collocation_points(mesh, form);
        RowAssembler ra(mesh, fd, bc, cfg);
        parallel_for(static_cast<std::size_t>(n), threads, [&](std::size_t r) {
            thread_local Workspace ws;
            thread_local std::vector<Complex> row;
            thread_local std::vector<Complex> rhs_row;
            row.assign(n, Complex{});
            rhs_row.assign(nrhs, Complex{});

            const CollocationPoint& cp = cps[r];
            SourceContext src;
            src.x = cp.x;
            src.with_frame = fd.with_x;
            src.fr = cp.frame;
            if (cp.perturbed)
                src.anchors = {cp.eval};
            else
                src.anchors = mesh.dof_anchors[cp.dof];
            source_basis(mesh, cp.eval, fd.with_x, cp.frame, src);
            setup_psi_offsets(fd, src);
            ra.assemble_row(src, row.data(), rhs_row.data(), ws, astats);
            for (int j = 0; j < n; ++j) sys.A(r, j) = row[j];
            for (int c = 0; c < nrhs; ++c) sys.rhs(r, c) = rhs_row[c];
        });
    } else {
        // Galerkin: outer integration over elements; static partition keeps
        // the accumulation order deterministic for a fixed thread count.
        const int nel = mesh.n_elements();
        const int nt = std::max(1, std::min<int>(threads, nel));
        std::vector<Eigen::MatrixXcd> Abuf(nt), Rbuf(nt);
        RowAssembler ra(mesh, fd, bc, cfg);
        std::vector<std::thread> pool;
        auto work = [&](int t) {
            Abuf[t] = Eigen::MatrixXcd::Zero(mesh.n_dofs, mesh.n_dofs);
            Rbuf[t] = Eigen::MatrixXcd::Zero(mesh.n_dofs, nrhs);
            Workspace ws;
            std::vector<Complex> row(mesh.n_dofs);
            std::vector<Complex> rhs_row(nrhs);
            const int lo = static_cast<int>(static_cast<long long>(nel) * t / nt);
            const int hi = static_cast<int>(static_cast<long long>(nel) * (t + 1) / nt);
            for (int e = lo; e < hi; ++e) {
                const Element& el = mesh.elements[e];
                const NurbsPatch& p = mesh.patches[el.patch];
                const int nox = p.degree_xi() + 1 + cfg.n_eqp1;
                const int noy = p.degree_eta() + 1 + cfg.n_eqp1;
                const GaussRule& gx = gauss_legendre(nox);
                const GaussRule& gy = gauss_legendre(noy);
                const double jx = 0.5 * (el.xi1 - el.xi0), jy = 0.5 * (el.eta1 - el.eta0);
                for (int oj = 0; oj < noy; ++oj) {
                    for (int oi = 0; oi < nox; ++oi) {
                        const double xi = el.xi_mid() + jx * gx.nodes[oi];
                        const double eta = el.eta_mid() + jy * gy.nodes[oj];
                        const SurfaceFrame fr = p.frame(xi, eta);
                        if (fr.degenerate) continue;
                        const double wq = gx.weights[oi] * gy.weights[oj] * jx * jy * fr.jacobian;

                        SourceContext src;
                        src.x = fr.point;
                        src.with_frame = true;
                        src.fr = fr;
                        src.anchors = {{el.patch, xi, eta}};
                        source_basis(mesh, {el.patch, xi, eta}, true, fr, src);
                        setup_psi_offsets(fd, src);
                        std::fill(row.begin(), row.end(), Complex{});
                        std::fill(rhs_row.begin(), rhs_row.end(), Complex{});
                        ra.assemble_row(src, row.data(), rhs_row.data(), ws, astats);

                        for (std::size_t a = 0; a < src.sdofs.size(); ++a) {
                            const double tw = wq * src.sR[a];
                            if (tw == 0.0) continue;
                            const int gi = src.sdofs[a];
                            for (int j = 0; j < mesh.n_dofs; ++j) Abuf[t](gi, j) += tw * row[j];
                            for (int c = 0; c < nrhs; ++c) Rbuf[t](gi, c) += tw * rhs_row[c];
                        }
                    }
                }
            }
        };
        for (int t = 1; t < nt; ++t) pool.emplace_back(work, t);
        work(0);
        for (auto& th : pool) th.join();
        for (int t = 0; t < nt; ++t) {
            sys.A += Abuf[t];
            sys.rhs += Rbuf[t];
        }
    }

    sys.stats.n_qp_regular = astats.n_qp_regular.load();
    sys.stats.n_qp_singular = astats.n_qp_singular.load();
    if (!sys.A.allFinite() || !sys.rhs.allFinite())
        throw std::runtime_error("assemble: non-finite entries in system");
    sys.stats.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return sys;
}

SolveInfo solve(BemSystem& sys) {
    Eigen::PartialPivLU<Eigen::MatrixXcd> lu(sys.A);
    sys.solution = lu.solve(sys.rhs);
    SolveInfo info;
    info.rcond = lu.rcond();
    double worst = 0.0;
    for (int c = 0; c < sys.rhs.cols(); ++c) {
        const double bn = sys.rhs.col(c).norm();
        const double rn = (sys.A * sys.solution.col(c) - sys.rhs.col(c)).norm();
        worst = std::max(worst, bn > 0 ? rn / bn : rn);
    }
    info.residual = worst;
    if (!sys.solution.allFinite())
        throw std::runtime_error("solve: numerically singular system (rcond = " +
                                 std::to_string(info.rcond) + ")");
    return info;
}

Eigen::VectorXcd best_approximation(const SurfaceMesh& mesh,
                                    const std::function<Complex(const Vec3&)>& trace,
                                    int n_extra) {
    const int n = mesh.n_dofs;
    Eigen::MatrixXd M = Eigen::MatrixXd::Zero(n, n);
    Eigen::VectorXcd f = Eigen::VectorXcd::Zero(n);
    double B[kMaxLoc];
    for (const Element& el : mesh.elements) {
        const NurbsPatch& p = mesh.patches[el.patch];
        const int nx = p.degree_xi() + 1 + n_extra;
        const int ny = p.degree_eta() + 1 + n_extra;
        const GaussRule& gx = gauss_legendre(nx);
        const GaussRule& gy = gauss_legendre(ny);
        const double jx = 0.5 * (el.xi1 - el.xi0), jy = 0.5 * (el.eta1 - el.eta0);
        const int nloc = static_cast<int>(el.dofs.size());
        for (int oj = 0; oj < ny; ++oj) {
            for (int oi = 0; oi < nx; ++oi) {
                const double xi = el.xi_mid() + jx * gx.nodes[oi];
                const double eta = el.eta_mid() + jy * gy.nodes[oj];
                Vec3 pos, nrm;
                double jac;
                geom_basis_point(p, xi, eta, pos, nrm, jac, B);
                const double w = gx.weights[oi] * gy.weights[oj] * jx * jy * jac;
                const Complex pv = trace(pos);
                for (int a = 0; a < nloc; ++a) {
                    const int ga = el.dofs[a];
                    f[ga] += w * B[a] * pv;
                    for (int b = 0; b < nloc; ++b) M(ga, el.dofs[b]) += w * B[a] * B[b];
                }
            }
        }
    }
    Eigen::LDLT<Eigen::MatrixXd> ldlt(M);
    Eigen::VectorXcd u(n);
    const Eigen::VectorXd re = ldlt.solve(f.real());
    const Eigen::VectorXd im = ldlt.solve(f.imag());
    for (int i = 0; i < n; ++i) u[i] = Complex(re[i], im[i]);
    return u;
}

Complex eval_trace(const SurfaceMesh& mesh, const Eigen::VectorXcd& u, const Element& el,
                   double xi, double eta) {
    const NurbsPatch& p = mesh.patches[el.patch];
    double B[kMaxLoc];
    Vec3 pos, nrm;
    double jac;
    geom_basis_point(p, xi, eta, pos, nrm, jac, B);
    Complex s{};
    for (std::size_t a = 0; a < el.dofs.size(); ++a) s += B[a] * u[el.dofs[a]];
    return s;
}

} // namespace igabem
