#include "igabem/nurbs.hpp"

#include <algorithm>
#include <cstring>

namespace igabem {

namespace {

using Hpt = std::array<double, 4>; // weighted point (wx, wy, wz, w)

Hpt operator*(double s, const Hpt& a) { return {s * a[0], s * a[1], s * a[2], s * a[3]}; }
Hpt operator+(const Hpt& a, const Hpt& b) {
    return {a[0] + b[0], a[1] + b[1], a[2] + b[2], a[3] + b[3]};
}

double binom(int n, int k) {
    if (k < 0 || k > n) return 0.0;
    k = std::min(k, n - k);
    double r = 1.0;
    for (int i = 0; i < k; ++i) r = r * (n - i) / (i + 1);
    return r;
}

} // namespace

KnotVector::KnotVector(std::vector<double> v, int p) : values(std::move(v)), degree(p) {
    if (degree < 0) throw std::invalid_argument("KnotVector: negative degree");
    if (static_cast<int>(values.size()) < 2 * (degree + 1))
        throw std::invalid_argument("KnotVector: too few knots");
    if (!std::is_sorted(values.begin(), values.end()))
        throw std::invalid_argument("KnotVector: knots must be nondecreasing");
}

bool KnotVector::is_open() const {
    const int p = degree;
    const int m = static_cast<int>(values.size()) - 1;
    for (int i = 0; i <= p; ++i)
        if (values[i] != values[0] || values[m - i] != values[m]) return false;
    return true;
}

int KnotVector::find_span(double u) const {
    const int p = degree;
    const int n = num_basis() - 1;
    if (u < values[p] || u > values[n + 1])
        throw std::domain_error("find_span: parameter outside knot range");
    if (u >= values[n + 1]) return n;
    int low = p, high = n + 1;
    int mid = (low + high) / 2;
    while (u < values[mid] || u >= values[mid + 1]) {
        if (u < values[mid]) high = mid;
        else low = mid;
        mid = (low + high) / 2;
    }
    return mid;
}

int KnotVector::multiplicity(double u, double tol) const {
    int m = 0;
    for (double v : values)
        if (std::abs(v - u) <= tol) ++m;
    return m;
}

std::vector<std::array<double, 2>> KnotVector::breaks() const {
    std::vector<std::array<double, 2>> out;
    for (std::size_t i = 0; i + 1 < values.size(); ++i)
        if (values[i + 1] > values[i]) out.push_back({values[i], values[i + 1]});
    return out;
}

std::vector<double> KnotVector::greville() const {
    const int p = degree;
    const int n = num_basis();
    std::vector<double> g(n);
    if (p == 0) {
        // degenerate case: use span midpoints
        for (int i = 0; i < n; ++i) g[i] = 0.5 * (values[i] + values[i + 1]);
        return g;
    }
    for (int i = 0; i < n; ++i) {
        double s = 0.0;
        for (int j = 1; j <= p; ++j) s += values[i + j];
        g[i] = s / p;
    }
    return g;
}

int eval_basis(const KnotVector& kv, double u, int num_derivs, double* out) {
    const int p = kv.degree;
    const double* U = kv.values.data();
    const int span = kv.find_span(u);
    const int nd = std::min(num_derivs, p);

    double ndu[16][16], left[16], right[16], a[2][16];
    ndu[0][0] = 1.0;
    for (int j = 1; j <= p; ++j) {
        left[j] = u - U[span + 1 - j];
        right[j] = U[span + j] - u;
        double saved = 0.0;
        for (int r = 0; r < j; ++r) {
            ndu[j][r] = right[r + 1] + left[j - r];
            const double temp = ndu[r][j - 1] / ndu[j][r];
            ndu[r][j] = saved + right[r + 1] * temp;
            saved = left[j - r] * temp;
        }
        ndu[j][j] = saved;
    }
    for (int j = 0; j <= p; ++j) out[j] = ndu[j][p];
    for (int k = nd + 1; k <= num_derivs; ++k)
        for (int j = 0; j <= p; ++j) out[k * (p + 1) + j] = 0.0;

    for (int r = 0; r <= p && nd > 0; ++r) {
        int s1 = 0, s2 = 1;
        a[0][0] = 1.0;
        for (int k = 1; k <= nd; ++k) {
            double d = 0.0;
            const int rk = r - k, pk = p - k;
            if (r >= k) {
                a[s2][0] = a[s1][0] / ndu[pk + 1][rk];
                d = a[s2][0] * ndu[rk][pk];
            }
            const int j1 = (rk >= -1) ? 1 : -rk;
            const int j2 = (r - 1 <= pk) ? k - 1 : p - r;
            for (int j = j1; j <= j2; ++j) {
                a[s2][j] = (a[s1][j] - a[s1][j - 1]) / ndu[pk + 1][rk + j];
                d += a[s2][j] * ndu[rk + j][pk];
            }
            if (r <= pk) {
                a[s2][k] = -a[s1][k - 1] / ndu[pk + 1][r];
                d += a[s2][k] * ndu[r][pk];
            }
            out[k * (p + 1) + r] = d;
            std::swap(s1, s2);
        }
    }
    double f = p;
    for (int k = 1; k <= nd; ++k) {
        for (int j = 0; j <= p; ++j) out[k * (p + 1) + j] *= f;
        f *= (p - k);
    }
    return span - p;
}

CurvePoint NurbsCurve::eval(double u) const {
    const int p = knots.degree;
    double b[2 * 16];
    const int first = eval_basis(knots, u, 1, b);
    Vec3 A{}, Au{};
    double W = 0.0, Wu = 0.0;
    for (int i = 0; i <= p; ++i) {
        const double wi = weights[first + i];
        A += (b[i] * wi) * control_points[first + i];
        Au += (b[p + 1 + i] * wi) * control_points[first + i];
        W += b[i] * wi;
        Wu += b[p + 1 + i] * wi;
    }
    CurvePoint cp;
    cp.point = A / W;
    cp.deriv = (Au - Wu * cp.point) / W;
    return cp;
}

void NurbsPatch::validate() const {
    if (knots_xi.num_basis() != nu || knots_eta.num_basis() != nv)
        throw std::invalid_argument("NurbsPatch: control grid inconsistent with knots");
    if (static_cast<int>(control_points.size()) != nu * nv ||
        static_cast<int>(weights.size()) != nu * nv)
        throw std::invalid_argument("NurbsPatch: control data size mismatch");
    for (double wv : weights)
        if (!(wv > 0.0)) throw std::invalid_argument("NurbsPatch: weights must be positive");
    if (!knots_xi.is_open() || !knots_eta.is_open())
        throw std::invalid_argument("NurbsPatch: knot vectors must be open");
}

Vec3 NurbsPatch::point(double xi, double eta) const {
    const int p = degree_xi(), q = degree_eta();
    double bu[16], bv[16];
    const int fu = eval_basis(knots_xi, xi, 0, bu);
    const int fv = eval_basis(knots_eta, eta, 0, bv);
    Vec3 A{};
    double W = 0.0;
    for (int j = 0; j <= q; ++j) {
        for (int i = 0; i <= p; ++i) {
            const int id = index(fu + i, fv + j);
            const double c = bu[i] * bv[j] * weights[id];
            A += c * control_points[id];
            W += c;
        }
    }
    return A / W;
}

SurfaceFrame NurbsPatch::frame(double xi, double eta) const {
    const int p = degree_xi(), q = degree_eta();
    double bu[2 * 16], bv[2 * 16];
    const int fu = eval_basis(knots_xi, xi, 1, bu);
    const int fv = eval_basis(knots_eta, eta, 1, bv);

    Vec3 A{}, Au{}, Av{};
    double W = 0.0, Wu = 0.0, Wv = 0.0;
    for (int j = 0; j <= q; ++j) {
        for (int i = 0; i <= p; ++i) {
            const int id = index(fu + i, fv + j);
            const double wij = weights[id];
            const double c = bu[i] * bv[j] * wij;
            const double cu = bu[p + 1 + i] * bv[j] * wij;
            const double cv = bu[i] * bv[q + 1 + j] * wij;
            A += c * control_points[id];
            Au += cu * control_points[id];
            Av += cv * control_points[id];
            W += c;
            Wu += cu;
            Wv += cv;
        }
    }
    SurfaceFrame f;
    f.point = A / W;
    f.d_xi = (Au - Wu * f.point) / W;
    f.d_eta = (Av - Wv * f.point) / W;
    f.h_xi = norm(f.d_xi);
    f.h_eta = norm(f.d_eta);
    const Vec3 cr = cross(f.d_xi, f.d_eta);
    f.jacobian = norm(cr);
    const double scale = std::max(f.h_xi * f.h_eta, 1e-300);
    if (f.jacobian <= 1e-10 * scale || f.h_xi <= 0.0 || f.h_eta <= 0.0) {
        f.degenerate = true;
        f.jacobian = 0.0;
        return f;
    }
    f.normal = cr / f.jacobian;
    f.e_xi = f.d_xi / f.h_xi;
    f.e_eta = f.d_eta / f.h_eta;
    f.v1 = f.e_xi;
    f.v3 = f.normal;
    f.v2 = cross(f.v3, f.v1);
    f.theta = std::atan2(norm(cross(f.e_xi, f.e_eta)), dot(f.e_xi, f.e_eta));
    return f;
}

namespace {

// Knot refinement for a bundle of homogeneous curves sharing one knot vector
// (the rows or columns of a patch). Pw holds `count` curves of n_ctrl points,
// each curve contiguous; Qw gets the same layout with n_ctrl_out points.
void refine_direction(const KnotVector& kv, const std::vector<Hpt>& Pw, int n_ctrl,
                      int count, const std::vector<double>& X, KnotVector& kv_out,
                      std::vector<Hpt>& Qw, int& n_ctrl_out) {
    const int p = kv.degree;
    const int n = n_ctrl - 1;
    const int m = n + p + 1;
    const int r = static_cast<int>(X.size()) - 1;
    if (r < 0) {
        kv_out = kv;
        Qw = Pw;
        n_ctrl_out = n_ctrl;
        return;
    }
    for (double x : X) {
        if (!(x > kv.front() && x < kv.back()))
            throw std::invalid_argument("h_refine: knot outside open interior");
    }
    // final multiplicities must stay <= p
    {
        std::vector<double> all(kv.values.begin(), kv.values.end());
        all.insert(all.end(), X.begin(), X.end());
        std::sort(all.begin(), all.end());
        int run = 1;
        for (std::size_t i = 1; i < all.size(); ++i) {
            run = (all[i] == all[i - 1]) ? run + 1 : 1;
            if (all[i] > kv.front() && all[i] < kv.back() && run > p)
                throw std::invalid_argument("h_refine: multiplicity would exceed degree");
        }
    }

    const double* U = kv.values.data();
    const int a = kv.find_span(X[0]);
    const int b = kv.find_span(X[r]) + 1;

    std::vector<double> Ubar(m + r + 2);
    n_ctrl_out = n_ctrl + r + 1;
    Qw.assign(static_cast<std::size_t>(n_ctrl_out) * count, Hpt{});

    std::vector<Hpt> pw(n_ctrl), qw(n_ctrl_out);
    for (int c = 0; c < count; ++c) {
        for (int i = 0; i < n_ctrl; ++i) pw[i] = Pw[static_cast<std::size_t>(c) * n_ctrl + i];

        for (int j = 0; j <= a - p; ++j) qw[j] = pw[j];
        for (int j = b - 1; j <= n; ++j) qw[j + r + 1] = pw[j];
        for (int j = 0; j <= a; ++j) Ubar[j] = U[j];
        for (int j = b + p; j <= m; ++j) Ubar[j + r + 1] = U[j];

        int i = b + p - 1;
        int k = b + p + r;
        for (int j = r; j >= 0; --j) {
            while (X[j] <= U[i] && i > a) {
                qw[k - p - 1] = pw[i - p - 1];
                Ubar[k] = U[i];
                --k;
                --i;
            }
            qw[k - p - 1] = qw[k - p];
            for (int l = 1; l <= p; ++l) {
                const int ind = k - p + l;
                double alfa = Ubar[k + l] - X[j];
                if (std::abs(alfa) == 0.0) {
                    qw[ind - 1] = qw[ind];
                } else {
                    alfa /= (Ubar[k + l] - U[i - p + l]);
                    qw[ind - 1] = alfa * qw[ind - 1] + (1.0 - alfa) * qw[ind];
                }
            }
            Ubar[k] = X[j];
            --k;
        }

        for (int ii = 0; ii < n_ctrl_out; ++ii)
            Qw[static_cast<std::size_t>(c) * n_ctrl_out + ii] = qw[ii];
    }
    kv_out = KnotVector(std::vector<double>(Ubar.begin(), Ubar.end()), p);
}

// Degree elevation of one homogeneous curve by t (Piegl-Tiller style:
// Bezier decomposition, segment elevation, knot removal on the fly).
void elevate_curve(const KnotVector& kv, const std::vector<Hpt>& Pw, int t,
                   KnotVector& kv_out, std::vector<Hpt>& Qw) {
    const int p = kv.degree;
    if (t == 0) {
        kv_out = kv;
        Qw = Pw;
        return;
    }
    const int n = static_cast<int>(Pw.size()) - 1;
    const int m = n + p + 1;
    const int ph = p + t, ph2 = ph / 2;
    const double* U = kv.values.data();

    // coefficients for elevating a Bezier segment
    std::vector<std::vector<double>> bezalfs(ph + 1, std::vector<double>(p + 1, 0.0));
    bezalfs[0][0] = bezalfs[ph][p] = 1.0;
    for (int i = 1; i <= ph2; ++i) {
        const double inv = 1.0 / binom(ph, i);
        const int mpi = std::min(p, i);
        for (int j = std::max(0, i - t); j <= mpi; ++j)
            bezalfs[i][j] = inv * binom(p, j) * binom(t, i - j);
    }
    for (int i = ph2 + 1; i <= ph - 1; ++i) {
        const int mpi = std::min(p, i);
        for (int j = std::max(0, i - t); j <= mpi; ++j) bezalfs[i][j] = bezalfs[ph - i][p - j];
    }

    // number of distinct interior knots, for output sizing
    int s = 0;
    {
        double prev = U[p];
        for (int i = p + 1; i <= m - p - 1; ++i) {
            if (U[i] != prev) {
                ++s;
                prev = U[i];
            }
        }
    }
    const int mh_cap = m + (s + 2) * t + 1;
    std::vector<double> Uh(mh_cap + 1, 0.0);
    std::vector<Hpt> qw(static_cast<std::size_t>(n + 1 + (s + 1) * t + 8), Hpt{});

    std::vector<Hpt> bpts(p + 1), ebpts(ph + 1), Nextbpts(std::max(p - 1, 1));
    std::vector<double> alfs(std::max(p - 1, 1));

    int mh = ph, kind = ph + 1, r = -1, a = p, b = p + 1, cind = 1;
    double ua = U[0];
    qw[0] = Pw[0];
    for (int i = 0; i <= ph; ++i) Uh[i] = ua;
    for (int i = 0; i <= p; ++i) bpts[i] = Pw[i];

    while (b < m) {
        const int i0 = b;
        while (b < m && U[b] == U[b + 1]) ++b;
        const int mul = b - i0 + 1;
        mh += mul + t;
        const double ub = U[b];
        const int oldr = r;
        r = p - mul;
        const int lbz = (oldr > 0) ? (oldr + 2) / 2 : 1;
        const int rbz = (r > 0) ? ph - (r + 1) / 2 : ph;
        if (r > 0) {
            const double numer = ub - ua;
            for (int k = p; k > mul; --k) alfs[k - mul - 1] = numer / (U[a + k] - ua);
            for (int j = 1; j <= r; ++j) {
                const int save = r - j;
                const int sj = mul + j;
                for (int k = p; k >= sj; --k)
                    bpts[k] = alfs[k - sj] * bpts[k] + (1.0 - alfs[k - sj]) * bpts[k - 1];
                Nextbpts[save] = bpts[p];
            }
        }
        for (int i = lbz; i <= ph; ++i) {
            ebpts[i] = Hpt{};
            const int mpi = std::min(p, i);
            for (int j = std::max(0, i - t); j <= mpi; ++j)
                ebpts[i] = ebpts[i] + bezalfs[i][j] * bpts[j];
        }
        if (oldr > 1) {
            int first = kind - 2, last = kind;
            const double den = ub - ua;
            const double bet = (ub - Uh[kind - 1]) / den;
            for (int tr = 1; tr < oldr; ++tr) {
                int i = first, j = last;
                int kj = j - kind + 1;
                while (j - i > tr) {
                    if (i < cind) {
                        const double alf = (ub - Uh[i]) / (ua - Uh[i]);
                        qw[i] = alf * qw[i] + (1.0 - alf) * qw[i - 1];
                    }
                    if (j >= lbz) {
                        if (j - tr <= kind - ph + oldr) {
                            const double gam = (ub - Uh[j - tr]) / den;
                            ebpts[kj] = gam * ebpts[kj] + (1.0 - gam) * ebpts[kj + 1];
                        } else {
                            ebpts[kj] = bet * ebpts[kj] + (1.0 - bet) * ebpts[kj + 1];
                        }
                    }
                    ++i;
                    --j;
                    --kj;
                }
                --first;
                ++last;
            }
        }
        if (a != p) {
            for (int i = 0; i < ph - oldr; ++i) {
                Uh[kind] = ua;
                ++kind;
            }
        }
        for (int j = lbz; j <= rbz; ++j) {
            qw[cind] = ebpts[j];
            ++cind;
        }
        if (b < m) {
            for (int j = 0; j < r; ++j) bpts[j] = Nextbpts[j];
            for (int j = r; j <= p; ++j) bpts[j] = Pw[b - p + j];
            a = b;
            ++b;
            ua = ub;
        } else {
            for (int i = 0; i <= ph; ++i) Uh[kind + i] = ub;
        }
    }
    const int nh = mh - ph - 1;
    Qw.assign(qw.begin(), qw.begin() + nh + 1);
    kv_out = KnotVector(std::vector<double>(Uh.begin(), Uh.begin() + mh + 1), ph);
}

std::vector<Hpt> to_homogeneous(const NurbsPatch& s) {
    std::vector<Hpt> Pw(s.control_points.size());
    for (std::size_t i = 0; i < Pw.size(); ++i) {
        const double w = s.weights[i];
        const Vec3& P = s.control_points[i];
        Pw[i] = {w * P.x, w * P.y, w * P.z, w};
    }
    return Pw;
}

NurbsPatch from_homogeneous(const KnotVector& kx, const KnotVector& ke, int nu, int nv,
                            const std::vector<Hpt>& Pw) {
    NurbsPatch out;
    out.knots_xi = kx;
    out.knots_eta = ke;
    out.nu = nu;
    out.nv = nv;
    out.control_points.resize(Pw.size());
    out.weights.resize(Pw.size());
    for (std::size_t i = 0; i < Pw.size(); ++i) {
        const double w = Pw[i][3];
        out.weights[i] = w;
        out.control_points[i] = Vec3{Pw[i][0] / w, Pw[i][1] / w, Pw[i][2] / w};
    }
    out.validate();
    return out;
}

// transpose the control net (swap xi/eta roles)
std::vector<Hpt> transpose_net(const std::vector<Hpt>& Pw, int nu, int nv) {
    std::vector<Hpt> T(Pw.size());
    for (int j = 0; j < nv; ++j)
        for (int i = 0; i < nu; ++i) T[j + nv * i] = Pw[i + nu * j];
    return T;
}

} // namespace

NurbsPatch NurbsPatch::h_refined(const std::vector<double>& new_xi,
                                 const std::vector<double>& new_eta) const {
    validate();
    std::vector<double> X = new_xi, Y = new_eta;
    std::sort(X.begin(), X.end());
    std::sort(Y.begin(), Y.end());

    std::vector<Hpt> Pw = to_homogeneous(*this);
    KnotVector kx = knots_xi, ke = knots_eta;
    int cu = nu, cv = nv;

    if (!X.empty()) {
        // xi direction: rows are already contiguous runs of cu points
        KnotVector kout;
        std::vector<Hpt> Q;
        int cu_out = 0;
        refine_direction(kx, Pw, cu, cv, X, kout, Q, cu_out);
        kx = kout;
        Pw = std::move(Q);
        cu = cu_out;
    }
    if (!Y.empty()) {
        // eta direction: gather each column contiguously
        std::vector<Hpt> cols = transpose_net(Pw, cu, cv);
        KnotVector kout;
        std::vector<Hpt> Q;
        int cv_out = 0;
        refine_direction(ke, cols, cv, cu, Y, kout, Q, cv_out);
        ke = kout;
        Pw.assign(static_cast<std::size_t>(cu) * cv_out, Hpt{});
        for (int i = 0; i < cu; ++i)
            for (int j = 0; j < cv_out; ++j)
                Pw[i + cu * j] = Q[static_cast<std::size_t>(i) * cv_out + j];
        cv = cv_out;
    }
    return from_homogeneous(kx, ke, cu, cv, Pw);
}

NurbsPatch NurbsPatch::elevated(int target_p, int target_q) const {
    validate();
    const int tp = target_p - degree_xi();
    const int tq = target_q - degree_eta();
    if (tp < 0 || tq < 0)
        throw std::invalid_argument("elevate_degree: target below current degree");

    std::vector<Hpt> Pw = to_homogeneous(*this);
    KnotVector kx = knots_xi, ke = knots_eta;
    int cu = nu, cv = nv;

    if (tp > 0) {
        KnotVector kout;
        int cu_out = -1;
        std::vector<Hpt> all;
        for (int j = 0; j < cv; ++j) {
            std::vector<Hpt> row(cu);
            for (int i = 0; i < cu; ++i) row[i] = Pw[i + cu * j];
            std::vector<Hpt> q;
            elevate_curve(kx, row, tp, kout, q);
            if (cu_out < 0) {
                cu_out = static_cast<int>(q.size());
                all.assign(static_cast<std::size_t>(cu_out) * cv, Hpt{});
            }
            for (int i = 0; i < cu_out; ++i) all[i + cu_out * j] = q[i];
        }
        kx = kout;
        Pw = std::move(all);
        cu = cu_out;
    }
    if (tq > 0) {
        KnotVector kout;
        int cv_out = -1;
        std::vector<Hpt> all;
        for (int i = 0; i < cu; ++i) {
            std::vector<Hpt> col(cv);
            for (int j = 0; j < cv; ++j) col[j] = Pw[i + cu * j];
            std::vector<Hpt> q;
            elevate_curve(ke, col, tq, kout, q);
            if (cv_out < 0) {
                cv_out = static_cast<int>(q.size());
                all.assign(static_cast<std::size_t>(cu) * cv_out, Hpt{});
            }
            for (int j = 0; j < cv_out; ++j) all[i + cu * j] = q[j];
        }
        ke = kout;
        Pw = std::move(all);
        cv = cv_out;
    }
    return from_homogeneous(kx, ke, cu, cv, Pw);
}

NurbsPatch NurbsPatch::uniformly_refined(int mult_xi, int mult_eta) const {
    std::vector<double> X, Y;
    for (auto& s : knots_xi.breaks())
        for (int r = 0; r < mult_xi; ++r) X.push_back(0.5 * (s[0] + s[1]));
    for (auto& s : knots_eta.breaks())
        for (int r = 0; r < mult_eta; ++r) Y.push_back(0.5 * (s[0] + s[1]));
    return h_refined(X, Y);
}

NurbsPatch NurbsPatch::eta_reversed() const {
    NurbsPatch out = *this;
    const double a = knots_eta.front(), b = knots_eta.back();
    std::vector<double> kv(knots_eta.values.size());
    for (std::size_t i = 0; i < kv.size(); ++i)
        kv[i] = a + b - knots_eta.values[knots_eta.values.size() - 1 - i];
    out.knots_eta = KnotVector(kv, knots_eta.degree);
    for (int j = 0; j < nv; ++j) {
        for (int i = 0; i < nu; ++i) {
            out.control_points[index(i, j)] = control_points[index(i, nv - 1 - j)];
            out.weights[index(i, j)] = weights[index(i, nv - 1 - j)];
        }
    }
    return out;
}

} // namespace igabem
