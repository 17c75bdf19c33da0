#ifndef IGABEM_NURBS_HPP
#define IGABEM_NURBS_HPP

#include "igabem/core.hpp"

namespace igabem {

// Open (clamped) knot vector of degree p: first/last knot repeated p+1 times,
// length = number of basis functions + p + 1.
struct KnotVector {
    std::vector<double> values;
    int degree = 0;

    KnotVector() = default;
    KnotVector(std::vector<double> v, int p);

    int num_basis() const { return static_cast<int>(values.size()) - degree - 1; }
    double front() const { return values.front(); }
    double back() const { return values.back(); }
    bool is_open() const;

    // Index i of the span [u_i, u_{i+1}) containing u; the last nonempty span
    // is closed on the right.
    int find_span(double u) const;

    int multiplicity(double u, double tol = 1e-12) const;

    // Parametric intervals of the nonzero-measure spans.
    std::vector<std::array<double, 2>> breaks() const;

    std::vector<double> greville() const;
};

// Nonzero B-spline basis values and derivatives at u.
// out is (num_derivs+1) x (degree+1), row d = d-th derivative of the degree+1
// functions active on the span; returns the index of the first active function.
int eval_basis(const KnotVector& kv, double u, int num_derivs, double* out);

struct CurvePoint {
    Vec3 point;
    Vec3 deriv;
};

// Rational curve evaluation (point and first derivative).
struct NurbsCurve {
    KnotVector knots;
    std::vector<Vec3> control_points;
    std::vector<double> weights;

    CurvePoint eval(double u) const;
};

struct SurfaceFrame {
    Vec3 point;
    Vec3 d_xi, d_eta;       // dx/dxi, dx/deta
    Vec3 normal;            // unit, = d_xi x d_eta / jacobian
    double jacobian = 0.0;  // |d_xi x d_eta|
    double h_xi = 0.0, h_eta = 0.0;
    Vec3 e_xi, e_eta;       // unit tangents
    Vec3 v1, v2, v3;        // orthonormal frame, v3 = normal, v1 = e_xi
    double theta = 0.0;     // angle between e_xi and e_eta
    bool degenerate = false;
};

// Tensor-product rational patch. Control points stored row-major with the
// xi index fastest: P[i + nu*j], i = 0..nu-1, j = 0..nv-1.
struct NurbsPatch {
    KnotVector knots_xi, knots_eta;
    int nu = 0, nv = 0;
    std::vector<Vec3> control_points;
    std::vector<double> weights;

    int degree_xi() const { return knots_xi.degree; }
    int degree_eta() const { return knots_eta.degree; }
    int index(int i, int j) const { return i + nu * j; }

    void validate() const;

    Vec3 point(double xi, double eta) const;
    SurfaceFrame frame(double xi, double eta) const;

    // Knot insertion; new knots must lie strictly inside the knot range and
    // resulting multiplicities must not exceed the degree.
    NurbsPatch h_refined(const std::vector<double>& new_xi,
                         const std::vector<double>& new_eta) const;

    // Degree elevation to (target_p, target_q) >= current degrees; geometry
    // and continuity are preserved.
    NurbsPatch elevated(int target_p, int target_q) const;

    // Halve every nonzero span, inserting each midpoint with the given
    // multiplicity (1 = maximal continuity preserved).
    NurbsPatch uniformly_refined(int mult_xi = 1, int mult_eta = 1) const;

    // Reverse the eta direction (flips the surface orientation).
    NurbsPatch eta_reversed() const;
};

} // namespace igabem

#endif
