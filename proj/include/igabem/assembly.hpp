#ifndef IGABEM_ASSEMBLY_HPP
#define IGABEM_ASSEMBLY_HPP

#include "igabem/quadrature.hpp"

#include <Eigen/Dense>
#include <optional>

namespace igabem {

enum class BieKind { CBIE, HBIE, BM, RCBIE1, RCBIE2, RCBIE3 };
enum class Discretization { Collocation, Galerkin };

const char* to_string(BieKind k);
const char* to_string(Discretization d);

struct BieFormulation {
    BieKind kind = BieKind::CBIE;
    Discretization disc = Discretization::Collocation;
    DomainSide domain = DomainSide::Exterior;
    std::optional<Complex> coupling_alpha; // Burton-Miller; default i/k
    bool plain_cbie_jump = false;          // unregularized CBIE with explicit jump terms

    bool needs_source_frame() const { return kind != BieKind::CBIE; }
    Complex alpha(double k) const { return coupling_alpha ? *coupling_alpha : iu / k; }
};

// d_s = -[cos(beta) cos(alpha), cos(beta) sin(alpha), sin(beta)], angles in degrees.
Vec3 incident_direction(double alpha_s_deg, double beta_s_deg);

Complex plane_wave(double k, double P_inc, const Vec3& d_s, const Vec3& x);
// g = -d p_inc/d n = -ik (d_s.n) p_inc
Complex neumann_rigid(double k, double P_inc, const Vec3& d_s, const Vec3& x, const Vec3& n);

struct BoundaryCondition {
    enum class Kind { RigidPlaneWave, NeumannFromField, ManufacturedMfs };
    Kind kind = Kind::RigidPlaneWave;

    // rigid scattering: one right-hand side per direction, unknown is p_tot
    double P_inc = 1.0;
    std::vector<Vec3> directions = {Vec3{-1, 0, 0}};

    // known-Neumann problems: unknown is p, data g(y, n_y); p_exact optional
    std::function<Complex(const Vec3&, const Vec3&)> g;
    std::function<Complex(const Vec3&)> p_exact;

    bool rigid() const { return kind == Kind::RigidPlaneWave; }
    int n_rhs() const { return rigid() ? static_cast<int>(directions.size()) : 1; }

    static BoundaryCondition rigid_plane_wave(double P_inc, const Vec3& d_s);
    static BoundaryCondition rigid_plane_waves(double P_inc, std::vector<Vec3> d_s);
    static BoundaryCondition neumann(std::function<Complex(const Vec3&, const Vec3&)> g,
                                     std::function<Complex(const Vec3&)> p_exact = nullptr);
};

struct CollocationPoint {
    int dof = 0;
    DofAnchor eval;
    bool perturbed = false;
    Vec3 x;
    SurfaceFrame frame; // may be degenerate for CBIE
};

// One point per global dof (merged Greville abscissae). Points lying on lines
// where the basis is below C^1 (patch boundaries, C^0 knot lines) or where the
// geometry map is degenerate are shifted into the element interior by
// half a knot span over the degree, for formulations that need a frame.
std::vector<CollocationPoint> collocation_points(const SurfaceMesh& mesh,
                                                 const BieFormulation& form);

struct AssemblyStats {
    long long n_qp_regular = 0;  // quadrature points outside source elements
    long long n_qp_singular = 0; // polar-scheme points
    double seconds = 0.0;
};

struct BemSystem {
    Eigen::MatrixXcd A;
    Eigen::MatrixXcd rhs;      // one column per right-hand side
    Eigen::MatrixXcd solution; // filled by solve()
    AssemblyStats stats;
};

BemSystem assemble(const SurfaceMesh& mesh, double k, const BieFormulation& form,
                   const BoundaryCondition& bc, const QuadConfig& cfg = {}, int threads = 0);

struct SolveInfo {
    double residual = 0.0; // max over columns of |A u - b| / |b|
    double rcond = 0.0;
};

// Dense LU with partial pivoting; all right-hand sides share one factorization.
SolveInfo solve(BemSystem& sys);

// L2 projection of a trace onto the discrete space.
Eigen::VectorXcd best_approximation(const SurfaceMesh& mesh,
                                    const std::function<Complex(const Vec3&)>& trace,
                                    int n_extra = 0);

// p_h = sum_j u_j R_j at a parametric point of an element.
Complex eval_trace(const SurfaceMesh& mesh, const Eigen::VectorXcd& u, const Element& el,
                   double xi, double eta);

} // namespace igabem

#endif
