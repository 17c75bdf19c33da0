#include "igabem/runner.hpp"

#include "igabem/analytic.hpp"
#include "igabem/postprocess.hpp"
#include "igabem/simd/kernel_batch.hpp"

#include <json.hpp>

#include <chrono>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <random>

namespace igabem {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr const char* kVersion = "1.0.0";

std::ofstream open_csv(const fs::path& dir, const std::string& name) {
    std::ofstream os(dir / name);
    if (!os) throw std::runtime_error("cannot open output file: " + (dir / name).string());
    os.precision(17);
    return os;
}

Vec3 observation_direction(double phi_deg, double theta_deg) {
    const double p = deg2rad(phi_deg), t = deg2rad(theta_deg);
    return {std::cos(t) * std::cos(p), std::cos(t) * std::sin(p), std::sin(t)};
}

double geometry_scale(const GeometrySpec& g) {
    switch (g.kind) {
        case GeometryKind::SpherePar1:
        case GeometryKind::SpherePar2: return g.radius;
        case GeometryKind::Torus: return g.r_major + g.r_minor;
        case GeometryKind::Cube: return g.side;
    }
    return 1.0;
}

// least-squares slope of log(err) against log(h)
double fitted_order(const std::vector<double>& h, const std::vector<double>& err) {
    const int n = static_cast<int>(h.size());
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (int i = 0; i < n; ++i) {
        const double x = std::log(h[i]), y = std::log(std::max(err[i], 1e-300));
        sx += x;
        sy += y;
        sxx += x * x;
        sxy += x * y;
    }
    return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

} // namespace

Problem make_problem(const RunConfig& cfg, double k) {
    Problem pr;
    const GeometrySpec& g = cfg.geometry;
    if (cfg.bc_kind == "rigid") {
        const Vec3 d = incident_direction(cfg.alpha_s_deg, cfg.beta_s_deg);
        pr.bc = BoundaryCondition::rigid_plane_wave(cfg.P_inc, d);
        pr.trace_offset = [k, P = cfg.P_inc, d](const Vec3& x) { return plane_wave(k, P, d, x); };
        // dp_scat/dn = -dp_inc/dn = g
        pr.radiating_dpdn = [k, P = cfg.P_inc, d](const Vec3& x, const Vec3& n) {
            return neumann_rigid(k, P, d, x, n);
        };
        if ((g.kind == GeometryKind::SpherePar1 || g.kind == GeometryKind::SpherePar2) && k > 0) {
            RigidSphereScattering an{k, g.radius, cfg.P_inc, d};
            pr.exact_trace = [an](const Vec3& x) { return an.total(x); };
        }
    } else if (cfg.bc_kind == "pulsating_sphere") {
        if (g.kind != GeometryKind::SpherePar1 && g.kind != GeometryKind::SpherePar2)
            throw ConfigError("pulsating_sphere bc requires a sphere geometry");
        const double R0 = g.radius;
        pr.bc = BoundaryCondition::neumann(
            [k, R0](const Vec3&, const Vec3&) {
                // d/dR [e^{ikR}/(4 pi R)] at R0
                return std::polar(1.0 / (4.0 * pi * R0 * R0), k * R0) * Complex(-1.0, k * R0);
            },
            [k](const Vec3& x) { return pulsating_sphere_pressure(k, x); });
        pr.exact_trace = pr.bc.p_exact;
        pr.radiating_dpdn = pr.bc.g;
    } else if (cfg.bc_kind == "mfs") {
        MfsSolution sol;
        if (g.kind == GeometryKind::Torus) {
            std::vector<Vec3> ring;
            const int n = 16;
            for (int i = 0; i < n; ++i) {
                const double t = 2.0 * pi * i / n;
                ring.push_back({g.r_major * std::cos(t), g.r_major * std::sin(t), 0.0});
            }
            sol = MfsSolution::with_default_coefficients(k, std::move(ring));
        } else if (cfg.mfs_layout == "line16") {
            const double s = 0.5 * geometry_scale(g);
            sol = MfsSolution::line(k, 16, s * 0.5, -s * 0.5);
        } else {
            const double s = (g.kind == GeometryKind::Cube) ? g.side : g.radius;
            sol = MfsSolution::cube_grid(k, s);
        }
        pr.bc = BoundaryCondition::neumann(
            [sol](const Vec3& x, const Vec3& n) { return sol.normal_derivative(x, n); },
            [sol](const Vec3& x) { return sol.pressure(x); });
        pr.exact_trace = pr.bc.p_exact;
        pr.radiating_dpdn = pr.bc.g;
    } else if (cfg.bc_kind == "torus_sine") {
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
        pr.bc = BoundaryCondition::neumann(g_fn, p_fn);
        pr.exact_trace = p_fn;
        pr.radiating_dpdn = pr.bc.g;
    } else {
        throw ConfigError("unknown bc kind: " + cfg.bc_kind);
    }
    return pr;
}

namespace {

SurfaceTraces radiating_traces(const SurfaceMesh& mesh, const Eigen::VectorXcd& u,
                               const Problem& pr) {
    SurfaceTraces t = SurfaceTraces::from_coefficients(mesh, u, pr.radiating_dpdn);
    if (pr.trace_offset) {
        auto base = t.p;
        auto off = pr.trace_offset;
        t.p = [base, off](const Element& el, double xi, double eta, const SurfaceFrame& fr) {
            return base(el, xi, eta, fr) - off(fr.point);
        };
    }
    return t;
}

struct CaseResult {
    int n_dofs = 0;
    double h_max = 0.0;
    double error_rel = -1.0;
    double residual = 0.0;
    double rcond = 0.0;
    AssemblyStats stats;
    double solve_seconds = 0.0;
};

CaseResult run_case(const SurfaceMesh& mesh, const RunConfig& cfg, double k, const Problem& pr,
                    BemSystem& sys) {
    CaseResult res;
    res.n_dofs = mesh.n_dofs;
    res.h_max = mesh.max_h();
    sys = assemble(mesh, k, cfg.formulation, pr.bc, cfg.quadrature, cfg.threads);
    const auto t0 = std::chrono::steady_clock::now();
    const SolveInfo si = solve(sys);
    res.solve_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    res.residual = si.residual;
    res.rcond = si.rcond;
    res.stats = sys.stats;
    if (pr.exact_trace) {
        const L2Error e = l2_surface_error(mesh, sys.solution.col(0), pr.exact_trace);
        res.error_rel = e.relative;
    }
    return res;
}

json manifest_base(const RunConfig& cfg) {
    json m;
    m["config"] = json::parse(config_to_json(cfg));
    m["version"] = kVersion;
    m["kernel_batch"] = simd::active_kernel_batch_name();
    return m;
}

void write_manifest(const fs::path& dir, const json& m) {
    std::ofstream os(dir / "manifest.json");
    os << m.dump(2) << "\n";
}

int experiment_solve(const RunConfig& cfg, const fs::path& out) {
    const SurfaceMesh mesh =
        build_mesh(cfg.geometry, cfg.refinements, cfg.effective_degree(), cfg.continuity);
    const double k = cfg.k_list.front();
    const Problem pr = make_problem(cfg, k);
    BemSystem sys;
    const CaseResult res = run_case(mesh, cfg, k, pr, sys);

    json m = manifest_base(cfg);
    m["n_dofs"] = res.n_dofs;
    m["n_elements"] = mesh.n_elements();
    m["h_max"] = res.h_max;
    m["k"] = k;
    m["residual"] = res.residual;
    m["rcond"] = res.rcond;
    m["n_qp_regular"] = res.stats.n_qp_regular;
    m["n_qp_singular"] = res.stats.n_qp_singular;
    m["assemble_seconds"] = res.stats.seconds;
    m["solve_seconds"] = res.solve_seconds;
    if (res.error_rel >= 0) m["error_rel"] = res.error_rel;

    if (pr.exact_trace) {
        auto os = open_csv(out, "errors.csv");
        os << "mesh_id,n_dofs,h_max,error_rel\n";
        os << cfg.refinements << "," << res.n_dofs << "," << res.h_max << "," << res.error_rel
           << "\n";
    }
    if (cfg.formulation.domain == DomainSide::Exterior && cfg.phi_count > 0) {
        const SurfaceTraces tr = radiating_traces(mesh, sys.solution.col(0), pr);
        std::vector<Vec3> dirs;
        std::vector<SweepEntry> sweep;
        for (int i = 0; i < cfg.phi_count; ++i) {
            const double phi = cfg.phi_start_deg +
                               (cfg.phi_stop_deg - cfg.phi_start_deg) *
                                   (cfg.phi_count == 1 ? 0.0 : double(i) / (cfg.phi_count - 1));
            dirs.push_back(observation_direction(phi, cfg.theta_deg));
        }
        const auto p0 = far_field(mesh, tr, k, dirs, cfg.quadrature.n_eqp1);
        for (int i = 0; i < cfg.phi_count; ++i) {
            const double phi = cfg.phi_start_deg +
                               (cfg.phi_stop_deg - cfg.phi_start_deg) *
                                   (cfg.phi_count == 1 ? 0.0 : double(i) / (cfg.phi_count - 1));
            sweep.push_back({phi, cfg.theta_deg, p0[i], target_strength(p0[i], cfg.P_inc)});
        }
        auto os = open_csv(out, "farfield.csv");
        write_sweep_csv(sweep, os);
    }
    write_manifest(out, m);
    return 0;
}

int experiment_freq_sweep(const RunConfig& cfg, const fs::path& out) {
    const SurfaceMesh mesh =
        build_mesh(cfg.geometry, cfg.refinements, cfg.effective_degree(), cfg.continuity);
    auto os = open_csv(out, "freq_sweep.csv");
    os << "k,n_dofs,h_max,error_rel,ts_backscatter_db\n";
    json m = manifest_base(cfg);
    m["n_dofs"] = mesh.n_dofs;
    m["n_elements"] = mesh.n_elements();
    json cases = json::array();
    for (double k : cfg.k_list) {
        const Problem pr = make_problem(cfg, k);
        BemSystem sys;
        const CaseResult res = run_case(mesh, cfg, k, pr, sys);
        double ts = std::numeric_limits<double>::quiet_NaN();
        if (cfg.formulation.domain == DomainSide::Exterior) {
            const SurfaceTraces tr = radiating_traces(mesh, sys.solution.col(0), pr);
            const Vec3 back = -incident_direction(cfg.alpha_s_deg, cfg.beta_s_deg);
            const auto p0 = far_field(mesh, tr, k, {back}, cfg.quadrature.n_eqp1);
            ts = target_strength(p0[0], cfg.P_inc);
        }
        os << k << "," << res.n_dofs << "," << res.h_max << "," << res.error_rel << "," << ts
           << "\n";
        cases.push_back({{"k", k},
                         {"residual", res.residual},
                         {"assemble_seconds", res.stats.seconds},
                         {"solve_seconds", res.solve_seconds}});
    }
    m["cases"] = cases;
    write_manifest(out, m);
    return 0;
}

int experiment_bistatic(const RunConfig& cfg, const fs::path& out) {
    const SurfaceMesh mesh =
        build_mesh(cfg.geometry, cfg.refinements, cfg.effective_degree(), cfg.continuity);
    const double k = cfg.k_list.front();
    const Problem pr = make_problem(cfg, k);
    BemSystem sys;
    const CaseResult res = run_case(mesh, cfg, k, pr, sys);
    const SurfaceTraces tr = radiating_traces(mesh, sys.solution.col(0), pr);

    std::vector<Vec3> dirs;
    std::vector<double> phis;
    for (int i = 0; i < cfg.phi_count; ++i) {
        const double phi = cfg.phi_start_deg +
                           (cfg.phi_stop_deg - cfg.phi_start_deg) *
                               (cfg.phi_count == 1 ? 0.0 : double(i) / (cfg.phi_count - 1));
        phis.push_back(phi);
        dirs.push_back(observation_direction(phi, cfg.theta_deg));
    }
    const auto p0 = far_field(mesh, tr, k, dirs, cfg.quadrature.n_eqp1);
    std::vector<SweepEntry> sweep;
    for (std::size_t i = 0; i < dirs.size(); ++i)
        sweep.push_back({phis[i], cfg.theta_deg, p0[i], target_strength(p0[i], cfg.P_inc)});
    auto os = open_csv(out, "bistatic.csv");
    write_sweep_csv(sweep, os);

    json m = manifest_base(cfg);
    m["n_dofs"] = res.n_dofs;
    m["n_elements"] = mesh.n_elements();
    m["k"] = k;
    m["assemble_seconds"] = res.stats.seconds;
    m["solve_seconds"] = res.solve_seconds;
    write_manifest(out, m);
    return 0;
}

int experiment_monostatic(const RunConfig& cfg, const fs::path& out) {
    if (cfg.bc_kind != "rigid") throw ConfigError("monostatic requires the rigid bc");
    const SurfaceMesh mesh =
        build_mesh(cfg.geometry, cfg.refinements, cfg.effective_degree(), cfg.continuity);
    const double k = cfg.k_list.front();

    std::vector<double> phis;
    std::vector<Vec3> incident;
    for (int i = 0; i < cfg.phi_count; ++i) {
        const double phi = cfg.phi_start_deg +
                           (cfg.phi_stop_deg - cfg.phi_start_deg) *
                               (cfg.phi_count == 1 ? 0.0 : double(i) / (cfg.phi_count - 1));
        phis.push_back(phi);
        incident.push_back(incident_direction(phi, cfg.beta_s_deg));
    }
    const BoundaryCondition bc = BoundaryCondition::rigid_plane_waves(cfg.P_inc, incident);
    BemSystem sys = assemble(mesh, k, cfg.formulation, bc, cfg.quadrature, cfg.threads);
    const auto t0 = std::chrono::steady_clock::now();
    const SolveInfo si = solve(sys);
    const double solve_s =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();

    std::vector<SweepEntry> sweep;
    for (std::size_t c = 0; c < incident.size(); ++c) {
        const Vec3 d = incident[c];
        SurfaceTraces tr = SurfaceTraces::from_coefficients(
            mesh, sys.solution.col(c),
            [k, P = cfg.P_inc, d](const Vec3& x, const Vec3& n) {
                return neumann_rigid(k, P, d, x, n);
            });
        auto base = tr.p;
        tr.p = [base, k, P = cfg.P_inc, d](const Element& el, double xi, double eta,
                                           const SurfaceFrame& fr) {
            return base(el, xi, eta, fr) - plane_wave(k, P, d, fr.point);
        };
        const auto p0 = far_field(mesh, tr, k, {-d}, cfg.quadrature.n_eqp1);
        sweep.push_back({phis[c], cfg.beta_s_deg, p0[0], target_strength(p0[0], cfg.P_inc)});
    }
    auto os = open_csv(out, "monostatic.csv");
    write_sweep_csv(sweep, os);

    json m = manifest_base(cfg);
    m["n_dofs"] = mesh.n_dofs;
    m["n_elements"] = mesh.n_elements();
    m["k"] = k;
    m["n_rhs"] = incident.size();
    m["residual"] = si.residual;
    m["assemble_seconds"] = sys.stats.seconds;
    m["solve_seconds"] = solve_s;
    write_manifest(out, m);
    return 0;
}

int experiment_convergence(const RunConfig& cfg, const fs::path& out) {
    std::vector<int> degrees = cfg.conv_degrees;
    if (degrees.empty()) degrees = {cfg.effective_degree()};
    const double k = cfg.k_list.front();

    auto os = open_csv(out, "errors.csv");
    os << "mesh_id,n_dofs,h_max,error_rel\n";
    auto osba = open_csv(out, "errors_ba.csv");
    osba << "mesh_id,n_dofs,h_max,error_rel\n";
    auto osr = open_csv(out, "rates.csv");
    osr << "degree,order,order_ba\n";

    json m = manifest_base(cfg);
    json cases = json::array();
    for (int p : degrees) {
        std::vector<double> hs, errs, errs_ba;
        for (int r : cfg.conv_refinements) {
            RunConfig c = cfg;
            c.degree = p;
            c.refinements = r;
            const SurfaceMesh mesh = build_mesh(c.geometry, r, p, c.continuity);
            const Problem pr = make_problem(c, k);
            if (!pr.exact_trace) throw ConfigError("convergence requires a known solution");
            BemSystem sys;
            const CaseResult res = run_case(mesh, c, k, pr, sys);
            const Eigen::VectorXcd ba =
                best_approximation(mesh, pr.exact_trace, cfg.quadrature.n_eqp1 + 2);
            const double err_ba = l2_surface_error(mesh, ba, pr.exact_trace).relative;
            os << "m" << r << "p" << p << "," << res.n_dofs << "," << res.h_max << ","
               << res.error_rel << "\n";
            osba << "m" << r << "p" << p << "," << res.n_dofs << "," << res.h_max << "," << err_ba
                 << "\n";
            hs.push_back(res.h_max);
            errs.push_back(res.error_rel);
            errs_ba.push_back(err_ba);
            cases.push_back({{"degree", p},
                             {"refinement", r},
                             {"n_dofs", res.n_dofs},
                             {"assemble_seconds", res.stats.seconds},
                             {"error_rel", res.error_rel},
                             {"error_ba", err_ba}});
        }
        osr << p << "," << fitted_order(hs, errs) << "," << fitted_order(hs, errs_ba) << "\n";
    }
    m["cases"] = cases;
    write_manifest(out, m);
    return 0;
}

int experiment_quad_bench(const RunConfig& cfg, const fs::path& out) {
    const SurfaceMesh mesh =
        build_mesh(cfg.geometry, cfg.refinements, cfg.effective_degree(), cfg.continuity);
    const double k = cfg.k_list.front();
    RunConfig base = cfg;
    if (base.bc_kind == "rigid") base.bc_kind = "pulsating_sphere";
    const Problem pr = make_problem(base, k);
    if (!pr.exact_trace) throw ConfigError("quad_bench requires a known solution");

    std::vector<double> s1_old, s1_new;
    if (cfg.quad_s1_old)
        s1_old = *cfg.quad_s1_old;
    else
        for (int i = 1; i <= 12; ++i) s1_old.push_back(i);
    if (cfg.quad_s1_new)
        s1_new = *cfg.quad_s1_new;
    else
        for (int i = 1; i <= 12; ++i) s1_new.push_back(i / 5.0);

    auto os = open_csv(out, "quad_bench.csv");
    os << "scheme,s1,n_qp1,error_rel\n";
    auto run_one = [&](QuadScheme scheme, double s1) {
        RunConfig c = base;
        c.quadrature.scheme = scheme;
        c.quadrature.s1 = s1;
        BemSystem sys;
        const CaseResult res = run_case(mesh, c, k, pr, sys);
        os << (scheme == QuadScheme::OldAdaptive ? "old" : "new") << "," << s1 << ","
           << res.stats.n_qp_regular << "," << res.error_rel << "\n";
    };
    for (double s1 : s1_old) run_one(QuadScheme::OldAdaptive, s1);
    for (double s1 : s1_new) run_one(QuadScheme::NewAdaptive, s1);

    json m = manifest_base(cfg);
    m["n_dofs"] = mesh.n_dofs;
    m["n_elements"] = mesh.n_elements();
    write_manifest(out, m);
    return 0;
}

int experiment_mfs_verify(const RunConfig& cfg, const fs::path& out) {
    RunConfig c = cfg;
    c.bc_kind = "mfs";
    const SurfaceMesh mesh =
        build_mesh(c.geometry, c.refinements, c.effective_degree(), c.continuity);
    const double k = c.k_list.front();
    const Problem pr = make_problem(c, k);
    BemSystem sys;
    const CaseResult res = run_case(mesh, c, k, pr, sys);
    const Eigen::VectorXcd ba = best_approximation(mesh, pr.exact_trace, c.quadrature.n_eqp1 + 2);
    const double err_ba = l2_surface_error(mesh, ba, pr.exact_trace).relative;

    auto os = open_csv(out, "mfs_errors.csv");
    os << "mesh_id,n_dofs,h_max,error_rel_bem,error_rel_ba\n";
    os << "m" << c.refinements << "p" << c.effective_degree() << "," << res.n_dofs << ","
       << res.h_max << "," << res.error_rel << "," << err_ba << "\n";

    // seeded random surface samples, max pointwise error for the manifest
    std::mt19937_64 rng(cfg.seed);
    std::uniform_real_distribution<double> u01(0.0, 1.0);
    double max_pt_err = 0.0;
    for (int s = 0; s < 200; ++s) {
        const Element& el = mesh.elements[rng() % mesh.elements.size()];
        const double xi = el.xi0 + (el.xi1 - el.xi0) * u01(rng);
        const double eta = el.eta0 + (el.eta1 - el.eta0) * u01(rng);
        const SurfaceFrame fr = mesh.frame(el.patch, xi, eta);
        if (fr.degenerate) continue;
        const Complex ph = eval_trace(mesh, sys.solution.col(0), el, xi, eta);
        const Complex pe = pr.exact_trace(fr.point);
        max_pt_err = std::max(max_pt_err, std::abs(ph - pe) / std::max(std::abs(pe), 1e-300));
    }

    json m = manifest_base(cfg);
    m["n_dofs"] = res.n_dofs;
    m["n_elements"] = mesh.n_elements();
    m["error_rel_bem"] = res.error_rel;
    m["error_rel_ba"] = err_ba;
    m["max_pointwise_rel_error_sampled"] = max_pt_err;
    m["assemble_seconds"] = res.stats.seconds;
    write_manifest(out, m);
    return 0;
}

} // namespace

int run_experiment(const RunConfig& cfg) {
    try {
        fs::path out = cfg.output_dir;
        if (const char* env = std::getenv("IGABEM_OUT_DIR")) out = env;
        fs::create_directories(out);
        if (cfg.threads > 0) set_default_thread_count(cfg.threads);
        switch (cfg.experiment) {
            case ExperimentType::Solve: return experiment_solve(cfg, out);
            case ExperimentType::FreqSweep: return experiment_freq_sweep(cfg, out);
            case ExperimentType::Bistatic: return experiment_bistatic(cfg, out);
            case ExperimentType::Monostatic: return experiment_monostatic(cfg, out);
            case ExperimentType::Convergence: return experiment_convergence(cfg, out);
            case ExperimentType::QuadBench: return experiment_quad_bench(cfg, out);
            case ExperimentType::MfsVerify: return experiment_mfs_verify(cfg, out);
        }
        return 2;
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "numerical failure: " << e.what() << "\n";
        return 3;
    }
}

} // namespace igabem
