#include "igabem/config.hpp"

#include <json.hpp>

#include <fstream>
#include <sstream>

namespace igabem {

using nlohmann::json;

namespace {

GeometryKind geometry_kind(const std::string& s) {
    if (s == "sphere_par1") return GeometryKind::SpherePar1;
    if (s == "sphere_par2") return GeometryKind::SpherePar2;
    if (s == "torus") return GeometryKind::Torus;
    if (s == "cube") return GeometryKind::Cube;
    throw ConfigError("unknown geometry kind: " + s);
}

std::string geometry_name(GeometryKind k) {
    switch (k) {
        case GeometryKind::SpherePar1: return "sphere_par1";
        case GeometryKind::SpherePar2: return "sphere_par2";
        case GeometryKind::Torus: return "torus";
        case GeometryKind::Cube: return "cube";
    }
    return "?";
}

BieKind bie_kind(const std::string& s) {
    if (s == "CBIE") return BieKind::CBIE;
    if (s == "HBIE") return BieKind::HBIE;
    if (s == "BM") return BieKind::BM;
    if (s == "RCBIE1") return BieKind::RCBIE1;
    if (s == "RCBIE2") return BieKind::RCBIE2;
    if (s == "RCBIE3") return BieKind::RCBIE3;
    throw ConfigError("unknown formulation kind: " + s);
}

ExperimentType experiment_type(const std::string& s) {
    if (s == "solve") return ExperimentType::Solve;
    if (s == "freq_sweep") return ExperimentType::FreqSweep;
    if (s == "bistatic") return ExperimentType::Bistatic;
    if (s == "monostatic") return ExperimentType::Monostatic;
    if (s == "convergence") return ExperimentType::Convergence;
    if (s == "quad_bench") return ExperimentType::QuadBench;
    if (s == "mfs_verify") return ExperimentType::MfsVerify;
    throw ConfigError("unknown experiment type: " + s);
}

std::string experiment_name(ExperimentType t) {
    switch (t) {
        case ExperimentType::Solve: return "solve";
        case ExperimentType::FreqSweep: return "freq_sweep";
        case ExperimentType::Bistatic: return "bistatic";
        case ExperimentType::Monostatic: return "monostatic";
        case ExperimentType::Convergence: return "convergence";
        case ExperimentType::QuadBench: return "quad_bench";
        case ExperimentType::MfsVerify: return "mfs_verify";
    }
    return "?";
}

} // namespace

RunConfig parse_config_json(const std::string& text) {
    json j;
    try {
        j = json::parse(text);
    } catch (const std::exception& e) {
        throw ConfigError(std::string("config parse error: ") + e.what());
    }
    RunConfig cfg;
    try {
        if (j.contains("geometry")) {
            const auto& g = j["geometry"];
            cfg.geometry.kind = geometry_kind(g.value("kind", "sphere_par1"));
            cfg.geometry.radius = g.value("radius", 1.0);
            cfg.geometry.r_major = g.value("r_major", 2.0);
            cfg.geometry.r_minor = g.value("r_minor", 1.0);
            cfg.geometry.side = g.value("side", 1.0);
        }
        if (j.contains("mesh")) {
            const auto& m = j["mesh"];
            cfg.refinements = m.value("refinements", 1);
            cfg.degree = m.value("degree", 0);
            if (m.contains("continuity")) cfg.continuity = m["continuity"].get<int>();
        }
        if (j.contains("formulation")) {
            const auto& f = j["formulation"];
            cfg.formulation.kind = bie_kind(f.value("kind", "CBIE"));
            const std::string d = f.value("discretization", "collocation");
            if (d != "collocation" && d != "galerkin")
                throw ConfigError("discretization must be collocation or galerkin");
            cfg.formulation.disc =
                d == "collocation" ? Discretization::Collocation : Discretization::Galerkin;
            const std::string dom = f.value("domain", "exterior");
            if (dom != "exterior" && dom != "interior")
                throw ConfigError("domain must be exterior or interior");
            cfg.formulation.domain =
                dom == "exterior" ? DomainSide::Exterior : DomainSide::Interior;
            if (f.contains("coupling_alpha")) {
                const auto& a = f["coupling_alpha"];
                cfg.formulation.coupling_alpha = Complex(a.at(0).get<double>(), a.at(1).get<double>());
            }
            cfg.formulation.plain_cbie_jump = f.value("plain_cbie_jump", false);
        }
        if (j.contains("quadrature")) {
            const auto& q = j["quadrature"];
            const std::string s = q.value("scheme", "new");
            if (s != "old" && s != "new") throw ConfigError("quadrature scheme must be old or new");
            cfg.quadrature.scheme = s == "old" ? QuadScheme::OldAdaptive : QuadScheme::NewAdaptive;
            cfg.quadrature.s1 = q.value("s1", 1.4);
            cfg.quadrature.n_eqp1 = q.value("n_eqp1", 0);
            cfg.quadrature.n_eqp2 = q.value("n_eqp2", 50);
        }
        if (j.contains("physics")) {
            const auto& p = j["physics"];
            const bool has_k = p.contains("k");
            const bool has_f = p.contains("frequency");
            if (has_k && has_f) throw ConfigError("give either k or frequency, not both");
            auto as_list = [](const json& v) {
                std::vector<double> out;
                if (v.is_array())
                    for (const auto& x : v) out.push_back(x.get<double>());
                else
                    out.push_back(v.get<double>());
                return out;
            };
            if (has_k) cfg.k_list = as_list(p["k"]);
            if (has_f) {
                for (double f : as_list(p["frequency"]))
                    cfg.k_list.push_back(Wavenumber::from_frequency(f).k);
            }
            cfg.P_inc = p.value("P_inc", 1.0);
            cfg.alpha_s_deg = p.value("alpha_s_deg", 240.0);
            cfg.beta_s_deg = p.value("beta_s_deg", 30.0);
        }
        if (j.contains("experiment")) {
            const auto& e = j["experiment"];
            cfg.experiment = experiment_type(e.value("type", "solve"));
            cfg.bc_kind = e.value("bc", "rigid");
            cfg.mfs_layout = e.value("mfs_layout", "cube27");
            if (e.contains("refinements"))
                cfg.conv_refinements = e["refinements"].get<std::vector<int>>();
            if (e.contains("degrees")) cfg.conv_degrees = e["degrees"].get<std::vector<int>>();
            cfg.phi_start_deg = e.value("phi_start_deg", 0.0);
            cfg.phi_stop_deg = e.value("phi_stop_deg", 360.0);
            cfg.phi_count = e.value("phi_count", 73);
            cfg.theta_deg = e.value("theta_deg", 0.0);
            if (e.contains("s1_old")) cfg.quad_s1_old = e["s1_old"].get<std::vector<double>>();
            if (e.contains("s1_new")) cfg.quad_s1_new = e["s1_new"].get<std::vector<double>>();
        }
        cfg.output_dir = j.value("output_dir", "out");
        cfg.threads = j.value("threads", 0);
        cfg.seed = j.value("seed", 0UL);
    } catch (const ConfigError&) {
        throw;
    } catch (const std::exception& e) {
        throw ConfigError(std::string("config error: ") + e.what());
    }

    // validation
    if (cfg.refinements < 1) throw ConfigError("mesh.refinements must be >= 1");
    const int p = cfg.effective_degree();
    if (p < cfg.geometry.min_degree())
        throw ConfigError("mesh.degree below the geometry's minimum degree (" +
                          std::to_string(cfg.geometry.min_degree()) + ")");
    if (cfg.k_list.empty()) throw ConfigError("physics.k (or frequency) is required");
    for (double k : cfg.k_list)
        if (!(k >= 0.0)) throw ConfigError("wavenumbers must be nonnegative");
    if (!(cfg.quadrature.s1 > 0.0)) throw ConfigError("quadrature.s1 must be positive");
    if (cfg.quadrature.n_eqp1 < 0 || cfg.quadrature.n_eqp2 < 0)
        throw ConfigError("quadrature.n_eqp* must be nonnegative");
    if (cfg.phi_count < 0) throw ConfigError("experiment.phi_count must be nonnegative");
    return cfg;
}

RunConfig parse_config_file(const std::string& path) {
    std::ifstream is(path);
    if (!is) throw ConfigError("cannot open config file: " + path);
    std::stringstream ss;
    ss << is.rdbuf();
    return parse_config_json(ss.str());
}

std::string config_to_json(const RunConfig& cfg) {
    json j;
    j["geometry"] = {{"kind", geometry_name(cfg.geometry.kind)},
                     {"radius", cfg.geometry.radius},
                     {"r_major", cfg.geometry.r_major},
                     {"r_minor", cfg.geometry.r_minor},
                     {"side", cfg.geometry.side}};
    j["mesh"] = {{"refinements", cfg.refinements}, {"degree", cfg.effective_degree()}};
    if (cfg.continuity) j["mesh"]["continuity"] = *cfg.continuity;
    j["formulation"] = {{"kind", to_string(cfg.formulation.kind)},
                        {"discretization", to_string(cfg.formulation.disc)},
                        {"domain", cfg.formulation.domain == DomainSide::Exterior ? "exterior"
                                                                                  : "interior"}};
    j["quadrature"] = {
        {"scheme", cfg.quadrature.scheme == QuadScheme::OldAdaptive ? "old" : "new"},
        {"s1", cfg.quadrature.s1},
        {"n_eqp1", cfg.quadrature.n_eqp1},
        {"n_eqp2", cfg.quadrature.n_eqp2}};
    j["physics"] = {{"k", cfg.k_list},
                    {"P_inc", cfg.P_inc},
                    {"alpha_s_deg", cfg.alpha_s_deg},
                    {"beta_s_deg", cfg.beta_s_deg},
                    {"c_f", Wavenumber::c_f}};
    j["experiment"] = {{"type", experiment_name(cfg.experiment)},
                       {"bc", cfg.bc_kind},
                       {"phi_start_deg", cfg.phi_start_deg},
                       {"phi_stop_deg", cfg.phi_stop_deg},
                       {"phi_count", cfg.phi_count},
                       {"theta_deg", cfg.theta_deg}};
    j["output_dir"] = cfg.output_dir;
    j["threads"] = cfg.threads;
    j["seed"] = cfg.seed;
    return j.dump(2);
}

} // namespace igabem
