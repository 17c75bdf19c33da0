#include "igabem/runner.hpp"

#include "igabem/postprocess.hpp"

#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>

namespace {

int cmd_run(const std::string& config_path, const std::string& out_override, int threads,
            unsigned long seed, bool seed_given) {
    igabem::RunConfig cfg;
    try {
        cfg = igabem::parse_config_file(config_path);
    } catch (const std::exception& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 2;
    }
    if (!out_override.empty()) cfg.output_dir = out_override;
    if (threads > 0) cfg.threads = threads;
    if (seed_given) cfg.seed = seed;
    return igabem::run_experiment(cfg);
}

int cmd_export_mesh(const std::string& config_path, const std::string& out, int density) {
    try {
        const igabem::RunConfig cfg = igabem::parse_config_file(config_path);
        const igabem::SurfaceMesh mesh = igabem::build_mesh(
            cfg.geometry, cfg.refinements, cfg.effective_degree(), cfg.continuity);
        igabem::write_vtk_file(mesh, out, density);
        return 0;
    } catch (const igabem::ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "numerical failure: " << e.what() << "\n";
        return 3;
    }
}

int cmd_dump_quad(const std::string& config_path, const std::string& out, int patch, double xi,
                  double eta) {
    try {
        const igabem::RunConfig cfg = igabem::parse_config_file(config_path);
        const igabem::SurfaceMesh mesh = igabem::build_mesh(
            cfg.geometry, cfg.refinements, cfg.effective_degree(), cfg.continuity);
        const igabem::Vec3 x = mesh.point(patch, xi, eta);
        std::ofstream os(out);
        if (!os) throw std::runtime_error("cannot open " + out);
        igabem::dump_quadrature_csv(mesh, {{patch, xi, eta}}, x, cfg.quadrature, os);
        return 0;
    } catch (const igabem::ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "numerical failure: " << e.what() << "\n";
        return 3;
    }
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Isogeometric boundary element solver for 3D Helmholtz scattering"};
    app.require_subcommand(1);

    std::string config_path, out_dir, vtk_out = "mesh.vtk", quad_out = "quad.csv";
    int threads = 0, density = 8, patch = 0;
    unsigned long seed = 0;
    double xi = 0.5, eta = 0.5;

    auto* run = app.add_subcommand("run", "run an experiment from a JSON config");
    run->add_option("config", config_path, "configuration file")->required();
    run->add_option("--out", out_dir, "output directory (overrides config)");
    run->add_option("--threads", threads, "worker threads");
    auto* seed_opt = run->add_option("--seed", seed, "seed for sampled diagnostics");

    auto* exp = app.add_subcommand("export-mesh", "tessellate the mesh to legacy ASCII VTK");
    exp->add_option("config", config_path, "configuration file")->required();
    exp->add_option("--out", vtk_out, "output .vtk path");
    exp->add_option("--density", density, "tessellation cells per element per direction");

    auto* dq = app.add_subcommand("dump-quad", "dump quadrature points for one source point");
    dq->add_option("config", config_path, "configuration file")->required();
    dq->add_option("--out", quad_out, "output .csv path");
    dq->add_option("--patch", patch, "source patch id");
    dq->add_option("--xi", xi, "source xi");
    dq->add_option("--eta", eta, "source eta");

    CLI11_PARSE(app, argc, argv);

    if (run->parsed()) return cmd_run(config_path, out_dir, threads, seed, seed_opt->count() > 0);
    if (exp->parsed()) return cmd_export_mesh(config_path, vtk_out, density);
    if (dq->parsed()) return cmd_dump_quad(config_path, quad_out, patch, xi, eta);
    return 2;
}
