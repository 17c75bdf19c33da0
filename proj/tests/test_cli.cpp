#include "igabem/config.hpp"
#include "igabem/runner.hpp"

#include <doctest.h>

#include <algorithm>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <sys/wait.h>

using namespace igabem;
namespace fs = std::filesystem;

namespace {

fs::path temp_dir(const std::string& tag) {
    const fs::path p = fs::temp_directory_path() / ("igabem_test_" + tag);
    fs::remove_all(p);
    fs::create_directories(p);
    return p;
}

std::string slurp(const fs::path& p) {
    std::ifstream is(p);
    std::stringstream ss;
    ss << is.rdbuf();
    return ss.str();
}

int run_cli(const std::string& args) {
    const std::string cmd = std::string(IGABEM_CLI_PATH) + " " + args + " >/dev/null 2>&1";
    const int rc = std::system(cmd.c_str());
    return WEXITSTATUS(rc);
}

} // namespace

TEST_CASE("config: parse, validation, round trip") {
    CHECK_THROWS_AS(parse_config_json("{not json"), ConfigError);
    CHECK_THROWS_AS(parse_config_json("{}"), ConfigError); // missing k
    CHECK_THROWS_AS(parse_config_json(R"({"physics":{"k":1,"frequency":100}})"), ConfigError);
    CHECK_THROWS_AS(
        parse_config_json(R"({"physics":{"k":1},"mesh":{"degree":1},"geometry":{"kind":"sphere_par1"}})"),
        ConfigError); // degree below minimum
    CHECK_THROWS_AS(parse_config_json(R"({"physics":{"k":1},"mesh":{"refinements":0}})"),
                    ConfigError);

    const RunConfig cfg = parse_config_json(R"({
        "geometry": {"kind": "torus", "r_major": 2.0, "r_minor": 1.0},
        "mesh": {"refinements": 2, "degree": 3},
        "formulation": {"kind": "BM", "discretization": "galerkin", "domain": "interior"},
        "quadrature": {"scheme": "old", "s1": 2.0, "n_eqp2": 20},
        "physics": {"frequency": [250.0]},
        "experiment": {"type": "convergence", "bc": "torus_sine"},
        "output_dir": "somewhere"
    })");
    CHECK(cfg.geometry.kind == GeometryKind::Torus);
    CHECK(cfg.formulation.kind == BieKind::BM);
    CHECK(cfg.formulation.disc == Discretization::Galerkin);
    CHECK(cfg.quadrature.scheme == QuadScheme::OldAdaptive);
    CHECK(cfg.k_list.size() == 1);
    CHECK(cfg.k_list[0] == doctest::Approx(2 * pi * 250.0 / 1500.0));
    const std::string echo = config_to_json(cfg);
    CHECK(echo.find("torus") != std::string::npos);
    CHECK(echo.find("galerkin") != std::string::npos);
}

TEST_CASE("cli: bad config exits 2, missing file exits 2") {
    const fs::path dir = temp_dir("badcfg");
    const fs::path cfg = dir / "bad.json";
    std::ofstream(cfg) << "{\"physics\": {}}";
    CHECK(run_cli("run " + cfg.string()) == 2);
    CHECK(run_cli("run /nonexistent/config.json") == 2);
}

TEST_CASE("cli: pulsating-sphere solve writes artifacts, reruns bit-identical") {
    const fs::path dir = temp_dir("solve");
    const fs::path cfg = dir / "cfg.json";
    std::ofstream(cfg) << R"({
        "geometry": {"kind": "sphere_par2", "radius": 1.0},
        "mesh": {"refinements": 1, "degree": 4},
        "formulation": {"kind": "CBIE", "discretization": "collocation"},
        "quadrature": {"n_eqp2": 20},
        "physics": {"k": 1.0},
        "experiment": {"type": "solve", "bc": "pulsating_sphere", "phi_count": 5},
        "output_dir": ")" << (dir / "out1").string() << R"("
    })";
    CHECK(run_cli("run " + cfg.string()) == 0);
    CHECK(fs::exists(dir / "out1" / "manifest.json"));
    CHECK(fs::exists(dir / "out1" / "errors.csv"));
    CHECK(fs::exists(dir / "out1" / "farfield.csv"));

    const std::string err1 = slurp(dir / "out1" / "errors.csv");
    CHECK(err1.rfind("mesh_id,n_dofs,h_max,error_rel\n", 0) == 0);

    // rerun into a second directory: identical CSV bodies
    CHECK(run_cli("run " + cfg.string() + " --out " + (dir / "out2").string()) == 0);
    CHECK(slurp(dir / "out2" / "errors.csv") == err1);
    CHECK(slurp(dir / "out2" / "farfield.csv") == slurp(dir / "out1" / "farfield.csv"));

    // env var override takes precedence
#ifdef _WIN32
#else
    setenv("IGABEM_OUT_DIR", (dir / "out3").string().c_str(), 1);
    CHECK(run_experiment(parse_config_file(cfg.string())) == 0);
    unsetenv("IGABEM_OUT_DIR");
    CHECK(slurp(dir / "out3" / "errors.csv") == err1);
#endif
}

TEST_CASE("cli: export-mesh and dump-quad write the documented formats") {
    const fs::path dir = temp_dir("exports");
    const fs::path cfg = dir / "cfg.json";
    std::ofstream(cfg) << R"({
        "geometry": {"kind": "cube", "side": 1.0},
        "mesh": {"refinements": 1, "degree": 1},
        "physics": {"k": 1.0}
    })";
    const fs::path vtk = dir / "mesh.vtk";
    CHECK(run_cli("export-mesh " + cfg.string() + " --out " + vtk.string() + " --density 3") == 0);
    const std::string v = slurp(vtk);
    CHECK(v.find("DATASET POLYDATA") != std::string::npos);
    CHECK(v.find("POINTS") != std::string::npos);

    const fs::path qcsv = dir / "quad.csv";
    CHECK(run_cli("dump-quad " + cfg.string() + " --out " + qcsv.string() +
                  " --patch 0 --xi 0.5 --eta 0.5") == 0);
    CHECK(slurp(qcsv).rfind("element_id,xi,eta,weight\n", 0) == 0);
}

TEST_CASE("cli: sweep and convergence experiments produce their artifacts") {
    const fs::path dir = temp_dir("experiments");

    // monostatic: one assembly, one rhs column per angle
    const fs::path cmono = dir / "mono.json";
    std::ofstream(cmono) << R"({
        "geometry": {"kind": "sphere_par2", "radius": 1.0},
        "mesh": {"refinements": 1, "degree": 4},
        "formulation": {"kind": "BM"},
        "quadrature": {"n_eqp2": 10},
        "physics": {"k": 1.5},
        "experiment": {"type": "monostatic", "phi_count": 5, "phi_start_deg": 0,
                        "phi_stop_deg": 180},
        "output_dir": ")" << (dir / "mono").string() << R"("
    })";
    CHECK(run_cli("run " + cmono.string()) == 0);
    const std::string mono = slurp(dir / "mono" / "monostatic.csv");
    CHECK(mono.rfind("phi_deg,theta_deg,re_p0,im_p0,abs_p0,TS_dB\n", 0) == 0);
    CHECK(std::count(mono.begin(), mono.end(), '\n') == 6);

    // bistatic sweep
    const fs::path cbi = dir / "bi.json";
    std::ofstream(cbi) << R"({
        "geometry": {"kind": "sphere_par2", "radius": 1.0},
        "mesh": {"refinements": 1, "degree": 4},
        "formulation": {"kind": "CBIE"},
        "quadrature": {"n_eqp2": 10},
        "physics": {"k": 1.5},
        "experiment": {"type": "bistatic", "phi_count": 4},
        "output_dir": ")" << (dir / "bi").string() << R"("
    })";
    CHECK(run_cli("run " + cbi.string()) == 0);
    CHECK(fs::exists(dir / "bi" / "bistatic.csv"));

    // frequency sweep over two wavenumbers
    const fs::path cfs = dir / "fs.json";
    std::ofstream(cfs) << R"({
        "geometry": {"kind": "sphere_par2", "radius": 1.0},
        "mesh": {"refinements": 1, "degree": 4},
        "formulation": {"kind": "CBIE"},
        "quadrature": {"n_eqp2": 10},
        "physics": {"k": [1.0, 1.5]},
        "experiment": {"type": "freq_sweep", "bc": "rigid", "phi_count": 0},
        "output_dir": ")" << (dir / "fs").string() << R"("
    })";
    CHECK(run_cli("run " + cfs.string()) == 0);
    const std::string fsweep = slurp(dir / "fs" / "freq_sweep.csv");
    CHECK(fsweep.rfind("k,n_dofs,h_max,error_rel,ts_backscatter_db\n", 0) == 0);
    CHECK(std::count(fsweep.begin(), fsweep.end(), '\n') == 3);

    // convergence study on the torus, interior manufactured solution
    const fs::path cconv = dir / "conv.json";
    std::ofstream(cconv) << R"({
        "geometry": {"kind": "torus"},
        "mesh": {"degree": 2},
        "formulation": {"kind": "CBIE", "discretization": "collocation",
                         "domain": "interior"},
        "quadrature": {"n_eqp2": 10},
        "physics": {"k": 2.0},
        "experiment": {"type": "convergence", "bc": "torus_sine",
                        "refinements": [1, 2], "degrees": [2]},
        "output_dir": ")" << (dir / "conv").string() << R"("
    })";
    CHECK(run_cli("run " + cconv.string()) == 0);
    const std::string errs = slurp(dir / "conv" / "errors.csv");
    CHECK(errs.rfind("mesh_id,n_dofs,h_max,error_rel\n", 0) == 0);
    CHECK(std::count(errs.begin(), errs.end(), '\n') == 3);
    CHECK(fs::exists(dir / "conv" / "errors_ba.csv"));
    CHECK(fs::exists(dir / "conv" / "rates.csv"));

    // manufactured-solution verification on the cube
    const fs::path cmfs = dir / "mfs.json";
    std::ofstream(cmfs) << R"({
        "geometry": {"kind": "cube", "side": 1.0},
        "mesh": {"refinements": 2, "degree": 1},
        "formulation": {"kind": "CBIE", "discretization": "galerkin"},
        "quadrature": {"n_eqp2": 10},
        "physics": {"k": 2.0},
        "experiment": {"type": "mfs_verify"},
        "output_dir": ")" << (dir / "mfs").string() << R"(",
        "seed": 7
    })";
    CHECK(run_cli("run " + cmfs.string()) == 0);
    const std::string m = slurp(dir / "mfs" / "mfs_errors.csv");
    CHECK(m.rfind("mesh_id,n_dofs,h_max,error_rel_bem,error_rel_ba\n", 0) == 0);
}

TEST_CASE("cli: quad_bench with empty grids emits only the header") {
    const fs::path dir = temp_dir("qbench");
    const fs::path cfg = dir / "cfg.json";
    std::ofstream(cfg) << R"({
        "geometry": {"kind": "sphere_par2", "radius": 1.0},
        "mesh": {"refinements": 1, "degree": 4},
        "formulation": {"kind": "CBIE"},
        "physics": {"k": 1.0},
        "experiment": {"type": "quad_bench", "bc": "pulsating_sphere",
                        "s1_old": [], "s1_new": [0.6]},
        "output_dir": ")" << (dir / "o").string() << R"("
    })";
    // note: one new-scheme point keeps the run cheap; an empty old grid is allowed
    CHECK(run_cli("run " + cfg.string()) == 0);
    const std::string s = slurp(dir / "o" / "quad_bench.csv");
    CHECK(s.rfind("scheme,s1,n_qp1,error_rel\n", 0) == 0);
    CHECK(std::count(s.begin(), s.end(), '\n') == 2);

    // zero-length grids: header only
    const fs::path cfg2 = dir / "cfg2.json";
    std::ofstream(cfg2) << R"({
        "geometry": {"kind": "sphere_par2", "radius": 1.0},
        "mesh": {"refinements": 1, "degree": 4},
        "formulation": {"kind": "CBIE"},
        "physics": {"k": 1.0},
        "experiment": {"type": "quad_bench", "bc": "pulsating_sphere",
                        "s1_old": [], "s1_new": []},
        "output_dir": ")" << (dir / "o2").string() << R"("
    })";
    CHECK(run_cli("run " + cfg2.string()) == 0);
    const std::string s2 = slurp(dir / "o2" / "quad_bench.csv");
    CHECK(s2 == "scheme,s1,n_qp1,error_rel\n");
}
