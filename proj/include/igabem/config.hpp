#ifndef IGABEM_CONFIG_HPP
#define IGABEM_CONFIG_HPP

#include "igabem/assembly.hpp"
#include "igabem/geometry.hpp"

#include <string>

namespace igabem {

enum class ExperimentType { Solve, FreqSweep, Bistatic, Monostatic, Convergence, QuadBench, MfsVerify };

struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct RunConfig {
    GeometrySpec geometry;
    int refinements = 1;
    int degree = 0;              // 0 = geometry minimum
    std::optional<int> continuity;

    BieFormulation formulation;
    QuadConfig quadrature;

    std::vector<double> k_list;  // wavenumbers (1/m); may come from frequencies
    double P_inc = 1.0;
    double alpha_s_deg = 240.0;
    double beta_s_deg = 30.0;

    ExperimentType experiment = ExperimentType::Solve;
    std::string bc_kind = "rigid"; // rigid | pulsating_sphere | mfs | torus_sine
    std::string mfs_layout = "cube27"; // cube27 | line16
    std::vector<int> conv_refinements = {1, 2, 3};
    std::vector<int> conv_degrees;

    double phi_start_deg = 0.0, phi_stop_deg = 360.0;
    int phi_count = 73;
    double theta_deg = 0.0;

    std::optional<std::vector<double>> quad_s1_old; // default {1..12}
    std::optional<std::vector<double>> quad_s1_new; // default {0.2,...,2.4}

    std::string output_dir = "out";
    int threads = 0;
    unsigned long seed = 0;

    int effective_degree() const { return degree > 0 ? degree : geometry.min_degree(); }
};

RunConfig parse_config_file(const std::string& path);
RunConfig parse_config_json(const std::string& text);

std::string config_to_json(const RunConfig& cfg);

} // namespace igabem

#endif
