#ifndef IGABEM_RUNNER_HPP
#define IGABEM_RUNNER_HPP

#include "igabem/config.hpp"

namespace igabem {

// exit codes: 0 ok, 2 config error, 3 numerical failure
int run_experiment(const RunConfig& cfg);

// Boundary condition and reference fields for one (config, k) case.
struct Problem {
    BoundaryCondition bc;
    // exact trace of the solved unknown (p_tot for rigid problems), if known
    std::function<Complex(const Vec3&)> exact_trace;
    // radiating-field traces: p_rad = p_h - trace_offset, dp_rad/dn as given
    std::function<Complex(const Vec3&)> trace_offset;
    std::function<Complex(const Vec3&, const Vec3&)> radiating_dpdn;
};

Problem make_problem(const RunConfig& cfg, double k);

} // namespace igabem

#endif
