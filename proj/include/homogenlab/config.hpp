#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "homogenlab/grid.hpp"
#include "homogenlab/linalg.hpp"
#include "homogenlab/micro.hpp"

namespace homogen {

/// Flat key=value run configuration with dotted sections. Every field has a
/// default; unknown keys are rejected.
struct RunConfig {
    BoxDomain box;                         // box.lo, box.hi
    Int3 grid_n{64, 64, 64};               // grid.n
    std::vector<double> epsilons{0.5};     // sweep.epsilon (decreasing)
    double gamma = 1.0;                    // physics.gamma
    double rayleigh = 0.0;                 // physics.a
    double conductivity_b = 1.0;           // physics.b
    SourceSpec f = SourceSpec::constant(0.0);  // source.f.*
    SourceSpec g = SourceSpec::constant(0.0);  // source.g.*
    double rel_tol = 1e-9;                 // solver.rel_tol
    double abs_tol = 1e-13;                // solver.abs_tol
    int max_iter = 200000;                 // solver.max_iter
    Preconditioner precond = Preconditioner::Jacobi;  // solver.preconditioner
    double relax = 0.7;                    // picard.relax
    int picard_max_outer = 50;             // picard.max_outer
    RRule r_rule = RRule::GeometricMean;   // domain.r_rule
    std::string out_dir = "out";           // run.out_dir
    std::uint64_t seed = 1;                // run.seed
    int workers = 1;                       // run.workers

    SolverConfig solver() const {
        SolverConfig c;
        c.rel_tol = rel_tol;
        c.abs_tol = abs_tol;
        c.max_iter = max_iter;
        c.preconditioner = precond;
        return c;
    }
    PhysicalParams physics() const {
        PhysicalParams p;
        p.a = rayleigh;
        p.b = conductivity_b;
        p.gamma = gamma;
        p.f = f;
        p.g = g;
        return p;
    }
};

RunConfig parse_config_text(const std::string& text);
RunConfig parse_config_file(const std::string& path);

/// Every knob that affects the numerics, as manifest entries.
std::vector<std::pair<std::string, std::string>> manifest_entries(const RunConfig& c);

}  // namespace homogen
