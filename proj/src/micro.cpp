#include "homogenlab/micro.hpp"

#include <cmath>

namespace homogen {

double solid_conductivity(const PerforatedDomain& dom, const PhysicalParams& p) {
    double ratio = dom.epsilon / dom.r_eps;
    return p.b * ratio * ratio * ratio;
}

namespace {

ScalarField micro_thermal_rhs(const PerforatedDomain& dom, const PhysicalParams& p) {
    ScalarField rhs(dom.grid);
    double ks = solid_conductivity(dom, p);
    const GridSpec& g = dom.grid;
    for (int k = 0; k < g.n[2]; ++k)
        for (int j = 0; j < g.n[1]; ++j)
            for (int i = 0; i < g.n[0]; ++i) {
                long c = g.cell_index(i, j, k);
                Vec3 x = g.cell_center(i, j, k);
                rhs.values[c] = dom.is_solid(c) ? ks * eval_source(p.g, x)
                                                : eval_source(p.f, x);
            }
    return rhs;
}

}  // namespace

ThermalSystem assemble_thermal_micro(const PerforatedDomain& dom,
                                     const PhysicalParams& params,
                                     const VectorFieldMAC& u,
                                     AdvectionScheme scheme) {
    params.validate();
    ScalarField rhs = micro_thermal_rhs(dom, params);
    return assemble_thermal(dom.grid, &dom.phase, solid_conductivity(dom, params),
                            rhs, &u, scheme);
}

StokesSolution solve_stokes_perforated(const PerforatedDomain& dom,
                                       const VectorFieldMAC& force,
                                       const SolverConfig& cfg) {
    StokesOperator op =
        build_stokes_operator(dom.grid, &dom.phase, WallSet::no_slip(), 0.0);
    return solve_stokes_system(op, force, cfg);
}

MicroSolution picard_micro(const PerforatedDomain& dom, const PhysicalParams& params,
                           const SolverConfig& cfg, double relax, int max_outer) {
    params.validate();
    if (relax <= 0.0 || relax > 1.0) throw DomainError("relaxation must be in (0,1]");
    if (max_outer < 1) throw DomainError("max_outer must be at least 1");

    const GridSpec& grid = dom.grid;
    StokesOperator op = build_stokes_operator(grid, &dom.phase, WallSet::no_slip(), 0.0);

    MicroSolution sol;
    sol.u = VectorFieldMAC(grid);
    sol.p = ScalarField(grid);
    sol.theta = ScalarField(grid);

    // Decoupled case: flow does not feel the temperature, one alternation
    // reaches the fixed point exactly.
    if (params.a == 0.0) {
        StokesSolution st = solve_stokes_system(op, VectorFieldMAC(grid), cfg);
        sol.u = std::move(st.u);
        sol.p = std::move(st.p);
        ThermalSystem sys = assemble_thermal_micro(dom, params, sol.u);
        SolveResult th = solve_thermal(sys, cfg);
        sol.theta.values = std::move(th.x);
        sol.picard_iters = 1;
        sol.picard_residual = 0.0;
        return sol;
    }

    double prev_delta = 0.0;
    int grow_streak = 0;
    bool converged = false;
    for (int m = 1; m <= max_outer; ++m) {
        // Early sweeps are solved loosely; the loop ends with a tight pass.
        SolverConfig step = cfg;
        if (m > 1)
            step.rel_tol = std::clamp(0.05 * prev_delta, cfg.rel_tol, 1e-3);

        VectorFieldMAC force = buoyancy_force(sol.theta, params.a);
        StokesSolution st = solve_stokes_system(op, force, step, &sol.u, &sol.p);

        ThermalSystem sys = assemble_thermal_micro(dom, params, st.u);
        SolveResult th = solve_thermal(sys, step, &sol.theta.values);

        ScalarField theta_new(grid);
        for (std::size_t c = 0; c < theta_new.values.size(); ++c)
            theta_new.values[c] =
                relax * th.x[c] + (1.0 - relax) * sol.theta.values[c];

        double dnum = l2_diff(theta_new, sol.theta);
        double dvel = l2_diff(st.u, sol.u);
        double scale = std::sqrt(l2_norm(theta_new) * l2_norm(theta_new) +
                                 l2_norm(st.u) * l2_norm(st.u)) + 1e-300;
        double delta = std::sqrt(dnum * dnum + dvel * dvel) / scale;

        sol.u = std::move(st.u);
        sol.p = std::move(st.p);
        sol.theta = std::move(theta_new);
        sol.picard_iters = m;
        sol.picard_residual = delta;

        if (m > 1 && delta > prev_delta) {
            if (++grow_streak >= 5)
                throw PicardDiverged("picard: residual grew for 5 consecutive iterations");
        } else {
            grow_streak = 0;
        }
        prev_delta = delta;
        if (delta < cfg.rel_tol) {
            converged = true;
            break;
        }
    }
    if (!converged)
        throw MaxIterExceeded("picard: no convergence within max_outer iterations");

    // One unrelaxed alternation at full tolerance pins down the reported
    // fields and their contracts (divergence, pressure gauge).
    VectorFieldMAC force = buoyancy_force(sol.theta, params.a);
    StokesSolution st = solve_stokes_system(op, force, cfg, &sol.u, &sol.p);
    sol.u = std::move(st.u);
    sol.p = std::move(st.p);
    ThermalSystem sys = assemble_thermal_micro(dom, params, sol.u);
    SolveResult th = solve_thermal(sys, cfg, &sol.theta.values);
    sol.theta.values = std::move(th.x);
    return sol;
}

}  // namespace homogen
