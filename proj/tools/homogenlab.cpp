// Command-line front end: macroscopic solves, perforated micro solves,
// epsilon-sweep convergence studies, cell-problem diagnostics and the
// randomized property audit.

#include <atomic>
#include <chrono>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <thread>

#include <CLI11.hpp>

#include "homogenlab/analysis.hpp"
#include "homogenlab/config.hpp"
#include "homogenlab/homogenized.hpp"
#include "homogenlab/micro.hpp"
#include "homogenlab/vtk_io.hpp"

namespace {

using namespace homogen;

// Exit codes: 0 success, 1 validation, 2 solver, 3 resolution, 4 failed check.
constexpr int kExitOk = 0;
constexpr int kExitValidation = 1;
constexpr int kExitSolver = 2;
constexpr int kExitResolution = 3;
constexpr int kExitCheckFailed = 4;

int map_exception(const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    if (dynamic_cast<const UnresolvedSphere*>(&e)) return kExitResolution;
    if (dynamic_cast<const MaxIterExceeded*>(&e) ||
        dynamic_cast<const PicardDiverged*>(&e) ||
        dynamic_cast<const IndefiniteBreakdown*>(&e) ||
        dynamic_cast<const Stagnation*>(&e) ||
        dynamic_cast<const NonFiniteCoefficient*>(&e))
        return kExitSolver;
    return kExitValidation;
}

void ensure_dir(const std::string& dir) {
    std::filesystem::create_directories(dir);
}

void append_result_entries(std::vector<std::pair<std::string, std::string>>& man,
                           int picard_iters, double picard_residual) {
    man.emplace_back("result.picard_iters", std::to_string(picard_iters));
    man.emplace_back("result.picard_residual", format_double(picard_residual));
}

int cmd_macro(const RunConfig& cfg, const std::string& out_dir) {
    ensure_dir(out_dir);
    GridSpec grid(cfg.box, cfg.grid_n);
    MacroSolution sol = picard_macro(grid, cfg.physics(), cfg.solver(), cfg.relax,
                                     cfg.picard_max_outer);
    write_vtk_scalar(out_dir + "/theta.vtk", "theta", sol.theta);
    write_vtk_scalar(out_dir + "/tau.vtk", "tau", sol.tau);
    write_vtk_scalar(out_dir + "/p.vtk", "p", sol.p);
    write_vtk_vector(out_dir + "/u.vtk", "u", sol.u);
    auto man = manifest_entries(cfg);
    append_result_entries(man, sol.picard_iters, sol.picard_residual);
    write_manifest(out_dir + "/manifest.txt", std::move(man));
    std::cout << "macro: picard_iters=" << sol.picard_iters << " out=" << out_dir
              << "\n";
    return kExitOk;
}

int cmd_micro(const RunConfig& cfg, const std::string& out_dir, double eps_override) {
    ensure_dir(out_dir);
    double eps = eps_override > 0.0 ? eps_override : cfg.epsilons.front();
    GridSpec grid(cfg.box, cfg.grid_n);
    PerforatedDomain dom =
        build_perforated_domain(cfg.box, eps, cfg.gamma, grid, cfg.r_rule);
    MicroSolution sol = picard_micro(dom, cfg.physics(), cfg.solver(), cfg.relax,
                                     cfg.picard_max_outer);
    write_vtk_scalar(out_dir + "/theta.vtk", "theta", sol.theta);
    write_vtk_scalar(out_dir + "/p.vtk", "p", sol.p);
    write_vtk_vector(out_dir + "/u.vtk", "u", sol.u);
    ScalarField phase(grid);
    for (long c = 0; c < (long)phase.values.size(); ++c)
        phase.values[c] = dom.is_solid(c) ? 1.0 : 0.0;
    write_vtk_scalar(out_dir + "/phase.vtk", "phase", phase);
    auto man = manifest_entries(cfg);
    man.emplace_back("micro.epsilon", format_double(eps));
    man.emplace_back("micro.r_eps", format_double(dom.r_eps));
    man.emplace_back("micro.R_eps", format_double(dom.R_eps));
    man.emplace_back("micro.spheres", std::to_string(dom.centers.size()));
    append_result_entries(man, sol.picard_iters, sol.picard_residual);
    write_manifest(out_dir + "/manifest.txt", std::move(man));
    std::cout << "micro: eps=" << eps << " spheres=" << dom.centers.size()
              << " picard_iters=" << sol.picard_iters << " out=" << out_dir << "\n";
    return kExitOk;
}

int cmd_converge(const RunConfig& cfg, const std::string& out_dir, int workers) {
    if (cfg.epsilons.size() < 2) {
        std::cerr << "error: 'sweep.epsilon' needs at least two entries\n";
        return kExitValidation;
    }
    for (std::size_t q = 1; q < cfg.epsilons.size(); ++q)
        if (cfg.epsilons[q] >= cfg.epsilons[q - 1]) {
            std::cerr << "error: 'sweep.epsilon' must be strictly decreasing\n";
            return kExitValidation;
        }
    ensure_dir(out_dir);
    GridSpec grid(cfg.box, cfg.grid_n);

    // Validate every sweep point up front so resolution failures are
    // reported before any heavy solve.
    for (double eps : cfg.epsilons)
        build_perforated_domain(cfg.box, eps, cfg.gamma, grid, cfg.r_rule);

    MacroSolution macro = picard_macro(grid, cfg.physics(), cfg.solver(), cfg.relax,
                                       cfg.picard_max_outer);
    std::vector<ScalarField> phis = standard_test_functions(grid);

    std::vector<ConvergenceRow> rows(cfg.epsilons.size());
    std::vector<std::string> errors(cfg.epsilons.size());
    std::atomic<std::size_t> next{0};
    auto worker = [&]() {
        while (true) {
            std::size_t q = next.fetch_add(1);
            if (q >= cfg.epsilons.size()) return;
            try {
                auto t0 = std::chrono::steady_clock::now();
                PerforatedDomain dom = build_perforated_domain(
                    cfg.box, cfg.epsilons[q], cfg.gamma, grid, cfg.r_rule);
                MicroSolution micro = picard_micro(dom, cfg.physics(), cfg.solver(),
                                                   cfg.relax, cfg.picard_max_outer);
                ConvergenceRow row =
                    micro_macro_errors(micro, macro, dom, phis,
                                       solid_conductivity(dom, cfg.physics()));
                row.seconds = std::chrono::duration<double>(
                                  std::chrono::steady_clock::now() - t0)
                                  .count();
                rows[q] = row;
            } catch (const std::exception& e) {
                errors[q] = e.what();
            }
        }
    };
    int nthreads = std::max(1, std::min<int>(workers, (int)cfg.epsilons.size()));
    if (nthreads == 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        for (int t = 0; t < nthreads; ++t) pool.emplace_back(worker);
        for (auto& th : pool) th.join();
    }
    for (const std::string& err : errors)
        if (!err.empty()) {
            std::cerr << "error: " << err << "\n";
            return kExitSolver;
        }

    ConvergenceReport report;
    report.rows = rows;
    write_convergence_csv(out_dir + "/convergence.csv", report);
    auto man = manifest_entries(cfg);
    append_result_entries(man, macro.picard_iters, macro.picard_residual);
    write_manifest(out_dir + "/manifest.txt", std::move(man));

    bool decreasing = true;
    for (std::size_t q = 1; q < rows.size(); ++q)
        if (rows[q].err_theta_l2 >= rows[q - 1].err_theta_l2) decreasing = false;
    for (const ConvergenceRow& r : rows)
        std::cout << "eps=" << r.eps << " err_theta_L2=" << r.err_theta_l2
                  << " err_u_L2=" << r.err_u_l2 << " gap_phi2=" << r.gap_phi[1]
                  << " picard_iters=" << r.picard_iters << "\n";
    if (!decreasing) {
        std::cerr << "converge: err_theta_L2 is not strictly decreasing\n";
        return kExitCheckFailed;
    }
    std::cout << "converge: err_theta_L2 strictly decreasing over "
              << rows.size() << " sweep points, out=" << out_dir << "\n";
    return kExitOk;
}

int cmd_cell(double r, const std::vector<double>& Rs, int grid_n, bool symmetry,
             double rel_tol) {
    for (double R : Rs)
        if (R <= r) {
            std::cerr << "error: R must exceed r\n";
            return kExitValidation;
        }
    std::printf("corrector energy table (2000 radial nodes)\n");
    std::printf("%10s %10s %14s %14s %10s\n", "r1", "r2", "energy", "analytic",
                "ratio");
    for (auto [r1, r2] : {std::pair<double, double>{1.0, 2.0}, {1.0, 4.0}, {1.0, 10.0}}) {
        double e = corrector_energy(r1, r2, 2000);
        double a = 4.0 * M_PI * r1 * r2 / (r2 - r1);
        std::printf("%10.4f %10.4f %14.8f %14.8f %10.6f\n", r1, r2, e, a, e / a);
    }
    SolverConfig cfg;
    cfg.rel_tol = rel_tol;
    cfg.abs_tol = 1e-14;
    cfg.max_iter = 200000;
    std::printf("\ndrag table (sphere radius r=%g, n=%d per axis)\n", r, grid_n);
    std::printf("%10s %10s %14s %14s\n", "R", "R/r", "drag", "drag/(6*pi*r)");
    for (double R : Rs) {
        CellDragResult res = cell_stokes_drag(r, R, grid_n, cfg, {1.0, 0.0, 0.0},
                                              symmetry);
        std::printf("%10.4f %10.4f %14.8f %14.8f\n", R, R / r, res.drag,
                    res.drag / res.stokes_reference);
    }
    return kExitOk;
}

int cmd_audit(std::uint64_t seed, bool tamper) {
    std::vector<AuditCheck> checks = run_property_audit(seed, tamper);
    bool all_pass = true;
    for (const AuditCheck& c : checks) {
        std::printf("%s  %s (%s)\n", c.pass ? "PASS" : "FAIL", c.name.c_str(),
                    c.detail.c_str());
        all_pass = all_pass && c.pass;
    }
    return all_pass ? kExitOk : kExitCheckFailed;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"homogenlab: thermal flow around critical-size suspensions and "
                 "its Brinkman two-temperature limit"};
    app.require_subcommand(1);

    std::string config_path, out_override;
    int workers_override = 0;
    double eps_override = -1.0;

    auto add_common = [&](CLI::App* sub, bool needs_config) {
        auto* opt = sub->add_option("--config", config_path, "run configuration file");
        if (needs_config) opt->required();
        sub->add_option("--out", out_override, "output directory override");
        sub->add_option("--workers", workers_override,
                        "concurrent sweep workers (default HOMOGENLAB_WORKERS or 1)");
    };

    CLI::App* macro = app.add_subcommand("macro", "solve the homogenized system");
    add_common(macro, true);
    CLI::App* micro = app.add_subcommand("micro", "solve the perforated system");
    add_common(micro, true);
    micro->add_option("--eps", eps_override, "period (default: first sweep entry)");
    CLI::App* converge =
        app.add_subcommand("converge", "epsilon-sweep convergence study");
    add_common(converge, true);

    CLI::App* cell = app.add_subcommand("cell", "cell-problem drag diagnostics");
    double cell_r = 1.0;
    std::vector<double> cell_R{4.0};
    int cell_n = 48;
    bool no_symmetry = false;
    double cell_tol = 1e-8;
    cell->add_option("--r", cell_r, "sphere radius")->required();
    cell->add_option("--R", cell_R, "outer half-widths (sweep)")->required();
    cell->add_option("--n", cell_n, "cells per axis")->required();
    cell->add_flag("--no-symmetry", no_symmetry, "disable the mirror-symmetry solve");
    cell->add_option("--tol", cell_tol, "solver relative tolerance");

    CLI::App* audit = app.add_subcommand("audit", "randomized property audit");
    std::uint64_t audit_seed = 1;
    bool tamper = false;
    audit->add_option("--config", config_path, "take the seed from a config file");
    audit->add_option("--seed", audit_seed, "audit seed");
    audit->add_flag("--tamper-corrector", tamper,
                    "square the capacity profile (self-test)");

    CLI11_PARSE(app, argc, argv);

    try {
        if (cell->parsed()) return cmd_cell(cell_r, cell_R, cell_n, !no_symmetry, cell_tol);
        if (audit->parsed()) {
            std::uint64_t seed = audit_seed;
            if (!config_path.empty()) seed = parse_config_file(config_path).seed;
            return cmd_audit(seed, tamper);
        }
        RunConfig cfg = parse_config_file(config_path);
        std::string out = out_override.empty() ? cfg.out_dir : out_override;
        int workers = workers_override > 0 ? workers_override : cfg.workers;
        if (macro->parsed()) return cmd_macro(cfg, out);
        if (micro->parsed()) return cmd_micro(cfg, out, eps_override);
        if (converge->parsed()) return cmd_converge(cfg, out, workers);
    } catch (const std::exception& e) {
        return map_exception(e);
    }
    return kExitValidation;
}
