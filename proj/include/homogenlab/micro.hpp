#pragma once

#include "homogenlab/grid.hpp"
#include "homogenlab/linalg.hpp"
#include "homogenlab/operators.hpp"

namespace homogen {

/// Dimensionless physics: Rayleigh number a, conductivity coefficient b
/// (the solid conductivity is b*(eps/r_eps)^3), capacity parameter gamma,
/// and the two heat sources.
struct PhysicalParams {
    double a = 0.0;
    double b = 1.0;
    double gamma = 1.0;
    SourceSpec f;
    SourceSpec g;

    void validate() const {
        if (a < 0.0) throw DomainError("rayleigh number must be nonnegative");
        if (b <= 0.0) throw DomainError("conductivity coefficient must be positive");
        if (gamma <= 0.0) throw DomainError("gamma must be positive");
    }
};

/// Solid-phase conductivity b*(eps/r_eps)^3 for a given domain.
double solid_conductivity(const PerforatedDomain& dom, const PhysicalParams& p);

/// Converged state of the coupled micro problem. The temperature covers the
/// whole box (single field across both phases); velocity faces touching
/// Solid cells are exactly zero; pressure has zero mean over fluid cells.
struct MicroSolution {
    VectorFieldMAC u;
    ScalarField p;
    ScalarField theta;
    int picard_iters = 0;
    double picard_residual = 0.0;
};

/// Advection-diffusion system for the two-phase temperature at a frozen
/// velocity. Conductivity is 1 on Fluid and b*(eps/r)^3 on Solid with
/// harmonic face averaging; the rhs carries f on Fluid cells and the scaled
/// radiant source on Solid cells.
ThermalSystem assemble_thermal_micro(const PerforatedDomain& dom,
                                     const PhysicalParams& params,
                                     const VectorFieldMAC& u,
                                     AdvectionScheme scheme = AdvectionScheme::Upwind);

/// Stokes flow in the perforated box: no-slip on the walls and on every
/// face of a Solid cell.
StokesSolution solve_stokes_perforated(const PerforatedDomain& dom,
                                       const VectorFieldMAC& force,
                                       const SolverConfig& cfg);

/// Fixed-point alternation between the Stokes solve (buoyancy a*theta e3)
/// and the thermal solve, with under-relaxation on the temperature.
MicroSolution picard_micro(const PerforatedDomain& dom, const PhysicalParams& params,
                           const SolverConfig& cfg, double relax = 0.7,
                           int max_outer = 50);

}  // namespace homogen
