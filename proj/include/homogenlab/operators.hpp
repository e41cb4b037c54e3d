#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <vector>

#include "homogenlab/grid.hpp"
#include "homogenlab/linalg.hpp"

namespace homogen {

/// Boundary condition on one wall of the box. NoSlip prescribes the full
/// velocity vector on the wall; Symmetry is a mirror plane (zero normal
/// velocity, zero tangential shear).
struct WallBC {
    enum class Type { NoSlip, Symmetry };
    Type type = Type::NoSlip;
    Vec3 velocity{0.0, 0.0, 0.0};
};

/// Per-wall conditions, indexed [axis][0=low, 1=high].
struct WallSet {
    WallBC side[3][2];
    static WallSet no_slip() { return WallSet{}; }
};

/// Discrete Stokes/Brinkman operator on the MAC grid: momentum matrix A
/// (vector Laplacian plus optional zeroth-order coefficient) over free
/// faces, constraint matrix B with B^T the discrete pressure gradient,
/// and the lifting terms contributed by prescribed boundary velocities.
/// Faces on walls or touching Solid cells are eliminated as Dirichlet
/// unknowns.
struct StokesOperator {
    GridSpec grid;
    std::vector<std::uint8_t> phase;  // empty means all Fluid
    WallSet walls;
    double zeroth_coeff = 0.0;

    std::array<std::vector<std::int32_t>, 3> face_id;  // -1 for fixed faces
    std::int64_t n_free = 0;
    std::vector<std::int32_t> cell_id;  // pressure numbering, -1 for Solid
    std::int64_t n_fluid = 0;

    CsrMatrix A;
    CsrMatrix B;
    std::vector<double> rhs_bc;  // momentum rhs from prescribed boundary values
    std::vector<double> g_bc;    // constraint rhs from prescribed boundary fluxes

    bool is_solid_cell(int i, int j, int k) const {
        if (phase.empty()) return false;
        return phase[grid.cell_index(i, j, k)] == (std::uint8_t)Phase::Solid;
    }
    /// Prescribed value of a fixed face; 0 for solid-adjacent faces.
    double fixed_face_value(int axis, int i, int j, int k) const;

    std::vector<double> gather_force(const VectorFieldMAC& force) const;
    /// Full MAC field from the free-face vector, fixed faces filled with
    /// their prescribed values.
    VectorFieldMAC scatter_velocity(const std::vector<double>& u_free) const;
    std::vector<double> gather_velocity(const VectorFieldMAC& u) const;
    ScalarField scatter_pressure(const std::vector<double>& p) const;
    std::vector<double> gather_pressure(const ScalarField& p) const;
};

StokesOperator build_stokes_operator(const GridSpec& grid,
                                     const std::vector<std::uint8_t>* phase,
                                     const WallSet& walls, double zeroth_coeff);

struct StokesSolution {
    VectorFieldMAC u;
    ScalarField p;
    int iterations = 0;
    double residual = 0.0;
    long inner_iterations = 0;
};

/// Solve the saddle-point system for a body force, via uzawa_solve.
StokesSolution solve_stokes_system(const StokesOperator& op,
                                   const VectorFieldMAC& force,
                                   const SolverConfig& cfg,
                                   const VectorFieldMAC* u_warm = nullptr,
                                   const ScalarField* p_warm = nullptr);

/// Divergence of a full MAC field on every cell (fluid and solid alike).
ScalarField mac_divergence(const VectorFieldMAC& u);
/// Max |div u| over fluid cells.
double max_divergence(const VectorFieldMAC& u, const std::vector<std::uint8_t>* phase);

/// Buoyancy force a*theta on the vertical axis, averaged onto z-faces.
VectorFieldMAC buoyancy_force(const ScalarField& theta, double rayleigh);

enum class AdvectionScheme { Upwind, CenteredSkew };

struct ThermalSystem {
    CsrMatrix K;
    std::vector<double> rhs;
    bool has_advection = false;
};

/// Cell-centered advection-diffusion system: 7-point diffusion with
/// harmonic face conductivities (kappa = 1 on Fluid, kappa_solid on Solid),
/// flux-form advection using MAC face velocities, and homogeneous Dirichlet
/// walls imposed through half-cell face fluxes.
ThermalSystem assemble_thermal(const GridSpec& grid,
                               const std::vector<std::uint8_t>* phase,
                               double kappa_solid, const ScalarField& rhs,
                               const VectorFieldMAC* velocity,
                               AdvectionScheme scheme = AdvectionScheme::Upwind);

/// Solve an assembled thermal system; CG when it is symmetric, BiCGStab
/// otherwise.
SolveResult solve_thermal(const ThermalSystem& sys, const SolverConfig& cfg,
                          const std::vector<double>* x0 = nullptr);

/// Cell-center velocity components averaged from faces (for output).
std::array<ScalarField, 3> mac_to_center(const VectorFieldMAC& u);

}  // namespace homogen
