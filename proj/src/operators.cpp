#include "homogenlab/operators.hpp"

#include <cmath>

namespace homogen {

namespace {

inline bool face_on_own_wall(const GridSpec& g, int axis, const Int3& p) {
    return p[axis] == 0 || p[axis] == g.n[axis];
}

// Slot order z-, y-, x-, self, x+, y+, z+ gives ascending column ids.
inline int slot_of(int m, int s) { return s < 0 ? (2 - m) : (4 + m); }

}  // namespace

double StokesOperator::fixed_face_value(int axis, int i, int j, int k) const {
    Int3 p{i, j, k};
    if (face_on_own_wall(grid, axis, p)) {
        const WallBC& w = walls.side[axis][p[axis] == 0 ? 0 : 1];
        return w.type == WallBC::Type::NoSlip ? w.velocity[axis] : 0.0;
    }
    return 0.0;  // solid-adjacent
}

std::vector<double> StokesOperator::gather_force(const VectorFieldMAC& force) const {
    std::vector<double> f(n_free, 0.0);
    for (int d = 0; d < 3; ++d) {
        const std::vector<std::int32_t>& ids = face_id[d];
        const std::vector<double>& src = force.comp[d];
        for (std::size_t q = 0; q < ids.size(); ++q)
            if (ids[q] >= 0) f[ids[q]] = src[q];
    }
    return f;
}

VectorFieldMAC StokesOperator::scatter_velocity(const std::vector<double>& u_free) const {
    VectorFieldMAC u(grid);
    for (int d = 0; d < 3; ++d) {
        Int3 dims = grid.face_dims(d);
        for (int k = 0; k < dims[2]; ++k)
            for (int j = 0; j < dims[1]; ++j)
                for (int i = 0; i < dims[0]; ++i) {
                    long q = grid.face_index(d, i, j, k);
                    std::int32_t id = face_id[d][q];
                    u.comp[d][q] = id >= 0 ? u_free[id] : fixed_face_value(d, i, j, k);
                }
    }
    return u;
}

std::vector<double> StokesOperator::gather_velocity(const VectorFieldMAC& u) const {
    std::vector<double> v(n_free, 0.0);
    for (int d = 0; d < 3; ++d)
        for (std::size_t q = 0; q < face_id[d].size(); ++q)
            if (face_id[d][q] >= 0) v[face_id[d][q]] = u.comp[d][q];
    return v;
}

ScalarField StokesOperator::scatter_pressure(const std::vector<double>& p) const {
    ScalarField out(grid);
    for (std::size_t c = 0; c < cell_id.size(); ++c)
        if (cell_id[c] >= 0) out.values[c] = p[cell_id[c]];
    return out;
}

std::vector<double> StokesOperator::gather_pressure(const ScalarField& p) const {
    std::vector<double> v(n_fluid, 0.0);
    for (std::size_t c = 0; c < cell_id.size(); ++c)
        if (cell_id[c] >= 0) v[cell_id[c]] = p.values[c];
    return v;
}

StokesOperator build_stokes_operator(const GridSpec& grid,
                                     const std::vector<std::uint8_t>* phase,
                                     const WallSet& walls, double zeroth_coeff) {
    StokesOperator op;
    op.grid = grid;
    if (phase) op.phase = *phase;
    op.walls = walls;
    op.zeroth_coeff = zeroth_coeff;

    auto solid = [&](int i, int j, int k) { return op.is_solid_cell(i, j, k); };

    // Number free faces: a face is fixed on walls and next to Solid cells.
    std::int32_t next = 0;
    for (int d = 0; d < 3; ++d) {
        Int3 dims = grid.face_dims(d);
        op.face_id[d].assign(grid.face_count(d), -1);
        for (int k = 0; k < dims[2]; ++k)
            for (int j = 0; j < dims[1]; ++j)
                for (int i = 0; i < dims[0]; ++i) {
                    Int3 p{i, j, k};
                    if (face_on_own_wall(grid, d, p)) continue;
                    Int3 cm = p, cp = p;
                    cm[d] -= 1;
                    if (solid(cm[0], cm[1], cm[2]) || solid(cp[0], cp[1], cp[2]))
                        continue;
                    op.face_id[d][grid.face_index(d, i, j, k)] = next++;
                }
    }
    op.n_free = next;

    // Pressure numbering over fluid cells.
    op.cell_id.assign(grid.cell_count(), -1);
    std::int32_t pnext = 0;
    for (int k = 0; k < grid.n[2]; ++k)
        for (int j = 0; j < grid.n[1]; ++j)
            for (int i = 0; i < grid.n[0]; ++i)
                if (!solid(i, j, k)) op.cell_id[grid.cell_index(i, j, k)] = pnext++;
    op.n_fluid = pnext;

    // Momentum matrix rows, one per free face, in numbering order.
    op.rhs_bc.assign(op.n_free, 0.0);
    CsrBuilder ab(op.n_free, op.n_free * 7);
    for (int d = 0; d < 3; ++d) {
        Int3 dims = grid.face_dims(d);
        for (int k = 0; k < dims[2]; ++k)
            for (int j = 0; j < dims[1]; ++j)
                for (int i = 0; i < dims[0]; ++i) {
                    std::int32_t row = op.face_id[d][grid.face_index(d, i, j, k)];
                    if (row < 0) continue;
                    Int3 p{i, j, k};
                    double diag = zeroth_coeff;
                    double rhs = 0.0;
                    std::int32_t cols[7];
                    double vals[7];
                    for (int s = 0; s < 7; ++s) cols[s] = -1;
                    for (int m = 0; m < 3; ++m) {
                        double ih2 = 1.0 / (grid.h[m] * grid.h[m]);
                        for (int s = -1; s <= 1; s += 2) {
                            Int3 nb = p;
                            nb[m] += s;
                            if (m != d && (nb[m] < 0 || nb[m] >= grid.n[m])) {
                                // Tangential wall at half spacing.
                                const WallBC& w = walls.side[m][s < 0 ? 0 : 1];
                                if (w.type == WallBC::Type::NoSlip) {
                                    diag += 2.0 * ih2;
                                    rhs += 2.0 * w.velocity[d] * ih2;
                                }
                                continue;
                            }
                            diag += ih2;
                            std::int32_t id =
                                op.face_id[d][grid.face_index(d, nb[0], nb[1], nb[2])];
                            if (id >= 0) {
                                int slot = slot_of(m, s);
                                cols[slot] = id;
                                vals[slot] = -ih2;
                            } else {
                                rhs += op.fixed_face_value(d, nb[0], nb[1], nb[2]) * ih2;
                            }
                        }
                    }
                    cols[3] = row;
                    vals[3] = diag;
                    for (int s = 0; s < 7; ++s)
                        if (cols[s] >= 0) ab.add(cols[s], vals[s]);
                    ab.finish_row();
                    op.rhs_bc[row] = rhs;
                }
    }
    op.A = ab.take();

    // Constraint matrix: B^T is the discrete pressure gradient, so a row of
    // B reads (u_low - u_high)/h per axis, i.e. minus the divergence.
    op.g_bc.assign(op.n_fluid, 0.0);
    CsrBuilder bb(op.n_fluid, op.n_fluid * 6);
    for (int k = 0; k < grid.n[2]; ++k)
        for (int j = 0; j < grid.n[1]; ++j)
            for (int i = 0; i < grid.n[0]; ++i) {
                std::int32_t row = op.cell_id[grid.cell_index(i, j, k)];
                if (row < 0) continue;
                Int3 c{i, j, k};
                double g = 0.0;
                for (int d = 0; d < 3; ++d) {
                    double ih = 1.0 / grid.h[d];
                    for (int s = 0; s <= 1; ++s) {
                        Int3 f = c;
                        f[d] += s;
                        double coeff = (s == 0) ? ih : -ih;
                        std::int32_t id =
                            op.face_id[d][grid.face_index(d, f[0], f[1], f[2])];
                        if (id >= 0)
                            bb.add(id, coeff);
                        else
                            g -= coeff * op.fixed_face_value(d, f[0], f[1], f[2]);
                    }
                }
                bb.finish_row();
                op.g_bc[row] = g;
            }
    op.B = bb.take();
    return op;
}

StokesSolution solve_stokes_system(const StokesOperator& op,
                                   const VectorFieldMAC& force,
                                   const SolverConfig& cfg,
                                   const VectorFieldMAC* u_warm,
                                   const ScalarField* p_warm) {
    std::vector<double> f = op.gather_force(force);
    axpy(1.0, op.rhs_bc, f);
    std::vector<double> u0, p0;
    if (u_warm) u0 = op.gather_velocity(*u_warm);
    if (p_warm) p0 = op.gather_pressure(*p_warm);
    UzawaResult res = uzawa_solve(op.A, op.B, f, cfg, &op.g_bc,
                                  u_warm ? &u0 : nullptr, p_warm ? &p0 : nullptr);
    StokesSolution out;
    out.u = op.scatter_velocity(res.velocity);
    out.p = op.scatter_pressure(res.pressure);
    out.iterations = res.iterations;
    out.residual = res.residual;
    out.inner_iterations = res.inner_iterations;
    return out;
}

ScalarField mac_divergence(const VectorFieldMAC& u) {
    const GridSpec& g = u.grid;
    ScalarField div(g);
    for (int k = 0; k < g.n[2]; ++k)
        for (int j = 0; j < g.n[1]; ++j)
            for (int i = 0; i < g.n[0]; ++i) {
                double s = (u.at(0, i + 1, j, k) - u.at(0, i, j, k)) / g.h[0] +
                           (u.at(1, i, j + 1, k) - u.at(1, i, j, k)) / g.h[1] +
                           (u.at(2, i, j, k + 1) - u.at(2, i, j, k)) / g.h[2];
                div.at(i, j, k) = s;
            }
    return div;
}

double max_divergence(const VectorFieldMAC& u, const std::vector<std::uint8_t>* phase) {
    ScalarField div = mac_divergence(u);
    double m = 0.0;
    for (long c = 0; c < (long)div.values.size(); ++c) {
        if (phase && (*phase)[c] == (std::uint8_t)Phase::Solid) continue;
        m = std::max(m, std::abs(div.values[c]));
    }
    return m;
}

VectorFieldMAC buoyancy_force(const ScalarField& theta, double rayleigh) {
    const GridSpec& g = theta.grid;
    VectorFieldMAC f(g);
    for (int k = 1; k < g.n[2]; ++k)
        for (int j = 0; j < g.n[1]; ++j)
            for (int i = 0; i < g.n[0]; ++i)
                f.at(2, i, j, k) =
                    rayleigh * 0.5 * (theta.at(i, j, k - 1) + theta.at(i, j, k));
    return f;
}

ThermalSystem assemble_thermal(const GridSpec& grid,
                               const std::vector<std::uint8_t>* phase,
                               double kappa_solid, const ScalarField& rhs,
                               const VectorFieldMAC* velocity,
                               AdvectionScheme scheme) {
    if (!std::isfinite(kappa_solid) || kappa_solid <= 0.0)
        throw NonFiniteCoefficient("thermal: bad solid conductivity");
    ThermalSystem sys;
    sys.has_advection = velocity && velocity->max_abs() > 0.0;

    auto solid = [&](long c) {
        return phase && (*phase)[c] == (std::uint8_t)Phase::Solid;
    };
    auto kappa = [&](long c) { return solid(c) ? kappa_solid : 1.0; };

    long n = grid.cell_count();
    CsrBuilder kb(n, n * 7);
    sys.rhs = rhs.values;

    for (int k = 0; k < grid.n[2]; ++k)
        for (int j = 0; j < grid.n[1]; ++j)
            for (int i = 0; i < grid.n[0]; ++i) {
                long row = grid.cell_index(i, j, k);
                double kc = kappa(row);
                double diag = 0.0;
                std::int64_t cols[7];
                double vals[7];
                for (int s = 0; s < 7; ++s) cols[s] = -1;
                Int3 c{i, j, k};
                for (int m = 0; m < 3; ++m) {
                    double ih2 = 1.0 / (grid.h[m] * grid.h[m]);
                    for (int s = -1; s <= 1; s += 2) {
                        Int3 nb = c;
                        nb[m] += s;
                        if (nb[m] < 0 || nb[m] >= grid.n[m]) {
                            diag += 2.0 * kc * ih2;  // theta = 0 at the wall
                            continue;
                        }
                        long nc = grid.cell_index(nb[0], nb[1], nb[2]);
                        double kf = 2.0 * kc * kappa(nc) / (kc + kappa(nc));
                        diag += kf * ih2;
                        int slot = slot_of(m, s);
                        cols[slot] = nc;
                        vals[slot] = -kf * ih2;
                    }
                }
                if (sys.has_advection && !solid(row)) {
                    for (int m = 0; m < 3; ++m) {
                        double ih = 1.0 / grid.h[m];
                        Int3 fl = c, fr = c;
                        fr[m] += 1;
                        double ul = velocity->comp[m][grid.face_index(m, fl[0], fl[1], fl[2])];
                        double ur = velocity->comp[m][grid.face_index(m, fr[0], fr[1], fr[2])];
                        Int3 nl = c, nr = c;
                        nl[m] -= 1;
                        nr[m] += 1;
                        if (scheme == AdvectionScheme::Upwind) {
                            if (ur >= 0.0) {
                                diag += ur * ih;
                            } else if (nr[m] < grid.n[m]) {
                                int slot = slot_of(m, 1);
                                vals[slot] += ur * ih;
                            }
                            if (ul >= 0.0) {
                                if (nl[m] >= 0) {
                                    int slot = slot_of(m, -1);
                                    vals[slot] -= ul * ih;
                                }
                            } else {
                                diag -= ul * ih;
                            }
                        } else {
                            diag += 0.5 * (ur - ul) * ih;
                            if (nr[m] < grid.n[m]) vals[slot_of(m, 1)] += 0.5 * ur * ih;
                            if (nl[m] >= 0) vals[slot_of(m, -1)] -= 0.5 * ul * ih;
                        }
                    }
                }
                cols[3] = row;
                vals[3] = diag;
                for (int s = 0; s < 7; ++s)
                    if (cols[s] >= 0) kb.add((std::int32_t)cols[s], vals[s]);
                kb.finish_row();
            }
    sys.K = kb.take();

    for (double v : sys.K.vals)
        if (!std::isfinite(v)) throw NonFiniteCoefficient("thermal: non-finite matrix entry");
    for (double v : sys.rhs)
        if (!std::isfinite(v)) throw NonFiniteCoefficient("thermal: non-finite rhs entry");
    return sys;
}

SolveResult solve_thermal(const ThermalSystem& sys, const SolverConfig& cfg,
                          const std::vector<double>* x0) {
    if (sys.has_advection) return bicgstab_solve(sys.K, sys.rhs, cfg, x0);
    return cg_solve(sys.K, sys.rhs, cfg, x0);
}

std::array<ScalarField, 3> mac_to_center(const VectorFieldMAC& u) {
    const GridSpec& g = u.grid;
    std::array<ScalarField, 3> out{ScalarField(g), ScalarField(g), ScalarField(g)};
    for (int k = 0; k < g.n[2]; ++k)
        for (int j = 0; j < g.n[1]; ++j)
            for (int i = 0; i < g.n[0]; ++i) {
                out[0].at(i, j, k) = 0.5 * (u.at(0, i, j, k) + u.at(0, i + 1, j, k));
                out[1].at(i, j, k) = 0.5 * (u.at(1, i, j, k) + u.at(1, i, j + 1, k));
                out[2].at(i, j, k) = 0.5 * (u.at(2, i, j, k) + u.at(2, i, j, k + 1));
            }
    return out;
}

}  // namespace homogen
