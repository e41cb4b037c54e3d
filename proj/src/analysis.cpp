#include "homogenlab/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <random>
#include <sstream>

namespace homogen {

double corrector_profile(double r, double r1, double r2) {
    if (!(r1 > 0.0) || !(r2 > r1)) throw DomainError("corrector: need 0 < r1 < r2");
    double tol = 1e-12 * r2;
    if (r < r1 - tol || r > r2 + tol)
        throw DomainError("corrector: radius outside the annulus");
    return r1 / (r2 - r1) * (r2 / r - 1.0);
}

double radial_profile_energy(const std::function<double(double)>& profile,
                             double r1, double r2, int quad_n) {
    if (!(r1 > 0.0) || !(r2 > r1)) throw DomainError("energy: need 0 < r1 < r2");
    if (quad_n < 2) throw DomainError("energy: need at least 2 quadrature nodes");
    double dr = (r2 - r1) / quad_n;
    double sum = 0.0;
    for (int i = 0; i < quad_n; ++i) {
        double r = r1 + (i + 0.5) * dr;
        double step = 1e-7 * std::max(r, r1);
        double grad = (profile(r + step) - profile(r - step)) / (2.0 * step);
        sum += grad * grad * 4.0 * M_PI * r * r;
    }
    return sum * dr;
}

double corrector_energy(double r1, double r2, int quad_n) {
    auto w = [r1, r2](double r) { return r1 / (r2 - r1) * (r2 / r - 1.0); };
    return radial_profile_energy(w, r1, r2, quad_n);
}

ScalarField build_w_eps_field(const PerforatedDomain& dom) {
    const GridSpec& g = dom.grid;
    ScalarField w(g);
    bool degenerate = dom.annulus_degenerate();
    for (int k = 0; k < g.n[2]; ++k)
        for (int j = 0; j < g.n[1]; ++j)
            for (int i = 0; i < g.n[0]; ++i) {
                Vec3 x = g.cell_center(i, j, k);
                int b = dom.nearest_center(x);
                if (b < 0) continue;
                const Vec3& c = dom.centers[b];
                double d2 = 0.0;
                for (int d = 0; d < 3; ++d) d2 += (x[d] - c[d]) * (x[d] - c[d]);
                double dist = std::sqrt(d2);
                if (dist <= dom.r_eps)
                    w.at(i, j, k) = 1.0;
                else if (!degenerate && dist < dom.R_eps)
                    w.at(i, j, k) = corrector_profile(dist, dom.r_eps, dom.R_eps);
            }
    return w;
}

double sphere_surface_average(const ScalarField& field, const Vec3& center,
                              double radius, int quad_order) {
    const GridSpec& g = field.grid;
    if (radius <= 0.0) throw DomainError("sphere average: radius must be positive");
    for (int d = 0; d < 3; ++d) {
        if (center[d] - radius < g.box.lo[d] - 1e-12 ||
            center[d] + radius > g.box.hi[d] + 1e-12)
            throw SphereOutOfDomain("sphere average: sphere leaves the box");
    }
    if (radius < g.max_h())
        std::fprintf(stderr,
                     "warning: sphere average radius %g below grid spacing %g\n",
                     radius, g.max_h());
    if (quad_order < 2) quad_order = 2;

    int n_lat = quad_order;
    int n_lon = 2 * quad_order;
    double sum = 0.0, wsum = 0.0;
    for (int i = 0; i < n_lat; ++i) {
        double theta = M_PI * (i + 0.5) / n_lat;
        double st = std::sin(theta), ct = std::cos(theta);
        for (int j = 0; j < n_lon; ++j) {
            double phi = 2.0 * M_PI * (j + 0.5) / n_lon;
            Vec3 x = {center[0] + radius * st * std::cos(phi),
                      center[1] + radius * st * std::sin(phi),
                      center[2] + radius * ct};
            sum += st * field.interpolate(x);
            wsum += st;
        }
    }
    return sum / wsum;
}

std::pair<ScalarField, ScalarField> build_tilde_fields(const ScalarField& theta,
                                                       const PerforatedDomain& dom,
                                                       int quad_order) {
    if (!theta.grid.same_as(dom.grid))
        throw GridMismatch("tilde fields: theta grid differs from domain grid");
    std::size_t nb = dom.centers.size();
    std::vector<double> avg_r(nb), avg_R(nb);
    bool degenerate = dom.annulus_degenerate();
    for (std::size_t b = 0; b < nb; ++b) {
        avg_r[b] = sphere_surface_average(theta, dom.centers[b], dom.r_eps, quad_order);
        avg_R[b] = degenerate ? avg_r[b]
                              : sphere_surface_average(theta, dom.centers[b],
                                                       dom.R_eps, quad_order);
    }

    const GridSpec& g = dom.grid;
    ScalarField tilde_tau(g), tilde_theta(g);
    double half = 0.5 * dom.epsilon * (1.0 + 1e-12);
    for (int k = 0; k < g.n[2]; ++k)
        for (int j = 0; j < g.n[1]; ++j)
            for (int i = 0; i < g.n[0]; ++i) {
                Vec3 x = g.cell_center(i, j, k);
                int b = dom.nearest_center(x);
                if (b < 0) continue;
                const Vec3& c = dom.centers[b];
                bool inside = true;
                for (int d = 0; d < 3; ++d)
                    if (std::abs(x[d] - c[d]) > half) inside = false;
                if (!inside) continue;
                tilde_tau.at(i, j, k) = avg_r[b];
                tilde_theta.at(i, j, k) = avg_R[b];
            }
    return {std::move(tilde_tau), std::move(tilde_theta)};
}

double MeasureWeights::total() const {
    double s = 0.0;
    for (const auto& e : entries) s += e.second;
    return s;
}

MeasureWeights build_measure_weights(const PerforatedDomain& dom, MeasureMode mode) {
    MeasureWeights w;
    w.grid = dom.grid;
    w.mode = mode;
    double vc = dom.grid.cell_volume();
    double ratio = dom.epsilon / dom.r_eps;
    double voxel_weight = (3.0 / (4.0 * M_PI)) * ratio * ratio * ratio * vc;
    double eps3 = dom.epsilon * dom.epsilon * dom.epsilon;

    std::vector<long> ball_cells(dom.centers.size(), 0);
    for (long c = 0; c < (long)dom.phase.size(); ++c)
        if (dom.cell_ball[c] >= 0) ball_cells[dom.cell_ball[c]]++;

    for (long c = 0; c < (long)dom.phase.size(); ++c) {
        std::int32_t b = dom.cell_ball[c];
        if (b < 0) continue;
        double weight = (mode == MeasureMode::Voxel) ? voxel_weight
                                                     : eps3 / (double)ball_cells[b];
        w.entries.emplace_back(c, weight);
    }
    return w;
}

double measure_integral(const ScalarField& field, const MeasureWeights& w) {
    if (!field.grid.same_as(w.grid))
        throw GridMismatch("measure integral: field grid differs from weights grid");
    double s = 0.0;
    for (const auto& e : w.entries) s += e.second * field.values[e.first];
    return s;
}

GradientSplit gradient_energy_split(const ScalarField& theta,
                                    const PerforatedDomain& dom) {
    if (!theta.grid.same_as(dom.grid))
        throw GridMismatch("gradient split: theta grid differs from domain grid");
    const GridSpec& g = dom.grid;
    double vc = g.cell_volume();
    GradientSplit out;
    bool has_annulus = !dom.annulus_degenerate();

    for (int m = 0; m < 3; ++m) {
        double ih = 1.0 / g.h[m];
        for (int k = 0; k < g.n[2]; ++k)
            for (int j = 0; j < g.n[1]; ++j)
                for (int i = 0; i < g.n[0]; ++i) {
                    Int3 c{i, j, k};
                    if (c[m] == 0) continue;  // pair with the lower neighbor
                    Int3 a = c;
                    a[m] -= 1;
                    long ca = g.cell_index(a[0], a[1], a[2]);
                    long cb = g.cell_index(c[0], c[1], c[2]);
                    double diff = (theta.values[cb] - theta.values[ca]) * ih;
                    double e = diff * diff * vc;
                    bool sa = dom.is_solid(ca), sb = dom.is_solid(cb);
                    if (sa && sb)
                        out.solid += e;
                    else
                        out.fluid += e;
                    if (has_annulus) {
                        Vec3 fx = g.cell_center(c[0], c[1], c[2]);
                        fx[m] -= 0.5 * g.h[m];
                        int bidx = dom.nearest_center(fx);
                        if (bidx >= 0) {
                            const Vec3& cc = dom.centers[bidx];
                            double d2 = 0.0;
                            for (int d = 0; d < 3; ++d)
                                d2 += (fx[d] - cc[d]) * (fx[d] - cc[d]);
                            double dist = std::sqrt(d2);
                            if (dist > dom.r_eps && dist < dom.R_eps) out.annulus += e;
                        }
                    }
                }
    }
    // Half-cell wall terms of the homogeneous Dirichlet energy.
    for (int m = 0; m < 3; ++m) {
        double ih2 = 1.0 / (g.h[m] * g.h[m]);
        for (int k = 0; k < g.n[2]; ++k)
            for (int j = 0; j < g.n[1]; ++j)
                for (int i = 0; i < g.n[0]; ++i) {
                    Int3 c{i, j, k};
                    int sides = (c[m] == 0 ? 1 : 0) + (c[m] == g.n[m] - 1 ? 1 : 0);
                    if (!sides) continue;
                    double v = theta.at(i, j, k);
                    out.fluid += sides * 2.0 * v * v * ih2 * vc;
                }
    }
    return out;
}

InequalityRatios inequality_ratios(const ScalarField& theta,
                                   const PerforatedDomain& dom) {
    GradientSplit grad = gradient_energy_split(theta, dom);
    double grad_total = grad.total();
    if (grad_total == 0.0)
        throw ZeroGradient("inequality ratios: theta has zero discrete gradient");

    auto [tilde_tau, tilde_theta] = build_tilde_fields(theta, dom);
    const GridSpec& g = dom.grid;
    double vc = g.cell_volume();

    double n17 = 0.0, n18 = 0.0, n19 = 0.0;
    for (long c = 0; c < (long)theta.values.size(); ++c) {
        double d17 = theta.values[c] - tilde_theta.values[c];
        n17 += d17 * d17 * vc;
        double d19 = tilde_theta.values[c] - tilde_tau.values[c];
        n19 += d19 * d19 * vc;
        if (dom.is_solid(c)) {
            double d18 = theta.values[c] - tilde_tau.values[c];
            n18 += d18 * d18 * vc;
        }
    }

    double eps3 = dom.epsilon * dom.epsilon * dom.epsilon;
    InequalityRatios out;
    out.ratio17 = n17 / ((eps3 / dom.R_eps) * grad_total);
    out.ratio18 = grad.solid > 0.0 ? n18 / (dom.r_eps * dom.r_eps * grad.solid) : 0.0;
    out.ratio19 = (!dom.annulus_degenerate() && grad.annulus > 0.0)
                      ? n19 / ((eps3 / dom.r_eps) * grad.annulus)
                      : 0.0;

    MeasureWeights w = build_measure_weights(dom, MeasureMode::Analytic);
    ScalarField theta_sq(g);
    for (long c = 0; c < (long)theta.values.size(); ++c)
        theta_sq.values[c] = theta.values[c] * theta.values[c];
    double mass = measure_integral(theta_sq, w);
    out.ratio_p24 = mass / (std::max(1.0, eps3 / dom.r_eps) * grad_total);
    return out;
}

CellDragResult cell_stokes_drag(double r, double R, int grid_n,
                                const SolverConfig& cfg,
                                const Vec3& boundary_velocity,
                                bool use_mirror_symmetry) {
    if (!(r > 0.0)) throw DomainError("cell drag: radius must be positive");
    if (R < 4.0 * r) throw DomainError("cell drag: need R >= 4r");
    double h = 2.0 * R / grid_n;
    if (r < 4.0 * h) {
        int suggested = (int)std::ceil(8.0 * R / r);
        std::ostringstream os;
        os << "cell drag: sphere radius " << r << " needs at least 4 cells, n >= "
           << suggested;
        throw UnresolvedSphere(os.str(), suggested);
    }

    int flow_axis = -1;
    int nonzero = 0;
    for (int d = 0; d < 3; ++d)
        if (boundary_velocity[d] != 0.0) {
            flow_axis = d;
            ++nonzero;
        }
    if (nonzero == 0) throw DomainError("cell drag: boundary velocity is zero");
    bool symmetric = use_mirror_symmetry && nonzero == 1 && grid_n % 2 == 0;

    BoxDomain box;
    Int3 cells;
    WallSet walls;
    for (int d = 0; d < 3; ++d)
        for (int s = 0; s < 2; ++s) walls.side[d][s].velocity = boundary_velocity;
    if (symmetric) {
        for (int d = 0; d < 3; ++d) {
            if (d == flow_axis) {
                box.lo[d] = -R;
                box.hi[d] = R;
                cells[d] = grid_n;
            } else {
                box.lo[d] = 0.0;
                box.hi[d] = R;
                cells[d] = grid_n / 2;
                walls.side[d][0].type = WallBC::Type::Symmetry;
            }
        }
    } else {
        for (int d = 0; d < 3; ++d) {
            box.lo[d] = -R;
            box.hi[d] = R;
            cells[d] = grid_n;
        }
    }
    GridSpec grid(box, cells);

    std::vector<std::uint8_t> phase(grid.cell_count(), (std::uint8_t)Phase::Fluid);
    double r2 = r * r;
    for (int k = 0; k < grid.n[2]; ++k)
        for (int j = 0; j < grid.n[1]; ++j)
            for (int i = 0; i < grid.n[0]; ++i) {
                Vec3 x = grid.cell_center(i, j, k);
                if (x[0] * x[0] + x[1] * x[1] + x[2] * x[2] <= r2)
                    phase[grid.cell_index(i, j, k)] = (std::uint8_t)Phase::Solid;
            }

    StokesOperator op = build_stokes_operator(grid, &phase, walls, 0.0);
    if (op.n_fluid == (std::int64_t)phase.size())
        throw UnresolvedSphere("cell drag: voxelization produced no solid cells",
                               grid_n * 2);
    StokesSolution sol = solve_stokes_system(op, VectorFieldMAC(grid), cfg);

    auto solid_at = [&](int i, int j, int k) {
        if (i < 0 || j < 0 || k < 0 || i >= grid.n[0] || j >= grid.n[1] ||
            k >= grid.n[2])
            return false;
        return phase[grid.cell_index(i, j, k)] == (std::uint8_t)Phase::Solid;
    };

    // Momentum-balance reaction: full-stencil residual of the momentum
    // equation summed over every face of the Solid cells. Interior terms
    // telescope away, leaving the interface fluxes; the pressure entries of
    // the Solid cells cancel identically, so the zero-filled extension of
    // the fluid pressure is exact here.
    Vec3 force{0.0, 0.0, 0.0};
    double vc = grid.cell_volume();
    for (int d = 0; d < 3; ++d) {
        Int3 dims = grid.face_dims(d);
        for (int k = 0; k < dims[2]; ++k)
            for (int j = 0; j < dims[1]; ++j)
                for (int i = 0; i < dims[0]; ++i) {
                    Int3 p{i, j, k};
                    Int3 cm = p, cp = p;
                    cm[d] -= 1;
                    bool sm = solid_at(cm[0], cm[1], cm[2]);
                    bool sp = solid_at(cp[0], cp[1], cp[2]);
                    if (!sm && !sp) continue;
                    double ub = sol.u.comp[d][grid.face_index(d, i, j, k)];
                    double res = 0.0;
                    for (int m = 0; m < 3; ++m) {
                        double ih2 = 1.0 / (grid.h[m] * grid.h[m]);
                        for (int s = -1; s <= 1; s += 2) {
                            Int3 nb = p;
                            nb[m] += s;
                            bool outside =
                                (m == d) ? (nb[m] < 0 || nb[m] > grid.n[m])
                                         : (nb[m] < 0 || nb[m] >= grid.n[m]);
                            if (outside) {
                                const WallBC& wbc = walls.side[m][s < 0 ? 0 : 1];
                                if (wbc.type == WallBC::Type::NoSlip)
                                    res += 2.0 * (ub - wbc.velocity[d]) * ih2;
                                continue;
                            }
                            double un =
                                sol.u.comp[d][grid.face_index(d, nb[0], nb[1], nb[2])];
                            res += (ub - un) * ih2;
                        }
                    }
                    // Pressure gradient across the face, solid side zero.
                    double pm = (cm[d] >= 0) ? sol.p.at(cm[0], cm[1], cm[2]) : 0.0;
                    double pp = (cp[d] < grid.n[d]) ? sol.p.at(cp[0], cp[1], cp[2]) : 0.0;
                    res += (pp - pm) / grid.h[d];
                    force[d] += res * vc;
                }
    }
    for (int d = 0; d < 3; ++d) force[d] = -force[d];
    if (symmetric) {
        force[flow_axis] *= 4.0;
        for (int d = 0; d < 3; ++d)
            if (d != flow_axis) force[d] = 0.0;
    }

    double emag = std::sqrt(boundary_velocity[0] * boundary_velocity[0] +
                            boundary_velocity[1] * boundary_velocity[1] +
                            boundary_velocity[2] * boundary_velocity[2]);
    CellDragResult out;
    out.force = force;
    out.drag = (force[0] * boundary_velocity[0] + force[1] * boundary_velocity[1] +
                force[2] * boundary_velocity[2]) /
               emag;
    out.stokes_reference = 6.0 * M_PI * r * emag;
    out.grid_n = grid_n;
    return out;
}

std::vector<ScalarField> standard_test_functions(const GridSpec& grid) {
    std::vector<ScalarField> fns;
    fns.push_back(sample_source(SourceSpec::constant(1.0), grid));
    fns.push_back(sample_source(SourceSpec::product_sine(grid.box, 1.0), grid));
    Vec3 center;
    double min_extent = 1e300;
    for (int d = 0; d < 3; ++d) {
        center[d] = 0.5 * (grid.box.lo[d] + grid.box.hi[d]);
        min_extent = std::min(min_extent, grid.box.extent(d));
    }
    fns.push_back(
        sample_source(SourceSpec::gaussian(1.0, center, 0.15 * min_extent), grid));
    return fns;
}

ConvergenceRow micro_macro_errors(const MicroSolution& micro,
                                  const MacroSolution& macro,
                                  const PerforatedDomain& dom,
                                  const std::vector<ScalarField>& test_functions,
                                  double kappa_solid) {
    if (!micro.theta.grid.same_as(macro.theta.grid) ||
        !micro.theta.grid.same_as(dom.grid))
        throw GridMismatch("micro/macro comparison needs a common grid");
    for (const ScalarField& f : test_functions)
        if (!f.grid.same_as(dom.grid))
            throw GridMismatch("test function grid differs from domain grid");

    ConvergenceRow row;
    row.eps = dom.epsilon;
    row.r_eps = dom.r_eps;
    row.n = dom.grid.n[0];
    row.err_theta_l2 = l2_diff(micro.theta, macro.theta);
    row.err_u_l2 = l2_diff(micro.u, macro.u);
    row.picard_iters = micro.picard_iters;

    MeasureWeights w = build_measure_weights(dom, MeasureMode::Analytic);
    row.measure_mass = w.total();
    const GridSpec& g = dom.grid;
    double vc = g.cell_volume();
    std::size_t nphi = std::min<std::size_t>(3, test_functions.size());
    for (std::size_t q = 0; q < nphi; ++q) {
        const ScalarField& phi = test_functions[q];
        ScalarField prod(g);
        double tau_int = 0.0;
        for (long c = 0; c < (long)prod.values.size(); ++c) {
            prod.values[c] = micro.theta.values[c] * phi.values[c];
            tau_int += macro.tau.values[c] * phi.values[c] * vc;
        }
        row.gap_phi[q] = std::abs(measure_integral(prod, w) - tau_int);
    }

    InequalityRatios ratios = inequality_ratios(micro.theta, dom);
    row.ratio17 = ratios.ratio17;
    row.ratio18 = ratios.ratio18;
    row.ratio19 = ratios.ratio19;
    row.ratio_p24 = ratios.ratio_p24;

    GradientSplit split = gradient_energy_split(micro.theta, dom);
    row.apriori_energy = split.fluid + kappa_solid * split.solid;
    return row;
}

// ---------------------------------------------------------------------------
// Property audit

namespace {

struct AuditRng {
    std::mt19937_64 gen;
    explicit AuditRng(std::uint64_t seed) : gen(seed) {}
    double uniform(double a, double b) {
        std::uniform_real_distribution<double> d(a, b);
        return d(gen);
    }
    int uniform_int(int a, int b) {
        std::uniform_int_distribution<int> d(a, b);
        return d(gen);
    }
};

ScalarField random_sine_field(const GridSpec& g, AuditRng& rng, int modes) {
    struct Mode {
        Int3 k;
        double c;
    };
    std::vector<Mode> ms(modes);
    for (auto& m : ms) {
        m.k = {rng.uniform_int(1, 3), rng.uniform_int(1, 3), rng.uniform_int(1, 3)};
        m.c = rng.uniform(-1.0, 1.0);
    }
    ScalarField f(g);
    for (int k = 0; k < g.n[2]; ++k)
        for (int j = 0; j < g.n[1]; ++j)
            for (int i = 0; i < g.n[0]; ++i) {
                Vec3 x = g.cell_center(i, j, k);
                double v = 0.0;
                for (const auto& m : ms) {
                    double t = m.c;
                    for (int d = 0; d < 3; ++d)
                        t *= std::sin(M_PI * m.k[d] * (x[d] - g.box.lo[d]) /
                                      g.box.extent(d));
                    v += t;
                }
                f.at(i, j, k) = v;
            }
    return f;
}

AuditCheck check_corrector_equality(AuditRng& rng, bool tamper) {
    AuditCheck chk;
    chk.name = "capacity profile attains the annulus bound";
    std::vector<std::pair<double, double>> pairs = {{1.0, 2.0}, {1.0, 10.0}, {0.5, 3.0}};
    for (int t = 0; t < 5; ++t) {
        double r1 = rng.uniform(0.1, 2.0);
        pairs.emplace_back(r1, r1 * rng.uniform(1.5, 30.0));
    }
    double worst = 0.0;
    for (auto [r1, r2] : pairs) {
        std::function<double(double)> prof;
        if (tamper)
            prof = [r1, r2](double r) {
                double w = r1 / (r2 - r1) * (r2 / r - 1.0);
                return w * w;
            };
        else
            prof = [r1, r2](double r) { return r1 / (r2 - r1) * (r2 / r - 1.0); };
        double e = radial_profile_energy(prof, r1, r2, 2000);
        double ratio = e * (r2 - r1) / (4.0 * M_PI * r1 * r2);
        worst = std::max(worst, std::abs(ratio - 1.0));
    }
    chk.worst = worst;
    chk.pass = worst <= 1e-3;
    std::ostringstream os;
    os << "max |energy ratio - 1| = " << worst;
    chk.detail = os.str();
    return chk;
}

AuditCheck check_capacity_inequality(AuditRng& rng) {
    AuditCheck chk;
    chk.name = "annulus capacity inequality, random radial profiles";
    double worst_margin = 1e300;
    for (int t = 0; t < 20; ++t) {
        double r1 = rng.uniform(0.1, 1.0);
        double r2 = r1 * rng.uniform(1.5, 20.0);
        int interior = rng.uniform_int(2, 6);
        std::vector<double> radii{r1};
        for (int q = 0; q < interior; ++q) radii.push_back(rng.uniform(r1, r2));
        radii.push_back(r2);
        std::sort(radii.begin(), radii.end());
        std::vector<double> vals(radii.size());
        for (auto& v : vals) v = rng.uniform(-1.0, 1.0);

        // Exact piecewise integral of (v')^2 * 4 pi r^2.
        double energy = 0.0;
        for (std::size_t s = 0; s + 1 < radii.size(); ++s) {
            double a = radii[s], b = radii[s + 1];
            if (b <= a) continue;
            double slope = (vals[s + 1] - vals[s]) / (b - a);
            energy += slope * slope * (4.0 * M_PI / 3.0) * (b * b * b - a * a * a);
        }
        double bound = 4.0 * M_PI * r1 * r2 / (r2 - r1);
        double diff = vals.back() - vals.front();
        double margin = (energy - bound * diff * diff) / (1.0 + energy);
        worst_margin = std::min(worst_margin, margin);
    }
    chk.worst = worst_margin;
    chk.pass = worst_margin >= -1e-12;
    std::ostringstream os;
    os << "min normalized margin = " << worst_margin;
    chk.detail = os.str();
    return chk;
}

AuditCheck check_tilde_identity(AuditRng& rng) {
    AuditCheck chk;
    chk.name = "piecewise-constant fields: box and measure norms agree";
    BoxDomain box;
    GridSpec grid(box, {48, 48, 48});
    PerforatedDomain dom = build_perforated_domain(box, 0.25, 4.0, grid);
    MeasureWeights w = build_measure_weights(dom, MeasureMode::Analytic);
    double vc = grid.cell_volume();
    double worst = 0.0;
    for (int t = 0; t < 10; ++t) {
        ScalarField theta = random_sine_field(grid, rng, 3);
        auto [tilde_tau, tilde_theta] = build_tilde_fields(theta, dom);
        ScalarField sq(grid);
        double lhs = 0.0;
        for (long c = 0; c < (long)sq.values.size(); ++c) {
            sq.values[c] = tilde_tau.values[c] * tilde_tau.values[c];
            lhs += sq.values[c] * vc;
        }
        double rhs = measure_integral(sq, w);
        double rel = std::abs(lhs - rhs) / std::max(lhs, 1e-30);
        worst = std::max(worst, rel);
    }
    chk.worst = worst;
    chk.pass = worst <= 0.01;
    std::ostringstream os;
    os << "max relative gap = " << worst;
    chk.detail = os.str();
    return chk;
}

AuditCheck check_ball_oscillation_bound(AuditRng& rng) {
    AuditCheck chk;
    chk.name = "ball oscillation bound, (R, alpha) sweep";
    BoxDomain box{{-1.0, -1.0, -1.0}, {1.0, 1.0, 1.0}};
    GridSpec grid(box, {32, 32, 32});
    ScalarField u = random_sine_field(grid, rng, 3);
    double vc = grid.cell_volume();

    std::vector<double> ratios;
    for (double R : {0.6, 0.9}) {
        for (double alpha : {0.25, 0.5, 0.8}) {
            double avg = sphere_surface_average(u, {0.0, 0.0, 0.0}, alpha * R);
            double num = 0.0;
            double grad = 0.0;
            for (int k = 0; k < grid.n[2]; ++k)
                for (int j = 0; j < grid.n[1]; ++j)
                    for (int i = 0; i < grid.n[0]; ++i) {
                        Vec3 x = grid.cell_center(i, j, k);
                        double d2 = x[0] * x[0] + x[1] * x[1] + x[2] * x[2];
                        if (d2 > R * R) continue;
                        double d = u.at(i, j, k) - avg;
                        num += d * d * vc;
                        Int3 c{i, j, k};
                        for (int m = 0; m < 3; ++m) {
                            if (c[m] == 0) continue;
                            Int3 a = c;
                            a[m] -= 1;
                            Vec3 xa = grid.cell_center(a[0], a[1], a[2]);
                            if (xa[0] * xa[0] + xa[1] * xa[1] + xa[2] * xa[2] > R * R)
                                continue;
                            double diff =
                                (u.at(i, j, k) - u.at(a[0], a[1], a[2])) / grid.h[m];
                            grad += diff * diff * vc;
                        }
                    }
            if (grad > 0.0) ratios.push_back(num / (R * R / alpha * grad));
        }
    }
    double lo = *std::min_element(ratios.begin(), ratios.end());
    double hi = *std::max_element(ratios.begin(), ratios.end());
    chk.worst = hi / lo;
    chk.pass = std::isfinite(hi) && hi / lo < 10.0;
    std::ostringstream os;
    os << "ratio spread max/min = " << hi / lo;
    chk.detail = os.str();
    return chk;
}

AuditCheck check_measure_convergence() {
    AuditCheck chk;
    chk.name = "suspension measure converges against smooth test functions";
    BoxDomain box;
    GridSpec grid(box, {64, 64, 64});
    ScalarField phi = sample_source(SourceSpec::product_sine(box, 1.0), grid);
    double vc = grid.cell_volume();
    double ref = 0.0;
    for (double v : phi.values) ref += v * vc;

    std::vector<double> gaps, osc;
    for (double eps : {0.5, 1.0 / 3.0, 0.25}) {
        PerforatedDomain dom = build_perforated_domain(box, eps, 2.0, grid);
        MeasureWeights w = build_measure_weights(dom, MeasureMode::Analytic);
        gaps.push_back(std::abs(measure_integral(phi, w) - ref));

        // Per-period averages of phi, then the measure norm of the gap.
        auto counts = std::vector<double>(dom.centers.size(), 0.0);
        auto sums = std::vector<double>(dom.centers.size(), 0.0);
        double half = 0.5 * eps * (1.0 + 1e-12);
        for (int k = 0; k < grid.n[2]; ++k)
            for (int j = 0; j < grid.n[1]; ++j)
                for (int i = 0; i < grid.n[0]; ++i) {
                    Vec3 x = grid.cell_center(i, j, k);
                    int b = dom.nearest_center(x);
                    if (b < 0) continue;
                    bool inside = true;
                    for (int d = 0; d < 3; ++d)
                        if (std::abs(x[d] - dom.centers[b][d]) > half) inside = false;
                    if (!inside) continue;
                    counts[b] += 1.0;
                    sums[b] += phi.at(i, j, k);
                }
        ScalarField gapsq(grid);
        for (const auto& e : w.entries) {
            long c = e.first;
            std::int32_t b = dom.cell_ball[c];
            double avg = counts[b] > 0 ? sums[b] / counts[b] : 0.0;
            double d = phi.values[c] - avg;
            gapsq.values[c] = d * d;
        }
        osc.push_back(std::sqrt(measure_integral(gapsq, w)));
    }
    bool pass = true;
    for (std::size_t q = 1; q < gaps.size(); ++q)
        if (gaps[q] >= gaps[q - 1]) pass = false;
    for (std::size_t q = 1; q < osc.size(); ++q)
        if (osc[q] >= osc[q - 1]) pass = false;
    chk.pass = pass;
    chk.worst = gaps.back();
    std::ostringstream os;
    os << "measure gaps";
    for (double v : gaps) os << " " << v;
    os << "; oscillation";
    for (double v : osc) os << " " << v;
    chk.detail = os.str();
    return chk;
}

AuditCheck check_ratio_sweep() {
    AuditCheck chk;
    chk.name = "oscillation-estimate ratios stay bounded across epsilon";
    BoxDomain box;
    GridSpec grid(box, {64, 64, 64});
    ScalarField theta = sample_source(SourceSpec::product_sine(box, 1.0), grid);

    std::vector<InequalityRatios> rows;
    for (double eps : {0.5, 1.0 / 3.0, 0.25}) {
        PerforatedDomain dom = build_perforated_domain(box, eps, 2.0, grid);
        rows.push_back(inequality_ratios(theta, dom));
    }
    auto spread = [](std::vector<double> v) {
        v.erase(std::remove_if(v.begin(), v.end(),
                               [](double x) { return x <= 0.0; }),
                v.end());
        if (v.size() < 2) return 1.0;
        double lo = *std::min_element(v.begin(), v.end());
        double hi = *std::max_element(v.begin(), v.end());
        return hi / lo;
    };
    std::vector<double> r17, r18, r19, rp;
    for (const auto& r : rows) {
        r17.push_back(r.ratio17);
        r18.push_back(r.ratio18);
        r19.push_back(r.ratio19);
        rp.push_back(r.ratio_p24);
    }
    double worst = std::max({spread(r17), spread(r18), spread(r19), spread(rp)});
    chk.worst = worst;
    chk.pass = worst < 10.0;
    std::ostringstream os;
    os << "worst max/min spread = " << worst;
    chk.detail = os.str();
    return chk;
}

}  // namespace

std::vector<AuditCheck> run_property_audit(std::uint64_t seed, bool tamper_corrector) {
    AuditRng rng(seed);
    std::vector<AuditCheck> checks;
    checks.push_back(check_corrector_equality(rng, tamper_corrector));
    checks.push_back(check_capacity_inequality(rng));
    checks.push_back(check_tilde_identity(rng));
    checks.push_back(check_ball_oscillation_bound(rng));
    checks.push_back(check_measure_convergence());
    checks.push_back(check_ratio_sweep());
    return checks;
}

}  // namespace homogen
