#include "homogenlab/grid.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace homogen {

GridSpec::GridSpec(const BoxDomain& b, Int3 cells) : n(cells), box(b) {
    for (int d = 0; d < 3; ++d) {
        if (b.hi[d] <= b.lo[d])
            throw DomainError("box extent must be positive on every axis");
        if (n[d] < 4) throw DomainError("grid must have at least 4 cells per axis");
        h[d] = (b.hi[d] - b.lo[d]) / n[d];
    }
}

long PerforatedDomain::solid_cell_count() const {
    long count = 0;
    for (std::uint8_t p : phase)
        if (p == (std::uint8_t)Phase::Solid) ++count;
    return count;
}

int PerforatedDomain::nearest_center(const Vec3& x) const {
    if (centers.empty()) return -1;
    Int3 k;
    for (int d = 0; d < 3; ++d) {
        int kd = (int)std::lround(x[d] / epsilon);
        k[d] = std::clamp(kd, k_lo[d], k_hi[d]);
    }
    Int3 cnt = k_counts();
    return ((k[2] - k_lo[2]) * cnt[1] + (k[1] - k_lo[1])) * cnt[0] + (k[0] - k_lo[0]);
}

PerforatedDomain build_perforated_domain(const BoxDomain& box, double epsilon,
                                         double gamma, const GridSpec& grid,
                                         RRule r_rule) {
    if (epsilon <= 0.0) throw DomainError("epsilon must be positive");
    if (gamma <= 0.0) throw DomainError("gamma must be positive");
    if (grid.box.lo != box.lo || grid.box.hi != box.hi)
        throw GridMismatch("grid does not cover the requested box");

    // The period should tile the box extents up to rounding.
    for (int d = 0; d < 3; ++d) {
        double ratio = box.extent(d) / epsilon;
        if (std::abs(ratio - std::lround(ratio)) > 1e-9 * std::max(1.0, ratio)) {
            std::ostringstream os;
            os << "epsilon " << epsilon << " does not divide box extent "
               << box.extent(d) << " on axis " << d;
            throw DomainError(os.str());
        }
    }

    PerforatedDomain dom;
    dom.box = box;
    dom.epsilon = epsilon;
    dom.gamma = gamma;
    dom.grid = grid;
    dom.r_eps = gamma * epsilon * epsilon * epsilon;

    double half = 0.5 * epsilon;
    if (dom.r_eps > half * (1.0 + 1e-12))
        throw DomainError("gamma*epsilon^3 exceeds epsilon/2; spheres would overlap");
    if (dom.r_eps < 2.0 * grid.max_h()) {
        // Smallest n that resolves the sphere on the widest axis of this box.
        double max_extent = std::max({box.extent(0), box.extent(1), box.extent(2)});
        int suggested = (int)std::ceil(2.0 * max_extent / dom.r_eps);
        std::ostringstream os;
        os << "sphere radius " << dom.r_eps << " smaller than 2*max(h)="
           << 2.0 * grid.max_h() << "; need at least n=" << suggested;
        throw UnresolvedSphere(os.str(), suggested);
    }

    // Intermediate radius: keep r_eps < R_eps < epsilon/2 whenever that
    // interval is nonempty, falling back to the midpoint when the rule's
    // value lands outside it. The borderline r_eps == epsilon/2 collapses
    // the interval and leaves a degenerate annulus.
    double R = 0.0;
    switch (r_rule) {
        case RRule::GeometricMean: R = std::sqrt(dom.r_eps * epsilon); break;
        case RRule::Midpoint: R = 0.5 * (dom.r_eps + half); break;
    }
    if (R >= half || R <= dom.r_eps) R = 0.5 * (dom.r_eps + half);
    dom.R_eps = std::max(R, dom.r_eps);

    // Lattice points whose period cell fits inside the closed box.
    double tol = 1e-9 * epsilon;
    for (int d = 0; d < 3; ++d) {
        dom.k_lo[d] = (int)std::ceil((box.lo[d] + half - tol) / epsilon);
        dom.k_hi[d] = (int)std::floor((box.hi[d] - half + tol) / epsilon);
        if (dom.k_hi[d] < dom.k_lo[d])
            throw EmptyDomain("no period cell fits inside the box");
    }
    for (int kz = dom.k_lo[2]; kz <= dom.k_hi[2]; ++kz)
        for (int ky = dom.k_lo[1]; ky <= dom.k_hi[1]; ++ky)
            for (int kx = dom.k_lo[0]; kx <= dom.k_hi[0]; ++kx)
                dom.centers.push_back({kx * epsilon, ky * epsilon, kz * epsilon});

    // Voxelize: a cell is Solid iff its center lies in some sphere. Each
    // solid cell remembers its sphere (ties resolved toward the first one
    // in lattice order).
    dom.phase.assign(grid.cell_count(), (std::uint8_t)Phase::Fluid);
    dom.cell_ball.assign(grid.cell_count(), -1);
    double r2 = dom.r_eps * dom.r_eps;
    for (std::size_t b = 0; b < dom.centers.size(); ++b) {
        const Vec3& c = dom.centers[b];
        Int3 ilo, ihi;
        for (int d = 0; d < 3; ++d) {
            ilo[d] = std::max(0, (int)std::floor((c[d] - dom.r_eps - box.lo[d]) / grid.h[d] - 0.5));
            ihi[d] = std::min(grid.n[d] - 1,
                              (int)std::ceil((c[d] + dom.r_eps - box.lo[d]) / grid.h[d] - 0.5));
        }
        for (int k = ilo[2]; k <= ihi[2]; ++k)
            for (int j = ilo[1]; j <= ihi[1]; ++j)
                for (int i = ilo[0]; i <= ihi[0]; ++i) {
                    Vec3 x = grid.cell_center(i, j, k);
                    double d2 = 0.0;
                    for (int d = 0; d < 3; ++d) d2 += (x[d] - c[d]) * (x[d] - c[d]);
                    long cell = grid.cell_index(i, j, k);
                    if (d2 <= r2 && dom.cell_ball[cell] < 0) {
                        dom.phase[cell] = (std::uint8_t)Phase::Solid;
                        dom.cell_ball[cell] = (std::int32_t)b;
                    }
                }
    }
    return dom;
}

double phase_volume(const PerforatedDomain& dom, Phase phase) {
    double balls = dom.centers.size() * (4.0 * M_PI / 3.0) * dom.r_eps * dom.r_eps * dom.r_eps;
    return phase == Phase::Solid ? balls : dom.box.volume() - balls;
}

double voxel_phase_volume(const PerforatedDomain& dom, Phase phase) {
    double v = dom.solid_cell_count() * dom.grid.cell_volume();
    return phase == Phase::Solid ? v : dom.box.volume() - v;
}

double ScalarField::interpolate(const Vec3& x) const {
    const GridSpec& g = grid;
    double w[3];
    int i0[3];
    for (int d = 0; d < 3; ++d) {
        double s = (x[d] - g.box.lo[d]) / g.h[d] - 0.5;  // cell-center coordinates
        s = std::clamp(s, 0.0, (double)(g.n[d] - 1));
        i0[d] = std::min((int)std::floor(s), g.n[d] - 2);
        i0[d] = std::max(i0[d], 0);
        w[d] = s - i0[d];
        if (g.n[d] == 1) { i0[d] = 0; w[d] = 0.0; }
    }
    double result = 0.0;
    for (int c = 0; c < 8; ++c) {
        int di = c & 1, dj = (c >> 1) & 1, dk = (c >> 2) & 1;
        double weight = (di ? w[0] : 1.0 - w[0]) * (dj ? w[1] : 1.0 - w[1]) *
                        (dk ? w[2] : 1.0 - w[2]);
        if (weight != 0.0)
            result += weight * at(i0[0] + di, i0[1] + dj, i0[2] + dk);
    }
    return result;
}

double VectorFieldMAC::max_abs() const {
    double m = 0.0;
    for (int d = 0; d < 3; ++d)
        for (double v : comp[d]) m = std::max(m, std::abs(v));
    return m;
}

double l2_norm(const ScalarField& f) {
    double s = 0.0;
    for (double v : f.values) s += v * v;
    return std::sqrt(s * f.grid.cell_volume());
}

double l2_norm(const VectorFieldMAC& u) {
    double s = 0.0;
    for (int d = 0; d < 3; ++d)
        for (double v : u.comp[d]) s += v * v;
    return std::sqrt(s * u.grid.cell_volume());
}

double l2_diff(const ScalarField& a, const ScalarField& b) {
    if (!a.grid.same_as(b.grid)) throw GridMismatch("scalar fields on different grids");
    double s = 0.0;
    for (std::size_t i = 0; i < a.values.size(); ++i) {
        double d = a.values[i] - b.values[i];
        s += d * d;
    }
    return std::sqrt(s * a.grid.cell_volume());
}

double l2_diff(const VectorFieldMAC& a, const VectorFieldMAC& b) {
    if (!a.grid.same_as(b.grid)) throw GridMismatch("vector fields on different grids");
    double s = 0.0;
    for (int d = 0; d < 3; ++d)
        for (std::size_t i = 0; i < a.comp[d].size(); ++i) {
            double diff = a.comp[d][i] - b.comp[d][i];
            s += diff * diff;
        }
    return std::sqrt(s * a.grid.cell_volume());
}

SourceSpec SourceSpec::constant(double amp) {
    SourceSpec s;
    s.kind = Kind::Constant;
    s.amplitude = amp;
    return s;
}

SourceSpec SourceSpec::gaussian(double amp, const Vec3& center, double width) {
    SourceSpec s;
    s.kind = Kind::Gaussian;
    s.amplitude = amp;
    s.center = center;
    s.width = width;
    return s;
}

SourceSpec SourceSpec::product_sine(const BoxDomain& box, double amp) {
    SourceSpec s;
    s.kind = Kind::ProductSine;
    s.amplitude = amp;
    s.sine_lo = box.lo;
    s.sine_len = {box.extent(0), box.extent(1), box.extent(2)};
    for (int d = 0; d < 3; ++d) s.center[d] = 0.5 * (box.lo[d] + box.hi[d]);
    return s;
}

double eval_source(const SourceSpec& s, const Vec3& x) {
    if (s.support_radius) {
        double d2 = 0.0;
        for (int d = 0; d < 3; ++d) d2 += (x[d] - s.center[d]) * (x[d] - s.center[d]);
        if (d2 > (*s.support_radius) * (*s.support_radius)) return 0.0;
    }
    switch (s.kind) {
        case SourceSpec::Kind::Constant:
            return s.amplitude;
        case SourceSpec::Kind::Gaussian: {
            double d2 = 0.0;
            for (int d = 0; d < 3; ++d) d2 += (x[d] - s.center[d]) * (x[d] - s.center[d]);
            return s.amplitude * std::exp(-d2 / (2.0 * s.width * s.width));
        }
        case SourceSpec::Kind::ProductSine: {
            double v = s.amplitude;
            for (int d = 0; d < 3; ++d)
                v *= std::sin(M_PI * (x[d] - s.sine_lo[d]) / s.sine_len[d]);
            return v;
        }
    }
    return 0.0;
}

ScalarField sample_source(const SourceSpec& s, const GridSpec& grid) {
    ScalarField f(grid);
    for (int k = 0; k < grid.n[2]; ++k)
        for (int j = 0; j < grid.n[1]; ++j)
            for (int i = 0; i < grid.n[0]; ++i)
                f.at(i, j, k) = eval_source(s, grid.cell_center(i, j, k));
    return f;
}

}  // namespace homogen
