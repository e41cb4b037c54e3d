#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <vector>

#include "homogenlab/errors.hpp"

namespace homogen {

using Vec3 = std::array<double, 3>;
using Int3 = std::array<int, 3>;

/// Axis-aligned open box.
struct BoxDomain {
    Vec3 lo{0.0, 0.0, 0.0};
    Vec3 hi{1.0, 1.0, 1.0};

    double extent(int axis) const { return hi[axis] - lo[axis]; }
    double volume() const { return extent(0) * extent(1) * extent(2); }
    bool contains(const Vec3& x) const {
        for (int d = 0; d < 3; ++d)
            if (x[d] < lo[d] || x[d] > hi[d]) return false;
        return true;
    }
};

/// Uniform cell-centered grid over a box. Velocity components live on faces
/// (MAC staggering), scalars at cell centers.
struct GridSpec {
    Int3 n{4, 4, 4};
    Vec3 h{0.0, 0.0, 0.0};
    BoxDomain box;

    GridSpec() = default;
    GridSpec(const BoxDomain& b, Int3 cells);

    long cell_count() const { return (long)n[0] * n[1] * n[2]; }
    long cell_index(int i, int j, int k) const {
        return ((long)k * n[1] + j) * n[0] + i;
    }
    Vec3 cell_center(int i, int j, int k) const {
        return {box.lo[0] + (i + 0.5) * h[0], box.lo[1] + (j + 0.5) * h[1],
                box.lo[2] + (k + 0.5) * h[2]};
    }
    double cell_volume() const { return h[0] * h[1] * h[2]; }
    double max_h() const { return std::max(h[0], std::max(h[1], h[2])); }

    // Face grids: component d is stored on faces normal to axis d.
    Int3 face_dims(int axis) const {
        Int3 d = n;
        d[axis] += 1;
        return d;
    }
    long face_count(int axis) const {
        Int3 d = face_dims(axis);
        return (long)d[0] * d[1] * d[2];
    }
    long face_index(int axis, int i, int j, int k) const {
        Int3 d = face_dims(axis);
        return ((long)k * d[1] + j) * d[0] + i;
    }
    Vec3 face_center(int axis, int i, int j, int k) const {
        Vec3 x = {box.lo[0] + (i + 0.5) * h[0], box.lo[1] + (j + 0.5) * h[1],
                  box.lo[2] + (k + 0.5) * h[2]};
        x[axis] -= 0.5 * h[axis];
        return x;
    }

    bool same_as(const GridSpec& o) const {
        return n == o.n && box.lo == o.box.lo && box.hi == o.box.hi;
    }
};

enum class Phase : std::uint8_t { Fluid = 0, Solid = 1 };

/// Rule fixing the intermediate radius between sphere radius and half period.
enum class RRule { GeometricMean, Midpoint };

/// Periodic array of solid spheres inside a box, voxelized on a uniform grid.
/// Sphere centers sit on the lattice points whose full period cell fits in
/// the box; the radius follows the critical scaling r = gamma * epsilon^3.
struct PerforatedDomain {
    BoxDomain box;
    double epsilon = 0.0;
    double gamma = 0.0;
    double r_eps = 0.0;
    double R_eps = 0.0;
    GridSpec grid;
    std::vector<Vec3> centers;          // lattice points, lexicographic in k
    Int3 k_lo{0, 0, 0};                 // inclusive lattice index range
    Int3 k_hi{-1, -1, -1};
    std::vector<std::uint8_t> phase;    // per cell, Phase values
    std::vector<std::int32_t> cell_ball;  // owning sphere per Solid cell, -1 for Fluid

    bool is_solid(long c) const { return phase[c] == (std::uint8_t)Phase::Solid; }
    long solid_cell_count() const;
    /// True when the annulus between r_eps and R_eps has zero width
    /// (borderline scaling r_eps == epsilon/2 leaves no room for R_eps).
    bool annulus_degenerate() const { return R_eps <= r_eps; }
    /// Lattice index counts per axis.
    Int3 k_counts() const {
        return {k_hi[0] - k_lo[0] + 1, k_hi[1] - k_lo[1] + 1, k_hi[2] - k_lo[2] + 1};
    }
    /// Index into centers of the sphere nearest to x, or -1 if none.
    int nearest_center(const Vec3& x) const;
};

PerforatedDomain build_perforated_domain(const BoxDomain& box, double epsilon,
                                         double gamma, const GridSpec& grid,
                                         RRule r_rule = RRule::GeometricMean);

/// Analytic phase volume: exact ball volume for Solid, complement for Fluid.
double phase_volume(const PerforatedDomain& dom, Phase phase);

/// Voxel (staircase) phase volume, cell count times cell volume.
double voxel_phase_volume(const PerforatedDomain& dom, Phase phase);

/// Scalar samples at cell centers.
struct ScalarField {
    GridSpec grid;
    std::vector<double> values;

    ScalarField() = default;
    explicit ScalarField(const GridSpec& g) : grid(g), values(g.cell_count(), 0.0) {}

    double& at(int i, int j, int k) { return values[grid.cell_index(i, j, k)]; }
    double at(int i, int j, int k) const { return values[grid.cell_index(i, j, k)]; }
    /// Trilinear interpolation of cell-centered samples, clamped at the box.
    double interpolate(const Vec3& x) const;
};

/// Face-normal velocity components on the staggered grid.
struct VectorFieldMAC {
    GridSpec grid;
    std::array<std::vector<double>, 3> comp;

    VectorFieldMAC() = default;
    explicit VectorFieldMAC(const GridSpec& g) : grid(g) {
        for (int d = 0; d < 3; ++d) comp[d].assign(g.face_count(d), 0.0);
    }

    double& at(int axis, int i, int j, int k) {
        return comp[axis][grid.face_index(axis, i, j, k)];
    }
    double at(int axis, int i, int j, int k) const {
        return comp[axis][grid.face_index(axis, i, j, k)];
    }
    double max_abs() const;
};

/// Discrete L2 norm, sqrt(sum v^2 * cell volume).
double l2_norm(const ScalarField& f);
/// Discrete L2 norm over all faces, each weighted by the cell volume.
double l2_norm(const VectorFieldMAC& u);
/// L2 norm of the difference of two fields on the same grid.
double l2_diff(const ScalarField& a, const ScalarField& b);
double l2_diff(const VectorFieldMAC& a, const VectorFieldMAC& b);

/// Heat source descriptor, evaluable anywhere in the box.
struct SourceSpec {
    enum class Kind { Constant, Gaussian, ProductSine };

    Kind kind = Kind::Constant;
    double amplitude = 0.0;
    Vec3 center{0.0, 0.0, 0.0};
    double width = 1.0;
    std::optional<double> support_radius;  // truncation ball around center
    Vec3 sine_lo{0.0, 0.0, 0.0};
    Vec3 sine_len{1.0, 1.0, 1.0};

    static SourceSpec constant(double amp);
    static SourceSpec gaussian(double amp, const Vec3& center, double width);
    static SourceSpec product_sine(const BoxDomain& box, double amp);
};

double eval_source(const SourceSpec& s, const Vec3& x);

/// Sample a source at every cell center.
ScalarField sample_source(const SourceSpec& s, const GridSpec& grid);

}  // namespace homogen
