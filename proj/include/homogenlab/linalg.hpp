#pragma once

#include <cstdint>
#include <vector>

#include "homogenlab/errors.hpp"

namespace homogen {

/// Square sparse matrix in compressed sparse row form.
struct CsrMatrix {
    std::int64_t rows = 0;
    std::vector<std::int64_t> offsets;  // size rows+1, nondecreasing
    std::vector<std::int32_t> cols;     // ascending within each row
    std::vector<double> vals;

    std::int64_t nnz() const { return (std::int64_t)cols.size(); }
    void multiply(const std::vector<double>& x, std::vector<double>& y) const;
    std::vector<double> diagonal() const;
    CsrMatrix transposed(std::int64_t ncols) const;
    /// Sanity check of the structural invariants; throws on violation.
    void validate() const;
};

/// Row-by-row CSR assembly; rows must be emitted in order with ascending
/// column indices.
class CsrBuilder {
public:
    explicit CsrBuilder(std::int64_t rows, std::int64_t nnz_estimate = 0);
    void add(std::int32_t col, double val);  // append to the current row
    void finish_row();
    CsrMatrix take();

private:
    CsrMatrix m_;
    std::int64_t row_ = 0;
#ifndef NDEBUG
    std::int32_t last_col_ = -1;
#endif
};

enum class Preconditioner { None, Jacobi };

struct SolverConfig {
    double rel_tol = 1e-10;
    double abs_tol = 1e-14;
    int max_iter = 50000;
    Preconditioner preconditioner = Preconditioner::Jacobi;
};

struct SolveResult {
    std::vector<double> x;
    int iterations = 0;
    double residual = 0.0;  // recomputed ||Ax - b|| at exit
};

/// Conjugate gradients for symmetric positive definite systems.
/// Optional initial guess; optional per-iteration residual norm history.
SolveResult cg_solve(const CsrMatrix& A, const std::vector<double>& rhs,
                     const SolverConfig& cfg,
                     const std::vector<double>* x0 = nullptr,
                     std::vector<double>* residual_history = nullptr);

/// BiCGStab for general nonsingular systems.
SolveResult bicgstab_solve(const CsrMatrix& A, const std::vector<double>& rhs,
                           const SolverConfig& cfg,
                           const std::vector<double>* x0 = nullptr);

struct UzawaResult {
    std::vector<double> velocity;
    std::vector<double> pressure;  // zero mean
    int iterations = 0;            // outer Schur-complement iterations
    double residual = 0.0;         // final Schur residual norm
    long inner_iterations = 0;     // accumulated inner CG iterations
};

/// Saddle-point solve: A u + B^T p = f, B u = g, with A symmetric positive
/// definite and B the constraint matrix. Conjugate gradients on the pressure
/// Schur complement B A^-1 B^T; every application does an inner CG solve with
/// A at 0.01x the outer tolerance. The pressure is gauged to zero mean.
/// Optional warm starts for both unknowns.
UzawaResult uzawa_solve(const CsrMatrix& A, const CsrMatrix& B,
                        const std::vector<double>& f, const SolverConfig& cfg,
                        const std::vector<double>* g = nullptr,
                        const std::vector<double>* u0 = nullptr,
                        const std::vector<double>* p0 = nullptr);

// Deterministic vector kernels (fixed-chunk reductions, parallel-safe).
double dot(const std::vector<double>& a, const std::vector<double>& b);
double norm2(const std::vector<double>& a);
void axpy(double alpha, const std::vector<double>& x, std::vector<double>& y);

}  // namespace homogen
