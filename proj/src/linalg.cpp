#include "homogenlab/linalg.hpp"

#include <cassert>
#include <cmath>
#include <cstring>
#include <sstream>

namespace homogen {

namespace {

constexpr std::int64_t kChunk = 8192;

// Chunked reduction: partial sums are accumulated per fixed-size chunk and
// combined in chunk order, so the result does not depend on thread count.
double chunked_sum(std::int64_t n, const double* a, const double* b) {
    std::int64_t nchunks = (n + kChunk - 1) / kChunk;
    if (nchunks <= 1) {
        double s = 0.0;
        for (std::int64_t i = 0; i < n; ++i) s += a[i] * b[i];
        return s;
    }
    std::vector<double> partial(nchunks, 0.0);
#pragma omp parallel for schedule(static)
    for (std::int64_t c = 0; c < nchunks; ++c) {
        std::int64_t begin = c * kChunk;
        std::int64_t end = std::min(n, begin + kChunk);
        double s = 0.0;
        for (std::int64_t i = begin; i < end; ++i) s += a[i] * b[i];
        partial[c] = s;
    }
    double s = 0.0;
    for (double v : partial) s += v;
    return s;
}

}  // namespace

void CsrMatrix::multiply(const std::vector<double>& x, std::vector<double>& y) const {
    y.resize(rows);
    const std::int64_t* off = offsets.data();
    const std::int32_t* c = cols.data();
    const double* v = vals.data();
    const double* xp = x.data();
    double* yp = y.data();
#pragma omp parallel for schedule(static)
    for (std::int64_t r = 0; r < rows; ++r) {
        double s = 0.0;
        for (std::int64_t q = off[r]; q < off[r + 1]; ++q) s += v[q] * xp[c[q]];
        yp[r] = s;
    }
}

std::vector<double> CsrMatrix::diagonal() const {
    std::vector<double> d(rows, 0.0);
#pragma omp parallel for schedule(static)
    for (std::int64_t r = 0; r < rows; ++r)
        for (std::int64_t q = offsets[r]; q < offsets[r + 1]; ++q)
            if (cols[q] == r) d[r] = vals[q];
    return d;
}

CsrMatrix CsrMatrix::transposed(std::int64_t ncols) const {
    CsrMatrix t;
    t.rows = ncols;
    t.offsets.assign(ncols + 1, 0);
    for (std::int32_t c : cols) t.offsets[c + 1]++;
    for (std::int64_t r = 0; r < ncols; ++r) t.offsets[r + 1] += t.offsets[r];
    t.cols.resize(cols.size());
    t.vals.resize(vals.size());
    std::vector<std::int64_t> cursor(t.offsets.begin(), t.offsets.end() - 1);
    for (std::int64_t r = 0; r < rows; ++r)
        for (std::int64_t q = offsets[r]; q < offsets[r + 1]; ++q) {
            std::int64_t at = cursor[cols[q]]++;
            t.cols[at] = (std::int32_t)r;
            t.vals[at] = vals[q];
        }
    return t;
}

void CsrMatrix::validate() const {
    if ((std::int64_t)offsets.size() != rows + 1)
        throw Error("csr: offsets size mismatch");
    for (std::int64_t r = 0; r < rows; ++r) {
        if (offsets[r] > offsets[r + 1]) throw Error("csr: offsets not nondecreasing");
        for (std::int64_t q = offsets[r]; q < offsets[r + 1]; ++q) {
            if (cols[q] < 0 || cols[q] >= rows)
                throw Error("csr: column index out of range");
            if (q > offsets[r] && cols[q] <= cols[q - 1])
                throw Error("csr: duplicate or unsorted column in row");
        }
    }
}

CsrBuilder::CsrBuilder(std::int64_t rows, std::int64_t nnz_estimate) {
    m_.rows = rows;
    m_.offsets.reserve(rows + 1);
    m_.offsets.push_back(0);
    if (nnz_estimate > 0) {
        m_.cols.reserve(nnz_estimate);
        m_.vals.reserve(nnz_estimate);
    }
}

void CsrBuilder::add(std::int32_t col, double val) {
#ifndef NDEBUG
    assert(col > last_col_ && "columns must be emitted in ascending order");
    last_col_ = col;
#endif
    m_.cols.push_back(col);
    m_.vals.push_back(val);
}

void CsrBuilder::finish_row() {
    m_.offsets.push_back((std::int64_t)m_.cols.size());
    ++row_;
#ifndef NDEBUG
    last_col_ = -1;
#endif
}

CsrMatrix CsrBuilder::take() {
    if (row_ != m_.rows) throw Error("csr builder: not all rows emitted");
    return std::move(m_);
}

double dot(const std::vector<double>& a, const std::vector<double>& b) {
    return chunked_sum((std::int64_t)a.size(), a.data(), b.data());
}

double norm2(const std::vector<double>& a) { return std::sqrt(dot(a, a)); }

void axpy(double alpha, const std::vector<double>& x, std::vector<double>& y) {
    std::int64_t n = (std::int64_t)x.size();
#pragma omp parallel for schedule(static)
    for (std::int64_t i = 0; i < n; ++i) y[i] += alpha * x[i];
}

namespace {

double true_residual(const CsrMatrix& A, const std::vector<double>& x,
                     const std::vector<double>& b, std::vector<double>& scratch) {
    A.multiply(x, scratch);
    std::int64_t n = (std::int64_t)b.size();
#pragma omp parallel for schedule(static)
    for (std::int64_t i = 0; i < n; ++i) scratch[i] = b[i] - scratch[i];
    return norm2(scratch);
}

}  // namespace

SolveResult cg_solve(const CsrMatrix& A, const std::vector<double>& rhs,
                     const SolverConfig& cfg, const std::vector<double>* x0,
                     std::vector<double>* residual_history) {
    std::int64_t n = A.rows;
    SolveResult out;
    out.x.assign(n, 0.0);
    if (x0) {
        if ((std::int64_t)x0->size() != n) throw Error("cg: bad initial guess size");
        out.x = *x0;
    }
    double bnorm = norm2(rhs);
    double tol = std::max(cfg.rel_tol * bnorm, cfg.abs_tol);
    if (residual_history) residual_history->clear();
    if (bnorm == 0.0 && !x0) {
        out.residual = 0.0;
        return out;
    }

    std::vector<double> r(n), p(n), z(n), Ap(n);
    A.multiply(out.x, Ap);
#pragma omp parallel for schedule(static)
    for (std::int64_t i = 0; i < n; ++i) r[i] = rhs[i] - Ap[i];

    std::vector<double> inv_diag;
    if (cfg.preconditioner == Preconditioner::Jacobi) {
        inv_diag = A.diagonal();
        for (double& d : inv_diag) d = (d != 0.0) ? 1.0 / d : 1.0;
    }
    auto apply_precond = [&](const std::vector<double>& in, std::vector<double>& outv) {
        if (inv_diag.empty()) {
            outv = in;
        } else {
            outv.resize(n);
#pragma omp parallel for schedule(static)
            for (std::int64_t i = 0; i < n; ++i) outv[i] = inv_diag[i] * in[i];
        }
    };

    double rnorm = norm2(r);
    if (residual_history) residual_history->push_back(rnorm);
    if (rnorm <= tol) {
        out.residual = true_residual(A, out.x, rhs, Ap);
        return out;
    }

    apply_precond(r, z);
    p = z;
    double rz = dot(r, z);
    for (int it = 1; it <= cfg.max_iter; ++it) {
        A.multiply(p, Ap);
        double pAp = dot(p, Ap);
        if (pAp <= 0.0) {
            std::ostringstream os;
            os << "cg: nonpositive curvature p'Ap=" << pAp << " at iteration " << it;
            throw IndefiniteBreakdown(os.str());
        }
        double alpha = rz / pAp;
        axpy(alpha, p, out.x);
        axpy(-alpha, Ap, r);
        rnorm = norm2(r);
        if (residual_history) residual_history->push_back(rnorm);
        out.iterations = it;
        if (rnorm <= tol) {
            // Recurrence residual can drift from the true one; confirm.
            double truth = true_residual(A, out.x, rhs, Ap);
            if (truth <= tol || it == cfg.max_iter) {
                out.residual = truth;
                return out;
            }
            r = Ap;  // refreshed residual from true_residual's scratch
            rnorm = truth;
            apply_precond(r, z);
            rz = dot(r, z);
            p = z;  // restart the search direction
            continue;
        }
        apply_precond(r, z);
        double rz_next = dot(r, z);
        double beta = rz_next / rz;
        rz = rz_next;
#pragma omp parallel for schedule(static)
        for (std::int64_t i = 0; i < n; ++i) p[i] = z[i] + beta * p[i];
    }
    std::ostringstream os;
    os << "cg: no convergence in " << cfg.max_iter << " iterations, residual " << rnorm
       << " (target " << tol << ")";
    throw MaxIterExceeded(os.str());
}

SolveResult bicgstab_solve(const CsrMatrix& A, const std::vector<double>& rhs,
                           const SolverConfig& cfg, const std::vector<double>* x0) {
    std::int64_t n = A.rows;
    SolveResult out;
    out.x.assign(n, 0.0);
    if (x0) out.x = *x0;
    double bnorm = norm2(rhs);
    double tol = std::max(cfg.rel_tol * bnorm, cfg.abs_tol);
    if (bnorm == 0.0 && !x0) {
        out.residual = 0.0;
        return out;
    }

    std::vector<double> inv_diag;
    if (cfg.preconditioner == Preconditioner::Jacobi) {
        inv_diag = A.diagonal();
        for (double& d : inv_diag) d = (d != 0.0) ? 1.0 / d : 1.0;
    }
    auto precond = [&](const std::vector<double>& in, std::vector<double>& outv) {
        if (inv_diag.empty()) {
            outv = in;
        } else {
            outv.resize(n);
#pragma omp parallel for schedule(static)
            for (std::int64_t i = 0; i < n; ++i) outv[i] = inv_diag[i] * in[i];
        }
    };

    std::vector<double> r(n), r0(n), p(n, 0.0), v(n, 0.0), s(n), t(n), phat(n), shat(n);
    A.multiply(out.x, v);
#pragma omp parallel for schedule(static)
    for (std::int64_t i = 0; i < n; ++i) r[i] = rhs[i] - v[i];
    r0 = r;
    std::fill(v.begin(), v.end(), 0.0);

    double rnorm = norm2(r);
    if (rnorm <= tol) {
        out.residual = true_residual(A, out.x, rhs, t);
        return out;
    }

    double rho_prev = 1.0, alpha = 1.0, omega = 1.0;
    double breakdown = 1e-300;
    for (int it = 1; it <= cfg.max_iter; ++it) {
        double rho = dot(r0, r);
        if (std::abs(rho) < breakdown * rnorm)
            throw Stagnation("bicgstab: rho breakdown");
        if (it == 1) {
            p = r;
        } else {
            double beta = (rho / rho_prev) * (alpha / omega);
#pragma omp parallel for schedule(static)
            for (std::int64_t i = 0; i < n; ++i)
                p[i] = r[i] + beta * (p[i] - omega * v[i]);
        }
        precond(p, phat);
        A.multiply(phat, v);
        double r0v = dot(r0, v);
        if (std::abs(r0v) < breakdown)
            throw Stagnation("bicgstab: r0'v breakdown");
        alpha = rho / r0v;
        s = r;
        axpy(-alpha, v, s);
        double snorm = norm2(s);
        out.iterations = it;
        if (snorm <= tol) {
            axpy(alpha, phat, out.x);
            double truth = true_residual(A, out.x, rhs, t);
            if (truth <= tol || it == cfg.max_iter) {
                out.residual = truth;
                return out;
            }
            r = t;
            rnorm = truth;
            rho_prev = rho;
            continue;
        }
        precond(s, shat);
        A.multiply(shat, t);
        double tt = dot(t, t);
        if (tt == 0.0) throw Stagnation("bicgstab: t vanished");
        omega = dot(t, s) / tt;
        if (std::abs(omega) < 1e-30) throw Stagnation("bicgstab: omega breakdown");
        axpy(alpha, phat, out.x);
        axpy(omega, shat, out.x);
#pragma omp parallel for schedule(static)
        for (std::int64_t i = 0; i < n; ++i) r[i] = s[i] - omega * t[i];
        rnorm = norm2(r);
        if (rnorm <= tol) {
            double truth = true_residual(A, out.x, rhs, t);
            if (truth <= tol || it == cfg.max_iter) {
                out.residual = truth;
                return out;
            }
            r = t;
            rnorm = truth;
        }
        rho_prev = rho;
    }
    std::ostringstream os;
    os << "bicgstab: no convergence in " << cfg.max_iter << " iterations, residual "
       << rnorm << " (target " << tol << ")";
    throw MaxIterExceeded(os.str());
}

UzawaResult uzawa_solve(const CsrMatrix& A, const CsrMatrix& B,
                        const std::vector<double>& f, const SolverConfig& cfg,
                        const std::vector<double>* g, const std::vector<double>* u0,
                        const std::vector<double>* p0) {
    std::int64_t nu = A.rows;
    std::int64_t np = B.rows;
    UzawaResult out;
    out.velocity.assign(nu, 0.0);
    out.pressure.assign(np, 0.0);

    double fnorm = norm2(f);
    double gnorm = g ? norm2(*g) : 0.0;
    if (fnorm == 0.0 && gnorm == 0.0) return out;

    CsrMatrix Bt = B.transposed(nu);

    SolverConfig inner = cfg;
    inner.rel_tol = 0.01 * cfg.rel_tol;
    inner.abs_tol = 0.01 * cfg.abs_tol;

    auto project_zero_mean = [&](std::vector<double>& p) {
        double mean = 0.0;
        for (double v : p) mean += v;
        mean /= (double)np;
        for (double& v : p) v -= mean;
    };

    // Schur residual for pressure q: rhs_s - B A^-1 (f - B^T q).
    std::vector<double> u = u0 ? *u0 : std::vector<double>(nu, 0.0);
    std::vector<double> q = p0 ? *p0 : std::vector<double>(np, 0.0);
    project_zero_mean(q);

    std::vector<double> rhs_u(nu), Bu(np), r(np), p_dir(np), Sp(np), scratch_u(nu);
    long inner_total = 0;

    auto velocity_solve = [&](const std::vector<double>& pressure,
                              std::vector<double>& vel) {
        rhs_u = f;
        Bt.multiply(pressure, scratch_u);
        axpy(-1.0, scratch_u, rhs_u);
        SolveResult sr = cg_solve(A, rhs_u, inner, &vel);
        vel = std::move(sr.x);
        inner_total += sr.iterations;
    };

    velocity_solve(q, u);
    B.multiply(u, Bu);
    r = Bu;
    if (g) axpy(-1.0, *g, r);
    // CG on the Schur complement: residual r = B u(q) - g.
    project_zero_mean(r);

    double scale = std::max(fnorm, gnorm);
    double tol = std::max(cfg.rel_tol * scale, cfg.abs_tol);
    double rnorm = norm2(r);
    if (rnorm <= tol) {
        out.velocity = std::move(u);
        out.pressure = std::move(q);
        project_zero_mean(out.pressure);
        out.residual = rnorm;
        out.inner_iterations = inner_total;
        return out;
    }

    p_dir = r;
    double rr = dot(r, r);
    std::vector<double> Av_dir(nu);
    for (int it = 1; it <= cfg.max_iter; ++it) {
        // S p_dir = B A^-1 B^T p_dir
        Bt.multiply(p_dir, rhs_u);
        SolveResult sr = cg_solve(A, rhs_u, inner, &scratch_u);
        scratch_u = std::move(sr.x);
        inner_total += sr.iterations;
        B.multiply(scratch_u, Sp);
        project_zero_mean(Sp);

        double pSp = dot(p_dir, Sp);
        if (pSp <= 0.0) throw IndefiniteBreakdown("uzawa: Schur complement not positive");
        double alpha = rr / pSp;
        // q descends along p_dir; u moves opposite the inner solve direction.
        axpy(alpha, p_dir, q);
        axpy(-alpha, scratch_u, u);
        axpy(-alpha, Sp, r);
        double rr_next = dot(r, r);
        rnorm = std::sqrt(rr_next);
        out.iterations = it;
        if (rnorm <= tol) break;
        double beta = rr_next / rr;
        rr = rr_next;
#pragma omp parallel for schedule(static)
        for (std::int64_t i = 0; i < np; ++i) p_dir[i] = r[i] + beta * p_dir[i];
        if (it == cfg.max_iter) {
            std::ostringstream os;
            os << "uzawa: no convergence in " << cfg.max_iter
               << " outer iterations, residual " << rnorm << " (target " << tol << ")";
            throw MaxIterExceeded(os.str());
        }
    }

    project_zero_mean(q);
    // Final velocity solve at full accuracy against the converged pressure.
    SolverConfig final_cfg = cfg;
    final_cfg.rel_tol = 0.01 * cfg.rel_tol;
    final_cfg.abs_tol = 0.01 * cfg.abs_tol;
    rhs_u = f;
    Bt.multiply(q, scratch_u);
    axpy(-1.0, scratch_u, rhs_u);
    SolveResult sr = cg_solve(A, rhs_u, final_cfg, &u);
    out.velocity = std::move(sr.x);
    inner_total += sr.iterations;
    out.pressure = std::move(q);
    out.residual = rnorm;
    out.inner_iterations = inner_total;
    return out;
}

}  // namespace homogen
