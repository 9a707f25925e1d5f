#pragma once

// Krylov solvers for real sparse systems acting on complex vectors, with optional Jacobi
// preconditioning. Reported residuals are always recomputed as |b - A x| / |b|.

#include <Eigen/Dense>
#include <Eigen/Sparse>

#include <cmath>
#include <complex>
#include <sstream>
#include <string>
#include <vector>

#include "bilinear/errors.hpp"
#include "bilinear/operator.hpp"

namespace bilinear {

enum class SolverMethod { BiCGStab, GMRes };
enum class Preconditioner { None, Diagonal };

inline const char* to_string(SolverMethod m) { return m == SolverMethod::BiCGStab ? "bicgstab" : "gmres"; }

struct SolverConfig {
    SolverMethod method = SolverMethod::BiCGStab;
    double tol = 1e-10;
    int max_iter = 2000;
    Preconditioner preconditioner = Preconditioner::Diagonal;
    int restart = 50;
    /// BiCGSTAB breakdown switches to GMRES from the current iterate
    bool fallback = true;
};

struct SolveStats {
    int iterations = 0;
    double residual = 0.0;
    SolverMethod method = SolverMethod::BiCGStab;
    bool fell_back = false;
};

namespace detail {

using Vec = Eigen::VectorXcd;

inline double true_residual(const SparseMatrix& a, const Vec& b, const Vec& x, double bnorm) {
    return (b - a * x).norm() / bnorm;
}

struct Jacobi {
    Eigen::VectorXd inv;
    Jacobi(const SparseMatrix& a, Preconditioner kind) {
        inv = Eigen::VectorXd::Ones(a.rows());
        if (kind != Preconditioner::Diagonal) return;
        const Eigen::VectorXd d = a.diagonal();
        for (Eigen::Index i = 0; i < d.size(); ++i)
            if (d[i] != 0.0) inv[i] = 1.0 / d[i];
    }
    Vec operator()(const Vec& v) const { return inv.cast<std::complex<double>>().cwiseProduct(v); }
};

/// Returns false on breakdown. Iterations are added to `iters`.
inline bool bicgstab(const SparseMatrix& a, const Vec& b, Vec& x, const Jacobi& pre, double tol, int max_iter,
                     int& iters, double bnorm) {
    using C = std::complex<double>;
    Vec r = b - a * x;
    const Vec r_hat = r;
    C rho(1.0), alpha(1.0), omega(1.0);
    Vec v = Vec::Zero(b.size()), p = Vec::Zero(b.size());
    const double tiny = 1e-300;
    while (iters < max_iter) {
        if (r.norm() <= tol * bnorm) return true;
        const C rho_new = r_hat.dot(r);
        if (std::abs(rho_new) < tiny || std::abs(omega) < tiny) return false;
        const C beta = (rho_new / rho) * (alpha / omega);
        p = r + beta * (p - omega * v);
        const Vec y = pre(p);
        v = a * y;
        const C denom = r_hat.dot(v);
        if (std::abs(denom) < tiny) return false;
        alpha = rho_new / denom;
        const Vec s = r - alpha * v;
        ++iters;
        if (s.norm() <= tol * bnorm) {
            x += alpha * y;
            r = s;
            rho = rho_new;
            continue;
        }
        const Vec z = pre(s);
        const Vec t = a * z;
        const double tt = t.squaredNorm();
        if (tt < tiny) return false;
        omega = t.dot(s) / tt;
        x += alpha * y + omega * z;
        r = s - omega * t;
        rho = rho_new;
    }
    return r.norm() <= tol * bnorm;
}

/// Restarted GMRES with right preconditioning.
inline bool gmres(const SparseMatrix& a, const Vec& b, Vec& x, const Jacobi& pre, double tol, int max_iter,
                  int restart, int& iters, double bnorm) {
    using C = std::complex<double>;
    const int m = std::max(1, restart);
    std::vector<Vec> basis;
    Eigen::MatrixXcd h(m + 1, m);
    std::vector<C> cs(m), sn(m);
    Eigen::VectorXcd g(m + 1);
    while (iters < max_iter) {
        Vec r = b - a * x;
        double beta = r.norm();
        if (beta <= tol * bnorm) return true;
        basis.assign(1, r / beta);
        h.setZero();
        g.setZero();
        g[0] = beta;
        int k = 0;
        for (; k < m && iters < max_iter; ++k) {
            ++iters;
            Vec w = a * pre(basis[k]);
            for (int i = 0; i <= k; ++i) {
                h(i, k) = basis[i].dot(w);
                w -= h(i, k) * basis[i];
            }
            const double wn = w.norm();
            h(k + 1, k) = wn;
            for (int i = 0; i < k; ++i) {
                const C t = std::conj(cs[i]) * h(i, k) + std::conj(sn[i]) * h(i + 1, k);
                h(i + 1, k) = -sn[i] * h(i, k) + cs[i] * h(i + 1, k);
                h(i, k) = t;
            }
            const double nrm = std::hypot(std::abs(h(k, k)), std::abs(h(k + 1, k)));
            if (nrm == 0.0) {
                cs[k] = 1.0;
                sn[k] = 0.0;
            } else {
                cs[k] = h(k, k) / nrm;
                sn[k] = h(k + 1, k) / nrm;
            }
            h(k, k) = nrm;
            h(k + 1, k) = 0.0;
            g[k + 1] = -sn[k] * g[k];
            g[k] = std::conj(cs[k]) * g[k];
            if (std::abs(g[k + 1]) <= tol * bnorm || wn == 0.0) {
                ++k;
                break;
            }
            basis.push_back(w / wn);
        }
        Eigen::VectorXcd y = h.topLeftCorner(k, k).triangularView<Eigen::Upper>().solve(g.head(k));
        Vec update = Vec::Zero(b.size());
        for (int i = 0; i < k; ++i) update += y[i] * basis[i];
        x += pre(update);
    }
    return true_residual(a, b, x, bnorm) <= tol;
}

} // namespace detail

/// Solves a x = b starting from x (in/out). Throws ConvergenceError when the tolerance is not met.
inline SolveStats solve(const SparseMatrix& a, const Eigen::VectorXcd& b, Eigen::VectorXcd& x,
                        const SolverConfig& cfg = {}) {
    if (!(cfg.tol > 0.0)) throw DomainError("solver tolerance must be positive");
    if (a.rows() != a.cols() || a.rows() != b.size()) throw DimensionError("linear system shape mismatch");
    if (x.size() != b.size()) x = Eigen::VectorXcd::Zero(b.size());
    SolveStats st;
    st.method = cfg.method;
    const double bnorm = b.norm();
    if (bnorm == 0.0) {
        x.setZero();
        return st;
    }
    const detail::Jacobi pre(a, cfg.preconditioner);
    if (cfg.method == SolverMethod::BiCGStab) {
        // the recurrence residual can drift from the true one; restart from the iterate when it does
        for (int attempt = 0; attempt < 4; ++attempt) {
            const bool ok = detail::bicgstab(a, b, x, pre, cfg.tol, cfg.max_iter, st.iterations, bnorm);
            st.residual = detail::true_residual(a, b, x, bnorm);
            if (st.residual <= cfg.tol) return st;
            if (!ok || st.iterations >= cfg.max_iter) break;
        }
        if (!cfg.fallback) {
            std::ostringstream os;
            os << "bicgstab did not converge: residual " << st.residual << " after " << st.iterations << " iterations";
            throw ConvergenceError(os.str(), st.iterations, st.residual);
        }
        st.fell_back = true;
        st.method = SolverMethod::GMRes;
    }
    const int budget = st.iterations + cfg.max_iter;
    detail::gmres(a, b, x, pre, cfg.tol, budget, cfg.restart, st.iterations, bnorm);
    st.residual = detail::true_residual(a, b, x, bnorm);
    if (st.residual > cfg.tol) {
        std::ostringstream os;
        os << "gmres did not converge: residual " << st.residual << " after " << st.iterations << " iterations";
        throw ConvergenceError(os.str(), st.iterations, st.residual);
    }
    return st;
}

} // namespace bilinear
