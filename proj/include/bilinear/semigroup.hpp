#pragma once

#include <Eigen/Sparse>

#include <algorithm>
#include <cmath>
#include <limits>
#include <ostream>
#include <vector>

#include "bilinear/errors.hpp"
#include "bilinear/grid.hpp"
#include "bilinear/operator.hpp"
#include "bilinear/parallel.hpp"
#include "bilinear/solvers.hpp"

namespace bilinear {

enum class Scheme { BackwardEuler, CrankNicolson };

inline const char* to_string(Scheme s) { return s == Scheme::BackwardEuler ? "backward-euler" : "crank-nicolson"; }

/// Uniform steps of size T / ceil(T / dt); snapshots every `stride` steps plus the final time.
class TimeGrid {
public:
    TimeGrid(double horizon, double dt, Scheme scheme = Scheme::CrankNicolson, int stride = 1)
        : T_(horizon), scheme_(scheme) {
        if (!(horizon >= 0.0) || !std::isfinite(horizon)) throw DomainError("time horizon must be nonnegative");
        if (!(dt > 0.0)) throw DomainError("time step must be positive");
        if (stride < 1) throw DomainError("snapshot stride must be at least 1");
        steps_ = horizon == 0.0 ? 0 : static_cast<int>(std::ceil(horizon / dt - 1e-9));
        dt_ = steps_ ? horizon / steps_ : dt;
        for (int k = 0; k <= steps_; ++k)
            if (k % stride == 0 || k == steps_) snapshot_steps_.push_back(k);
    }

    /// Default step min(h^2, T / 200).
    static TimeGrid for_grid(double horizon, const Grid& g, Scheme scheme = Scheme::CrankNicolson) {
        const double h = g.min_spacing();
        return TimeGrid(horizon, std::min(h * h, horizon > 0 ? horizon / 200 : h * h), scheme);
    }

    double dt() const noexcept { return dt_; }
    double horizon() const noexcept { return T_; }
    int steps() const noexcept { return steps_; }
    Scheme scheme() const noexcept { return scheme_; }
    const std::vector<int>& snapshot_steps() const noexcept { return snapshot_steps_; }
    std::vector<double> snapshot_times() const {
        std::vector<double> t;
        for (int k : snapshot_steps_) t.push_back(k * dt_);
        return t;
    }

private:
    double T_;
    double dt_ = 0.0;
    int steps_ = 0;
    Scheme scheme_;
    std::vector<int> snapshot_steps_;
};

/// One-step map with cached system matrices.
class Stepper {
public:
    Stepper(const DiscreteOperator& op, double dt, Scheme scheme, SolverConfig solver = {})
        : grid_(op.grid()), dt_(dt), scheme_(scheme), solver_(solver) {
        if (!(dt > 0.0)) throw DomainError("time step must be positive");
        SparseMatrix id(op.unknowns(), op.unknowns());
        id.setIdentity();
        const double theta = scheme == Scheme::BackwardEuler ? 1.0 : 0.5;
        system_ = id + (theta * dt) * op.matrix();
        if (scheme == Scheme::CrankNicolson) explicit_part_ = id - (0.5 * dt) * op.matrix();
    }

    const Grid& grid() const noexcept { return grid_; }
    double dt() const noexcept { return dt_; }
    Scheme scheme() const noexcept { return scheme_; }
    const SparseMatrix& system() const noexcept { return system_; }

    GridFunction step(const GridFunction& u, SolveStats* stats = nullptr) const {
        if (u.size() != system_.rows()) throw DimensionError("grid function does not match the operator");
        const Eigen::VectorXcd rhs = scheme_ == Scheme::BackwardEuler ? u.values() : Eigen::VectorXcd(explicit_part_ * u.values());
        Eigen::VectorXcd x = u.values();
        const SolveStats st = solve(system_, rhs, x, solver_);
        if (stats) *stats = st;
        return GridFunction(grid_, std::move(x));
    }

private:
    Grid grid_;
    double dt_;
    Scheme scheme_;
    SolverConfig solver_;
    SparseMatrix system_, explicit_part_;
};

inline GridFunction step(const DiscreteOperator& op, const GridFunction& u, double dt, Scheme scheme,
                         const SolverConfig& solver = {}, SolveStats* stats = nullptr) {
    return Stepper(op, dt, scheme, solver).step(u, stats);
}

struct Trajectory {
    std::vector<double> times;
    std::vector<GridFunction> snapshots;
    /// one entry per time step
    std::vector<SolveStats> solver_log;
    double dt = 0.0;
    Scheme scheme = Scheme::CrankNicolson;

    std::size_t size() const noexcept { return snapshots.size(); }
    const GridFunction& final_state() const { return snapshots.back(); }
};

inline Trajectory evolve(const DiscreteOperator& op, const GridFunction& f, const TimeGrid& tg,
                         const SolverConfig& solver = {}) {
    if (f.size() != op.unknowns()) throw DimensionError("initial datum does not match the operator");
    Trajectory tr;
    tr.dt = tg.dt();
    tr.scheme = tg.scheme();
    tr.times.push_back(0.0);
    tr.snapshots.push_back(f);
    if (tg.steps() == 0) return tr;
    const Stepper stepper(op, tg.dt(), tg.scheme(), solver);
    const auto& snaps = tg.snapshot_steps();
    std::size_t next = 1;
    GridFunction u = f;
    tr.solver_log.reserve(tg.steps());
    for (int k = 1; k <= tg.steps(); ++k) {
        SolveStats st;
        u = stepper.step(u, &st);
        tr.solver_log.push_back(st);
        if (next < snaps.size() && snaps[next] == k) {
            tr.times.push_back(k * tg.dt());
            tr.snapshots.push_back(u);
            ++next;
        }
    }
    return tr;
}

/// Independent trajectories in parallel (BILINEAR_WORKERS threads).
inline std::vector<Trajectory> evolve_many(const DiscreteOperator& op, const std::vector<GridFunction>& data,
                                           const TimeGrid& tg, const SolverConfig& solver = {}) {
    std::vector<Trajectory> out(data.size());
    parallel_for(static_cast<int>(data.size()), [&](int i) { out[i] = evolve(op, data[i], tg, solver); });
    return out;
}

struct ContractionReport {
    /// max over steps of |u^{k+1}|_inf / |u^k|_inf
    double worst_ratio = 0.0;
    int worst_step = -1;
    /// the stencil is monotone, so the ratio was asserted to stay <= 1 + 1e-12
    bool asserted = false;
    bool passed = true;
};

inline ContractionReport linf_contraction_check(const Trajectory& tr, bool monotone_stencil,
                                                double slack = 1e-12) {
    ContractionReport r;
    r.asserted = monotone_stencil && tr.scheme == Scheme::BackwardEuler;
    for (std::size_t k = 0; k + 1 < tr.snapshots.size(); ++k) {
        const double a = tr.snapshots[k].sup_norm(), b = tr.snapshots[k + 1].sup_norm();
        const double ratio = a > 0.0 ? b / a : (b > 0.0 ? std::numeric_limits<double>::infinity() : 1.0);
        if (ratio > r.worst_ratio) r.worst_ratio = ratio, r.worst_step = static_cast<int>(k);
    }
    if (r.asserted) r.passed = r.worst_ratio <= 1.0 + slack;
    return r;
}

/// Rows t,x[,y[,z]],re,im for every snapshot.
inline void write_trajectory_csv(std::ostream& os, const Trajectory& tr) {
    static const char* axes[] = {"x", "y", "z"};
    if (tr.snapshots.empty()) return;
    const Grid& g = tr.snapshots.front().grid();
    os << 't';
    for (int a = 0; a < g.dim(); ++a) os << ',' << axes[a];
    os << ",re,im\n";
    for (std::size_t s = 0; s < tr.snapshots.size(); ++s) {
        const auto& u = tr.snapshots[s];
        for (int k = 0; k < g.unknowns(); ++k) {
            const auto x = g.unknown_point(k);
            os << format_real(tr.times[s]);
            for (int a = 0; a < g.dim(); ++a) os << ',' << format_real(x[a]);
            os << ',' << format_real(u[k].real()) << ',' << format_real(u[k].imag()) << '\n';
        }
    }
}

inline void write_solver_log_csv(std::ostream& os, const Trajectory& tr) {
    os << "step,t,method,iterations,residual,fell_back\n";
    for (std::size_t k = 0; k < tr.solver_log.size(); ++k) {
        const auto& s = tr.solver_log[k];
        os << k + 1 << ',' << format_real((k + 1) * tr.dt) << ',' << to_string(s.method) << ',' << s.iterations << ','
           << format_real(s.residual) << ',' << (s.fell_back ? 1 : 0) << '\n';
    }
}

} // namespace bilinear
