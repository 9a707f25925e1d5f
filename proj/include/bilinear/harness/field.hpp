#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <array>
#include <cmath>
#include <utility>
#include <vector>

#include "bilinear/bellman.hpp"
#include "bilinear/errors.hpp"
#include "bilinear/grid.hpp"
#include "bilinear/operator.hpp"
#include "bilinear/semigroup.hpp"

namespace bilinear::harness {

/// Values on the unknowns at each snapshot time.
struct SpaceTimeField {
    Grid grid;
    std::vector<double> times;
    std::vector<Eigen::VectorXcd> values;

    std::size_t steps() const noexcept { return times.size(); }
    double sup_norm() const {
        double m = 0.0;
        for (const auto& v : values)
            if (v.size()) m = std::max(m, v.cwiseAbs().maxCoeff());
        return m;
    }
    GridFunction at(std::size_t k) const { return GridFunction(grid, values[k]); }

    static SpaceTimeField from(const Trajectory& tr) {
        SpaceTimeField s;
        if (tr.snapshots.empty()) return s;
        s.grid = tr.snapshots.front().grid();
        s.times = tr.times;
        for (const auto& u : tr.snapshots) s.values.push_back(u.values());
        return s;
    }

    friend SpaceTimeField operator-(SpaceTimeField a, const SpaceTimeField& b) {
        if (a.times.size() != b.times.size()) throw DimensionError("space-time fields have different snapshot counts");
        for (std::size_t k = 0; k < a.values.size(); ++k) a.values[k] -= b.values[k];
        return a;
    }
};

inline void require_matching(const Trajectory& a, const Trajectory& b) {
    if (a.snapshots.empty() || a.size() != b.size())
        throw DimensionError("trajectories have different snapshot counts");
    if (!a.snapshots.front().grid().same_shape(b.snapshots.front().grid()))
        throw DimensionError("trajectories live on different grids");
    for (std::size_t k = 0; k < a.size(); ++k)
        if (a.times[k] != b.times[k]) throw DimensionError("trajectories have different snapshot times");
}

/// b(x, t) = Q(P_t f(x), P_t g(x)) at every node and snapshot.
inline SpaceTimeField compose_b(const bellman::BellmanParams& params, const Trajectory& f, const Trajectory& g) {
    require_matching(f, g);
    SpaceTimeField b;
    b.grid = f.snapshots.front().grid();
    b.times = f.times;
    for (std::size_t k = 0; k < f.size(); ++k) {
        const auto& v1 = f.snapshots[k].values();
        const auto& v2 = g.snapshots[k].values();
        Eigen::VectorXcd out(v1.size());
        for (Eigen::Index i = 0; i < v1.size(); ++i) out[i] = bellman::eval_Q(params, {v1[i], v2[i]});
        b.values.push_back(std::move(out));
    }
    return b;
}

namespace detail {

/// Three-point derivative weights at times[k] (one-sided at the ends, any spacing).
inline std::array<std::pair<std::size_t, double>, 3> time_stencil(const std::vector<double>& t, std::size_t k) {
    const std::size_t n = t.size();
    std::size_t i0 = k == 0 ? 0 : (k == n - 1 ? n - 3 : k - 1);
    const double x0 = t[i0], x1 = t[i0 + 1], x2 = t[i0 + 2], x = t[k];
    // derivative of the Lagrange basis polynomials at x
    const double w0 = ((x - x1) + (x - x2)) / ((x0 - x1) * (x0 - x2));
    const double w1 = ((x - x0) + (x - x2)) / ((x1 - x0) * (x1 - x2));
    const double w2 = ((x - x0) + (x - x1)) / ((x2 - x0) * (x2 - x1));
    return {{{i0, w0}, {i0 + 1, w1}, {i0 + 2, w2}}};
}

} // namespace detail

/// d/dt by three-point differences (two-point when only two snapshots exist).
inline SpaceTimeField time_derivative(const SpaceTimeField& u) {
    const std::size_t n = u.times.size();
    if (n < 2) throw DimensionError("time derivative needs at least two snapshots");
    SpaceTimeField d{u.grid, u.times, {}};
    for (std::size_t k = 0; k < n; ++k) {
        if (n == 2) {
            d.values.push_back((u.values[1] - u.values[0]) / (u.times[1] - u.times[0]));
            continue;
        }
        Eigen::VectorXcd acc = Eigen::VectorXcd::Zero(u.values[k].size());
        for (const auto& [i, w] : detail::time_stencil(u.times, k)) acc += w * u.values[i];
        d.values.push_back(std::move(acc));
    }
    return d;
}

/// L' u = du/dt + L_h u at every snapshot.
inline SpaceTimeField lprime(const DiscreteOperator& op, const SpaceTimeField& u) {
    if (u.values.empty() || u.values.front().size() != op.unknowns())
        throw DimensionError("space-time field does not match the operator");
    SpaceTimeField d = time_derivative(u);
    for (std::size_t k = 0; k < d.values.size(); ++k) d.values[k] += op.matrix() * u.values[k];
    return d;
}

/// Trapezoid rule over the snapshot times of a per-snapshot scalar.
inline double trapezoid(const std::vector<double>& t, const std::vector<double>& y) {
    double s = 0.0;
    for (std::size_t k = 1; k < t.size(); ++k) s += 0.5 * (t[k] - t[k - 1]) * (y[k] + y[k - 1]);
    return s;
}

/// Least-squares fit y = a + b x with coefficient of determination.
struct LinearFit {
    double intercept = 0.0;
    double slope = 0.0;
    double r2 = 0.0;
    std::size_t samples = 0;
};

inline LinearFit fit_line(const std::vector<double>& x, const std::vector<double>& y) {
    LinearFit f;
    f.samples = x.size();
    if (x.size() < 2) return f;
    const double n = static_cast<double>(x.size());
    double mx = 0, my = 0;
    for (std::size_t i = 0; i < x.size(); ++i) mx += x[i] / n, my += y[i] / n;
    double sxx = 0, sxy = 0, syy = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        sxx += (x[i] - mx) * (x[i] - mx);
        sxy += (x[i] - mx) * (y[i] - my);
        syy += (y[i] - my) * (y[i] - my);
    }
    if (sxx == 0.0) return f;
    f.slope = sxy / sxx;
    f.intercept = my - f.slope * mx;
    f.r2 = syy == 0.0 ? 1.0 : (sxy * sxy) / (sxx * syy);
    return f;
}

} // namespace bilinear::harness
