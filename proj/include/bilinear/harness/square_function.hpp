#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <vector>

#include "bilinear/grid.hpp"
#include "bilinear/harness/field.hpp"
#include "bilinear/operator.hpp"
#include "bilinear/semigroup.hpp"

namespace bilinear::harness {

struct SquareFunctionResult {
    GridFunction value;
    /// decay rate of |grad P_t u|_2^2 fitted over the last quarter of the snapshots
    double decay_rate = 0.0;
    bool tail_reliable = true;
    /// tail / (quadrature + tail) for the L^1 mass of the integrand
    double tail_fraction = 0.0;
};

/// G u(x) = (int_0^inf |grad P_t u(x)|^2 dt)^(1/2): trapezoid over the trajectory plus an
/// exponential tail integrand(T) / decay_rate at each node.
inline SquareFunctionResult square_function(const Trajectory& tr) {
    if (tr.snapshots.empty()) throw DimensionError("square function needs a trajectory");
    const Grid& g = tr.snapshots.front().grid();
    const std::size_t n = tr.size();
    std::vector<Eigen::VectorXd> dens(n);
    std::vector<double> mass(n);
    for (std::size_t k = 0; k < n; ++k) {
        dens[k] = node_gradient_squared(gradient(tr.snapshots[k]));
        mass[k] = dens[k].sum();
    }
    Eigen::VectorXd acc = Eigen::VectorXd::Zero(g.unknowns());
    for (std::size_t k = 1; k < n; ++k) acc += 0.5 * (tr.times[k] - tr.times[k - 1]) * (dens[k] + dens[k - 1]);

    SquareFunctionResult r;
    if (mass.back() > 0.0 && n >= 3) {
        std::vector<double> t, y;
        for (std::size_t k = n - std::max<std::size_t>(3, n / 4); k < n; ++k)
            if (mass[k] > 0.0) t.push_back(tr.times[k]), y.push_back(std::log(mass[k]));
        const LinearFit fit = fit_line(t, y);
        r.decay_rate = -fit.slope;
        r.tail_reliable = t.size() >= 3 && r.decay_rate > 0.0 && fit.r2 >= 0.9;
        if (r.decay_rate > 0.0) {
            const Eigen::VectorXd tail = dens.back() / r.decay_rate;
            r.tail_fraction = tail.sum() / (acc.sum() + tail.sum());
            acc += tail;
        }
    } else if (mass.back() > 0.0) {
        r.tail_reliable = false;
    }
    r.value = GridFunction(g, acc.cwiseSqrt().cast<cplx>());
    return r;
}

inline SquareFunctionResult square_function(const DiscreteOperator& op, const GridFunction& u, const TimeGrid& tg,
                                            const SolverConfig& solver = {}) {
    return square_function(evolve(op, u, tg, solver));
}

} // namespace bilinear::harness
