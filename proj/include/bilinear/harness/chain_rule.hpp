#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <vector>

#include "bilinear/bellman.hpp"
#include "bilinear/coefficients.hpp"
#include "bilinear/errors.hpp"
#include "bilinear/grid.hpp"
#include "bilinear/harness/field.hpp"
#include "bilinear/harness/scenario.hpp"
#include "bilinear/mollifier.hpp"
#include "bilinear/operator.hpp"
#include "bilinear/parallel.hpp"
#include "bilinear/semigroup.hpp"

namespace bilinear::harness {

using bellman::ComplexPair;

struct ChainRuleOptions {
    /// relative band |u^p - v^q| <= band * max(u^p, v^q) treated as the interface
    double interface_band = bellman::kInterfaceThreshold;
    /// mollifier width at singular nodes: eps = width_factor * sqrt(h) * |v|
    double width_factor = 2.0;
    int mollifier_nodes = 8;
    /// fourth-order centred differences where the stencil fits, else second order
    bool fourth_order = true;
};

struct ChainRuleResult {
    SpaceTimeField rhs;
    /// per snapshot, per unknown: 1 where Q has no second derivatives along the data
    /// (both data vanish, or eta = 0 with a nonzero eta gradient)
    std::vector<std::vector<std::uint8_t>> degenerate;
    /// |grad P_t f|^2 and |grad P_t g|^2 per snapshot from the same centred differences
    std::vector<Eigen::VectorXd> grad_f_sq, grad_g_sq;
    /// max over nodes of |a_ij arrangement - Theta arrangement| / scale
    double arrangement_gap = 0.0;
    std::size_t mollified_nodes = 0;
    std::size_t degenerate_nodes = 0;
};

namespace detail {

/// d/dx_axis at a lattice node from full lattice values.
inline cplx centred_difference(const Grid& g, const Eigen::VectorXcd& full, int node, int axis, bool fourth) {
    const double h = g.spacing(axis);
    const int p1 = g.shift(node, axis, 1), m1 = g.shift(node, axis, -1);
    if (fourth) {
        const int p2 = g.shift(node, axis, 2), m2 = g.shift(node, axis, -2);
        if (p2 >= 0 && m2 >= 0) return (-full[p2] + 8.0 * full[p1] - 8.0 * full[m1] + full[m2]) / (12.0 * h);
    }
    return (full[p1] - full[m1]) / (2.0 * h);
}

struct NodeHessian {
    Eigen::Matrix4d real;
    bool mollified = false;
};

inline NodeHessian node_hessian(const bellman::BellmanParams& params, const ComplexPair& v, double h,
                                const ChainRuleOptions& o) {
    bool singular = false;
    if (!params.globally_smooth()) {
        const double up = std::pow(v.u(), params.p()), vq = std::pow(v.v(), params.q());
        singular = v.v() == 0.0 || std::abs(up - vq) <= o.interface_band * std::max(up, vq);
    }
    if (!singular) {
        try {
            return {bellman::hessian_Q(params, v, {0.0, 0.0}), false};
        } catch (const SingularityError&) {
        }
    }
    bellman::MollifierConfig cfg;
    cfg.nodes = o.mollifier_nodes;
    cfg.eps = o.width_factor * std::sqrt(h) * std::hypot(v.u(), v.v());
    return {bellman::mollified_hessian_Q(params, cfg, v), true};
}

} // namespace detail

/// Right-hand side of the chain-rule identity for b = Q(P_t f, P_t g):
///   sum_ij a_ij <-d2Q(v) d_i v, d_j v> + V (Q(v) - dQ(v) v),
/// together with the Theta_k = sym(A)^{1/2} grad v arrangement of the same double sum.
inline ChainRuleResult chain_rule_rhs(const bellman::BellmanParams& params, const CoefficientField& A,
                                      const PotentialField& V, const Trajectory& f, const Trajectory& g,
                                      const ChainRuleOptions& opts = {}) {
    require_matching(f, g);
    const Grid& grid = f.snapshots.front().grid();
    if (!A.grid().same_shape(grid) || !V.grid().same_shape(grid))
        throw DimensionError("coefficients do not match the trajectories");
    const int dim = grid.dim(), n = grid.unknowns();
    const double h = grid.min_spacing();

    std::vector<Eigen::MatrixXd> a(n), root(n);
    for (int k = 0; k < n; ++k) {
        a[k] = A.node_average(grid.lattice_of(k));
        root[k] = matrix_sqrt_spd(0.5 * (a[k] + a[k].transpose()));
    }

    const std::size_t steps = f.size();
    ChainRuleResult out;
    out.rhs.grid = grid;
    out.rhs.times = f.times;
    out.rhs.values.assign(steps, Eigen::VectorXcd::Zero(n));
    out.degenerate.assign(steps, std::vector<std::uint8_t>(n, 0));
    out.grad_f_sq.assign(steps, Eigen::VectorXd::Zero(n));
    out.grad_g_sq.assign(steps, Eigen::VectorXd::Zero(n));
    std::vector<double> gaps(steps, 0.0);
    std::vector<std::size_t> moll(steps, 0), degen(steps, 0);

    parallel_for(static_cast<int>(steps), [&](int s) {
        const Eigen::VectorXcd ff = f.snapshots[s].lattice_values();
        const Eigen::VectorXcd gg = g.snapshots[s].lattice_values();
        for (int k = 0; k < n; ++k) {
            const int node = grid.lattice_of(k);
            const ComplexPair v{ff[node], gg[node]};
            std::array<ComplexPair, 3> dv{};
            for (int j = 0; j < dim; ++j) {
                dv[j] = {detail::centred_difference(grid, ff, node, j, opts.fourth_order),
                         detail::centred_difference(grid, gg, node, j, opts.fourth_order)};
                out.grad_f_sq[s][k] += std::norm(dv[j].zeta);
                out.grad_g_sq[s][k] += std::norm(dv[j].eta);
            }
            if (!params.globally_smooth() && v.u() == 0.0 && v.v() == 0.0) {
                out.degenerate[s][k] = 1;
                ++degen[s];
                continue;
            }

            detail::NodeHessian nh;
            if (!params.globally_smooth() && v.eta == cplx(0.0)) {
                bool flat = true;
                for (int j = 0; j < dim; ++j) flat = flat && dv[j].eta == cplx(0.0);
                if (!flat) {
                    // |eta|^(q-2) blows up while d eta != 0: the identity holds only as measures here
                    out.degenerate[s][k] = 1;
                    ++degen[s];
                    continue;
                }
                // Second branch at eta = 0: the zeta block is u^(p-2) times its value at the unit
                // point zeta / u, reproduced at any eta with v^q < u^p; the eta rows meet zero derivatives.
                const double u = v.u();
                nh.real = std::pow(u, params.p() - 2.0) *
                          bellman::hessian_Q(params, {v.zeta / u, std::pow(0.5, 1.0 / params.q())}, {0.0, 0.0});
                nh.real.bottomRows<2>().setZero();
                nh.real.rightCols<2>().setZero();
            } else {
                nh = detail::node_hessian(params, v, h, opts);
            }
            if (nh.mollified) ++moll[s];
            const bellman::WirtingerHessian w = bellman::wirtinger_hessian(nh.real);

            double by_entries = 0.0, grad_sq = 0.0;
            for (int i = 0; i < dim; ++i) {
                grad_sq += dv[i].to_real().squaredNorm();
                for (int j = 0; j < dim; ++j) by_entries -= a[k](i, j) * bellman::second_form(w, dv[i], dv[j]);
            }
            double by_theta = 0.0;
            for (int r = 0; r < dim; ++r) {
                Eigen::Vector4d theta = Eigen::Vector4d::Zero();
                for (int j = 0; j < dim; ++j) theta += root[k](r, j) * dv[j].to_real();
                by_theta -= theta.dot(nh.real * theta);
            }
            const double scale = nh.real.norm() * a[k].norm() * grad_sq;
            if (scale > 0.0) gaps[s] = std::max(gaps[s], std::abs(by_entries - by_theta) / scale);

            out.rhs.values[s][k] = by_entries + V[k] * bellman::drift(params, v);
        }
    });

    for (std::size_t s = 0; s < steps; ++s) {
        out.arrangement_gap = std::max(out.arrangement_gap, gaps[s]);
        out.mollified_nodes += moll[s];
        out.degenerate_nodes += degen[s];
    }
    return out;
}

/// sup over non-degenerate nodes and snapshots of |L'b - rhs|.
inline double chain_rule_residual(const DiscreteOperator& op, const SpaceTimeField& b, const ChainRuleResult& r) {
    const SpaceTimeField lhs = lprime(op, b);
    double worst = 0.0;
    for (std::size_t s = 0; s < lhs.values.size(); ++s)
        for (Eigen::Index k = 0; k < lhs.values[s].size(); ++k)
            if (!r.degenerate[s][k]) worst = std::max(worst, std::abs(lhs.values[s][k] - r.rhs.values[s][k]));
    return worst;
}

struct ChainRuleLevel {
    int cells = 0;
    double h = 0.0;
    double dt = 0.0;
    double residual = 0.0;
    double arrangement_gap = 0.0;
    std::size_t mollified_nodes = 0;
    std::size_t degenerate_nodes = 0;
};

/// One preset on a sequence of grids with dt = dt_per_h2 * h^2.
inline std::vector<ChainRuleLevel> chain_rule_ladder(PresetOptions base, const std::vector<int>& cells,
                                                     double dt_per_h2 = 1.0, const ChainRuleOptions& opts = {}) {
    std::vector<ChainRuleLevel> out;
    for (int c : cells) {
        base.cells = c;
        base.axis_cells.clear();
        const double h = 2.0 * base.half_width / c;
        base.dt = dt_per_h2 * h * h;
        const ScenarioRun run = run_scenario(make_preset(base));
        const ChainRuleResult cr = chain_rule_rhs(run.spec.bellman, run.spec.A, run.spec.V, run.f, run.g, opts);
        const SpaceTimeField b = compose_b(run.spec.bellman, run.f, run.g);
        out.push_back({c, h, run.f.dt, chain_rule_residual(run.op, b, cr), cr.arrangement_gap, cr.mollified_nodes,
                       cr.degenerate_nodes});
    }
    return out;
}

/// Ratios residual[k] / residual[k + 1] along a ladder.
inline std::vector<double> reduction_factors(const std::vector<ChainRuleLevel>& levels) {
    std::vector<double> f;
    for (std::size_t k = 0; k + 1 < levels.size(); ++k) f.push_back(levels[k].residual / levels[k + 1].residual);
    return f;
}

} // namespace bilinear::harness
