#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <limits>
#include <ostream>
#include <string>
#include <vector>

#include "bilinear/grid.hpp"
#include "bilinear/harness/chain_rule.hpp"
#include "bilinear/harness/field.hpp"
#include "bilinear/harness/scenario.hpp"
#include "bilinear/operator.hpp"

namespace bilinear::harness {

/// Discrete tolerance eps_h = c1 h + c2 dt^2, calibrated once on the identity preset
/// (tools/calibrate_pointwise.cpp) and frozen here. With both sides built from one gradient stencil the
/// identity slack never goes negative, so both constants came out 0.
struct SlackTolerance {
    double c1 = 0.0;
    double c2 = 0.0;
    double operator()(double h, double dt) const { return c1 * h + c2 * dt * dt; }

    static SlackTolerance frozen() { return {kFrozenC1, kFrozenC2}; }

    static constexpr double kFrozenC1 = 0.0;
    static constexpr double kFrozenC2 = 0.0;
};

struct PointwiseReport {
    /// per snapshot: L'b, 2 delta min(1, gamma) |f~|_* |g~|_*, and their difference
    SpaceTimeField lhs, rhs, slack;
    std::vector<std::vector<std::uint8_t>> excluded;
    double worst_slack = std::numeric_limits<double>::infinity();
    int worst_node = -1;
    double worst_time = 0.0;
    double h = 0.0;
    double dt = 0.0;
    double tolerance = 0.0;
    std::size_t mollified_nodes = 0;
    std::size_t excluded_nodes = 0;

    bool passed() const { return worst_slack >= -tolerance; }
};

inline PointwiseReport pointwise_check(const ScenarioRun& run, const SlackTolerance& tol = SlackTolerance::frozen(),
                                       const ChainRuleOptions& opts = {}) {
    const ScenarioSpec& s = run.spec;
    const ChainRuleResult cr = chain_rule_rhs(s.bellman, s.A, s.V, run.f, run.g, opts);
    const double weight = 2.0 * s.bellman.delta() * std::min(1.0, s.A.gamma());

    PointwiseReport r;
    r.h = s.grid.min_spacing();
    r.dt = run.f.dt;
    r.tolerance = tol(r.h, r.dt);
    r.mollified_nodes = cr.mollified_nodes;
    r.excluded_nodes = cr.degenerate_nodes;
    r.excluded = cr.degenerate;
    r.lhs = cr.rhs;
    r.rhs = SpaceTimeField{s.grid, cr.rhs.times, {}};
    r.slack = r.rhs;
    for (std::size_t k = 0; k < run.f.size(); ++k) {
        // star norms from the chain-rule gradients, so both sides share one stencil
        const Eigen::VectorXd sf =
            (cr.grad_f_sq[k] + s.V.values().cwiseProduct(run.f.snapshots[k].values().cwiseAbs2())).cwiseSqrt();
        const Eigen::VectorXd sg =
            (cr.grad_g_sq[k] + s.V.values().cwiseProduct(run.g.snapshots[k].values().cwiseAbs2())).cwiseSqrt();
        Eigen::VectorXcd bound = (weight * sf.cwiseProduct(sg)).cast<cplx>();
        Eigen::VectorXcd slack = r.lhs.values[k] - bound;
        for (Eigen::Index i = 0; i < slack.size(); ++i) {
            if (cr.degenerate[k][i]) continue;
            if (slack[i].real() < r.worst_slack) {
                r.worst_slack = slack[i].real();
                r.worst_node = static_cast<int>(i);
                r.worst_time = r.lhs.times[k];
            }
        }
        r.rhs.values.push_back(std::move(bound));
        r.slack.values.push_back(std::move(slack));
    }
    return r;
}

struct PointwiseLevel {
    int cells = 0;
    double h = 0.0;
    double dt = 0.0;
    double worst_slack = 0.0;
    double tolerance = 0.0;
    bool passed = false;
    std::size_t excluded_nodes = 0;
};

inline std::vector<PointwiseLevel> pointwise_ladder(PresetOptions base, const std::vector<int>& cells,
                                                    const SlackTolerance& tol = SlackTolerance::frozen(),
                                                    const ChainRuleOptions& opts = {}) {
    std::vector<PointwiseLevel> out;
    for (int c : cells) {
        base.cells = c;
        base.axis_cells.clear();
        const PointwiseReport r = pointwise_check(run_scenario(make_preset(base)), tol, opts);
        out.push_back({c, r.h, r.dt, r.worst_slack, r.tolerance, r.passed(), r.excluded_nodes});
    }
    return out;
}

/// Shared by calibration and acceptance: horizon, ladder, dimensions and exponents.
struct PointwiseProtocol {
    double T = 0.02;
    std::vector<int> cells{32, 64, 128};
    std::vector<int> dims{1, 2};
    std::vector<double> exponents{2.0, 4.0};

    PresetOptions options(const std::string& preset, int dim, double p) const {
        PresetOptions o;
        o.name = preset;
        o.dim = dim;
        o.p = p;
        o.T = T;
        return o;
    }
};

/// min(worst slack, 0) is nondecreasing along the ladder.
inline bool floor_monotone(const std::vector<PointwiseLevel>& levels) {
    for (std::size_t k = 0; k + 1 < levels.size(); ++k)
        if (std::min(levels[k + 1].worst_slack, 0.0) < std::min(levels[k].worst_slack, 0.0)) return false;
    return true;
}

/// Rows x[,y[,z]],t,lhs,rhs,slack; excluded nodes are skipped.
inline void write_pointwise_csv(std::ostream& os, const PointwiseReport& r) {
    static const char* axes[] = {"x", "y", "z"};
    const Grid& g = r.lhs.grid;
    for (int a = 0; a < g.dim(); ++a) os << axes[a] << ',';
    os << "t,lhs,rhs,slack\n";
    for (std::size_t k = 0; k < r.lhs.values.size(); ++k) {
        for (int i = 0; i < g.unknowns(); ++i) {
            if (r.excluded[k][i]) continue;
            const auto x = g.unknown_point(i);
            for (int a = 0; a < g.dim(); ++a) os << format_real(x[a]) << ',';
            os << format_real(r.lhs.times[k]) << ',' << format_real(r.lhs.values[k][i].real()) << ','
               << format_real(r.rhs.values[k][i].real()) << ',' << format_real(r.slack.values[k][i].real()) << '\n';
        }
    }
}

} // namespace bilinear::harness
