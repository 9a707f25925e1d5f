#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>
#include <string>
#include <vector>

#include "bilinear/bellman.hpp"
#include "bilinear/certification.hpp"
#include "bilinear/cli/config.hpp"
#include "bilinear/cli/report.hpp"
#include "bilinear/expm.hpp"
#include "bilinear/harness.hpp"
#include "bilinear/parallel.hpp"
#include "bilinear/seed.hpp"

namespace bilinear::cli {

// ---------------------------------------------------------------- Bellman function

/// Seeded points with |zeta|, |eta| log-uniform in [lo, hi] and uniform phases, skipping points whose
/// relative distance to the interface is at most `band` or with |eta| <= v_axis.
inline std::vector<bellman::ComplexPair> sample_points(const bellman::BellmanParams& bp, int count,
                                                       std::uint64_t seed, double band = 1e-3, double lo = 1e-3,
                                                       double hi = 10.0, double v_axis = 1e-12) {
    SeedStream rs(seed, "bellman.points.p=" + format_real(bp.p()));
    auto modulus = [&] { return std::pow(10.0, rs.uniform(std::log10(lo), std::log10(hi))); };
    std::vector<bellman::ComplexPair> out;
    out.reserve(count);
    while (static_cast<int>(out.size()) < count) {
        const double u = modulus(), pu = rs.uniform(0.0, 2.0 * std::numbers::pi);
        const double v = modulus(), pv = rs.uniform(0.0, 2.0 * std::numbers::pi);
        const double up = std::pow(u, bp.p()), vq = std::pow(v, bp.q());
        if (v <= v_axis || std::abs(up - vq) <= band * std::max(up, vq)) continue;
        out.push_back({std::polar(u, pu), std::polar(v, pv)});
    }
    return out;
}

struct CertificationSummary {
    std::size_t points = 0, invalid = 0;
    double min_range_slack = std::numeric_limits<double>::infinity();
    double min_hessian_margin = std::numeric_limits<double>::infinity();
    double min_drift_margin = std::numeric_limits<double>::infinity();
    std::vector<bellman::BejazReport> reports;
};

inline CertificationSummary certify_points(const bellman::BellmanParams& bp,
                                           const std::vector<bellman::ComplexPair>& pts, int directions) {
    CertificationSummary s;
    s.points = pts.size();
    s.reports.resize(pts.size());
    bellman::BejazConfig cfg;
    cfg.direction_samples = directions;
    parallel_for(static_cast<int>(pts.size()), [&](int i) { s.reports[i] = bellman::check_bejaz(bp, pts[i], cfg); });
    for (const auto& r : s.reports) {
        s.invalid += !r.valid();
        s.min_range_slack = std::min(s.min_range_slack, r.prop_i_slack);
        s.min_hessian_margin = std::min(s.min_hessian_margin, r.prop_ii.margin_hessian);
        s.min_drift_margin = std::min(s.min_drift_margin, r.prop_iii_slack);
    }
    return s;
}

struct DerivativeOracles {
    /// max |dQ - central difference of Q| / |dQ|
    double gradient = 0.0;
    /// max |d2Q - central difference of dQ|_F / |d2Q|_F
    double hessian = 0.0;
    /// max relative jump of phi, phi_u, phi_v across the interface
    double interface = 0.0;
};

/// Finite-difference oracles at the given points. Steps scale with the modulus of the perturbed block, so
/// points whose moduli differ by orders of magnitude are still resolved.
inline DerivativeOracles derivative_oracles(const bellman::BellmanParams& bp,
                                            const std::vector<bellman::ComplexPair>& pts, std::uint64_t seed,
                                            double step = 1e-5) {
    using bellman::ComplexPair;
    std::vector<DerivativeOracles> per(pts.size());
    parallel_for(static_cast<int>(pts.size()), [&](int k) {
        const ComplexPair& xi = pts[k];
        const Eigen::Vector4d x = xi.to_real();
        auto Q = [&](const Eigen::Vector4d& y) { return bellman::eval_Q(bp, ComplexPair::from_real(y)); };
        auto dQ = [&](const Eigen::Vector4d& y) { return bellman::real_gradient_Q(bp, ComplexPair::from_real(y)); };
        const Eigen::Vector4d g = dQ(x);
        const Eigen::Matrix4d H = bellman::hessian_Q(bp, xi);
        Eigen::Vector4d fd;
        Eigen::Matrix4d F;
        for (int i = 0; i < 4; ++i) {
            const double h = step * (i < 2 ? xi.u() : xi.v());
            const Eigen::Vector4d e = Eigen::Vector4d::Unit(i) * h;
            fd[i] = (Q(x + e) - Q(x - e)) / (2.0 * h);
            F.col(i) = (dQ(x + e) - dQ(x - e)) / (2.0 * h);
        }
        per[k].gradient = (fd - g).norm() / g.norm();
        per[k].hessian = (H - F).norm() / H.norm();
    });
    DerivativeOracles out;
    for (const auto& d : per) {
        out.gradient = std::max(out.gradient, d.gradient);
        out.hessian = std::max(out.hessian, d.hessian);
    }
    // interface points u^p = v^q with v log-uniform in [1e-3, 10]
    SeedStream rs(seed, "bellman.interface.p=" + format_real(bp.p()));
    for (std::size_t k = 0; k < pts.size(); ++k) {
        const double v = std::pow(10.0, rs.uniform(-3.0, 1.0));
        const double u = std::pow(v, bp.q() / bp.p());
        const auto a = bellman::radial_jet(bp, u, v, bellman::Branch::Region1);
        const auto b = bellman::radial_jet(bp, u, v, bellman::Branch::Region2);
        const double scale = std::abs(b.phi) + std::hypot(b.du, b.dv);
        out.interface = std::max({out.interface, std::abs(a.phi - b.phi) / scale, std::abs(a.du - b.du) / scale,
                                  std::abs(a.dv - b.dv) / scale});
    }
    return out;
}

inline Results bellman_verify(const ScenarioConfig& c) {
    const auto bp = bellman::BellmanParams::from_p(c.preset.p);
    Results r;
    r.command = "bellman-verify";
    std::ostringstream desc;
    desc << "p=" << format_real(bp.p()) << " q=" << format_real(bp.q()) << " delta=" << format_real(bp.delta())
         << " points=" << c.points << " directions=" << c.directions << " seed=" << c.preset.seed;
    r.scenario = desc.str();

    const auto pts = sample_points(bp, c.points, c.preset.seed);
    const CertificationSummary cert = certify_points(bp, pts, c.directions);
    r.add("Bellman range 0 <= phi <= (1+delta)(|zeta|^p + |eta|^q)", cert.min_range_slack,
          cert.min_range_slack >= 0.0);
    r.add("Bellman Hessian bound -d2Q >= delta(tau|dzeta|^2 + |deta|^2/tau), shared tau", cert.min_hessian_margin,
          cert.min_hessian_margin >= -1e-10);
    r.add("Bellman drift bound Q - dQ.xi >= delta(tau|zeta|^2 + |eta|^2/tau), shared tau", cert.min_drift_margin,
          cert.min_drift_margin >= -1e-10);
    r.add("certificates valid at every sampled point", 0.0 - static_cast<double>(cert.invalid), cert.invalid == 0,
          std::to_string(cert.points) + " points");

    const DerivativeOracles d = derivative_oracles(bp, pts, c.preset.seed);
    r.add("gradient of Q vs central differences (relative < 1e-6)", 1e-6 - d.gradient, d.gradient < 1e-6);
    r.add("second derivatives of Q vs differences of the gradient (relative < 1e-5)", 1e-5 - d.hessian,
          d.hessian < 1e-5);
    r.add("C1 agreement of the two branches on the interface (< 1e-10)", 1e-10 - d.interface, d.interface < 1e-10);

    std::ostringstream csv;
    csv << "zeta_re,zeta_im,eta_re,eta_im,tau,range_slack,hessian_margin,drift_margin,mollified,valid\n";
    for (std::size_t k = 0; k < pts.size(); ++k) {
        const auto& x = pts[k];
        const auto& b = cert.reports[k];
        csv << format_real(x.zeta.real()) << ',' << format_real(x.zeta.imag()) << ',' << format_real(x.eta.real())
            << ',' << format_real(x.eta.imag()) << ',' << format_real(b.prop_ii.tau) << ','
            << format_real(b.prop_i_slack) << ',' << format_real(b.prop_ii.margin_hessian) << ','
            << format_real(b.prop_iii_slack) << ',' << (b.prop_ii.mollified ? 1 : 0) << ',' << (b.valid() ? 1 : 0)
            << '\n';
    }
    r.table("bellman_points.csv", csv.str());
    return r;
}

// ---------------------------------------------------------------- scenarios

inline std::string describe(const harness::ScenarioSpec& s) {
    std::ostringstream os;
    os << s.name << " n=" << s.grid.dim() << " grid=" << s.grid.describe() << " unknowns=" << s.grid.unknowns()
       << " p=" << format_real(s.bellman.p()) << " T=" << format_real(s.time.horizon())
       << " dt=" << format_real(s.time.dt()) << " scheme=" << to_string(s.time.scheme())
       << " gamma=" << format_real(s.A.gamma());
    return os.str();
}

inline std::string key_value_csv(const std::vector<std::pair<std::string, double>>& rows) {
    std::ostringstream os;
    os << "quantity,value\n";
    for (const auto& [k, v] : rows) os << k << ',' << format_real(v) << '\n';
    return os.str();
}

inline Results operator_verify(const ScenarioConfig& c) {
    const harness::ScenarioSpec s = build_scenario(c);
    const Grid& g = s.grid;
    const DiscreteOperator op = assemble(g, s.A, s.V);
    Results r;
    r.command = "operator-verify";
    r.scenario = describe(s);

    r.add("coefficient field accretive (gamma > 0)", s.A.gamma(), s.A.gamma() > 0.0);
    const double vmin = s.V.values().size() ? s.V.values().minCoeff() : 0.0;
    r.add("potential nonnegative", vmin, vmin >= 0.0);

    // Re <L_h u, u> >= gamma |G u|^2 + <V u, u> on seeded random vectors
    SeedStream rs(c.preset.seed, "operator.ellipticity");
    double worst = std::numeric_limits<double>::infinity();
    for (int k = 0; k < 32; ++k) {
        GridFunction u(g);
        for (Eigen::Index i = 0; i < u.size(); ++i) u[i] = cplx(rs.uniform(-1.0, 1.0), rs.uniform(-1.0, 1.0));
        const double lhs = apply(op, u).inner(u).real();
        const double vuu = s.V.values().dot(u.values().cwiseAbs2()) * g.cell_volume();
        const double rhs = s.A.gamma() * edge_norm_squared(gradient(u)) + vuu;
        worst = std::min(worst, (lhs - rhs) / std::max(rhs, std::numeric_limits<double>::min()));
    }
    r.add("discrete ellipticity Re<L u, u> >= gamma |G u|^2 + <V u, u> (relative)", worst, worst >= -1e-12);

    if (g.boundary() == Boundary::Periodic && s.V.is_zero()) {
        const GridFunction one = GridFunction::sample(g, [](const Grid::Point&) { return 1.0; });
        const double k = apply(op, one).sup_norm();
        r.add("constants in the kernel (periodic, V = 0)", 1e-12 - k, k <= 1e-12);
    }
    r.info("monotone stencil (M-matrix)", op.monotone() ? 1.0 : 0.0);

    r.table("operator.csv", key_value_csv({{"unknowns", static_cast<double>(op.unknowns())},
                                           {"nonzeros", static_cast<double>(op.matrix().nonZeros())},
                                           {"gamma", s.A.gamma()},
                                           {"coefficient_sup", s.A.sup_norm()},
                                           {"potential_min", vmin},
                                           {"potential_max", s.V.values().size() ? s.V.values().maxCoeff() : 0.0},
                                           {"monotone", op.monotone() ? 1.0 : 0.0},
                                           {"ellipticity_margin", worst}}));
    return r;
}

struct OracleComparison {
    double rel_error_short = 0.0, rel_error_long = 0.0;
    double slope_cn = 0.0, slope_be = 0.0;
    std::vector<double> dts, err_cn, err_be;
};

/// CN (dt = 1e-3) against the dense exponential at t = 0.1 and 1.0, and fitted orders of both schemes
/// over dt in {0.005, 0.0025, 0.00125, 0.000625} at t = 0.2.
inline OracleComparison compare_with_oracle(const DiscreteOperator& op, const GridFunction& f,
                                            const SolverConfig& solver) {
    OracleComparison o;
    auto rel = [](const GridFunction& a, const GridFunction& b) { return (a - b).l2_norm() / b.l2_norm(); };
    const Trajectory cn = evolve(op, f, TimeGrid(1.0, 1e-3, Scheme::CrankNicolson, 100), solver);
    for (std::size_t k = 0; k < cn.size(); ++k) {
        if (std::abs(cn.times[k] - 0.1) < 1e-9) o.rel_error_short = rel(cn.snapshots[k], dense_expm_oracle(op, f, 0.1));
    }
    o.rel_error_long = rel(cn.final_state(), dense_expm_oracle(op, f, 1.0));

    const GridFunction ex = dense_expm_oracle(op, f, 0.2);
    o.dts = {0.005, 0.0025, 0.00125, 0.000625};
    std::vector<double> ldt;
    for (double dt : o.dts) {
        ldt.push_back(std::log(dt));
        o.err_cn.push_back(rel(evolve(op, f, TimeGrid(0.2, dt, Scheme::CrankNicolson), solver).final_state(), ex));
        o.err_be.push_back(rel(evolve(op, f, TimeGrid(0.2, dt, Scheme::BackwardEuler), solver).final_state(), ex));
    }
    auto logs = [](std::vector<double> v) {
        for (double& x : v) x = std::log(x);
        return v;
    };
    o.slope_cn = harness::fit_line(ldt, logs(o.err_cn)).slope;
    o.slope_be = harness::fit_line(ldt, logs(o.err_be)).slope;
    return o;
}

inline Results semigroup_verify(const ScenarioConfig& c) {
    const harness::ScenarioSpec s = build_scenario(c);
    const DiscreteOperator op = assemble(s.grid, s.A, s.V);
    if (op.unknowns() > kDenseOracleLimit)
        throw ConfigError("semigroup-verify compares against dense exponentials and needs at most " +
                          std::to_string(kDenseOracleLimit) + " unknowns; the scenario has " +
                          std::to_string(op.unknowns()));
    Results r;
    r.command = "semigroup-verify";
    r.scenario = describe(s);
    SolverConfig solver = s.solver;
    solver.tol = std::min(solver.tol, 1e-13);

    const OracleComparison o = compare_with_oracle(op, s.f, solver);
    r.add("Crank-Nicolson (dt = 1e-3) vs dense exponential at t = 0.1 (relative L2 <= 1e-4)",
          1e-4 - o.rel_error_short, o.rel_error_short <= 1e-4);
    r.add("Crank-Nicolson (dt = 1e-3) vs dense exponential at t = 1 (relative L2 <= 1e-4)", 1e-4 - o.rel_error_long,
          o.rel_error_long <= 1e-4);
    r.add("Crank-Nicolson order within 0.2 of 2", 0.2 - std::abs(o.slope_cn - 2.0), std::abs(o.slope_cn - 2.0) <= 0.2);
    r.add("backward Euler order within 0.2 of 1", 0.2 - std::abs(o.slope_be - 1.0), std::abs(o.slope_be - 1.0) <= 0.2);

    const Trajectory be = evolve(op, s.f, TimeGrid(0.2, 1e-3, Scheme::BackwardEuler), solver);
    const ContractionReport cr = linf_contraction_check(be, op.monotone());
    if (cr.asserted)
        r.add("backward Euler sup-norm nonincreasing (factor <= 1 + 1e-12 per step)", 1.0 + 1e-12 - cr.worst_ratio,
              cr.passed);
    else
        r.info("backward Euler sup-norm step ratio (stencil not monotone)", cr.worst_ratio);

    // same coefficients on a periodic box without potential
    ScenarioConfig pc = c;
    pc.preset.boundary = Boundary::Periodic;
    pc.V_kind = "zero";
    const harness::ScenarioSpec ps = build_scenario(pc);
    const DiscreteOperator pop = assemble(ps.grid, ps.A, ps.V);
    SolverConfig tight = solver;
    tight.tol = 1e-14;
    double drift = 0.0;
    for (Scheme scheme : {Scheme::CrankNicolson, Scheme::BackwardEuler}) {
        const Trajectory tr = evolve(pop, ps.f, TimeGrid(0.2, 1e-3, scheme), tight);
        const cplx m0 = ps.f.integral();
        for (const auto& u : tr.snapshots) drift = std::max(drift, std::abs(u.integral() - m0) / std::abs(m0));
    }
    r.add("periodic mass conservation over 200 steps (relative drift <= 1e-10)", 1e-10 - drift, drift <= 1e-10);

    std::ostringstream csv;
    csv << "dt,error_crank_nicolson,error_backward_euler\n";
    for (std::size_t k = 0; k < o.dts.size(); ++k)
        csv << format_real(o.dts[k]) << ',' << format_real(o.err_cn[k]) << ',' << format_real(o.err_be[k]) << '\n';
    r.table("semigroup_orders.csv", csv.str());
    r.table("semigroup.csv", key_value_csv({{"cn_error_t0.1", o.rel_error_short},
                                            {"cn_error_t1", o.rel_error_long},
                                            {"slope_crank_nicolson", o.slope_cn},
                                            {"slope_backward_euler", o.slope_be},
                                            {"be_worst_step_ratio", cr.worst_ratio},
                                            {"periodic_mass_drift", drift}}));
    return r;
}

inline Results pointwise(const ScenarioConfig& c) {
    const harness::ScenarioSpec s = build_scenario(c);
    Results r;
    r.command = "pointwise";
    r.scenario = describe(s);
    const harness::PointwiseReport rep = harness::pointwise_check(harness::run_scenario(s));
    r.add("pointwise lower bound L'b >= 2 delta min(1, gamma) |f~|_* |g~|_* (slack >= -eps_h)",
          rep.worst_slack + rep.tolerance, rep.passed(),
          "eps_h = " + format_real(rep.tolerance) + ", excluded nodes " + std::to_string(rep.excluded_nodes));
    std::ostringstream csv;
    harness::write_pointwise_csv(csv, rep);
    r.table("pointwise.csv", csv.str());

    if (!c.ladder.empty()) {
        std::vector<harness::PointwiseLevel> levels;
        for (int n : c.ladder) {
            ScenarioConfig lc = c;
            lc.preset.cells = n;
            lc.preset.axis_cells.clear();
            const harness::ScenarioSpec ls = build_scenario(lc);
            const harness::PointwiseReport lr = harness::pointwise_check(harness::run_scenario(ls));
            levels.push_back({n, lr.h, lr.dt, lr.worst_slack, lr.tolerance, lr.passed(), lr.excluded_nodes});
        }
        bool all = true;
        double margin = std::numeric_limits<double>::infinity();
        std::ostringstream lcsv;
        lcsv << "cells,h,dt,worst_slack,tolerance,passed\n";
        for (const auto& l : levels) {
            all = all && l.passed;
            margin = std::min(margin, l.worst_slack + l.tolerance);
            lcsv << l.cells << ',' << format_real(l.h) << ',' << format_real(l.dt) << ',' << format_real(l.worst_slack)
                 << ',' << format_real(l.tolerance) << ',' << (l.passed ? 1 : 0) << '\n';
        }
        r.add("pointwise lower bound on every ladder level", margin, all);
        r.add("slack floor improves monotonically over the ladder", 0.0, harness::floor_monotone(levels));
        r.table("pointwise_ladder.csv", lcsv.str());
    }
    return r;
}

inline void add_embedding_checks(Results& r, const harness::EmbeddingReport& e, const std::string& suffix = {}) {
    const double qe = e.functional.quadrature_error;
    r.add("embedding, sum form: E_T + tail <= max(1, 1/gamma)/(2 delta) (|f|_p^p + |g|_q^q)" + suffix,
          e.margin_sum - qe, e.sum_passed(), "quadrature error " + format_real(qe));
    r.add("embedding, polarized form: E_T + tail <= max(1, 1/gamma)/(2 delta) min_lambda(...)" + suffix,
          e.margin_polarized - qe, e.polarized_passed(), "lambda* = " + format_real(e.polarization.lambda));
    r.add("exponential tail estimate reliable (R^2 >= 0.9)" + suffix, e.functional.decay_r2 - 0.9,
          e.functional.tail_reliable);
    r.info("ratio E / (p |f|_p |g|_q)" + suffix, e.ratio);
}

inline std::string embedding_csv(const harness::EmbeddingReport& e) {
    return key_value_csv({{"E_T", e.functional.value},
                          {"tail", e.functional.tail},
                          {"decay_rate", e.functional.decay_rate},
                          {"quadrature_error", e.functional.quadrature_error},
                          {"p", e.p},
                          {"q", e.q},
                          {"delta", e.delta},
                          {"gamma", e.gamma},
                          {"constant", e.constant},
                          {"norm_f_p", e.norm_f},
                          {"norm_g_q", e.norm_g},
                          {"rhs_sum", e.rhs_sum},
                          {"rhs_polarized", e.rhs_polarized},
                          {"lambda", e.polarization.lambda},
                          {"margin_sum", e.margin_sum},
                          {"margin_polarized", e.margin_polarized},
                          {"ratio", e.ratio}});
}

inline Results embed(const ScenarioConfig& c) {
    const harness::ScenarioSpec s = build_scenario(c);
    Results r;
    r.command = "embed";
    r.scenario = describe(s);
    const harness::EmbeddingReport e = harness::embedding_check(harness::run_scenario(s));
    add_embedding_checks(r, e);
    r.table("embedding.csv", embedding_csv(e));
    std::ostringstream csv;
    csv << "t,integrand\n";
    for (std::size_t k = 0; k < e.functional.times.size(); ++k)
        csv << format_real(e.functional.times[k]) << ',' << format_real(e.functional.integrand[k]) << '\n';
    r.table("functional.csv", csv.str());
    return r;
}

inline void add_ibp_checks(Results& r, const harness::IbpReport& rep, bool assert_decay = true,
                           const std::string& suffix = {}) {
    double bound = std::numeric_limits<double>::infinity(), mono = std::numeric_limits<double>::infinity();
    for (const auto& t : rep.terms) bound = std::min(bound, t.margin);
    for (std::size_t k = 0; k + 1 < rep.terms.size(); ++k) mono = std::min(mono, rep.terms[k].epsilon - rep.terms[k + 1].epsilon);
    if (rep.terms.size() < 2) mono = 0.0;
    r.add("cutoff upper bound I_R <= |f|_p^p + |g|_q^q + eps(R)" + suffix, bound, rep.bound_holds);
    r.add("initial term -b(x, 0) <= |f(x)|^p + |g(x)|^q at every node" + suffix, 0.0 - rep.nodewise_excess,
          rep.nodewise_excess <= 0.0);
    r.add("eps(R) nonincreasing over the R list" + suffix, mono, rep.epsilon_nonincreasing);
    if (assert_decay)
        r.add("flux term decays by >= 2 from smallest to largest R" + suffix, rep.flux_decay - 2.0,
              rep.flux_decay >= 2.0);
    else
        r.info("flux decay factor, smallest to largest R" + suffix, rep.flux_decay);
}

inline Results ibp(const ScenarioConfig& c) {
    const harness::ScenarioSpec s = build_scenario(c);
    Results r;
    r.command = "ibp";
    r.scenario = describe(s);
    const harness::IbpReport rep = harness::ibp_upper_check(harness::run_scenario(s));
    add_ibp_checks(r, rep);
    std::ostringstream csv;
    harness::write_ibp_csv(csv, rep);
    r.table("ibp.csv", csv.str());
    return r;
}

inline void add_offdiag_checks(Results& r, const std::vector<harness::OffdiagReport>& reps) {
    for (const auto& rep : reps) {
        const std::string op = to_string(rep.op);
        r.add("off-diagonal decay of " + op + ": slope < 0 and R^2 >= 0.9",
              std::min(-rep.fit.slope, rep.fit.r2 - 0.9), rep.passed(),
              "c = " + format_real(rep.c) + ", " + std::to_string(rep.excluded) + " samples below floor");
        r.info("off-diagonal ratio nonincreasing in distance for " + op, rep.monotone_in_distance ? 1.0 : 0.0);
    }
}

inline Results offdiag(const ScenarioConfig& c) {
    const harness::ScenarioSpec s = build_scenario(c);
    const DiscreteOperator op = assemble(s.grid, s.A, s.V);
    if (op.unknowns() > kDenseOracleLimit)
        throw ConfigError("offdiag uses dense exponentials and needs at most " + std::to_string(kDenseOracleLimit) +
                          " unknowns; the scenario has " + std::to_string(op.unknowns()));
    Results r;
    r.command = "offdiag";
    r.scenario = describe(s);
    harness::OffdiagConfig cfg = offdiag_config(c);
    try {
        const auto reps = harness::offdiag_check(op, cfg);
        add_offdiag_checks(r, reps);
        std::ostringstream csv;
        harness::write_offdiag_csv(csv, reps);
        r.table("offdiag.csv", csv.str());
    } catch (const DomainError& e) {
        throw ConfigError(std::string("offdiag: ") + e.what());
    }
    return r;
}

/// One embedding run per (p, n) cell; cells run on the worker pool and are reported in grid order.
inline Results sweep(const ScenarioConfig& c) {
    struct Cell {
        double p;
        int dim;
        harness::EmbeddingReport e;
    };
    std::vector<Cell> cells;
    std::vector<ScenarioConfig> configs;
    for (double p : c.sweep_p)
        for (int dim : c.sweep_dims) {
            ScenarioConfig cc = c;
            cc.preset.p = p;
            cc.preset.dim = dim;
            if (!cc.preset.axis_cells.empty() && static_cast<int>(cc.preset.axis_cells.size()) != dim)
                cc.preset.axis_cells.clear();
            build_scenario(cc); // validate every cell before computing any
            configs.push_back(cc);
            cells.push_back({p, dim, {}});
        }
    parallel_for(static_cast<int>(cells.size()),
                 [&](int i) { cells[i].e = harness::embedding_check(harness::run_scenario(build_scenario(configs[i]))); });

    Results r;
    r.command = "sweep";
    r.scenario = describe(build_scenario(c));
    std::ostringstream csv;
    csv << "p,n,E_T,tail,quadrature_error,rhs_sum,rhs_polarized,margin_sum,margin_polarized,ratio,passed\n";
    for (const auto& cell : cells) {
        const auto& e = cell.e;
        const double qe = e.functional.quadrature_error;
        const bool ok = e.sum_passed() && e.polarized_passed();
        std::ostringstream name;
        name << "embedding (sum and polarized) p=" << format_real(cell.p) << " n=" << cell.dim;
        r.add(name.str(), std::min(e.margin_sum, e.margin_polarized) - qe, ok, "ratio " + format_real(e.ratio));
        csv << format_real(cell.p) << ',' << cell.dim << ',' << format_real(e.functional.value) << ','
            << format_real(e.functional.tail) << ',' << format_real(qe) << ',' << format_real(e.rhs_sum) << ','
            << format_real(e.rhs_polarized) << ',' << format_real(e.margin_sum) << ','
            << format_real(e.margin_polarized) << ',' << format_real(e.ratio) << ',' << (ok ? 1 : 0) << '\n';
    }
    r.table("sweep.csv", csv.str());
    return r;
}

} // namespace bilinear::cli
