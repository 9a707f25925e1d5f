#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <functional>
#include <numbers>
#include <random>
#include <sstream>

#include "bilinear/harness.hpp"

using namespace bilinear;
using namespace bilinear::harness;
using std::numbers::pi;

namespace {

PresetOptions small(const std::string& name, int dim, int cells, double p = 2.0, double T = 0.05) {
    PresetOptions o;
    o.name = name;
    o.dim = dim;
    o.cells = cells;
    o.p = p;
    o.T = T;
    return o;
}

// golden-section search on log(lambda)
double golden_min(const std::function<double(double)>& f, double lo, double hi) {
    const double r = (std::sqrt(5.0) - 1.0) / 2.0;
    double a = lo, b = hi;
    double c = b - r * (b - a), d = a + r * (b - a);
    for (int it = 0; it < 200; ++it) {
        if (f(c) < f(d)) b = d;
        else a = c;
        c = b - r * (b - a);
        d = a + r * (b - a);
    }
    return f(0.5 * (a + b));
}

Trajectory constant_trajectory(const Grid& g, cplx value, double rate, const std::vector<double>& times) {
    Trajectory tr;
    tr.times = times;
    for (double t : times)
        tr.snapshots.push_back(GridFunction(g, Eigen::VectorXcd::Constant(g.unknowns(), value * std::exp(-rate * t))));
    return tr;
}

} // namespace

// ---- space-time fields ----

TEST(Field, ComposeBVanishesOnZeroData) {
    const ScenarioRun run = run_scenario(make_preset(small("identity", 1, 32)));
    Trajectory zero = run.f;
    for (auto& s : zero.snapshots) s.values().setZero();
    const SpaceTimeField b = compose_b(run.spec.bellman, zero, zero);
    EXPECT_EQ(b.sup_norm(), 0.0);
}

TEST(Field, ComposeBRespectsBellmanRange) {
    for (double p : {2.0, 3.0, 4.0}) {
        const ScenarioRun run = run_scenario(make_preset(small("rotation", 2, 16, p)));
        const auto& bp = run.spec.bellman;
        const SpaceTimeField b = compose_b(bp, run.f, run.g);
        for (std::size_t k = 0; k < b.steps(); ++k)
            for (Eigen::Index i = 0; i < b.values[k].size(); ++i) {
                const double bi = b.values[k][i].real();
                const double u = std::abs(run.f.snapshots[k][i]), v = std::abs(run.g.snapshots[k][i]);
                EXPECT_LE(bi, 0.0);
                EXPECT_LE(-2.0 * bi, (1.0 + bp.delta()) * (std::pow(u, p) + std::pow(v, bp.q())) * (1 + 1e-12) + 1e-300);
            }
        // anchored at the initial data
        for (Eigen::Index i = 0; i < b.values[0].size(); ++i)
            EXPECT_EQ(b.values[0][i].real(), bellman::eval_Q(bp, {run.spec.f[i], run.spec.g[i]}));
    }
}

TEST(Field, ComposeBRejectsMismatchedTrajectories) {
    const ScenarioRun a = run_scenario(make_preset(small("identity", 1, 32, 2.0, 0.05)));
    const ScenarioRun b = run_scenario(make_preset(small("identity", 1, 32, 2.0, 0.1)));
    EXPECT_THROW(compose_b(a.spec.bellman, a.f, b.g), DimensionError);
}

TEST(Field, LprimeOfSemigroupIsSecondOrderInTime) {
    const Grid g = Grid::cube(1, 64, -1, 1, Boundary::Dirichlet);
    const DiscreteOperator op = assemble(g, CoefficientField::identity(g));
    const GridFunction u = GridFunction::sample(g, [](const Grid::Point& x) { return std::sin(pi * (x[0] + 1) / 2); });
    std::vector<double> res;
    for (double dt : {0.01, 0.005, 0.0025}) {
        const SpaceTimeField field = SpaceTimeField::from(evolve(op, u, TimeGrid(0.2, dt)));
        res.push_back(lprime(op, field).sup_norm());
    }
    EXPECT_GT(res[0] / res[1], 3.5);
    EXPECT_GT(res[1] / res[2], 3.5);
    EXPECT_LT(res[2], 1e-4);
}

TEST(Field, LprimeOfPeriodicConstantVanishes) {
    const Grid g = Grid::cube(2, 8, 0, 1, Boundary::Periodic);
    const DiscreteOperator op = assemble(g, CoefficientField::identity(g));
    const Trajectory tr = constant_trajectory(g, cplx(1.5, -0.5), 0.0, {0.0, 0.1, 0.2, 0.3});
    EXPECT_LT(lprime(op, SpaceTimeField::from(tr)).sup_norm(), 1e-13);
}

TEST(Field, LprimeIsLinear) {
    const ScenarioRun run = run_scenario(make_preset(small("checker", 2, 16)));
    const SpaceTimeField a = SpaceTimeField::from(run.f), b = SpaceTimeField::from(run.g);
    SpaceTimeField mix = a;
    for (std::size_t k = 0; k < mix.values.size(); ++k) mix.values[k] = 2.0 * a.values[k] - cplx(0, 3) * b.values[k];
    const SpaceTimeField la = lprime(run.op, a), lb = lprime(run.op, b), lm = lprime(run.op, mix);
    for (std::size_t k = 0; k < lm.values.size(); ++k)
        EXPECT_LT((lm.values[k] - 2.0 * la.values[k] + cplx(0, 3) * lb.values[k]).norm(), 1e-10);
}

TEST(Field, TimeDerivativeNeedsTwoSnapshots) {
    const Grid g = Grid::cube(1, 8, -1, 1, Boundary::Dirichlet);
    const SpaceTimeField one = SpaceTimeField::from(constant_trajectory(g, 0.0, 0.0, {0.0}));
    EXPECT_THROW(time_derivative(one), DimensionError);
}

TEST(Field, TimeDerivativeIsExactOnQuadratics) {
    const Grid g = Grid::cube(1, 4, -1, 1, Boundary::Dirichlet);
    SpaceTimeField u{g, {0.0, 0.1, 0.25, 0.3, 0.5}, {}};
    for (double t : u.times) u.values.push_back(Eigen::VectorXcd::Constant(g.unknowns(), 1 + 2 * t - 3 * t * t));
    const SpaceTimeField d = time_derivative(u);
    for (std::size_t k = 0; k < u.times.size(); ++k) EXPECT_NEAR(d.values[k][0].real(), 2 - 6 * u.times[k], 1e-12);
}

TEST(Field, TrapezoidAndLineFit) {
    EXPECT_DOUBLE_EQ(trapezoid({0.0, 1.0, 3.0}, {1.0, 3.0, 7.0}), 12.0);
    const LinearFit fit = fit_line({0, 1, 2, 3}, {1, 3, 5, 7});
    EXPECT_NEAR(fit.slope, 2.0, 1e-14);
    EXPECT_NEAR(fit.intercept, 1.0, 1e-14);
    EXPECT_NEAR(fit.r2, 1.0, 1e-14);
}

// ---- scenarios ----

TEST(Scenario, PresetsAreAccretiveWithNonnegativePotential) {
    for (const auto& name : preset_names())
        for (int dim : {1, 2, 3}) {
            const ScenarioSpec s = make_preset(small(name, dim, dim == 3 ? 8 : 16));
            EXPECT_GT(s.gamma(), 0.0) << name << " n=" << dim;
            EXPECT_GE(s.V.values().minCoeff(), 0.0) << name << " n=" << dim;
            EXPECT_GT(s.f.norm(2), 0.0);
            EXPECT_GT(s.g.norm(2), 0.0);
        }
}

TEST(Scenario, RandomAccretiveRespectsGammaMin) {
    PresetOptions o = small("random-accretive", 2, 16);
    o.gamma_min = 0.4;
    EXPECT_GE(make_preset(o).gamma(), 0.4 - 1e-12);
}

TEST(Scenario, SeedDeterminesRandomPreset) {
    PresetOptions o = small("random-accretive", 2, 16);
    const ScenarioSpec a = make_preset(o), b = make_preset(o);
    o.seed = 8;
    const ScenarioSpec c = make_preset(o);
    double same = 0.0, differ = 0.0;
    for (int cell = 0; cell < a.grid.cell_count(); ++cell) {
        same = std::max(same, (a.A.cells()[cell] - b.A.cells()[cell]).norm());
        differ = std::max(differ, (a.A.cells()[cell] - c.A.cells()[cell]).norm());
    }
    EXPECT_EQ(same, 0.0);
    EXPECT_GT(differ, 0.0);
    EXPECT_EQ(a.V.values(), b.V.values());
}

TEST(Scenario, SupportNearBoundaryIsRejected) {
    ScenarioSpec s = make_preset(small("identity", 1, 32));
    s.f = GridFunction::sample(s.grid, [](const Grid::Point&) { return 1.0; });
    EXPECT_THROW(validate(s), ConstructionError);
    EXPECT_THROW(run_scenario(s), ConstructionError);
}

TEST(Scenario, OversizedCutoffIsRejected) {
    ScenarioSpec s = make_preset(small("identity", 2, 16));
    s.cutoff.radii = {0.6};
    EXPECT_THROW(validate(s), ConstructionError);
}

TEST(Scenario, CutoffProfile) {
    EXPECT_EQ(CutoffSpec::profile(0.0), 1.0);
    EXPECT_EQ(CutoffSpec::profile(1.0), 1.0);
    EXPECT_EQ(CutoffSpec::profile(2.0), 0.0);
    EXPECT_EQ(CutoffSpec::profile(5.0), 0.0);
    double prev = 1.0, steepest = 0.0;
    const double ds = 1e-5;
    for (double s = 1.0; s <= 2.0; s += ds) {
        const double v = CutoffSpec::profile(s);
        EXPECT_LE(v, prev + 1e-15);
        EXPECT_GE(v, 0.0);
        steepest = std::max(steepest, (prev - v) / ds);
        prev = v;
    }
    EXPECT_NEAR(steepest, CutoffSpec::kGradientConstant, 1e-6);
}

TEST(Scenario, CutoffGradientScalesWithRadius) {
    const Grid g = Grid::cube(2, 64, -1, 1, Boundary::Dirichlet);
    const DiscreteOperator op = assemble(g, CoefficientField::identity(g));
    CutoffSpec c;
    for (double r : {0.25, 0.5}) {
        const Eigen::VectorXd psi = cutoff_values(g, c, r);
        const Eigen::VectorXd gp = op.gradient() * psi;
        EXPECT_LE(gp.cwiseAbs().maxCoeff(), CutoffSpec::kGradientConstant / r * 1.001);
        for (int k = 0; k < g.unknowns(); ++k) {
            const double d = g.unknown_point(k).norm();
            if (d <= r) EXPECT_EQ(psi[k], 1.0);
            if (d >= 2 * r) EXPECT_EQ(psi[k], 0.0);
        }
    }
}

// ---- chain rule ----

TEST(ChainRule, ArrangementsAgree) {
    for (double p : {2.0, 4.0}) {
        const ScenarioRun run = run_scenario(make_preset(small("random-accretive", 2, 16, p, 0.02)));
        const ChainRuleResult cr = chain_rule_rhs(run.spec.bellman, run.spec.A, run.spec.V, run.f, run.g);
        EXPECT_LE(cr.arrangement_gap, 1e-10) << "p=" << p;
    }
}

TEST(ChainRule, PotentialTermOnConstantData) {
    // periodic constant data: gradients vanish and P_t f = exp(-V t) f
    const Grid g = Grid::cube(2, 6, 0, 1, Boundary::Periodic);
    const double v0 = 0.7;
    const CoefficientField A = CoefficientField::identity(g);
    const PotentialField V = PotentialField::from_function(g, [&](const Grid::Point&) { return v0; });
    std::vector<double> times;
    for (int k = 0; k <= 40; ++k) times.push_back(0.005 * k);
    const Trajectory f = constant_trajectory(g, cplx(1.0, 0.5), v0, times);
    const Trajectory h = constant_trajectory(g, cplx(-0.3, 0.8), v0, times);
    const auto bp = bellman::BellmanParams::from_p(2.0);
    const ChainRuleResult cr = chain_rule_rhs(bp, A, V, f, h);
    const SpaceTimeField b = compose_b(bp, f, h);
    // Q is 2-homogeneous at p = 2, so the drift is -Q and both sides equal -V b
    for (std::size_t k = 0; k < times.size(); ++k)
        EXPECT_LT((cr.rhs.values[k] + v0 * b.values[k]).cwiseAbs().maxCoeff(), 1e-13);
    EXPECT_LT(chain_rule_residual(assemble(g, A, V), b, cr), 1e-4);
    EXPECT_EQ(cr.degenerate_nodes, 0u);
}

TEST(ChainRule, ResidualShrinksUnderRefinement) {
    PresetOptions o = small("identity", 1, 0, 2.0, 0.02);
    const auto levels = chain_rule_ladder(o, {32, 64, 128});
    for (double f : reduction_factors(levels)) EXPECT_GE(f, 1.8);
}

TEST(ChainRule, OriginIsDegenerateAwayFromP2) {
    const Grid g = Grid::cube(1, 8, 0, 1, Boundary::Periodic);
    const Trajectory zero = constant_trajectory(g, 0.0, 0.0, {0.0, 0.1, 0.2});
    const auto A = CoefficientField::identity(g);
    const auto V = PotentialField::zero(g);
    const ChainRuleResult c4 = chain_rule_rhs(bellman::BellmanParams::from_p(4.0), A, V, zero, zero);
    EXPECT_EQ(c4.degenerate_nodes, 3u * g.unknowns());
    const ChainRuleResult c2 = chain_rule_rhs(bellman::BellmanParams::from_p(2.0), A, V, zero, zero);
    EXPECT_EQ(c2.degenerate_nodes, 0u);
    EXPECT_EQ(c2.rhs.sup_norm(), 0.0);
}

// ---- pointwise ----

TEST(Pointwise, HoldsOnIdentityForSeveralExponents) {
    for (double p : {2.0, 4.0, 8.0}) {
        PresetOptions o = small("identity", 1, 64, p, 0.02);
        const PointwiseReport r = pointwise_check(run_scenario(make_preset(o)));
        EXPECT_TRUE(r.passed()) << "p=" << p << " worst=" << r.worst_slack << " tol=" << r.tolerance;
        EXPECT_GE(r.worst_node, 0);
    }
}

TEST(Pointwise, BoundScalesWithDelta) {
    const PointwiseReport r2 = pointwise_check(run_scenario(make_preset(small("identity", 1, 64, 2.0, 0.02))));
    const PointwiseReport r8 = pointwise_check(run_scenario(make_preset(small("identity", 1, 64, 8.0, 0.02))));
    const double d2 = bellman::BellmanParams::from_p(2.0).delta(), d8 = bellman::BellmanParams::from_p(8.0).delta();
    EXPECT_NEAR(r8.rhs.sup_norm() / r2.rhs.sup_norm(), d8 / d2, 1e-12);
    EXPECT_TRUE(r2.passed());
    EXPECT_TRUE(r8.passed());
}

TEST(Pointwise, HoldsWithEqualData) {
    PresetOptions o = small("oscillator", 2, 32, 2.0, 0.02);
    o.same_data = true;
    const PointwiseReport r = pointwise_check(run_scenario(make_preset(o)));
    EXPECT_TRUE(r.passed()) << r.worst_slack;
}

TEST(Pointwise, ToleranceIsFrozen) {
    const SlackTolerance t = SlackTolerance::frozen();
    EXPECT_GE(t.c1, 0.0);
    EXPECT_GE(t.c2, 0.0);
    EXPECT_DOUBLE_EQ(t(0.5, 0.1), 0.5 * t.c1 + 0.01 * t.c2);
}

TEST(Pointwise, FloorMonotone) {
    std::vector<PointwiseLevel> l(3);
    l[0].worst_slack = -1e-2, l[1].worst_slack = -1e-3, l[2].worst_slack = 0.5;
    EXPECT_TRUE(floor_monotone(l));
    l[2].worst_slack = -2e-3;
    EXPECT_FALSE(floor_monotone(l));
}

TEST(Pointwise, CsvHeaderAndRows) {
    const PointwiseReport r = pointwise_check(run_scenario(make_preset(small("identity", 2, 8, 2.0, 0.02))));
    std::ostringstream os;
    write_pointwise_csv(os, r);
    std::istringstream is(os.str());
    std::string line;
    std::getline(is, line);
    EXPECT_EQ(line, "x,y,t,lhs,rhs,slack");
    std::size_t rows = 0;
    while (std::getline(is, line)) ++rows;
    EXPECT_EQ(rows, r.lhs.values.size() * r.lhs.grid.unknowns() - r.excluded_nodes);
}

// ---- polarization and the bilinear functional ----

TEST(Polarize, SymmetricCase) {
    const Polarization r = polarize(1.0, 1.0, 2.0);
    EXPECT_TRUE(r.defined);
    EXPECT_NEAR(r.lambda, 1.0, 1e-15);
    EXPECT_NEAR(r.value, 2.0, 1e-15);
}

TEST(Polarize, MatchesGoldenSectionSearch) {
    std::mt19937_64 rng(11);
    std::uniform_real_distribution<double> u(0.05, 5.0), pe(1.2, 8.0);
    for (int it = 0; it < 50; ++it) {
        const double a = u(rng), b = u(rng), p = pe(rng), q = p / (p - 1);
        const double oracle =
            golden_min([&](double s) { return std::exp(p * s) * a + std::exp(-q * s) * b; }, -20.0, 20.0);
        const Polarization r = polarize(a, b, p);
        EXPECT_NEAR(r.value, oracle, 1e-8 * oracle);
        EXPECT_NEAR(r.value, polarized_closed_form(std::pow(a, 1 / p), std::pow(b, 1 / q), p), 1e-12 * oracle);
    }
}

TEST(Polarize, HomogeneousAndBelowSum) {
    for (double p : {1.5, 2.0, 3.0, 6.0}) {
        const Polarization r = polarize(0.7, 2.3, p);
        EXPECT_NEAR(polarize(4.0 * 0.7, 4.0 * 2.3, p).value, 4.0 * r.value, 1e-12);
        EXPECT_LE(r.value, 0.7 + 2.3);
    }
}

TEST(Polarize, Errors) {
    EXPECT_THROW(polarize(-1.0, 1.0, 2.0), DomainError);
    EXPECT_THROW(polarize(1.0, 1.0, 1.0), DomainError);
    EXPECT_FALSE(polarize(0.0, 1.0, 2.0).defined);
}

TEST(Functional, ZeroDataGivesZero) {
    const ScenarioRun run = run_scenario(make_preset(small("identity", 1, 32)));
    Trajectory zero = run.f;
    for (auto& s : zero.snapshots) s.values().setZero();
    const FunctionalValue fv = bilinear_functional(zero, run.g, run.spec.V);
    EXPECT_EQ(fv.value, 0.0);
    EXPECT_EQ(fv.total(), 0.0);
}

TEST(Functional, SymmetricInData) {
    const ScenarioRun run = run_scenario(make_preset(small("oscillator", 2, 16)));
    const FunctionalValue a = bilinear_functional(run.f, run.g, run.spec.V);
    const FunctionalValue b = bilinear_functional(run.g, run.f, run.spec.V);
    EXPECT_NEAR(a.value, b.value, 1e-14 * a.value);
}

TEST(Functional, MonotoneInHorizon) {
    double prev = 0.0;
    for (double T : {0.05, 0.1, 0.2}) {
        PresetOptions o = small("rotation", 2, 16, 2.0, T);
        o.dt = 0.005;
        const ScenarioRun run = run_scenario(make_preset(o));
        const double v = bilinear_functional(run.f, run.g, run.spec.V).value;
        EXPECT_GT(v, prev);
        prev = v;
    }
}

TEST(Functional, EnergyIdentityForEqualData) {
    // p = 2, A = I, V = 0, f = g: the integral over (0, inf) of |grad P_t f|^2 is |f|_2^2 / 2
    PresetOptions o = small("identity", 1, 128, 2.0, 2.0);
    o.same_data = true;
    o.dt = 0.002;
    const ScenarioRun run = run_scenario(make_preset(o));
    const EmbeddingReport r = embedding_check(run);
    const double half = 0.5 * std::pow(run.spec.f.norm(2), 2);
    EXPECT_TRUE(r.functional.tail_reliable);
    EXPECT_NEAR(r.functional.total(), half, 2e-3 * half);
    EXPECT_NEAR(r.rhs_sum, 4.0 * std::pow(run.spec.f.norm(2), 2), 1e-12);
    EXPECT_TRUE(r.sum_passed());
    EXPECT_TRUE(r.polarized_passed());
}

TEST(Functional, ConstantDegradesWithGamma) {
    PresetOptions o = small("identity", 1, 64, 3.0, 0.5);
    const EmbeddingReport full = embedding_check(run_scenario(make_preset(o)));
    o.a_scale = 0.25;
    const EmbeddingReport weak = embedding_check(run_scenario(make_preset(o)));
    EXPECT_NEAR(weak.gamma, 0.25, 1e-12);
    EXPECT_NEAR(weak.constant, 4.0 * full.constant, 1e-12);
    EXPECT_NEAR(full.constant, 1.0 / (2.0 * full.delta), 1e-12);
    EXPECT_TRUE(full.sum_passed());
    EXPECT_TRUE(weak.sum_passed());
}

// ---- integration by parts ----

TEST(Ibp, TermSignsAndBound) {
    const ScenarioRun run = run_scenario(make_preset(small("oscillator", 1, 128, 2.0, 0.5)));
    const IbpReport r = ibp_upper_check(run);
    ASSERT_EQ(r.terms.size(), 3u);
    EXPECT_LE(r.nodewise_excess, 0.0);
    EXPECT_TRUE(r.bound_holds);
    for (const auto& t : r.terms) {
        EXPECT_LE(t.end_term, 0.0);
        EXPECT_GE(t.start_term, 0.0);
        EXPECT_LE(t.potential_term, 0.0);
        EXPECT_LT(std::abs(t.quadrature_gap), 1e-2 * std::abs(t.integral) + 1e-10);
    }
    std::ostringstream os;
    write_ibp_csv(os, r);
    EXPECT_EQ(os.str().rfind("R,term,value\n", 0), 0u);
}

TEST(Ibp, RejectsOversizedRadius) {
    const ScenarioRun run = run_scenario(make_preset(small("identity", 1, 32)));
    EXPECT_THROW(ibp_upper_check(run, {0.6}), ConstructionError);
    EXPECT_THROW(ibp_upper_check(run, {-0.1}), ConstructionError);
}

// ---- off-diagonal decay ----

TEST(Offdiag, GaussianDecayOnIdentity) {
    const Grid g = Grid::cube(1, 128, -1, 1, Boundary::Dirichlet);
    const auto reps = offdiag_check(assemble(g, CoefficientField::identity(g)));
    ASSERT_EQ(reps.size(), 3u);
    for (const auto& r : reps) {
        EXPECT_TRUE(r.passed()) << to_string(r.op) << " r2=" << r.fit.r2;
        EXPECT_TRUE(r.monotone_in_distance) << to_string(r.op);
        EXPECT_GT(r.c, 0.0);
    }
}

TEST(Offdiag, RejectsBadConfiguration) {
    const Grid g = Grid::cube(1, 32, -1, 1, Boundary::Dirichlet);
    const DiscreteOperator op = assemble(g, CoefficientField::identity(g));
    OffdiagConfig cfg;
    cfg.distances = {0.0};
    EXPECT_THROW(offdiag_check(op, cfg), DomainError);
    cfg = {};
    cfg.source_center = 5.0;
    EXPECT_THROW(offdiag_check(op, cfg), DomainError);
}

// ---- square function ----

TEST(SquareFunction, ZeroDatum) {
    const Grid g = Grid::cube(1, 32, -1, 1, Boundary::Dirichlet);
    const DiscreteOperator op = assemble(g, CoefficientField::identity(g));
    const SquareFunctionResult r = square_function(op, GridFunction(g), TimeGrid(0.1, 0.01));
    EXPECT_EQ(r.value.sup_norm(), 0.0);
}

TEST(SquareFunction, EigenmodeOracle) {
    // P_t u = exp(-lambda t) u for an eigenvector, so G u = sqrt(|grad u|^2 / (2 lambda)) node-wise
    struct Case {
        int dim, cells, mode;
    };
    for (const Case c : {Case{1, 64, 1}, Case{1, 64, 3}, Case{2, 16, 2}}) {
        const Grid g = Grid::cube(c.dim, c.cells, -1, 1, Boundary::Dirichlet);
        const DiscreteOperator op = assemble(g, CoefficientField::identity(g));
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(Eigen::MatrixXd(op.matrix()));
        const double lambda = es.eigenvalues()[c.mode];
        const GridFunction u(g, es.eigenvectors().col(c.mode).cast<cplx>());
        const SquareFunctionResult r = square_function(op, u, TimeGrid(6.0 / lambda, 0.05 / lambda));
        const Eigen::VectorXd oracle = (node_gradient_squared(gradient(u)) / (2 * lambda)).cwiseSqrt();
        const double err = (r.value.values().real() - oracle).cwiseAbs().maxCoeff() / oracle.maxCoeff();
        EXPECT_LT(err, 1e-3) << "n=" << c.dim << " mode=" << c.mode;
        EXPECT_TRUE(r.tail_reliable);
        EXPECT_NEAR(r.decay_rate, 2 * lambda, 1e-2 * lambda);
    }
}
