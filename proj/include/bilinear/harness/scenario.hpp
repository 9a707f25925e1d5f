#pragma once

#include <Eigen/Dense>

#include <array>
#include <cmath>
#include <complex>
#include <cstdint>
#include <numbers>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "bilinear/bellman.hpp"
#include "bilinear/coefficients.hpp"
#include "bilinear/errors.hpp"
#include "bilinear/grid.hpp"
#include "bilinear/operator.hpp"
#include "bilinear/seed.hpp"
#include "bilinear/semigroup.hpp"

namespace bilinear::harness {

/// psi_R(x) = 1 for |x - c| <= R, 0 for |x - c| >= 2R, quintic smoothstep in between.
struct CutoffSpec {
    std::vector<double> radii;
    Grid::Point center = Grid::Point::Zero();

    /// sup |grad psi_R| = kGradientConstant / R
    static constexpr double kGradientConstant = 1.875;

    static double profile(double s) {
        if (s <= 1.0) return 1.0;
        if (s >= 2.0) return 0.0;
        const double t = s - 1.0;
        return 1.0 - t * t * t * (10.0 + t * (-15.0 + 6.0 * t));
    }
    double value(double r, const Grid::Point& x) const { return profile((x - center).norm() / r); }
};

/// amplitude * profile(|x - c|^2 / r^2) * exp(i k.x), peak value `amplitude`. The profile is
/// (1 - s)^power, or exp(1 - 1 / (1 - s)) when power = 0.
struct Bump {
    Grid::Point center = Grid::Point::Zero();
    double radius = 0.35;
    double amplitude = 1.0;
    Grid::Point wavevector = Grid::Point::Zero();
    int power = 0;

    cplx operator()(const Grid::Point& x) const {
        const double s = (x - center).squaredNorm() / (radius * radius);
        if (s >= 1.0) return 0.0;
        const double shape = power > 0 ? std::pow(1.0 - s, power) : std::exp(1.0 - 1.0 / (1.0 - s));
        return amplitude * shape * std::polar(1.0, wavevector.dot(x));
    }
};

struct ScenarioSpec {
    std::string name;
    Grid grid;
    CoefficientField A;
    PotentialField V;
    GridFunction f, g;
    bellman::BellmanParams bellman = bellman::BellmanParams::from_p(2.0);
    TimeGrid time{0.5, 0.01};
    CutoffSpec cutoff;
    SolverConfig solver;

    double gamma() const { return A.gamma(); }
    double half_width() const {
        double w = std::numeric_limits<double>::infinity();
        for (int a = 0; a < grid.dim(); ++a) w = std::min(w, 0.5 * (grid.upper(a) - grid.lower(a)));
        return w;
    }
    Grid::Point box_center() const {
        Grid::Point c = Grid::Point::Zero();
        for (int a = 0; a < grid.dim(); ++a) c[a] = 0.5 * (grid.lower(a) + grid.upper(a));
        return c;
    }
};

/// Data must vanish within 25% of the box width from every face.
inline void validate_support(const ScenarioSpec& s) {
    const Grid& g = s.grid;
    for (const auto* u : {&s.f, &s.g}) {
        if (!u->grid().same_shape(g)) throw DimensionError("scenario data must live on the scenario grid");
        for (int k = 0; k < g.unknowns(); ++k) {
            if ((*u)[k] == cplx(0.0)) continue;
            const auto x = g.unknown_point(k);
            for (int a = 0; a < g.dim(); ++a) {
                const double width = g.upper(a) - g.lower(a);
                if (x[a] < g.lower(a) + 0.25 * width || x[a] > g.upper(a) - 0.25 * width) {
                    std::ostringstream os;
                    os << "scenario '" << s.name << "': initial data nonzero at x" << a << " = " << x[a]
                       << ", closer than 25% of the box width to the boundary";
                    throw ConstructionError(os.str());
                }
            }
        }
    }
}

inline void validate(const ScenarioSpec& s) {
    if (!s.A.grid().same_shape(s.grid) || !s.V.grid().same_shape(s.grid))
        throw DimensionError("scenario fields must live on the scenario grid");
    if (!(s.A.gamma() > 0.0)) {
        std::ostringstream os;
        os << "scenario '" << s.name << "': coefficient field not accretive, gamma = " << s.A.gamma();
        throw ConstructionError(os.str());
    }
    validate_support(s);
    for (double r : s.cutoff.radii)
        if (!(r > 0.0) || 2.0 * r > s.half_width() + 1e-12) {
            std::ostringstream os;
            os << "cutoff radius " << r << ": 2R must fit inside the box half-width " << s.half_width();
            throw ConstructionError(os.str());
        }
}

inline const std::vector<std::string>& preset_names() {
    static const std::vector<std::string> names{"identity", "oscillator", "rotation", "checker", "random-accretive"};
    return names;
}

struct PresetOptions {
    std::string name = "identity";
    int dim = 1;
    int cells = 64;
    /// per-axis cell counts; overrides `cells` when non-empty (one entry, or one per axis)
    std::vector<int> axis_cells;
    double half_width = 1.0;
    double p = 2.0;
    double T = 0.5;
    /// default min(h^2, T / 200)
    std::optional<double> dt;
    Scheme scheme = Scheme::CrankNicolson;
    std::uint64_t seed = 7;
    /// strength of the antisymmetric part ("rotation")
    double beta = 1.0;
    /// lower bound on gamma ("random-accretive")
    double gamma_min = 0.25;
    /// multiplies A (gamma scales with it)
    double a_scale = 1.0;
    /// use f for g as well
    bool same_data = false;
    /// bump profile exponent (0 selects the exp profile)
    int bump_power = 6;
    Boundary boundary = Boundary::Dirichlet;
    double solver_tol = 1e-11;
};

namespace detail {

inline Eigen::MatrixXd antisymmetric_unit(int dim) {
    Eigen::MatrixXd j = Eigen::MatrixXd::Zero(dim, dim);
    for (int a = 0; a + 1 < dim; ++a) {
        j(a, a + 1) = 1.0;
        j(a + 1, a) = -1.0;
    }
    return j;
}

inline CoefficientField preset_coefficients(const PresetOptions& o, const Grid& grid) {
    using std::numbers::pi;
    const int dim = o.dim;
    const double L = o.half_width;
    const Eigen::MatrixXd id = Eigen::MatrixXd::Identity(dim, dim);
    if (o.name == "identity" || o.name == "oscillator") return CoefficientField::constant(grid, o.a_scale * id);
    if (o.name == "rotation") {
        const Eigen::MatrixXd j = antisymmetric_unit(dim);
        return CoefficientField::from_function(grid, [&](const Grid::Point& x) -> Eigen::MatrixXd {
            const double s = std::cos(0.5 * pi * x[0] / L) * (1.0 + 0.5 * std::sin(pi * x[dim - 1] / L));
            return o.a_scale * (id + o.beta * s * j);
        });
    }
    if (o.name == "checker") {
        return CoefficientField::from_function(grid, [&](const Grid::Point& x) -> Eigen::MatrixXd {
            double prod = 1.0;
            for (int a = 0; a < dim; ++a) prod *= std::sin(2.0 * pi * x[a] / L);
            const double c = 2.0 + 0.8 * std::tanh(prod / 0.2);
            Eigen::MatrixXd m = c * id;
            if (dim >= 2) {
                m(1, 1) = 4.0 - c;
                const double off = 0.4 * std::tanh(std::sin(pi * (x[0] + x[1]) / L) / 0.2);
                m(0, 1) = m(1, 0) = off;
            }
            return o.a_scale * m;
        });
    }
    if (o.name == "random-accretive") {
        SeedStream rs(o.seed, "preset.random-accretive.A");
        constexpr int kModes = 2;
        std::vector<Eigen::MatrixXd> b(kModes + 1, Eigen::MatrixXd(dim, dim)), k(kModes + 1, Eigen::MatrixXd(dim, dim));
        std::vector<Eigen::VectorXd> wave(kModes + 1, Eigen::VectorXd(dim));
        std::vector<double> phase(kModes + 1);
        for (int m = 0; m <= kModes; ++m) {
            for (int i = 0; i < dim * dim; ++i) {
                b[m](i) = rs.uniform(-1.0, 1.0) / (1 + m);
                k[m](i) = rs.uniform(-0.5, 0.5) / (1 + m);
            }
            for (int a = 0; a < dim; ++a) wave[m][a] = rs.uniform(-1.5, 1.5) * pi / L;
            phase[m] = rs.uniform(0.0, 2.0 * pi);
        }
        return CoefficientField::from_function(grid, [&](const Grid::Point& x) -> Eigen::MatrixXd {
            Eigen::MatrixXd bb = b[0], kk = k[0];
            for (int m = 1; m <= kModes; ++m) {
                const double s = std::sin(wave[m].dot(x.head(dim)) + phase[m]);
                bb += s * b[m];
                kk += s * k[m];
            }
            // B B^T + gamma_min I has symmetric part >= gamma_min; K - K^T adds no symmetric part
            return o.a_scale * (0.5 * bb * bb.transpose() + o.gamma_min * id + kk - kk.transpose());
        });
    }
    throw ConstructionError("unknown preset '" + o.name + "'");
}

inline PotentialField preset_potential(const PresetOptions& o, const Grid& grid) {
    using std::numbers::pi;
    if (o.name == "oscillator") return PotentialField::from_function(grid, [&](const Grid::Point& x) { return x.squaredNorm(); });
    if (o.name == "random-accretive") {
        SeedStream rs(o.seed, "preset.random-accretive.V");
        const double v0 = rs.uniform(0.5, 2.0);
        Eigen::Vector3d w = Eigen::Vector3d::Zero();
        for (int a = 0; a < o.dim; ++a) w[a] = rs.uniform(-1.0, 1.0) * pi / o.half_width;
        const double ph = rs.uniform(0.0, 2.0 * pi);
        return PotentialField::from_function(grid, [&](const Grid::Point& x) { return v0 * (1.0 + 0.9 * std::sin(w.dot(x) + ph)); });
    }
    return PotentialField::zero(grid);
}

} // namespace detail

/// Bumps used by every preset: f left of centre, g right of centre with a slow phase.
inline std::pair<Bump, Bump> preset_bumps(int dim, double half_width, int power = 0) {
    Bump f, g;
    f.power = g.power = power;
    f.center = Grid::Point::Zero();
    g.center = Grid::Point::Zero();
    f.center[0] = -0.05 * half_width;
    g.center[0] = 0.05 * half_width;
    if (dim >= 2) f.center[1] = 0.03 * half_width, g.center[1] = -0.03 * half_width;
    f.radius = 0.42 * half_width;
    g.radius = 0.44 * half_width;
    g.amplitude = 0.8;
    g.wavevector[0] = 1.0 / half_width;
    return {f, g};
}

inline ScenarioSpec make_preset(const PresetOptions& o) {
    const double L = o.half_width;
    ScenarioSpec s;
    s.name = o.name;
    if (o.axis_cells.empty()) {
        s.grid = Grid::cube(o.dim, o.cells, -L, L, o.boundary);
    } else {
        if (o.axis_cells.size() != 1 && o.axis_cells.size() != static_cast<std::size_t>(o.dim))
            throw ConstructionError("grid needs one cell count or one per axis");
        std::array<int, 3> cells{1, 1, 1};
        for (int a = 0; a < o.dim; ++a) cells[a] = o.axis_cells[o.axis_cells.size() == 1 ? 0 : a];
        s.grid = Grid(o.dim, cells, {-L, -L, -L}, {L, L, L}, o.boundary);
    }
    s.A = detail::preset_coefficients(o, s.grid);
    s.V = detail::preset_potential(o, s.grid);
    const auto [bf, bg] = preset_bumps(o.dim, L, o.bump_power);
    s.f = GridFunction::sample(s.grid, bf);
    s.g = o.same_data ? s.f : GridFunction::sample(s.grid, bg);
    s.bellman = bellman::BellmanParams::from_p(o.p);
    const double h = s.grid.min_spacing();
    s.time = TimeGrid(o.T, o.dt.value_or(std::min(h * h, o.T / 200.0)), o.scheme);
    s.cutoff.radii = {0.25 * L, 0.375 * L, 0.5 * L};
    s.cutoff.center = s.box_center();
    s.solver.tol = o.solver_tol;
    validate(s);
    return s;
}

struct ScenarioRun {
    ScenarioSpec spec;
    DiscreteOperator op;
    Trajectory f, g;
};

inline ScenarioRun run_scenario(const ScenarioSpec& spec) {
    validate(spec);
    ScenarioRun r{spec, assemble(spec.grid, spec.A, spec.V), {}, {}};
    auto trs = evolve_many(r.op, {spec.f, spec.g}, spec.time, spec.solver);
    r.f = std::move(trs[0]);
    r.g = std::move(trs[1]);
    return r;
}

} // namespace bilinear::harness
