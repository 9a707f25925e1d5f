#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <ostream>
#include <sstream>
#include <vector>

#include "bilinear/errors.hpp"
#include "bilinear/grid.hpp"
#include "bilinear/harness/field.hpp"
#include "bilinear/harness/scenario.hpp"
#include "bilinear/operator.hpp"

namespace bilinear::harness {

struct IbpTerms {
    double radius = 0.0;
    /// trapezoid in t of the integral of psi_R L'b
    double integral = 0.0;
    /// integral of psi_R (b(T) - b(0))
    double reduction = 0.0;
    /// integral of psi_R b(T), <= 0
    double end_term = 0.0;
    /// -integral of psi_R b(0)
    double start_term = 0.0;
    /// time integral of the A grad b . grad psi_R flux through omega_R
    double flux = 0.0;
    /// time integral of psi_R V b, <= 0
    double potential_term = 0.0;
    /// |flux|
    double epsilon = 0.0;
    /// |f|_p^p + |g|_q^q + epsilon
    double bound = 0.0;
    double margin = 0.0;
    /// integral - (reduction + flux + potential_term): the time-quadrature error of the direct form
    double quadrature_gap = 0.0;
};

struct IbpReport {
    std::vector<IbpTerms> terms;
    double data_norms = 0.0;
    /// max over nodes of -b(x, 0) - (|f|^p + |g|^q), must be <= 0
    double nodewise_excess = 0.0;
    bool bound_holds = false;
    bool epsilon_nonincreasing = false;
    /// epsilon at the smallest R over epsilon at the largest R
    double flux_decay = 0.0;

    bool passed() const { return bound_holds && epsilon_nonincreasing && flux_decay >= 2.0 && nodewise_excess <= 0.0; }
};

inline Eigen::VectorXd cutoff_values(const Grid& g, const CutoffSpec& c, double radius) {
    Eigen::VectorXd psi(g.unknowns());
    for (int k = 0; k < g.unknowns(); ++k) psi[k] = c.value(radius, g.unknown_point(k));
    return psi;
}

inline IbpReport ibp_upper_check(const ScenarioRun& run, std::vector<double> radii = {}) {
    const ScenarioSpec& s = run.spec;
    const Grid& grid = s.grid;
    if (radii.empty()) radii = s.cutoff.radii;
    std::sort(radii.begin(), radii.end());
    for (double r : radii)
        if (!(r > 0.0) || 2.0 * r > s.half_width() + 1e-12) {
            std::ostringstream os;
            os << "cutoff radius " << r << ": 2R exceeds the box half-width " << s.half_width();
            throw ConstructionError(os.str());
        }

    const double vol = grid.cell_volume();
    const SpaceTimeField b = compose_b(s.bellman, run.f, run.g);
    const SpaceTimeField lb = lprime(run.op, b);
    const std::size_t n = b.times.size();
    std::vector<Eigen::VectorXd> bb(n), gb(n);
    for (std::size_t k = 0; k < n; ++k) {
        bb[k] = b.values[k].real();
        gb[k] = run.op.edge_coefficients() * (run.op.gradient() * bb[k]);
    }

    IbpReport rep;
    const double p = s.bellman.p(), q = s.bellman.q();
    rep.data_norms = std::pow(s.f.norm(p), p) + std::pow(s.g.norm(q), q);
    for (int k = 0; k < grid.unknowns(); ++k) {
        const double cap = std::pow(std::abs(s.f[k]), p) + std::pow(std::abs(s.g[k]), q);
        rep.nodewise_excess = std::max(rep.nodewise_excess, -bb[0][k] - cap);
    }

    rep.bound_holds = true;
    for (double r : radii) {
        const Eigen::VectorXd psi = cutoff_values(grid, s.cutoff, r);
        const Eigen::VectorXd gpsi = run.op.gradient() * psi;
        std::vector<double> direct(n), flux(n), pot(n);
        for (std::size_t k = 0; k < n; ++k) {
            direct[k] = vol * psi.dot(lb.values[k].real());
            flux[k] = vol * gpsi.dot(gb[k]);
            pot[k] = vol * psi.dot(run.op.potential().cwiseProduct(bb[k]));
        }
        IbpTerms t;
        t.radius = r;
        t.integral = trapezoid(b.times, direct);
        t.end_term = vol * psi.dot(bb[n - 1]);
        t.start_term = -vol * psi.dot(bb[0]);
        t.reduction = t.end_term + t.start_term;
        t.flux = trapezoid(b.times, flux);
        t.potential_term = trapezoid(b.times, pot);
        t.epsilon = std::abs(t.flux);
        t.bound = rep.data_norms + t.epsilon;
        t.margin = t.bound - t.integral;
        t.quadrature_gap = t.integral - (t.reduction + t.flux + t.potential_term);
        rep.bound_holds = rep.bound_holds && t.margin >= 0.0;
        rep.terms.push_back(t);
    }
    rep.epsilon_nonincreasing = true;
    for (std::size_t k = 0; k + 1 < rep.terms.size(); ++k)
        rep.epsilon_nonincreasing = rep.epsilon_nonincreasing && rep.terms[k + 1].epsilon <= rep.terms[k].epsilon;
    if (!rep.terms.empty())
        rep.flux_decay = rep.terms.back().epsilon > 0.0 ? rep.terms.front().epsilon / rep.terms.back().epsilon
                                                        : std::numeric_limits<double>::infinity();
    return rep;
}

/// Rows R,term,value.
inline void write_ibp_csv(std::ostream& os, const IbpReport& r) {
    os << "R,term,value\n";
    for (const auto& t : r.terms) {
        const std::pair<const char*, double> rows[] = {
            {"integral", t.integral}, {"reduction", t.reduction}, {"end_term", t.end_term},
            {"start_term", t.start_term}, {"flux", t.flux}, {"potential_term", t.potential_term},
            {"epsilon", t.epsilon}, {"bound", t.bound}, {"margin", t.margin}, {"quadrature_gap", t.quadrature_gap}};
        for (const auto& [name, v] : rows) os << format_real(t.radius) << ',' << name << ',' << format_real(v) << '\n';
    }
}

} // namespace bilinear::harness
