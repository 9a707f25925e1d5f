#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

#include "bilinear/coefficients.hpp"
#include "bilinear/grid.hpp"
#include "bilinear/harness/field.hpp"
#include "bilinear/harness/scenario.hpp"
#include "bilinear/operator.hpp"
#include "bilinear/semigroup.hpp"

namespace bilinear::harness {

struct FunctionalValue {
    /// trapezoid over [0, T] of the integral of |P_t f|_* |P_t g|_*
    double value = 0.0;
    /// estimate of the (T, infinity) part: last integrand value / decay rate
    double tail = 0.0;
    bool tail_reliable = true;
    /// fitted exponential decay rate of |P_t f|_2 |P_t g|_2 over the last quarter
    double decay_rate = 0.0;
    double decay_r2 = 0.0;
    /// |E_T - E_T on every other snapshot|
    double quadrature_error = 0.0;
    std::vector<double> times;
    std::vector<double> integrand;

    double total() const { return value + tail; }
};

inline FunctionalValue bilinear_functional(const Trajectory& f, const Trajectory& g, const PotentialField& V) {
    require_matching(f, g);
    const Grid& grid = f.snapshots.front().grid();
    FunctionalValue out;
    out.times = f.times;
    std::vector<double> l2;
    for (std::size_t k = 0; k < f.size(); ++k) {
        const Eigen::VectorXd sf = star_norm_squared(f.snapshots[k], V.values()).cwiseSqrt();
        const Eigen::VectorXd sg = star_norm_squared(g.snapshots[k], V.values()).cwiseSqrt();
        out.integrand.push_back(sf.dot(sg) * grid.cell_volume());
        l2.push_back(f.snapshots[k].l2_norm() * g.snapshots[k].l2_norm());
    }
    out.value = trapezoid(out.times, out.integrand);

    if (out.times.size() >= 3) {
        std::vector<double> t2, y2;
        for (std::size_t k = 0; k < out.times.size(); k += 2) t2.push_back(out.times[k]), y2.push_back(out.integrand[k]);
        if (t2.back() != out.times.back()) t2.push_back(out.times.back()), y2.push_back(out.integrand.back());
        out.quadrature_error = std::abs(out.value - trapezoid(t2, y2));
    }

    if (out.integrand.back() == 0.0) return out;
    std::vector<double> t, logs;
    const std::size_t first = out.times.size() - std::max<std::size_t>(3, out.times.size() / 4);
    for (std::size_t k = first; k < out.times.size(); ++k)
        if (l2[k] > 0.0) t.push_back(out.times[k]), logs.push_back(std::log(l2[k]));
    const LinearFit fit = fit_line(t, logs);
    out.decay_rate = -fit.slope;
    out.decay_r2 = fit.r2;
    out.tail_reliable = t.size() >= 3 && out.decay_rate > 0.0 && fit.r2 >= 0.9;
    out.tail = out.decay_rate > 0.0 ? out.integrand.back() / out.decay_rate : std::numeric_limits<double>::infinity();
    return out;
}

/// min over lambda > 0 of lambda^p a + lambda^-q b.
struct Polarization {
    double lambda = std::numeric_limits<double>::quiet_NaN();
    double value = 0.0;
    /// false when a or b vanishes (the infimum 0 is not attained)
    bool defined = false;
};

inline Polarization polarize(double a, double b, double p) {
    if (!(a >= 0.0) || !(b >= 0.0)) throw DomainError("polarize needs nonnegative a and b");
    if (!(p > 1.0)) throw DomainError("polarize needs p > 1");
    Polarization r;
    if (a == 0.0 || b == 0.0) return r;
    const double q = p / (p - 1.0);
    r.lambda = std::pow(q * b / (p * a), 1.0 / (p + q));
    r.value = std::pow(r.lambda, p) * a + std::pow(r.lambda, -q) * b;
    r.defined = true;
    return r;
}

/// |f|_p |g|_q ((q/p)^(1/q) + (p/q)^(1/p)), the closed form of the polarized minimum.
inline double polarized_closed_form(double norm_f, double norm_g, double p) {
    const double q = p / (p - 1.0);
    return norm_f * norm_g * (std::pow(q / p, 1.0 / q) + std::pow(p / q, 1.0 / p));
}

struct EmbeddingReport {
    FunctionalValue functional;
    double p = 2.0, q = 2.0, delta = 0.0, gamma = 0.0;
    /// max(1, 1/gamma) / (2 delta)
    double constant = 0.0;
    double norm_f = 0.0, norm_g = 0.0;
    double rhs_sum = 0.0;
    double rhs_polarized = 0.0;
    Polarization polarization;
    /// positive when the inequality holds
    double margin_sum = 0.0;
    double margin_polarized = 0.0;
    /// (E_T + tail) / (p |f|_p |g|_q)
    double ratio = 0.0;

    bool sum_passed() const { return functional.tail_reliable && margin_sum > functional.quadrature_error; }
    bool polarized_passed() const {
        return functional.tail_reliable && margin_polarized > functional.quadrature_error;
    }
};

inline EmbeddingReport embedding_check(const ScenarioRun& run) {
    const ScenarioSpec& s = run.spec;
    EmbeddingReport r;
    r.functional = bilinear_functional(run.f, run.g, s.V);
    r.p = s.bellman.p();
    r.q = s.bellman.q();
    r.delta = s.bellman.delta();
    r.gamma = s.A.gamma();
    r.constant = std::max(1.0, 1.0 / r.gamma) / (2.0 * r.delta);
    r.norm_f = s.f.norm(r.p);
    r.norm_g = s.g.norm(r.q);
    const double a = std::pow(r.norm_f, r.p), b = std::pow(r.norm_g, r.q);
    r.rhs_sum = r.constant * (a + b);
    r.polarization = polarize(a, b, r.p);
    r.rhs_polarized = r.constant * r.polarization.value;
    const double lhs = r.functional.total();
    r.margin_sum = r.rhs_sum - lhs;
    r.margin_polarized = r.rhs_polarized - lhs;
    const double scale = r.p * r.norm_f * r.norm_g;
    r.ratio = scale > 0.0 ? lhs / scale : 0.0;
    return r;
}

} // namespace bilinear::harness
