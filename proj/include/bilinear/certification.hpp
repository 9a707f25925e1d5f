#pragma once

// Numerical certification of the convexity-type properties of Q:
//   (i)   0 <= phi(u, v) <= (1 + delta)(u^p + v^q)
//   (ii)  <-d2Q(xi) s, s> >= delta (tau |s_1|^2 + |s_2|^2 / tau)   for all s in C^2
//   (iii) Q(xi) - dQ(xi) xi >= delta (tau |zeta|^2 + |eta|^2 / tau)
// with one tau > 0 shared by (ii) and (iii). tau is found by golden-section search on log tau
// maximising the smallest slack over a deterministic direction sweep of the unit sphere in C^2.

#include <Eigen/Dense>

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <numbers>
#include <optional>
#include <vector>

#include "bilinear/bellman.hpp"
#include "bilinear/mollifier.hpp"

namespace bilinear::bellman {

struct TauCertificate {
    double tau = 1.0;
    /// min over swept unit directions of <-d2Q s, s> - delta (tau |s1|^2 + |s2|^2 / tau)
    double margin_hessian = -std::numeric_limits<double>::infinity();
    /// Q - dQ xi - delta (tau |zeta|^2 + |eta|^2 / tau)
    double margin_drift = -std::numeric_limits<double>::infinity();
    ComplexPair worst_direction{};
    bool mollified = false;

    bool valid() const { return tau > 0.0 && margin_hessian >= 0.0 && margin_drift >= 0.0; }
    double margin() const { return std::min(margin_hessian, margin_drift); }
};

struct TauSearchConfig {
    /// low-discrepancy directions added to the four coordinate directions (<= 4: coordinates only)
    int direction_samples = 256;
    double tau_min = 1e-6;
    double tau_max = 1e6;
    double relative_width = 1e-6;
    SingularMargins margins{};
    /// when set, d2Q and the drift term come from the mollified function
    std::optional<MollifierConfig> mollifier{};
};

namespace detail {

inline double radical_inverse(unsigned index, unsigned base) {
    double result = 0.0, f = 1.0 / base;
    while (index > 0) {
        result += f * (index % base);
        index /= base;
        f /= base;
    }
    return result;
}

} // namespace detail

/// Unit directions in C^2: (1,0), (i,0), (0,1), (0,i), then a Halton(2,3,5) sweep of S^3 using
/// |s1|^2 ~ U(0,1) and independent uniform phases (the uniform measure on S^3).
inline std::vector<ComplexPair> sweep_directions(int samples) {
    using namespace std::complex_literals;
    std::vector<ComplexPair> dirs{{1.0, 0.0}, {1.0i, 0.0}, {0.0, 1.0}, {0.0, 1.0i}};
    if (samples <= 4) return dirs;
    const double two_pi = 2.0 * std::numbers::pi;
    for (int k = 1; k <= samples; ++k) {
        const double w = detail::radical_inverse(k, 2);
        const double a = two_pi * detail::radical_inverse(k, 3);
        const double b = two_pi * detail::radical_inverse(k, 5);
        dirs.push_back({std::sqrt(w) * std::polar(1.0, a), std::sqrt(1.0 - w) * std::polar(1.0, b)});
    }
    return dirs;
}

/// Evaluates both margins of a fixed tau given -d2Q (as a real 4x4) and the drift term.
class TauObjective {
public:
    TauObjective(const Eigen::Matrix4d& neg_hessian, double drift_value, const ComplexPair& xi,
                 double delta, const std::vector<ComplexPair>& dirs)
        : drift_(drift_value), u2_(std::norm(xi.zeta)), v2_(std::norm(xi.eta)), delta_(delta) {
        rows_.reserve(dirs.size());
        for (const auto& s : dirs) {
            const Eigen::Vector4d x = s.to_real();
            const double n2 = x.squaredNorm();
            rows_.push_back({x.dot(neg_hessian * x) / n2, std::norm(s.zeta) / n2, std::norm(s.eta) / n2});
        }
        dirs_ = dirs;
    }

    double hessian_margin(double tau, std::size_t* worst = nullptr) const {
        double m = std::numeric_limits<double>::infinity();
        for (std::size_t k = 0; k < rows_.size(); ++k) {
            const double s = rows_[k].form - delta_ * (tau * rows_[k].w1 + rows_[k].w2 / tau);
            if (s < m) {
                m = s;
                if (worst) *worst = k;
            }
        }
        return m;
    }

    double drift_margin(double tau) const { return drift_ - delta_ * (tau * u2_ + v2_ / tau); }

    double objective(double log_tau) const {
        const double tau = std::exp(log_tau);
        return std::min(hessian_margin(tau), drift_margin(tau));
    }

    TauCertificate certificate(double tau) const {
        TauCertificate c;
        std::size_t worst = 0;
        c.tau = tau;
        c.margin_hessian = hessian_margin(tau, &worst);
        c.margin_drift = drift_margin(tau);
        c.worst_direction = dirs_[worst];
        return c;
    }

private:
    struct Row {
        double form, w1, w2;
    };
    double drift_, u2_, v2_, delta_;
    std::vector<Row> rows_;
    std::vector<ComplexPair> dirs_;
};

/// Golden-section maximisation of a unimodal function on [a, b]; the end points are compared
/// as well so that a maximiser sitting on the bracket edge is returned exactly.
template <class F>
double golden_section_max(F f, double a, double b, double width) {
    const double inv_phi = (std::sqrt(5.0) - 1.0) / 2.0;
    double c = b - inv_phi * (b - a), d = a + inv_phi * (b - a);
    double fc = f(c), fd = f(d);
    while (b - a > width) {
        if (fc >= fd) {
            b = d;
            d = c;
            fd = fc;
            c = b - inv_phi * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + inv_phi * (b - a);
            fd = f(d);
        }
    }
    double best = 0.5 * (a + b);
    double fbest = f(best);
    for (double e : {a, b}) {
        const double fe = f(e);
        if (fe > fbest) best = e, fbest = fe;
    }
    return best;
}

inline TauCertificate find_tau(const BellmanParams& params, const ComplexPair& xi, const TauSearchConfig& cfg) {
    Eigen::Matrix4d neg_h;
    double drift_value;
    if (cfg.mollifier) {
        neg_h = -mollified_hessian_Q(params, *cfg.mollifier, xi);
        drift_value = mollified_Q(params, *cfg.mollifier, xi) -
                      mollified_gradient_Q(params, *cfg.mollifier, xi).dot(xi.to_real());
    } else {
        neg_h = -hessian_Q(params, xi, cfg.margins);
        drift_value = drift(params, xi);
    }
    const TauObjective obj(neg_h, drift_value, xi, params.delta(), sweep_directions(cfg.direction_samples));
    const double lo = std::log(cfg.tau_min), hi = std::log(cfg.tau_max);
    const double log_tau =
        golden_section_max([&](double s) { return obj.objective(s); }, lo, hi, std::log1p(cfg.relative_width));
    TauCertificate cert = obj.certificate(std::exp(log_tau));
    cert.mollified = cfg.mollifier.has_value();
    return cert;
}

inline TauCertificate find_tau(const BellmanParams& params, const ComplexPair& xi, int direction_samples) {
    TauSearchConfig cfg;
    cfg.direction_samples = direction_samples;
    return find_tau(params, xi, cfg);
}

struct BejazConfig {
    int direction_samples = 256;
    SingularMargins margins{};
    /// mollifier width relative to |xi| used at points within the singular margins
    double mollifier_relative_eps = 1e-3;
    int mollifier_nodes = 8;
};

struct BejazReport {
    double prop_i_slack = 0.0;
    bool prop_i = false;
    TauCertificate prop_ii{};
    /// drift slack at the certified (shared) tau
    double prop_iii_slack = 0.0;
    /// xi = 0 with p > 2: d2Q has no finite value there, (ii)-(iii) are vacuous
    bool degenerate_origin = false;

    bool valid() const {
        return prop_i && (degenerate_origin || (prop_ii.margin_hessian >= 0.0 && prop_iii_slack >= 0.0));
    }
};

inline BejazReport check_bejaz(const BellmanParams& params, const ComplexPair& xi, const BejazConfig& cfg = {}) {
    BejazReport r;
    const double u = xi.u(), v = xi.v();
    const double phi = eval_phi(params, u, v);
    r.prop_i_slack = (1.0 + params.delta()) * (std::pow(u, params.p()) + std::pow(v, params.q())) - phi;
    r.prop_i = phi >= 0.0 && r.prop_i_slack >= 0.0;

    if (u == 0.0 && v == 0.0 && !params.globally_smooth()) {
        r.degenerate_origin = true;
        r.prop_ii.tau = 1.0;
        r.prop_ii.margin_hessian = 0.0;
        r.prop_ii.margin_drift = 0.0;
        return r;
    }

    TauSearchConfig tcfg;
    tcfg.direction_samples = cfg.direction_samples;
    tcfg.margins = cfg.margins;
    try {
        r.prop_ii = find_tau(params, xi, tcfg);
    } catch (const SingularityError&) {
        tcfg.mollifier = MollifierConfig{cfg.mollifier_relative_eps * std::hypot(u, v), cfg.mollifier_nodes};
        r.prop_ii = find_tau(params, xi, tcfg);
    }
    r.prop_iii_slack = r.prop_ii.margin_drift;
    return r;
}

} // namespace bilinear::bellman
