#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "bilinear/errors.hpp"
#include "bilinear/expm.hpp"
#include "bilinear/grid.hpp"
#include "bilinear/harness/field.hpp"
#include "bilinear/operator.hpp"

namespace bilinear::harness {

enum class OffdiagOperator { Semigroup, TimesGenerator, ScaledGradient };

inline const char* to_string(OffdiagOperator o) {
    switch (o) {
    case OffdiagOperator::Semigroup: return "P_t";
    case OffdiagOperator::TimesGenerator: return "tLP_t";
    case OffdiagOperator::ScaledGradient: return "sqrt(t)gradP_t";
    }
    return "?";
}

/// E is the slab |x_0 - source_center| <= source_half_width; F_d the half-space x_0 >= edge(E) + d.
struct OffdiagConfig {
    double source_center = -0.5;
    double source_half_width = 0.1;
    std::vector<double> distances{0.1, 0.2, 0.3, 0.4, 0.5, 0.6};
    std::vector<double> times{0.001, 0.002, 0.005, 0.01, 0.02, 0.05};
    /// samples with ratio below the floor are excluded from the fit
    double floor = 1e-12;
};

struct OffdiagSample {
    double t = 0.0;
    double distance = 0.0;
    double ratio = 0.0;
    bool used = false;
};

struct OffdiagReport {
    OffdiagOperator op = OffdiagOperator::Semigroup;
    std::vector<OffdiagSample> samples;
    /// log ratio = log C - c d^2 / t
    LinearFit fit;
    double C = 0.0;
    double c = 0.0;
    std::size_t excluded = 0;
    /// for each t, the ratio does not grow as F_d shrinks
    bool monotone_in_distance = true;

    bool passed() const { return fit.samples >= 3 && fit.slope < 0.0 && fit.r2 >= 0.9; }
};

inline std::vector<OffdiagReport> offdiag_check(const DiscreteOperator& op, const OffdiagConfig& cfg = {},
                                                const std::vector<OffdiagOperator>& which = {
                                                    OffdiagOperator::Semigroup, OffdiagOperator::TimesGenerator,
                                                    OffdiagOperator::ScaledGradient}) {
    const Grid& g = op.grid();
    const int n = op.unknowns();
    if (n > kDenseOracleLimit) {
        std::ostringstream os;
        os << "off-diagonal check uses dense exponentials; " << n << " unknowns exceed " << kDenseOracleLimit;
        throw DomainError(os.str());
    }
    for (double d : cfg.distances)
        if (!(d > 0.0)) throw DomainError("off-diagonal distances must be positive");

    const double vol = g.cell_volume();
    const double edge = cfg.source_center + cfg.source_half_width;
    Eigen::VectorXd datum = Eigen::VectorXd::Zero(n);
    for (int k = 0; k < n; ++k)
        if (std::abs(g.unknown_point(k)[0] - cfg.source_center) <= cfg.source_half_width) datum[k] = 1.0;
    const double datum_norm = std::sqrt(vol * datum.squaredNorm());
    if (datum_norm == 0.0) throw DomainError("source set E contains no grid nodes");

    // an edge belongs to F_d when its midpoint does
    auto node_in = [&](int k, double d) { return g.unknown_point(k)[0] >= edge + d; };
    auto edge_in = [&](int e, double d) {
        const int a = g.edge_axis(e);
        const double mid = g.node_point(g.edge_start(e))[0] + (a == 0 ? 0.5 * g.spacing(0) : 0.0);
        return mid >= edge + d;
    };

    const Eigen::MatrixXd L = Eigen::MatrixXd(op.matrix());
    std::vector<OffdiagReport> out;
    for (OffdiagOperator o : which) {
        out.emplace_back();
        out.back().op = o;
    }
    for (double t : cfg.times) {
        const Eigen::VectorXd pt = expm(-t * L) * datum;
        for (auto& rep : out) {
            Eigen::VectorXd image;
            bool on_edges = false;
            switch (rep.op) {
            case OffdiagOperator::Semigroup: image = pt; break;
            case OffdiagOperator::TimesGenerator: image = t * (L * pt); break;
            case OffdiagOperator::ScaledGradient:
                image = std::sqrt(t) * (op.gradient() * pt);
                on_edges = true;
                break;
            }
            double previous = std::numeric_limits<double>::infinity();
            for (double d : cfg.distances) {
                double acc = 0.0;
                for (Eigen::Index i = 0; i < image.size(); ++i)
                    if (on_edges ? edge_in(static_cast<int>(i), d) : node_in(static_cast<int>(i), d))
                        acc += image[i] * image[i];
                OffdiagSample s{t, d, std::sqrt(vol * acc) / datum_norm, false};
                s.used = s.ratio > cfg.floor;
                if (s.ratio > previous * (1.0 + 1e-12) + 1e-300) rep.monotone_in_distance = false;
                previous = s.ratio;
                rep.samples.push_back(s);
            }
        }
    }
    for (auto& rep : out) {
        std::vector<double> x, y;
        for (const auto& s : rep.samples) {
            if (!s.used) {
                ++rep.excluded;
                continue;
            }
            x.push_back(s.distance * s.distance / s.t);
            y.push_back(std::log(s.ratio));
        }
        rep.fit = fit_line(x, y);
        rep.c = -rep.fit.slope;
        rep.C = std::exp(rep.fit.intercept);
    }
    return out;
}

/// Rows operator,t,distance,ratio,used.
inline void write_offdiag_csv(std::ostream& os, const std::vector<OffdiagReport>& reps) {
    os << "operator,t,distance,ratio,used\n";
    for (const auto& r : reps)
        for (const auto& s : r.samples)
            os << to_string(r.op) << ',' << format_real(s.t) << ',' << format_real(s.distance) << ','
               << format_real(s.ratio) << ',' << (s.used ? 1 : 0) << '\n';
}

} // namespace bilinear::harness
