#pragma once

// Mollified Bellman function Q_eps = Q * psi_eps on R^4, psi(y) = c exp(-1/(1-|y|^2)) on the unit
// ball, evaluated by tensor-product Gauss-Legendre quadrature on [-1, 1]^4.
//
// Derivatives are moved onto the kernel so that only the C^1 gradient of Q is ever sampled:
//   grad Q_eps(x) = int grad Q(x - eps y) psi(y) dy
//   D2 Q_eps(x)   = -(1/eps) int grad Q(x - eps y) (grad psi(y))^T dy      (symmetrised)
// The discrete kernel weights are normalised so that sum psi = 1 and the first moment of
// grad psi is exactly -I; quadratics are then reproduced exactly.

#include <Eigen/Dense>

#include <cmath>
#include <map>
#include <memory>
#include <mutex>
#include <numbers>
#include <sstream>
#include <type_traits>
#include <vector>

#include "bilinear/bellman.hpp"
#include "bilinear/errors.hpp"

namespace bilinear::bellman {

/// Gauss-Legendre nodes and weights on [-1, 1] (Newton iteration on P_n).
inline void gauss_legendre(int n, std::vector<double>& nodes, std::vector<double>& weights) {
    nodes.assign(n, 0.0);
    weights.assign(n, 0.0);
    for (int i = 0; i < (n + 1) / 2; ++i) {
        double x = std::cos(std::numbers::pi * (i + 0.75) / (n + 0.5));
        double dp = 0.0;
        for (int it = 0; it < 100; ++it) {
            double p0 = 1.0, p1 = x;
            for (int k = 2; k <= n; ++k) {
                const double pk = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
                p0 = p1;
                p1 = pk;
            }
            dp = n * (x * p1 - p0) / (x * x - 1.0);
            const double dx = p1 / dp;
            x -= dx;
            if (std::abs(dx) < 1e-16) break;
        }
        nodes[i] = -x;
        nodes[n - 1 - i] = x;
        weights[i] = weights[n - 1 - i] = 2.0 / ((1.0 - x * x) * dp * dp);
    }
}

struct MollifierConfig {
    double eps = 1e-2;
    int nodes = 8;
    /// > 0 enables an embedded (nodes + 2) error estimate; AccuracyError when exceeded
    double tolerance = 0.0;
};

class MollifierKernel {
public:
    explicit MollifierKernel(int nodes) : nodes_(nodes) {
        if (nodes < 2) throw DomainError("mollifier quadrature needs at least 2 nodes per axis");
        std::vector<double> x, w;
        gauss_legendre(nodes, x, w);
        double mass = 0.0;
        double moment = 0.0;
        for (int a = 0; a < nodes; ++a)
            for (int b = 0; b < nodes; ++b)
                for (int c = 0; c < nodes; ++c)
                    for (int d = 0; d < nodes; ++d) {
                        const Eigen::Vector4d y(x[a], x[b], x[c], x[d]);
                        const double r2 = y.squaredNorm();
                        if (r2 >= 1.0) continue;
                        const double s = 1.0 - r2;
                        const double psi = std::exp(-1.0 / s);
                        const double wt = w[a] * w[b] * w[c] * w[d];
                        Sample smp{y, wt * psi, wt * psi * (-2.0 / (s * s)) * y};
                        mass += smp.w_psi;
                        moment += y[0] * smp.w_grad[0];
                        samples_.push_back(smp);
                    }
        for (auto& s : samples_) {
            s.w_psi /= mass;
            s.w_grad /= -moment;
        }
    }

    int nodes() const noexcept { return nodes_; }

    double value(const BellmanParams& params, double eps, const ComplexPair& xi) const {
        const Eigen::Vector4d x = xi.to_real();
        double acc = 0.0;
        for (const auto& s : samples_) acc += s.w_psi * eval_Q(params, ComplexPair::from_real(x - eps * s.y));
        return acc;
    }

    Eigen::Vector4d gradient(const BellmanParams& params, double eps, const ComplexPair& xi) const {
        const Eigen::Vector4d x = xi.to_real();
        Eigen::Vector4d acc = Eigen::Vector4d::Zero();
        for (const auto& s : samples_)
            acc += s.w_psi * real_gradient_Q(params, ComplexPair::from_real(x - eps * s.y));
        return acc;
    }

    Eigen::Matrix4d hessian(const BellmanParams& params, double eps, const ComplexPair& xi) const {
        const Eigen::Vector4d x = xi.to_real();
        Eigen::Matrix4d acc = Eigen::Matrix4d::Zero();
        for (const auto& s : samples_)
            acc += real_gradient_Q(params, ComplexPair::from_real(x - eps * s.y)) * s.w_grad.transpose();
        acc /= eps;
        return 0.5 * (acc + acc.transpose());
    }

    /// Shared immutable kernel per node count.
    static const MollifierKernel& cached(int nodes) {
        static std::mutex mu;
        static std::map<int, std::unique_ptr<MollifierKernel>> cache;
        std::lock_guard<std::mutex> lock(mu);
        auto& slot = cache[nodes];
        if (!slot) slot = std::make_unique<MollifierKernel>(nodes);
        return *slot;
    }

private:
    struct Sample {
        Eigen::Vector4d y;
        double w_psi;
        Eigen::Vector4d w_grad;
    };

    int nodes_;
    std::vector<Sample> samples_;
};

namespace detail {

inline void check_eps(double eps) {
    if (!(eps > 0.0) || !std::isfinite(eps)) throw DomainError("mollifier width eps must be positive");
}

template <class Eval>
auto with_estimate(const MollifierConfig& cfg, Eval eval) {
    auto primary = eval(MollifierKernel::cached(cfg.nodes));
    if (cfg.tolerance > 0.0) {
        auto refined = eval(MollifierKernel::cached(cfg.nodes + 2));
        double err, scale;
        if constexpr (std::is_same_v<decltype(primary), double>) {
            err = std::abs(refined - primary);
            scale = std::max(1.0, std::abs(primary));
        } else {
            err = (refined - primary).norm();
            scale = std::max(1.0, primary.norm());
        }
        if (err > cfg.tolerance * scale) {
            std::ostringstream os;
            os << "mollifier quadrature with " << cfg.nodes << " nodes/axis: estimated error " << err
               << " exceeds tolerance " << cfg.tolerance;
            throw AccuracyError(os.str(), err);
        }
    }
    return primary;
}

} // namespace detail

inline double mollified_Q(const BellmanParams& params, const MollifierConfig& cfg, const ComplexPair& xi) {
    detail::check_eps(cfg.eps);
    return detail::with_estimate(cfg, [&](const MollifierKernel& k) { return k.value(params, cfg.eps, xi); });
}

inline double mollified_Q(const BellmanParams& params, double eps, const ComplexPair& xi) {
    return mollified_Q(params, MollifierConfig{eps}, xi);
}

inline Eigen::Vector4d mollified_gradient_Q(const BellmanParams& params, const MollifierConfig& cfg,
                                            const ComplexPair& xi) {
    detail::check_eps(cfg.eps);
    return detail::with_estimate(cfg, [&](const MollifierKernel& k) -> Eigen::Vector4d {
        return k.gradient(params, cfg.eps, xi);
    });
}

inline Eigen::Matrix4d mollified_hessian_Q(const BellmanParams& params, const MollifierConfig& cfg,
                                           const ComplexPair& xi) {
    detail::check_eps(cfg.eps);
    return detail::with_estimate(cfg, [&](const MollifierKernel& k) -> Eigen::Matrix4d {
        return k.hessian(params, cfg.eps, xi);
    });
}

inline double mollified_first_form(const BellmanParams& params, const MollifierConfig& cfg,
                                   const ComplexPair& xi, const ComplexPair& sigma) {
    return mollified_gradient_Q(params, cfg, xi).dot(sigma.to_real());
}

inline double mollified_second_form(const BellmanParams& params, const MollifierConfig& cfg,
                                    const ComplexPair& xi, const ComplexPair& sigma, const ComplexPair& varsigma) {
    return sigma.to_real().dot(mollified_hessian_Q(params, cfg, xi) * varsigma.to_real());
}

} // namespace bilinear::bellman
