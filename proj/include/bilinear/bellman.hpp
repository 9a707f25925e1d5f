#pragma once

// Explicit two-variable Bellman function
//
//   phi(u, v) = u^p + v^q + delta * { u^2 v^(2-q)                 if u^p <= v^q
//                                    { (2/p) u^p + (2/q - 1) v^q   if u^p >= v^q
//
// with q = p/(p-1), delta = q(q-1)/8, and Q(zeta, eta) = -phi(|zeta|, |eta|)/2 on C x C.
// Q is C^1 everywhere and C^2 away from {v = 0} and the interface {u^p = v^q}.
//
// Complex points are identified with R^4 in the order (Re zeta, Im zeta, Re eta, Im eta).

#include <Eigen/Dense>

#include <array>
#include <cassert>
#include <cmath>
#include <complex>
#include <limits>
#include <optional>
#include <sstream>

#include "bilinear/errors.hpp"

namespace bilinear::bellman {

using cplx = std::complex<double>;

class BellmanParams {
public:
    /// Builds (p, q, delta) from an exponent p >= 2.
    static BellmanParams from_p(double p) {
        if (!std::isfinite(p) || p < 2.0) {
            std::ostringstream os;
            os << "Bellman exponent p must be finite and >= 2, got " << p;
            throw DomainError(os.str());
        }
        return BellmanParams(p);
    }

    double p() const noexcept { return p_; }
    double q() const noexcept { return q_; }
    double delta() const noexcept { return delta_; }

    /// phi is globally C^2 only for p = 2, where both branches reduce to (1+delta)u^2 + v^2.
    bool globally_smooth() const noexcept { return p_ == 2.0; }

private:
    explicit BellmanParams(double p) : p_(p), q_(p / (p - 1.0)), delta_(q_ * (q_ - 1.0) / 8.0) {}

    double p_;
    double q_;
    double delta_;
};

struct ComplexPair {
    cplx zeta{};
    cplx eta{};

    double u() const { return std::abs(zeta); }
    double v() const { return std::abs(eta); }

    Eigen::Vector4d to_real() const { return {zeta.real(), zeta.imag(), eta.real(), eta.imag()}; }

    static ComplexPair from_real(const Eigen::Vector4d& x) {
        return {cplx(x[0], x[1]), cplx(x[2], x[3])};
    }

    friend ComplexPair operator+(const ComplexPair& a, const ComplexPair& b) {
        return {a.zeta + b.zeta, a.eta + b.eta};
    }
    friend ComplexPair operator*(double s, const ComplexPair& a) { return {s * a.zeta, s * a.eta}; }
};

enum class RegionLabel { Region1, Region2, Interface };

/// Branch of the piecewise formula: Region1 is u^p <= v^q, Region2 is u^p >= v^q.
enum class Branch { Region1, Region2 };

inline constexpr double kInterfaceThreshold = 1e-9;

/// Interface when |u^p - v^q| <= threshold * max(u^p, v^q, 1).
inline RegionLabel classify(const BellmanParams& params, double u, double v,
                            double threshold = kInterfaceThreshold) {
    const double up = std::pow(u, params.p());
    const double vq = std::pow(v, params.q());
    if (std::abs(up - vq) <= threshold * std::max({up, vq, 1.0})) return RegionLabel::Interface;
    return up < vq ? RegionLabel::Region1 : RegionLabel::Region2;
}

/// Exact branch selection (ties go to Region1; both branches agree there).
inline Branch exact_branch(const BellmanParams& params, double u, double v) {
    return std::pow(u, params.p()) <= std::pow(v, params.q()) ? Branch::Region1 : Branch::Region2;
}

/// phi and its partial derivatives up to order two along one branch. The quotients
/// du/u and dv/v are kept separately since they stay finite where u or v vanish.
struct RadialJet {
    double phi = 0, du = 0, dv = 0;
    double du_over_u = 0, dv_over_v = 0;
    double duu = 0, duv = 0, dvv = 0;
};

namespace detail {

inline void check_nonnegative(double u, double v) {
    if (!(u >= 0.0) || !(v >= 0.0) || !std::isfinite(u) || !std::isfinite(v)) {
        std::ostringstream os;
        os << "phi needs finite u, v >= 0, got (" << u << ", " << v << ")";
        throw DomainError(os.str());
    }
}

// 0 * inf is taken as 0: a vanishing prefactor kills the singular power.
inline double times(double coeff, double power) { return coeff == 0.0 ? 0.0 : coeff * power; }

inline RadialJet jet_region1(const BellmanParams& bp, double u, double v) {
    const double p = bp.p(), q = bp.q(), d = bp.delta();
    RadialJet j;
    const double u2 = u * u;
    const double v2mq = std::pow(v, 2.0 - q);
    j.phi = std::pow(u, p) + std::pow(v, q) + d * u2 * v2mq;
    j.du = p * std::pow(u, p - 1.0) + 2.0 * d * u * v2mq;
    j.du_over_u = p * std::pow(u, p - 2.0) + 2.0 * d * v2mq;
    j.duu = p * (p - 1.0) * std::pow(u, p - 2.0) + 2.0 * d * v2mq;
    j.duv = times(2.0 * d * (2.0 - q) * u, std::pow(v, 1.0 - q));
    j.dv = q * std::pow(v, q - 1.0) + times(d * (2.0 - q) * u2, std::pow(v, 1.0 - q));
    j.dv_over_v = q * std::pow(v, q - 2.0) + times(d * (2.0 - q) * u2, std::pow(v, -q));
    j.dvv = q * (q - 1.0) * std::pow(v, q - 2.0) + times(d * (2.0 - q) * (1.0 - q) * u2, std::pow(v, -q));
    return j;
}

inline RadialJet jet_region2(const BellmanParams& bp, double u, double v) {
    const double p = bp.p(), q = bp.q(), d = bp.delta();
    const double a = 1.0 + 2.0 * d / p;
    const double b = 1.0 + d * (2.0 / q - 1.0);
    RadialJet j;
    j.phi = a * std::pow(u, p) + b * std::pow(v, q);
    j.du = a * p * std::pow(u, p - 1.0);
    j.du_over_u = a * p * std::pow(u, p - 2.0);
    j.duu = a * p * (p - 1.0) * std::pow(u, p - 2.0);
    j.duv = 0.0;
    j.dv = b * q * std::pow(v, q - 1.0);
    j.dv_over_v = b * q * std::pow(v, q - 2.0);
    j.dvv = b * q * (q - 1.0) * std::pow(v, q - 2.0);
    return j;
}

} // namespace detail

/// Full radial jet along the requested branch (default: the exact region of (u, v)).
inline RadialJet radial_jet(const BellmanParams& params, double u, double v,
                            std::optional<Branch> branch = std::nullopt) {
    detail::check_nonnegative(u, v);
    const Branch b = branch.value_or(exact_branch(params, u, v));
    return b == Branch::Region1 ? detail::jet_region1(params, u, v) : detail::jet_region2(params, u, v);
}

inline double eval_phi(const BellmanParams& params, double u, double v) {
    detail::check_nonnegative(u, v);
    if (u == 0.0 && v == 0.0) return 0.0;
    const double value = radial_jet(params, u, v).phi;
#ifndef NDEBUG
    const double up = std::pow(u, params.p()), vq = std::pow(v, params.q());
    if (std::abs(up - vq) <= kInterfaceThreshold * std::max(up, vq)) {
        const double r1 = detail::jet_region1(params, u, v).phi;
        const double r2 = detail::jet_region2(params, u, v).phi;
        assert(std::abs(r1 - r2) <= 1e-12 * std::max(std::abs(r1), std::abs(r2)));
    }
#endif
    return value;
}

inline double eval_Q(const BellmanParams& params, const ComplexPair& xi) {
    return -0.5 * eval_phi(params, xi.u(), xi.v());
}

struct PhiGradient {
    double du = 0;
    double dv = 0;
};

/// Closed-form (d phi/du, d phi/dv). The Region1 formula is singular on v = 0.
inline PhiGradient grad_phi(const BellmanParams& params, double u, double v,
                            std::optional<Branch> branch = std::nullopt) {
    detail::check_nonnegative(u, v);
    const Branch b = branch.value_or(exact_branch(params, u, v));
    if (b == Branch::Region1 && v == 0.0 && !params.globally_smooth()) {
        throw SingularityError(SingularityError::Set::VAxis,
                               "grad_phi: Region1 formula is singular on v = 0");
    }
    const RadialJet j = radial_jet(params, u, v, b);
    return {j.du, j.dv};
}

/// Wirtinger derivatives of Q. Q is real, so the barred derivatives are conjugates.
struct WirtingerGradient {
    cplx d_zeta{}, d_zeta_bar{}, d_eta{}, d_eta_bar{};
};

inline WirtingerGradient grad_Q(const BellmanParams& params, const ComplexPair& xi) {
    const double u = xi.u(), v = xi.v();
    if (u == 0.0 || v == 0.0) {
        throw SingularityError(SingularityError::Set::ZeroModulus,
                               "grad_Q: radial chain rule needs |zeta| > 0 and |eta| > 0");
    }
    const PhiGradient g = grad_phi(params, u, v);
    WirtingerGradient w;
    w.d_zeta = -g.du * std::conj(xi.zeta) / (4.0 * u);
    w.d_eta = -g.dv * std::conj(xi.eta) / (4.0 * v);
    w.d_zeta_bar = std::conj(w.d_zeta);
    w.d_eta_bar = std::conj(w.d_eta);
    return w;
}

/// dQ(xi) sigma = sum_j (dQ/dz_j sigma_j + dQ/dzbar_j conj(sigma_j)).
inline double first_form(const BellmanParams& params, const ComplexPair& xi, const ComplexPair& sigma) {
    const WirtingerGradient w = grad_Q(params, xi);
    const cplx s = w.d_zeta * sigma.zeta + w.d_zeta_bar * std::conj(sigma.zeta) + w.d_eta * sigma.eta +
                   w.d_eta_bar * std::conj(sigma.eta);
    return s.real();
}

/// Real gradient of Q in R^4. Defined everywhere since Q is C^1.
inline Eigen::Vector4d real_gradient_Q(const BellmanParams& params, const ComplexPair& xi) {
    const double u = xi.u(), v = xi.v();
    if (u == 0.0 && v == 0.0) return Eigen::Vector4d::Zero();
    const RadialJet j = radial_jet(params, u, v);
    const double cu = -0.5 * j.du_over_u;
    const double cv = v == 0.0 ? 0.0 : -0.5 * j.dv_over_v;
    return {cu * xi.zeta.real(), cu * xi.zeta.imag(), cv * xi.eta.real(), cv * xi.eta.imag()};
}

/// Q(xi) - dQ(xi) xi = (u phi_u + v phi_v - phi)/2, evaluated radially (no singularity).
inline double drift(const BellmanParams& params, const ComplexPair& xi) {
    const double u = xi.u(), v = xi.v();
    if (u == 0.0 && v == 0.0) return 0.0;
    const RadialJet j = radial_jet(params, u, v);
    const double v_dv = v == 0.0 ? 0.0 : v * j.dv;
    return 0.5 * (u * j.du + v_dv - j.phi);
}

struct SingularMargins {
    /// relative band around u^p = v^q (same convention as classify)
    double interface = kInterfaceThreshold;
    /// absolute distance from v = 0
    double v_axis = 1e-12;
};

/// Real 4x4 Hessian of Q from the radial jet. Throws SingularityError within the
/// margins of {v = 0} or the interface unless p = 2 (globally C^2).
inline Eigen::Matrix4d hessian_Q(const BellmanParams& params, const ComplexPair& xi,
                                 const SingularMargins& margins = {}) {
    const double u = xi.u(), v = xi.v();
    if (!params.globally_smooth()) {
        if (v <= margins.v_axis) {
            throw SingularityError(SingularityError::Set::VAxis,
                                   "second derivatives of Q do not exist on {v = 0}");
        }
        if (classify(params, u, v, margins.interface) == RegionLabel::Interface) {
            throw SingularityError(SingularityError::Set::Interface,
                                   "second derivatives of Q do not exist on {u^p = v^q}");
        }
    }
    const RadialJet j = radial_jet(params, u, v);
    const Eigen::Vector2d ru = u > 0 ? Eigen::Vector2d(xi.zeta.real() / u, xi.zeta.imag() / u)
                                     : Eigen::Vector2d(1.0, 0.0);
    const Eigen::Vector2d rv = v > 0 ? Eigen::Vector2d(xi.eta.real() / v, xi.eta.imag() / v)
                                     : Eigen::Vector2d(1.0, 0.0);
    Eigen::Matrix4d h;
    h.block<2, 2>(0, 0) = j.du_over_u * Eigen::Matrix2d::Identity() + (j.duu - j.du_over_u) * ru * ru.transpose();
    h.block<2, 2>(2, 2) = j.dv_over_v * Eigen::Matrix2d::Identity() + (j.dvv - j.dv_over_v) * rv * rv.transpose();
    h.block<2, 2>(0, 2) = j.duv * ru * rv.transpose();
    h.block<2, 2>(2, 0) = h.block<2, 2>(0, 2).transpose();
    return -0.5 * h;
}

/// Second-order Wirtinger derivatives: zz(k,m) = d2Q/dz_k dz_m, bz(k,m) = d2Q/dzbar_k dz_m,
/// zb(k,m) = d2Q/dz_k dzbar_m, bb(k,m) = d2Q/dzbar_k dzbar_m.
struct WirtingerHessian {
    Eigen::Matrix2cd zz, bz, zb, bb;
};

inline WirtingerHessian wirtinger_hessian(const Eigen::Matrix4d& h) {
    WirtingerHessian w;
    for (int k = 0; k < 2; ++k) {
        for (int m = 0; m < 2; ++m) {
            const double xx = h(2 * k, 2 * m), yy = h(2 * k + 1, 2 * m + 1);
            const double xy = h(2 * k, 2 * m + 1), yx = h(2 * k + 1, 2 * m);
            // d/dz = (d/dx - i d/dy)/2, d/dzbar = (d/dx + i d/dy)/2
            w.zz(k, m) = 0.25 * cplx(xx - yy, -(xy + yx));
            w.bz(k, m) = 0.25 * cplx(xx + yy, yx - xy);
            w.zb(k, m) = 0.25 * cplx(xx + yy, xy - yx);
            w.bb(k, m) = 0.25 * cplx(xx - yy, xy + yx);
        }
    }
    return w;
}

/// <d2Q(xi) sigma, varsigma> assembled from the second Wirtinger derivatives.
inline double second_form(const WirtingerHessian& w, const ComplexPair& sigma, const ComplexPair& varsigma) {
    const std::array<cplx, 2> s{sigma.zeta, sigma.eta};
    const std::array<cplx, 2> r{varsigma.zeta, varsigma.eta};
    cplx total = 0.0;
    for (int k = 0; k < 2; ++k) {
        for (int m = 0; m < 2; ++m) {
            total += w.zz(k, m) * s[k] * r[m] + w.bz(k, m) * std::conj(s[k]) * r[m] +
                     w.zb(k, m) * s[k] * std::conj(r[m]) + w.bb(k, m) * std::conj(s[k]) * std::conj(r[m]);
        }
    }
    return total.real();
}

inline double second_form(const BellmanParams& params, const ComplexPair& xi, const ComplexPair& sigma,
                          const ComplexPair& varsigma, const SingularMargins& margins = {}) {
    return second_form(wirtinger_hessian(hessian_Q(params, xi, margins)), sigma, varsigma);
}

} // namespace bilinear::bellman
