#pragma once

// Dense matrix exponential by scaling and squaring with the degree-13 Pade approximant
// (Higham's theta_13 bound on the 1-norm).

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>

#include "bilinear/errors.hpp"
#include "bilinear/grid.hpp"
#include "bilinear/operator.hpp"

namespace bilinear {

inline Eigen::MatrixXd expm(const Eigen::MatrixXd& a) {
    if (a.rows() != a.cols()) throw DimensionError("matrix exponential needs a square matrix");
    static constexpr double b[14] = {64764752532480000.0, 32382376266240000.0, 7771770303897600.0,
                                     1187353796428800.0,  129060195264000.0,   10559470521600.0,
                                     670442572800.0,      33522128640.0,       1323241920.0,
                                     40840800.0,          960960.0,            16380.0,
                                     182.0,               1.0};
    constexpr double theta13 = 5.371920351148152;
    const Eigen::Index n = a.rows();
    const double norm1 = a.cwiseAbs().colwise().sum().maxCoeff();
    int s = 0;
    if (norm1 > theta13) s = std::max(0, static_cast<int>(std::ceil(std::log2(norm1 / theta13))));
    const Eigen::MatrixXd x = a / std::ldexp(1.0, s);
    const Eigen::MatrixXd id = Eigen::MatrixXd::Identity(n, n);
    const Eigen::MatrixXd x2 = x * x, x4 = x2 * x2, x6 = x4 * x2;
    const Eigen::MatrixXd u =
        x * (x6 * (b[13] * x6 + b[11] * x4 + b[9] * x2) + b[7] * x6 + b[5] * x4 + b[3] * x2 + b[1] * id);
    const Eigen::MatrixXd v = x6 * (b[12] * x6 + b[10] * x4 + b[8] * x2) + b[6] * x6 + b[4] * x4 + b[2] * x2 + b[0] * id;
    Eigen::MatrixXd r = (v - u).partialPivLu().solve(v + u);
    for (int k = 0; k < s; ++k) r = r * r;
    return r;
}

inline constexpr int kDenseOracleLimit = 1024;

/// exp(-t L_h) f through a dense exponential; refuses systems above kDenseOracleLimit unknowns.
inline GridFunction dense_expm_oracle(const DiscreteOperator& op, const GridFunction& f, double t) {
    if (op.unknowns() > kDenseOracleLimit)
        throw DomainError("dense exponential oracle refuses " + std::to_string(op.unknowns()) + " unknowns (limit " +
                          std::to_string(kDenseOracleLimit) + ")");
    if (f.size() != op.unknowns()) throw DimensionError("grid function does not match the operator");
    if (!(t >= 0.0)) throw DomainError("oracle time must be nonnegative");
    if (t == 0.0) return f;
    const Eigen::MatrixXd e = expm(-t * Eigen::MatrixXd(op.matrix()));
    return GridFunction(op.grid(), e.cast<cplx>() * f.values());
}

} // namespace bilinear
