#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>
#include <vector>

#include "bilinear/errors.hpp"
#include "bilinear/grid.hpp"

namespace bilinear {

/// One real dim x dim matrix per cell.
class CoefficientField {
public:
    using Matrix = Eigen::MatrixXd;

    CoefficientField() = default;

    CoefficientField(Grid grid, std::vector<Matrix> cells) : grid_(std::move(grid)), cells_(std::move(cells)) {
        if (static_cast<int>(cells_.size()) != grid_.cell_count())
            throw DimensionError("coefficient field needs one matrix per cell");
        for (const auto& m : cells_) {
            if (m.rows() != grid_.dim() || m.cols() != grid_.dim())
                throw DimensionError("coefficient matrices must be dim x dim");
            if (!m.allFinite()) throw ConstructionError("coefficient field has non-finite entries");
        }
        refresh();
    }

    static CoefficientField constant(const Grid& grid, const Matrix& m) {
        return CoefficientField(grid, std::vector<Matrix>(grid.cell_count(), m));
    }
    static CoefficientField identity(const Grid& grid) {
        return constant(grid, Matrix::Identity(grid.dim(), grid.dim()));
    }
    /// Samples f at cell centres.
    template <class F>
    static CoefficientField from_function(const Grid& grid, F&& f) {
        std::vector<Matrix> cells;
        cells.reserve(grid.cell_count());
        for (int c = 0; c < grid.cell_count(); ++c) cells.push_back(f(grid.cell_center(c)));
        return CoefficientField(grid, std::move(cells));
    }

    const Grid& grid() const noexcept { return grid_; }
    const Matrix& operator[](int cell) const { return cells_[cell]; }
    const std::vector<Matrix>& cells() const noexcept { return cells_; }

    /// min over cells of lambda_min((A + A^T) / 2)
    double gamma() const noexcept { return gamma_; }
    /// max over cells of the spectral norm
    double sup_norm() const noexcept { return sup_; }
    bool symmetric(double tol = 0.0) const {
        return std::all_of(cells_.begin(), cells_.end(),
                           [&](const Matrix& m) { return (m - m.transpose()).cwiseAbs().maxCoeff() <= tol; });
    }
    bool diagonal() const {
        return std::all_of(cells_.begin(), cells_.end(), [](const Matrix& m) {
            Matrix off = m;
            off.diagonal().setZero();
            return off.cwiseAbs().maxCoeff() == 0.0;
        });
    }

    /// Average of the cells touching a lattice node (the node-value used by pointwise checks).
    Matrix node_average(int lattice) const {
        const Grid::Index n = grid_.lattice_multi(lattice);
        Matrix acc = Matrix::Zero(grid_.dim(), grid_.dim());
        int count = 0;
        for (unsigned kappa = 0; kappa < (1u << grid_.dim()); ++kappa) {
            Grid::Index c = n;
            bool ok = true;
            for (int a = 0; a < grid_.dim(); ++a) {
                if (kappa & (1u << a)) c[a] -= 1;
                if (grid_.boundary() == Boundary::Periodic) {
                    c[a] = (c[a] + grid_.cells(a)) % grid_.cells(a);
                } else if (c[a] < 0 || c[a] >= grid_.cells(a)) {
                    ok = false;
                }
            }
            if (!ok) continue;
            acc += cells_[grid_.cell_index(c)];
            ++count;
        }
        return acc / count;
    }

private:
    void refresh() {
        gamma_ = std::numeric_limits<double>::infinity();
        sup_ = 0.0;
        for (const auto& m : cells_) {
            const Matrix s = 0.5 * (m + m.transpose());
            gamma_ = std::min(gamma_, Eigen::SelfAdjointEigenSolver<Matrix>(s, Eigen::EigenvaluesOnly).eigenvalues()(0));
            sup_ = std::max(sup_, Eigen::JacobiSVD<Matrix>(m).singularValues()(0));
        }
    }

    Grid grid_;
    std::vector<Matrix> cells_;
    double gamma_ = 0.0;
    double sup_ = 0.0;
};

/// Nonnegative potential sampled on the unknowns.
class PotentialField {
public:
    PotentialField() = default;
    PotentialField(Grid grid, Eigen::VectorXd values) : grid_(std::move(grid)), values_(std::move(values)) {
        if (values_.size() != grid_.unknowns()) throw DimensionError("potential needs one value per unknown");
        for (Eigen::Index k = 0; k < values_.size(); ++k) {
            if (!(values_[k] >= 0.0) || !std::isfinite(values_[k])) {
                std::ostringstream os;
                os << "potential must be finite and nonnegative; V = " << values_[k] << " at node " << k;
                throw ConstructionError(os.str());
            }
        }
    }

    static PotentialField zero(const Grid& grid) { return PotentialField(grid, Eigen::VectorXd::Zero(grid.unknowns())); }
    template <class F>
    static PotentialField from_function(const Grid& grid, F&& f) {
        Eigen::VectorXd v(grid.unknowns());
        for (int k = 0; k < grid.unknowns(); ++k) v[k] = f(grid.unknown_point(k));
        return PotentialField(grid, std::move(v));
    }

    const Grid& grid() const noexcept { return grid_; }
    const Eigen::VectorXd& values() const noexcept { return values_; }
    double operator[](Eigen::Index k) const { return values_[k]; }
    bool is_zero() const { return values_.size() == 0 || values_.cwiseAbs().maxCoeff() == 0.0; }

private:
    Grid grid_;
    Eigen::VectorXd values_;
};

inline double check_accretive(const CoefficientField& a) { return a.gamma(); }

inline CoefficientField symmetrize(const CoefficientField& a) {
    std::vector<CoefficientField::Matrix> cells;
    cells.reserve(a.cells().size());
    for (const auto& m : a.cells()) cells.push_back(0.5 * (m + m.transpose()));
    return CoefficientField(a.grid(), std::move(cells));
}

/// Symmetric positive-definite square root of one matrix.
inline Eigen::MatrixXd matrix_sqrt_spd(const Eigen::MatrixXd& m) {
    if (m.rows() != m.cols()) throw DimensionError("matrix square root needs a square matrix");
    const double scale = std::max(1.0, m.cwiseAbs().maxCoeff());
    if ((m - m.transpose()).cwiseAbs().maxCoeff() > 1e-14 * scale)
        throw DomainError("matrix square root needs a symmetric matrix");
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(m);
    if (!(es.eigenvalues()(0) > 0.0)) {
        std::ostringstream os;
        os << "matrix square root needs a positive-definite matrix; lambda_min = " << es.eigenvalues()(0);
        throw DomainError(os.str());
    }
    return es.eigenvectors() * es.eigenvalues().cwiseSqrt().asDiagonal() * es.eigenvectors().transpose();
}

inline CoefficientField matrix_sqrt_spd(const CoefficientField& a) {
    std::vector<CoefficientField::Matrix> cells;
    cells.reserve(a.cells().size());
    for (const auto& m : a.cells()) cells.push_back(matrix_sqrt_spd(m));
    return CoefficientField(a.grid(), std::move(cells));
}

} // namespace bilinear
