#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "bilinear/coefficients.hpp"
#include "bilinear/grid.hpp"
#include "bilinear/operator.hpp"

using namespace bilinear;
using std::numbers::pi;

namespace {

Eigen::MatrixXd random_accretive(std::mt19937_64& rng, int dim, double gamma_min) {
    std::normal_distribution<double> n;
    Eigen::MatrixXd b(dim, dim), k(dim, dim);
    for (int i = 0; i < dim; ++i)
        for (int j = 0; j < dim; ++j) b(i, j) = n(rng), k(i, j) = n(rng);
    return b * b.transpose() + gamma_min * Eigen::MatrixXd::Identity(dim, dim) + (k - k.transpose());
}

CoefficientField random_field(std::mt19937_64& rng, const Grid& g, double gamma_min) {
    std::vector<Eigen::MatrixXd> cells;
    for (int c = 0; c < g.cell_count(); ++c) cells.push_back(random_accretive(rng, g.dim(), gamma_min));
    return CoefficientField(g, cells);
}

GridFunction random_function(std::mt19937_64& rng, const Grid& g) {
    std::normal_distribution<double> n;
    GridFunction u(g);
    for (int k = 0; k < u.size(); ++k) u[k] = cplx(n(rng), n(rng));
    return u;
}

double slope(const std::vector<double>& h, const std::vector<double>& e) {
    double mx = 0, my = 0;
    const double m = static_cast<double>(h.size());
    for (std::size_t i = 0; i < h.size(); ++i) mx += std::log(h[i]) / m, my += std::log(e[i]) / m;
    double num = 0, den = 0;
    for (std::size_t i = 0; i < h.size(); ++i) {
        num += (std::log(h[i]) - mx) * (std::log(e[i]) - my);
        den += std::pow(std::log(h[i]) - mx, 2);
    }
    return num / den;
}

} // namespace

TEST(Grid, CountsAndSpacing) {
    const auto d = Grid::cube(2, 8, -1, 1, Boundary::Dirichlet);
    EXPECT_EQ(d.unknowns(), 49);
    EXPECT_EQ(d.lattice_count(), 81);
    EXPECT_DOUBLE_EQ(d.spacing(0) * d.cells(0), 2.0);
    const auto p = Grid::cube(3, 4, 0, 1, Boundary::Periodic);
    EXPECT_EQ(p.unknowns(), 64);
    EXPECT_EQ(p.shift(p.lattice_index({3, 0, 0}), 0, 1), p.lattice_index({0, 0, 0}));
    EXPECT_EQ(d.shift(d.lattice_index({8, 0, 0}), 0, 1), -1);
    EXPECT_THROW(Grid::cube(4, 8, 0, 1, Boundary::Periodic), ConstructionError);
    EXPECT_THROW(Grid::cube(1, 1, 0, 1, Boundary::Periodic), ConstructionError);
    EXPECT_THROW(GridFunction(d, Eigen::VectorXcd::Zero(3)), DimensionError);
}

TEST(Grid, NormsUseCellVolume) {
    const auto g = Grid::cube(2, 4, 0, 1, Boundary::Periodic);
    const auto one = GridFunction::sample(g, [](const auto&) { return 1.0; });
    EXPECT_NEAR(one.norm(2), 1.0, 1e-15);
    EXPECT_NEAR(one.norm(3.5), 1.0, 1e-15);
    EXPECT_NEAR(one.integral().real(), 1.0, 1e-15);
    EXPECT_EQ(one.norm(INFINITY), 1.0);
}

TEST(CheckAccretive, Examples) {
    const auto g = Grid::cube(2, 4, 0, 1, Boundary::Periodic);
    Eigen::Matrix2d rot, shear;
    rot << 1, 1, -1, 1;
    shear << 1, 3, 0, 1;
    EXPECT_NEAR(check_accretive(CoefficientField::constant(g, rot)), 1.0, 1e-15);
    EXPECT_NEAR(check_accretive(CoefficientField::constant(g, shear)), -0.5, 1e-14);
    EXPECT_NEAR(check_accretive(CoefficientField::identity(g)), 1.0, 1e-15);
    EXPECT_THROW(assemble(g, CoefficientField::constant(g, shear)), ConstructionError);
    EXPECT_THROW(assemble(g, CoefficientField::constant(g, Eigen::Matrix2d::Zero())), ConstructionError);
}

TEST(Symmetrize, Examples) {
    const auto g = Grid::cube(2, 4, 0, 1, Boundary::Periodic);
    Eigen::Matrix2d rot;
    rot << 1, 1, -1, 1;
    const auto s = symmetrize(CoefficientField::constant(g, rot));
    for (const auto& m : s.cells()) EXPECT_EQ((m - Eigen::Matrix2d::Identity()).norm(), 0.0);
    Eigen::Matrix2d sym;
    sym << 2, 0.5, 0.5, 3;
    const auto ssym = symmetrize(CoefficientField::constant(g, sym));
    for (const auto& m : ssym.cells()) EXPECT_EQ((m - sym).norm(), 0.0);

    std::mt19937_64 rng(1);
    std::normal_distribution<double> n;
    for (int dim : {1, 2, 3}) {
        const auto gd = Grid::cube(dim, 3, 0, 1, Boundary::Periodic);
        const auto a = random_field(rng, gd, 0.3);
        const auto at = symmetrize(a);
        EXPECT_NEAR(at.gamma(), a.gamma(), 1e-13);
        EXPECT_TRUE(at.symmetric());
        for (int c = 0; c < gd.cell_count(); ++c) {
            Eigen::VectorXcd xi(dim);
            for (int i = 0; i < dim; ++i) xi[i] = cplx(n(rng), n(rng));
            const cplx lhs = xi.dot(a[c].cast<cplx>() * xi);    // conj(xi) . A xi
            const cplx rhs = xi.dot(at[c].cast<cplx>() * xi);
            EXPECT_NEAR(lhs.real(), rhs.real(), 1e-12 * std::abs(rhs));
            EXPECT_NEAR(rhs.imag(), 0.0, 1e-12 * std::abs(rhs));
        }
    }
}

TEST(MatrixSqrtSpd, Examples) {
    Eigen::Matrix2d d;
    d << 4, 0, 0, 9;
    EXPECT_LT((matrix_sqrt_spd(d) - Eigen::Vector2d(2, 3).asDiagonal().toDenseMatrix()).norm(), 1e-15);
    EXPECT_LT((matrix_sqrt_spd(Eigen::Matrix3d::Identity()) - Eigen::Matrix3d::Identity()).norm(), 1e-15);
    std::mt19937_64 rng(2);
    std::normal_distribution<double> n;
    for (int k = 0; k < 100; ++k) {
        Eigen::Matrix3d b;
        for (int i = 0; i < 9; ++i) b(i) = n(rng);
        const Eigen::Matrix3d m = b * b.transpose() + 0.1 * Eigen::Matrix3d::Identity();
        const Eigen::MatrixXd s = matrix_sqrt_spd(m);
        EXPECT_LE((s * s - m).norm(), 1e-12 * m.norm());
        EXPECT_LT((s - s.transpose()).norm(), 1e-14 * s.norm());
        EXPECT_GT(Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(s).eigenvalues()(0), 0.0);
    }
    Eigen::Matrix2d indef;
    indef << 1, 2, 2, 1;
    EXPECT_THROW(matrix_sqrt_spd(indef), DomainError);
    Eigen::Matrix2d nonsym;
    nonsym << 1, 1, 0, 1;
    EXPECT_THROW(matrix_sqrt_spd(nonsym), DomainError);
}

TEST(Assemble, OneDimensionalDirichletStencil) {
    const auto g = Grid::cube(1, 4, 0, 4, Boundary::Dirichlet);
    ASSERT_EQ(g.unknowns(), 3);
    const auto op = assemble(g, CoefficientField::identity(g));
    Eigen::Matrix3d expect;
    expect << 2, -1, 0, -1, 2, -1, 0, -1, 2;
    EXPECT_EQ((Eigen::MatrixXd(op.matrix()) - expect).norm(), 0.0);
    // column extraction through apply
    for (int j = 0; j < 3; ++j) {
        GridFunction e(g);
        e[j] = 1.0;
        const auto col = apply(op, e);
        for (int i = 0; i < 3; ++i) EXPECT_EQ(col[i], cplx(expect(i, j)));
    }
    EXPECT_TRUE(op.monotone());
}

TEST(Assemble, TwoDimensionalIdentityIsFivePointStencil) {
    const auto g = Grid(2, {4, 5, 1}, {0, 0, 0}, {2, 1, 1}, Boundary::Dirichlet);
    const auto op = assemble(g, CoefficientField::identity(g));
    const double hx = g.spacing(0), hy = g.spacing(1);
    const Eigen::MatrixXd L(op.matrix());
    for (int k = 0; k < g.unknowns(); ++k) {
        EXPECT_NEAR(L(k, k), 2 / (hx * hx) + 2 / (hy * hy), 1e-12);
        const int n = g.lattice_of(k);
        int neighbours = 0;
        for (int a = 0; a < 2; ++a)
            for (int s : {-1, 1}) {
                const int m = g.unknown_of(g.shift(n, a, s));
                if (m < 0) continue;
                EXPECT_NEAR(L(k, m), -1 / std::pow(g.spacing(a), 2), 1e-12);
                ++neighbours;
            }
        EXPECT_EQ((L.row(k).array().abs() > 1e-14).count(), 1 + neighbours);
    }
}

TEST(Assemble, PotentialEntersDiagonally) {
    const auto g = Grid::cube(2, 6, -1, 1, Boundary::Dirichlet);
    const auto v = PotentialField::from_function(g, [](const auto& x) { return x.squaredNorm(); });
    const auto a = CoefficientField::identity(g);
    const Eigen::MatrixXd diff = Eigen::MatrixXd(assemble(g, a, v).matrix()) - Eigen::MatrixXd(assemble(g, a).matrix());
    EXPECT_LT((diff - Eigen::MatrixXd(v.values().asDiagonal())).norm(), 1e-12 * v.values().norm());
    EXPECT_THROW(PotentialField(g, -Eigen::VectorXd::Ones(g.unknowns())), ConstructionError);
}

TEST(Assemble, PeriodicConstantsInKernel) {
    std::mt19937_64 rng(3);
    for (int dim : {1, 2, 3}) {
        const auto g = Grid::cube(dim, 5, 0, 1, Boundary::Periodic);
        const auto op = assemble(g, random_field(rng, g, 0.2));
        const auto one = GridFunction::sample(g, [](const auto&) { return 1.0; });
        EXPECT_LT(apply(op, one).sup_norm(), 1e-12 * op.matrix().norm());
        // columns sum to zero as well (divergence form)
        EXPECT_LT((Eigen::RowVectorXd::Ones(g.unknowns()) * op.matrix()).cwiseAbs().maxCoeff(),
                  1e-12 * op.matrix().norm());
    }
}

TEST(Apply, LinearityAndDimensionCheck) {
    std::mt19937_64 rng(4);
    const auto g = Grid::cube(2, 8, 0, 1, Boundary::Dirichlet);
    const auto op = assemble(g, random_field(rng, g, 0.5));
    EXPECT_EQ(apply(op, GridFunction(g)).sup_norm(), 0.0);
    const auto u = random_function(rng, g), w = random_function(rng, g);
    const cplx al(0.3, -1.2), be(2.0, 0.5);
    const auto lhs = apply(op, al * u + be * w);
    const auto rhs = al * apply(op, u) + be * apply(op, w);
    EXPECT_LT((lhs - rhs).sup_norm(), 1e-13 * lhs.sup_norm());
    EXPECT_THROW(apply(op, GridFunction(Grid::cube(2, 9, 0, 1, Boundary::Dirichlet))), DimensionError);
}

TEST(Operator, DiscreteEllipticity) {
    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> un(0, 3);
    for (int dim : {1, 2, 3}) {
        for (auto bc : {Boundary::Dirichlet, Boundary::Periodic}) {
            const auto g = Grid::cube(dim, dim == 3 ? 4 : 7, -1, 1, bc);
            const auto a = random_field(rng, g, 0.25);
            Eigen::VectorXd vv(g.unknowns());
            for (auto& x : vv) x = un(rng);
            const PotentialField v(g, vv);
            const auto op = assemble(g, a, v);
            for (int k = 0; k < 20; ++k) {
                const auto u = random_function(rng, g);
                const double lhs = apply(op, u).inner(u).real();
                const auto gu = gradient(u);
                const double vuu = (vv.array() * u.values().cwiseAbs2().array()).sum() * g.cell_volume();
                EXPECT_GE(lhs, (a.gamma() * edge_norm_squared(gu) + vuu) * (1 - 1e-12));
            }
        }
    }
}

TEST(Operator, AdjointConsistency) {
    std::mt19937_64 rng(6);
    std::normal_distribution<double> n;
    for (int dim : {1, 2, 3}) {
        for (auto bc : {Boundary::Dirichlet, Boundary::Periodic}) {
            const auto g = Grid::cube(dim, 5, 0, 2, bc);
            const auto u = random_function(rng, g);
            EdgeField w{g, Eigen::VectorXcd(g.edge_count())};
            for (auto& z : w.values) z = cplx(n(rng), n(rng));
            const auto gu = gradient(u);
            // only edges present in the lattice carry information
            const SparseMatrix G = gradient_matrix(g);
            const cplx lhs = w.values.dot(gu.values) * g.cell_volume();
            const cplx rhs = divergence_adjoint(w).values().dot(u.values()) * g.cell_volume();
            EXPECT_LT(std::abs(lhs - rhs), 1e-12 * std::abs(lhs));
            EXPECT_EQ(G.rows(), g.edge_count());
        }
    }
}

TEST(StarNorm, LinearFunctionWithBoundaryData) {
    const auto g = Grid::cube(1, 10, 0, 1, Boundary::Dirichlet);
    const auto u = GridFunction::sample(g, [](const auto& x) { return x[0]; });
    const auto s = star_norm(u, [](const Grid::Point& x) { return cplx(x[0]); });
    for (int k = 0; k < s.size(); ++k) EXPECT_NEAR(s[k].real(), 1.0, 1e-13);
}

TEST(StarNorm, ConstantWithUnitPotential) {
    const auto g = Grid::cube(2, 6, 0, 1, Boundary::Periodic);
    const cplx c(0.6, -0.8 * 3);
    const auto u = GridFunction::sample(g, [&](const auto&) { return c; });
    const auto s = star_norm(u, PotentialField::from_function(g, [](const auto&) { return 1.0; }));
    for (int k = 0; k < s.size(); ++k) EXPECT_NEAR(s[k].real(), std::abs(c), 1e-14);
}

TEST(StarNorm, SecondOrderOnPeriodicSine) {
    // sqrt of a second-order quantity: second order where u' is bounded away from zero, first order
    // at the zeros of u' where the edge mean of squares is (h/2 u'')^2.
    std::vector<double> hs, err_sq, err_away, err_all;
    for (int n : {16, 32, 64, 128}) {
        const auto g = Grid::cube(1, n, 0, 1, Boundary::Periodic);
        const auto u = GridFunction::sample(g, [](const auto& x) { return std::sin(2 * pi * x[0]); });
        const auto s = star_norm(u);
        double e2 = 0, ea = 0, e = 0;
        for (int k = 0; k < g.unknowns(); ++k) {
            const double exact = std::abs(2 * pi * std::cos(2 * pi * g.unknown_point(k)[0]));
            const double got = s[k].real();
            e2 = std::max(e2, std::abs(got * got - exact * exact));
            e = std::max(e, std::abs(got - exact));
            if (exact >= pi) ea = std::max(ea, std::abs(got - exact));
        }
        hs.push_back(g.spacing(0));
        err_sq.push_back(e2);
        err_away.push_back(ea);
        err_all.push_back(e);
    }
    EXPECT_GE(slope(hs, err_sq), 1.8);
    EXPECT_GE(slope(hs, err_away), 1.8);
    EXPECT_NEAR(slope(hs, err_all), 1.0, 0.1);
}

namespace {

// Smooth periodic fields on [0,1)^2 and an oracle for -div(A grad u) built from the analytic flux
// by fourth-order central differences with a tiny step.
Eigen::Matrix2d smooth_a(const Eigen::Vector3d& x, bool diagonal) {
    Eigen::Matrix2d m;
    const double s = std::sin(2 * pi * x[0]), c = std::cos(2 * pi * x[1]);
    m << 1.5 + 0.4 * s, diagonal ? 0.0 : 0.3 * c, diagonal ? 0.0 : -0.2 * std::sin(2 * pi * (x[0] + x[1])),
        1.2 + 0.3 * c;
    return m;
}
double smooth_u(const Eigen::Vector3d& x) { return std::sin(2 * pi * x[0]) * std::cos(4 * pi * x[1]) + 0.3 * std::cos(2 * pi * x[0]); }
Eigen::Vector2d smooth_grad(const Eigen::Vector3d& x) {
    return {2 * pi * std::cos(2 * pi * x[0]) * std::cos(4 * pi * x[1]) - 0.6 * pi * std::sin(2 * pi * x[0]),
            -4 * pi * std::sin(2 * pi * x[0]) * std::sin(4 * pi * x[1])};
}
double smooth_v(const Eigen::Vector3d& x) { return 1 + std::cos(2 * pi * x[0]) * std::cos(2 * pi * x[1]); }
double exact_l(const Eigen::Vector3d& x, bool diagonal) {
    const double e = 1e-3;
    double div = 0;
    for (int a = 0; a < 2; ++a) {
        auto flux = [&](double t) {
            Eigen::Vector3d y = x;
            y[a] += t;
            return (smooth_a(y, diagonal) * smooth_grad(y))[a];
        };
        div += (-flux(2 * e) + 8 * flux(e) - 8 * flux(-e) + flux(-2 * e)) / (12 * e);
    }
    return -div + smooth_v(x) * smooth_u(x);
}

} // namespace

TEST(Operator, ConsistencyOrderOnSmoothData) {
    for (bool diagonal : {true, false}) {
        std::vector<double> hs, errs;
        for (int n : {16, 32, 64}) {
            const auto g = Grid::cube(2, n, 0, 1, Boundary::Periodic);
            const auto a = CoefficientField::from_function(g, [&](const auto& x) { return Eigen::MatrixXd(smooth_a(x, diagonal)); });
            const auto v = PotentialField::from_function(g, smooth_v);
            const auto lu = apply(assemble(g, a, v), GridFunction::sample(g, smooth_u));
            double err = 0;
            for (int k = 0; k < g.unknowns(); ++k)
                err = std::max(err, std::abs(lu[k].real() - exact_l(g.unknown_point(k), diagonal)));
            hs.push_back(g.spacing(0));
            errs.push_back(err);
        }
        const double rate = slope(hs, errs);
        EXPECT_GE(rate, diagonal ? 1.8 : 0.9) << "diagonal=" << diagonal << " errors " << errs[0] << " " << errs[2];
    }
}
