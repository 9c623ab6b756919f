#include "solitonlab/catalog.hpp"
#include "solitonlab/errors.hpp"
#include "solitonlab/spectral.hpp"

#include <Eigen/Dense>
#include <gtest/gtest.h>

#include <cmath>
#include <sstream>

using namespace solitonlab;

namespace {

// Dense generalized eigenvalues of the pencil (K, M) built column by column.
Eigen::VectorXd dense_spectrum(const SpectralProblem& p)
{
    const SpectralOperator op = assemble(p);
    const auto n = static_cast<Eigen::Index>(op.size());
    Eigen::MatrixXd K(n, n);
    std::vector<double> e(op.size(), 0.0), col(op.size());
    for (Eigen::Index j = 0; j < n; ++j) {
        e[static_cast<std::size_t>(j)] = 1.0;
        op.apply_stiffness(e.data(), col.data());
        e[static_cast<std::size_t>(j)] = 0.0;
        for (Eigen::Index i = 0; i < n; ++i)
            K(i, j) = col[static_cast<std::size_t>(i)];
    }
    Eigen::VectorXd M(n);
    for (Eigen::Index i = 0; i < n; ++i)
        M(i) = op.mass()[static_cast<std::size_t>(i)];
    Eigen::GeneralizedSelfAdjointEigenSolver<Eigen::MatrixXd> es(K, M.asDiagonal().toDenseMatrix());
    return es.eigenvalues();
}

} // namespace

TEST(Spectral, OperatorIsSymmetric)
{
    for (int n : {1, 2}) {
        const SpectralOperator op = assemble(SpectralProblem::make(n, 4.0, 51, "0.5*x1^2 + 0.3*sin(x1)"));
        EXPECT_LE(op.max_asymmetry(), 1e-12);
    }
}

TEST(Spectral, ConstantsSpanTheKernel)
{
    const SpectralProblem p = SpectralProblem::make(2, 5.0, 51, "(x1^2 + x2^2)/2");
    const SpectralOperator op = assemble(p);
    std::vector<double> one(op.size(), 1.0), out(op.size());
    op.apply_stiffness(one.data(), out.data());
    for (double v : out)
        EXPECT_NEAR(v, 0.0, 1e-14);
    const SpectralResult r = smallest_nonzero(p, 2);
    EXPECT_LE(std::abs(r.eigenvalues[0]), 1e-6);
    EXPECT_LE(r.constant_cv, 1e-4);
}

TEST(Spectral, MatchesDenseOracle)
{
    const SpectralProblem p = SpectralProblem::make(1, 5.0, 51, "x1^2/2 + 0.2*cos(2*x1)");
    const Eigen::VectorXd dense = dense_spectrum(p);
    const SpectralResult r = smallest_nonzero(p, 5);
    ASSERT_EQ(r.eigenvalues.size(), 5u);
    for (int i = 0; i < 5; ++i)
        EXPECT_NEAR(r.eigenvalues[static_cast<std::size_t>(i)], dense(i), 1e-8 * (1.0 + dense(i))) << i;
    for (std::size_t i = 1; i < r.residuals.size(); ++i)
        EXPECT_LE(r.residuals[i], 1e-6);
}

TEST(Spectral, NeumannIntervalAndRefinementOrder)
{
    // f = 0 on [-pi/2, pi/2]: eigenvalues k^2.
    double previous = 0.0;
    double previous_diff = 0.0;
    for (int N : {51, 101, 201}) {
        const SpectralResult r = smallest_nonzero(SpectralProblem::make(1, M_PI / 2, N, "0"), 3);
        EXPECT_NEAR(r.eigenvalues[1], 1.0, 2e-3);
        EXPECT_NEAR(r.eigenvalues[2], 4.0, 1e-2);
        if (previous != 0.0) {
            const double diff = std::abs(r.eigenvalues[1] - previous);
            if (previous_diff != 0.0)
                EXPECT_GE(previous_diff / diff, 3.5);
            previous_diff = diff;
        }
        previous = r.eigenvalues[1];
    }
}

TEST(Spectral, FlatBoxGap)
{
    for (double L : {2.0, 6.0}) {
        const SpectralResult r = smallest_nonzero(SpectralProblem::make(1, L, 201, "0"), 2);
        const double exact = std::pow(M_PI / (2.0 * L), 2);
        EXPECT_LE(std::abs(r.eigenvalues[1] - exact) / exact, 1e-2) << L;
    }
}

TEST(Spectral, OrnsteinUhlenbeck)
{
    const SpectralResult r = smallest_nonzero(SpectralProblem::make(1, 10.0, 2001, "x1^2/2"), 4);
    EXPECT_GE(r.eigenvalues[1], 0.99);
    EXPECT_LE(r.eigenvalues[1], 1.01);
    EXPECT_NEAR(r.eigenvalues[2], 2.0, 1e-2);
    EXPECT_NEAR(r.eigenvalues[3], 3.0, 2e-2);

    // f = |x|^2 is the lambda = 2 case.
    const SpectralResult r2 = smallest_nonzero(SpectralProblem::make(1, 8.0, 1001, "x1^2"), 2);
    EXPECT_NEAR(r2.eigenvalues[1], 2.0, 2e-2);
}

TEST(Spectral, GaussianPlaneHasDoubleFirstEigenvalue)
{
    const SpectralResult r = smallest_nonzero(SpectralProblem::make(2, 8.0, 101, "(x1^2 + x2^2)/2"), 4);
    EXPECT_NEAR(r.eigenvalues[1], 1.0, 1e-2);
    EXPECT_NEAR(r.eigenvalues[2], r.eigenvalues[1], 1e-3);
    EXPECT_GT(r.eigenvalues[3] - r.eigenvalues[2], 0.5);
}

TEST(Spectral, RayleighQuotients)
{
    const SpectralProblem g = SpectralProblem::make(1, 10.0, 1001, "x1^2/2");
    EXPECT_NEAR(rayleigh(g, parse("x1")), 1.0, 5e-3);

    const SpectralProblem flat = SpectralProblem::make(1, 1.0, 201, "0");
    const double q = rayleigh(flat, parse("x1"));
    EXPECT_NEAR(q, 3.0, 1e-3);
    const double lam1 = smallest_nonzero(flat, 2).eigenvalues[1];
    EXPECT_GE(q, lam1);
    EXPECT_GE(rayleigh(flat, parse("x1 + 0.3*x1^3 - cos(x1)")), lam1 - 1e-10);
    EXPECT_THROW(rayleigh(flat, parse("2")), DegenerateTestFunction);
}

TEST(Spectral, GapAuditOnGaussianAndFlat)
{
    const GapReport g = gap_audit(catalog::gaussian(2, 1.0), SpectralProblem::make(2, 8.0, 51, "0"));
    EXPECT_TRUE(g.bound_holds);
    EXPECT_TRUE(g.discrete_spectrum);
    EXPECT_NEAR(g.lambda1, 1.0, 0.05);
    EXPECT_GT(g.refinement_error, 0.0);

    const GapReport flat = gap_audit(catalog::euclidean_flat(1), SpectralProblem::make(1, 6.0, 201, "0"));
    EXPECT_FALSE(flat.discrete_spectrum);
    EXPECT_LT(flat.sweep_lambda1.back(), flat.sweep_lambda1.front());
    EXPECT_THROW(gap_audit(catalog::sphere(2, 1.0), SpectralProblem::make(2, 2.0, 51, "0")), NotApplicable);
}

TEST(Spectral, SliceCsv)
{
    const SpectralProblem p = SpectralProblem::make(2, 3.0, 51, "(x1^2 + x2^2)/2");
    const SpectralResult r = smallest_nonzero(p, 2);
    std::ostringstream os;
    write_eigenvector_slice(os, p, r.vectors[1]);
    const std::string s = os.str();
    EXPECT_EQ(s.substr(0, 4), "x,u\n");
    EXPECT_EQ(std::count(s.begin(), s.end(), '\n'), 52);
}
