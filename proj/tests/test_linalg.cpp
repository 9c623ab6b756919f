#include "solitonlab/linalg.hpp"

#include <gtest/gtest.h>

#include <cmath>

using namespace solitonlab;

namespace {

SmallMatrix sample_spd()
{
    SmallMatrix m(3, 3);
    const double v[3][3] = {{4.0, 1.0, 0.5}, {1.0, 3.0, 0.2}, {0.5, 0.2, 2.0}};
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j)
            m(i, j) = v[i][j];
    return m;
}

} // namespace

TEST(Linalg, CholeskyAndInverse)
{
    const SmallMatrix m = sample_spd();
    const auto l = cholesky(m);
    ASSERT_TRUE(l.has_value());
    const SmallMatrix inv = spd_inverse(*l);
    const SmallMatrix id = multiply(m, inv);
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j)
            EXPECT_NEAR(id(i, j), i == j ? 1.0 : 0.0, 1e-14);
    const auto gi = inverse(m);
    ASSERT_TRUE(gi.has_value());
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j)
            EXPECT_NEAR((*gi)(i, j), inv(i, j), 1e-14);
}

TEST(Linalg, OrthonormalFrame)
{
    const SmallMatrix m = sample_spd();
    const SmallMatrix e = orthonormal_frame(*cholesky(m));
    const SmallMatrix gram = multiply(transpose(e), multiply(m, e));
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j)
            EXPECT_NEAR(gram(i, j), i == j ? 1.0 : 0.0, 1e-14);
}

TEST(Linalg, RejectsIndefinite)
{
    SmallMatrix m = SmallMatrix::identity(2);
    m(1, 1) = -1.0;
    EXPECT_FALSE(cholesky(m).has_value());
    EXPECT_DOUBLE_EQ(determinant(m), -1.0);
}

TEST(Linalg, DeterminantAndEigen)
{
    const SmallMatrix m = sample_spd();
    std::array<double, kMaxDim> vals{};
    SmallMatrix vecs;
    symmetric_eigen(m, vals, vecs);
    EXPECT_NEAR(vals[0] * vals[1] * vals[2], determinant(m), 1e-12);
    EXPECT_LE(vals[0], vals[1]);
    EXPECT_LE(vals[1], vals[2]);
    for (int c = 0; c < 3; ++c) {
        for (int r = 0; r < 3; ++r) {
            double mv = 0.0;
            for (int k = 0; k < 3; ++k)
                mv += m(r, k) * vecs(k, c);
            EXPECT_NEAR(mv, vals[c] * vecs(r, c), 1e-12);
        }
    }
}
