#include "solitonlab/kernels.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <random>
#include <vector>

using namespace solitonlab::kernels;

namespace {

std::vector<double> random_vector(std::mt19937_64& rng, std::size_t n)
{
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    std::vector<double> v(n);
    for (auto& x : v)
        x = u(rng);
    return v;
}

} // namespace

TEST(Kernels, ScalarAlwaysAvailable)
{
    EXPECT_TRUE(available(Isa::Scalar));
    EXPECT_NE(active().dot, nullptr);
}

TEST(Kernels, VariantsAgreeWithScalarReference)
{
    if (!available(Isa::Avx2))
        GTEST_SKIP() << "AVX2 not available on this CPU";
    const KernelTable& ref = table(Isa::Scalar);
    const KernelTable& simd = table(Isa::Avx2);
    std::mt19937_64 rng(1);
    for (std::size_t n : {0u, 1u, 3u, 4u, 5u, 17u, 64u, 1001u}) {
        const auto a = random_vector(rng, n);
        const auto b = random_vector(rng, n);
        const auto c = random_vector(rng, n);
        double scale = 0.0;
        for (std::size_t i = 0; i < n; ++i)
            scale += std::fabs(a[i] * b[i]);
        EXPECT_NEAR(ref.dot(a.data(), b.data(), n), simd.dot(a.data(), b.data(), n), 1e-14 * (1 + scale));

        auto y1 = c, y2 = c;
        ref.axpy(0.37, a.data(), y1.data(), n);
        simd.axpy(0.37, a.data(), y2.data(), n);
        for (std::size_t i = 0; i < n; ++i)
            EXPECT_NEAR(y1[i], y2[i], 1e-15);

        std::vector<double> m1(n), m2(n);
        ref.mul(a.data(), b.data(), m1.data(), n);
        simd.mul(a.data(), b.data(), m2.data(), n);
        EXPECT_EQ(m1, m2);

        y1 = c;
        y2 = c;
        ref.multiply_add(a.data(), b.data(), y1.data(), n);
        simd.multiply_add(a.data(), b.data(), y2.data(), n);
        for (std::size_t i = 0; i < n; ++i)
            EXPECT_NEAR(y1[i], y2[i], 1e-15);

        y1 = c;
        y2 = c;
        ref.weighted_difference(a.data(), b.data(), c.data(), y1.data(), n);
        simd.weighted_difference(a.data(), b.data(), c.data(), y2.data(), n);
        for (std::size_t i = 0; i < n; ++i)
            EXPECT_NEAR(y1[i], y2[i], 1e-15);
    }
}
