#include "solitonlab/kernels.hpp"

namespace solitonlab::kernels::detail {

namespace {

double dot(const double* x, const double* y, std::size_t n)
{
    // Four partial sums in the same lane order as the AVX2 variant.
    double s[4] = {0.0, 0.0, 0.0, 0.0};
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4)
        for (int k = 0; k < 4; ++k)
            s[k] += x[i + k] * y[i + k];
    double total = (s[0] + s[2]) + (s[1] + s[3]);
    for (; i < n; ++i)
        total += x[i] * y[i];
    return total;
}

void axpy(double a, const double* x, double* y, std::size_t n)
{
    for (std::size_t i = 0; i < n; ++i)
        y[i] += a * x[i];
}

void mul(const double* a, const double* b, double* out, std::size_t n)
{
    for (std::size_t i = 0; i < n; ++i)
        out[i] = a[i] * b[i];
}

void multiply_add(const double* a, const double* b, double* out, std::size_t n)
{
    for (std::size_t i = 0; i < n; ++i)
        out[i] += a[i] * b[i];
}

void weighted_difference(const double* w, const double* u, const double* v, double* out, std::size_t n)
{
    for (std::size_t i = 0; i < n; ++i)
        out[i] += w[i] * (u[i] - v[i]);
}

} // namespace

const KernelTable kScalarTable{dot, axpy, mul, multiply_add, weighted_difference};

} // namespace solitonlab::kernels::detail
