#include "solitonlab/kernels.hpp"

#include <immintrin.h>

namespace solitonlab::kernels::detail {

namespace {

double dot(const double* x, const double* y, std::size_t n)
{
    __m256d acc = _mm256_setzero_pd();
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4)
        acc = _mm256_fmadd_pd(_mm256_loadu_pd(x + i), _mm256_loadu_pd(y + i), acc);
    alignas(32) double s[4];
    _mm256_store_pd(s, acc);
    double total = (s[0] + s[2]) + (s[1] + s[3]);
    for (; i < n; ++i)
        total += x[i] * y[i];
    return total;
}

void axpy(double a, const double* x, double* y, std::size_t n)
{
    const __m256d va = _mm256_set1_pd(a);
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4)
        _mm256_storeu_pd(y + i, _mm256_fmadd_pd(va, _mm256_loadu_pd(x + i), _mm256_loadu_pd(y + i)));
    for (; i < n; ++i)
        y[i] += a * x[i];
}

void mul(const double* a, const double* b, double* out, std::size_t n)
{
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4)
        _mm256_storeu_pd(out + i, _mm256_mul_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i)));
    for (; i < n; ++i)
        out[i] = a[i] * b[i];
}

void multiply_add(const double* a, const double* b, double* out, std::size_t n)
{
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4)
        _mm256_storeu_pd(out + i,
                         _mm256_fmadd_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i), _mm256_loadu_pd(out + i)));
    for (; i < n; ++i)
        out[i] += a[i] * b[i];
}

void weighted_difference(const double* w, const double* u, const double* v, double* out, std::size_t n)
{
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        const __m256d d = _mm256_sub_pd(_mm256_loadu_pd(u + i), _mm256_loadu_pd(v + i));
        _mm256_storeu_pd(out + i, _mm256_fmadd_pd(_mm256_loadu_pd(w + i), d, _mm256_loadu_pd(out + i)));
    }
    for (; i < n; ++i)
        out[i] += w[i] * (u[i] - v[i]);
}

} // namespace

const KernelTable kAvx2Table{dot, axpy, mul, multiply_add, weighted_difference};

} // namespace solitonlab::kernels::detail
