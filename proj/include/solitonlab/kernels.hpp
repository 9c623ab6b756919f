#pragma once

// Vector kernels used by the spectral solver. Each kernel has a scalar
// reference implementation and an AVX2/FMA variant; the variant is chosen
// once at runtime from the CPU features (SOLITONLAB_SIMD=scalar forces the
// reference path).

#include <cstddef>

namespace solitonlab::kernels {

enum class Isa
{
    Scalar,
    Avx2,
};

struct KernelTable
{
    /// sum_i x[i] * y[i]
    double (*dot)(const double* x, const double* y, std::size_t n);
    /// y[i] += a * x[i]
    void (*axpy)(double a, const double* x, double* y, std::size_t n);
    /// out[i] = a[i] * b[i]
    void (*mul)(const double* a, const double* b, double* out, std::size_t n);
    /// out[i] += a[i] * b[i]
    void (*multiply_add)(const double* a, const double* b, double* out, std::size_t n);
    /// out[i] += w[i] * (u[i] - v[i])
    void (*weighted_difference)(const double* w, const double* u, const double* v, double* out, std::size_t n);
};

bool available(Isa isa);
const KernelTable& table(Isa isa);

/// The table selected for this process.
const KernelTable& active();
Isa active_isa();
const char* name(Isa isa);

namespace detail {
extern const KernelTable kScalarTable;
extern const KernelTable kAvx2Table; // defined only when built with AVX2 support
} // namespace detail

} // namespace solitonlab::kernels
