#pragma once

// Fixed-capacity dense helpers for the n <= kMaxDim matrices that appear in
// metric and Jacobi computations.

#include "solitonlab/jet.hpp"

#include <array>
#include <cmath>
#include <optional>

namespace solitonlab {

struct SmallMatrix
{
    int rows = 0;
    int cols = 0;
    std::array<double, kMaxDim * kMaxDim> a{};

    SmallMatrix() = default;
    SmallMatrix(int r, int c) : rows(r), cols(c) {}

    static SmallMatrix identity(int n)
    {
        SmallMatrix m(n, n);
        for (int i = 0; i < n; ++i)
            m(i, i) = 1.0;
        return m;
    }

    double& operator()(int i, int j) { return a[static_cast<std::size_t>(i * kMaxDim + j)]; }
    double operator()(int i, int j) const { return a[static_cast<std::size_t>(i * kMaxDim + j)]; }
};

SmallMatrix multiply(const SmallMatrix& x, const SmallMatrix& y);
SmallMatrix transpose(const SmallMatrix& x);

/// Lower-triangular L with L L^T = m, or nullopt if m is not positive definite.
std::optional<SmallMatrix> cholesky(const SmallMatrix& m);

/// Inverse of a symmetric positive definite matrix from its Cholesky factor.
SmallMatrix spd_inverse(const SmallMatrix& chol);

/// Inverse of the lower-triangular Cholesky factor's transpose: columns form a
/// g-orthonormal frame when chol is the factor of g.
SmallMatrix orthonormal_frame(const SmallMatrix& chol);

/// Determinant by Gaussian elimination with partial pivoting.
double determinant(SmallMatrix m);

/// General inverse by Gauss-Jordan elimination; nullopt if singular.
std::optional<SmallMatrix> inverse(SmallMatrix m);

/// Eigen-decomposition of a symmetric matrix by cyclic Jacobi rotations.
/// Eigenvalues ascending; eigenvectors stored as columns.
void symmetric_eigen(const SmallMatrix& m, std::array<double, kMaxDim>& values, SmallMatrix& vectors);

} // namespace solitonlab
