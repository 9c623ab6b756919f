#pragma once

#include <array>
#include <cassert>
#include <span>

namespace solitonlab {

/// Largest coordinate dimension supported by the fixed-capacity jets and the
/// small dense linear algebra.
inline constexpr int kMaxDim = 8;
inline constexpr int kMaxPacked = kMaxDim * (kMaxDim + 1) / 2;

/// Second-order forward-mode jet: value, gradient and Hessian with respect to
/// `dim` independent variables. The Hessian is stored as the packed upper
/// triangle, so it is symmetric by construction.
struct JetValue
{
    int dim = 0;
    double value = 0.0;
    std::array<double, kMaxDim> grad{};
    std::array<double, kMaxPacked> hess{};

    JetValue() = default;
    JetValue(int n, double v) : dim(n), value(v) { assert(n >= 0 && n <= kMaxDim); }

    static JetValue variable(int n, int index, double v)
    {
        JetValue j(n, v);
        j.grad[static_cast<std::size_t>(index)] = 1.0;
        return j;
    }

    static constexpr int packed_index(int n, int i, int j)
    {
        if (i > j) {
            int t = i;
            i = j;
            j = t;
        }
        return i * n - i * (i - 1) / 2 + (j - i);
    }

    int packed_size() const { return dim * (dim + 1) / 2; }

    double gradient(int i) const { return grad[static_cast<std::size_t>(i)]; }
    double hessian(int i, int j) const { return hess[static_cast<std::size_t>(packed_index(dim, i, j))]; }
    std::span<const double> gradient() const { return {grad.data(), static_cast<std::size_t>(dim)}; }
};

/// g(u) where d0 = g(u.value), d1 = g'(u.value), d2 = g''(u.value).
inline JetValue chain(const JetValue& u, double d0, double d1, double d2)
{
    JetValue r(u.dim, d0);
    const int n = u.dim;
    for (int i = 0; i < n; ++i)
        r.grad[i] = d1 * u.grad[i];
    int k = 0;
    for (int i = 0; i < n; ++i)
        for (int j = i; j < n; ++j, ++k)
            r.hess[k] = d1 * u.hess[k] + d2 * u.grad[i] * u.grad[j];
    return r;
}

inline JetValue operator+(const JetValue& a, const JetValue& b)
{
    JetValue r(a.dim, a.value + b.value);
    for (int i = 0; i < a.dim; ++i)
        r.grad[i] = a.grad[i] + b.grad[i];
    for (int k = 0; k < a.packed_size(); ++k)
        r.hess[k] = a.hess[k] + b.hess[k];
    return r;
}

inline JetValue operator-(const JetValue& a, const JetValue& b)
{
    JetValue r(a.dim, a.value - b.value);
    for (int i = 0; i < a.dim; ++i)
        r.grad[i] = a.grad[i] - b.grad[i];
    for (int k = 0; k < a.packed_size(); ++k)
        r.hess[k] = a.hess[k] - b.hess[k];
    return r;
}

inline JetValue operator-(const JetValue& a)
{
    JetValue r(a.dim, -a.value);
    for (int i = 0; i < a.dim; ++i)
        r.grad[i] = -a.grad[i];
    for (int k = 0; k < a.packed_size(); ++k)
        r.hess[k] = -a.hess[k];
    return r;
}

inline JetValue operator*(const JetValue& a, const JetValue& b)
{
    JetValue r(a.dim, a.value * b.value);
    const int n = a.dim;
    for (int i = 0; i < n; ++i)
        r.grad[i] = a.value * b.grad[i] + b.value * a.grad[i];
    int k = 0;
    for (int i = 0; i < n; ++i)
        for (int j = i; j < n; ++j, ++k)
            r.hess[k] = a.value * b.hess[k] + b.value * a.hess[k] + a.grad[i] * b.grad[j] + a.grad[j] * b.grad[i];
    return r;
}

inline JetValue operator*(double s, const JetValue& a)
{
    JetValue r(a.dim, s * a.value);
    for (int i = 0; i < a.dim; ++i)
        r.grad[i] = s * a.grad[i];
    for (int k = 0; k < a.packed_size(); ++k)
        r.hess[k] = s * a.hess[k];
    return r;
}

} // namespace solitonlab
