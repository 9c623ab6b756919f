#include "solitonlab/linalg.hpp"

#include <algorithm>
#include <numeric>
#include <utility>

namespace solitonlab {

SmallMatrix multiply(const SmallMatrix& x, const SmallMatrix& y)
{
    SmallMatrix r(x.rows, y.cols);
    for (int i = 0; i < x.rows; ++i)
        for (int k = 0; k < x.cols; ++k) {
            const double xik = x(i, k);
            if (xik == 0.0)
                continue;
            for (int j = 0; j < y.cols; ++j)
                r(i, j) += xik * y(k, j);
        }
    return r;
}

SmallMatrix transpose(const SmallMatrix& x)
{
    SmallMatrix r(x.cols, x.rows);
    for (int i = 0; i < x.rows; ++i)
        for (int j = 0; j < x.cols; ++j)
            r(j, i) = x(i, j);
    return r;
}

std::optional<SmallMatrix> cholesky(const SmallMatrix& m)
{
    const int n = m.rows;
    SmallMatrix l(n, n);
    for (int j = 0; j < n; ++j) {
        double d = m(j, j);
        for (int k = 0; k < j; ++k)
            d -= l(j, k) * l(j, k);
        if (!(d > 0.0) || !std::isfinite(d))
            return std::nullopt;
        const double ljj = std::sqrt(d);
        l(j, j) = ljj;
        for (int i = j + 1; i < n; ++i) {
            double s = m(i, j);
            for (int k = 0; k < j; ++k)
                s -= l(i, k) * l(j, k);
            l(i, j) = s / ljj;
        }
    }
    return l;
}

namespace {

// Inverse of a lower-triangular matrix.
SmallMatrix lower_inverse(const SmallMatrix& l)
{
    const int n = l.rows;
    SmallMatrix inv(n, n);
    for (int j = 0; j < n; ++j) {
        inv(j, j) = 1.0 / l(j, j);
        for (int i = j + 1; i < n; ++i) {
            double s = 0.0;
            for (int k = j; k < i; ++k)
                s -= l(i, k) * inv(k, j);
            inv(i, j) = s / l(i, i);
        }
    }
    return inv;
}

} // namespace

SmallMatrix spd_inverse(const SmallMatrix& chol)
{
    const SmallMatrix li = lower_inverse(chol);
    // m^{-1} = L^{-T} L^{-1}
    const int n = chol.rows;
    SmallMatrix r(n, n);
    for (int i = 0; i < n; ++i)
        for (int j = i; j < n; ++j) {
            double s = 0.0;
            for (int k = std::max(i, j); k < n; ++k)
                s += li(k, i) * li(k, j);
            r(i, j) = s;
            r(j, i) = s;
        }
    return r;
}

SmallMatrix orthonormal_frame(const SmallMatrix& chol)
{
    return transpose(lower_inverse(chol));
}

double determinant(SmallMatrix m)
{
    const int n = m.rows;
    double det = 1.0;
    for (int c = 0; c < n; ++c) {
        int piv = c;
        for (int r = c + 1; r < n; ++r)
            if (std::fabs(m(r, c)) > std::fabs(m(piv, c)))
                piv = r;
        if (m(piv, c) == 0.0)
            return 0.0;
        if (piv != c) {
            for (int k = 0; k < n; ++k)
                std::swap(m(c, k), m(piv, k));
            det = -det;
        }
        det *= m(c, c);
        for (int r = c + 1; r < n; ++r) {
            const double f = m(r, c) / m(c, c);
            for (int k = c; k < n; ++k)
                m(r, k) -= f * m(c, k);
        }
    }
    return det;
}

std::optional<SmallMatrix> inverse(SmallMatrix m)
{
    const int n = m.rows;
    SmallMatrix inv = SmallMatrix::identity(n);
    for (int c = 0; c < n; ++c) {
        int piv = c;
        for (int r = c + 1; r < n; ++r)
            if (std::fabs(m(r, c)) > std::fabs(m(piv, c)))
                piv = r;
        if (m(piv, c) == 0.0)
            return std::nullopt;
        if (piv != c)
            for (int k = 0; k < n; ++k) {
                std::swap(m(c, k), m(piv, k));
                std::swap(inv(c, k), inv(piv, k));
            }
        const double d = 1.0 / m(c, c);
        for (int k = 0; k < n; ++k) {
            m(c, k) *= d;
            inv(c, k) *= d;
        }
        for (int r = 0; r < n; ++r) {
            if (r == c)
                continue;
            const double f = m(r, c);
            if (f == 0.0)
                continue;
            for (int k = 0; k < n; ++k) {
                m(r, k) -= f * m(c, k);
                inv(r, k) -= f * inv(c, k);
            }
        }
    }
    return inv;
}

void symmetric_eigen(const SmallMatrix& m, std::array<double, kMaxDim>& values, SmallMatrix& vectors)
{
    const int n = m.rows;
    SmallMatrix a = m;
    SmallMatrix v = SmallMatrix::identity(n);
    for (int sweep = 0; sweep < 64; ++sweep) {
        double off = 0.0;
        for (int p = 0; p < n; ++p)
            for (int q = p + 1; q < n; ++q)
                off += a(p, q) * a(p, q);
        if (off < 1e-30)
            break;
        for (int p = 0; p < n; ++p)
            for (int q = p + 1; q < n; ++q) {
                if (a(p, q) == 0.0)
                    continue;
                const double theta = (a(q, q) - a(p, p)) / (2.0 * a(p, q));
                const double t = (theta >= 0.0 ? 1.0 : -1.0) / (std::fabs(theta) + std::sqrt(theta * theta + 1.0));
                const double c = 1.0 / std::sqrt(t * t + 1.0);
                const double s = t * c;
                for (int k = 0; k < n; ++k) {
                    const double akp = a(k, p);
                    const double akq = a(k, q);
                    a(k, p) = c * akp - s * akq;
                    a(k, q) = s * akp + c * akq;
                }
                for (int k = 0; k < n; ++k) {
                    const double apk = a(p, k);
                    const double aqk = a(q, k);
                    a(p, k) = c * apk - s * aqk;
                    a(q, k) = s * apk + c * aqk;
                }
                for (int k = 0; k < n; ++k) {
                    const double vkp = v(k, p);
                    const double vkq = v(k, q);
                    v(k, p) = c * vkp - s * vkq;
                    v(k, q) = s * vkp + c * vkq;
                }
            }
    }
    std::array<int, kMaxDim> order{};
    std::iota(order.begin(), order.begin() + n, 0);
    std::sort(order.begin(), order.begin() + n, [&](int x, int y) { return a(x, x) < a(y, y); });
    vectors = SmallMatrix(n, n);
    for (int c = 0; c < n; ++c) {
        values[static_cast<std::size_t>(c)] = a(order[c], order[c]);
        for (int r = 0; r < n; ++r)
            vectors(r, c) = v(r, order[c]);
    }
}

} // namespace solitonlab
