#include "solitonlab/curvature.hpp"

#include "solitonlab/errors.hpp"

#include <cmath>

namespace solitonlab {

namespace {

std::size_t idx3(int n, int a, int b, int c)
{
    return static_cast<std::size_t>((a * n + b) * n + c);
}

std::size_t idx4(int n, int a, int b, int c, int d)
{
    return static_cast<std::size_t>(((a * n + b) * n + c) * n + d);
}

// Fills g, its inverse, dg and the Christoffel symbols; returns the metric
// jets so the caller can reuse second derivatives.
void connection(const MetricChart& m, std::span<const double> x, LocalGeometry& geo, std::vector<JetValue>& jets,
                std::vector<double>& gamma_lower)
{
    const int n = m.dim();
    geo.n = n;
    m.metric_jets(x, jets);
    geo.g = SmallMatrix(n, n);
    for (int i = 0; i < n; ++i)
        for (int j = i; j < n; ++j) {
            const double v = jets[static_cast<std::size_t>(JetValue::packed_index(n, i, j))].value;
            geo.g(i, j) = v;
            geo.g(j, i) = v;
        }
    geo.chol = metric_cholesky(geo.g);
    geo.ginv = spd_inverse(geo.chol);

    geo.dg.assign(static_cast<std::size_t>(n * n * n), 0.0);
    for (int mm = 0; mm < n; ++mm)
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j)
                geo.dg[idx3(n, mm, i, j)] = jets[static_cast<std::size_t>(JetValue::packed_index(n, i, j))].gradient(mm);

    // Christoffel symbols of the first kind Gamma_{l,ij}, stored [l][i][j].
    gamma_lower.assign(static_cast<std::size_t>(n * n * n), 0.0);
    for (int l = 0; l < n; ++l)
        for (int i = 0; i < n; ++i)
            for (int j = i; j < n; ++j) {
                const double v = 0.5 * (geo.dg[idx3(n, i, j, l)] + geo.dg[idx3(n, j, i, l)] - geo.dg[idx3(n, l, i, j)]);
                gamma_lower[idx3(n, l, i, j)] = v;
                gamma_lower[idx3(n, l, j, i)] = v;
            }
    geo.gamma.assign(static_cast<std::size_t>(n * n * n), 0.0);
    for (int k = 0; k < n; ++k)
        for (int i = 0; i < n; ++i)
            for (int j = i; j < n; ++j) {
                double s = 0.0;
                for (int l = 0; l < n; ++l)
                    s += geo.ginv(k, l) * gamma_lower[idx3(n, l, i, j)];
                geo.gamma[idx3(n, k, i, j)] = s;
                geo.gamma[idx3(n, k, j, i)] = s;
            }
}

double second_derivative(const std::vector<JetValue>& jets, int n, int i, int j, int a, int b)
{
    return jets[static_cast<std::size_t>(JetValue::packed_index(n, i, j))].hessian(a, b);
}

} // namespace

void christoffel_at(const MetricChart& m, std::span<const double> x, LocalGeometry& out)
{
    thread_local std::vector<JetValue> jets;
    thread_local std::vector<double> lower;
    connection(m, x, out, jets, lower);
}

LocalGeometry local_geometry(const MetricChart& m, std::span<const double> x)
{
    LocalGeometry geo;
    thread_local std::vector<JetValue> jets;
    thread_local std::vector<double> lower;
    connection(m, x, geo, jets, lower);
    const int n = geo.n;

    // d_m Gamma^k_ij = g^kl (d_m Gamma_{l,ij} - d_m g_la Gamma^a_ij)
    geo.dgamma.assign(static_cast<std::size_t>(n * n * n * n), 0.0);
    thread_local std::vector<double> t;
    t.assign(static_cast<std::size_t>(n), 0.0);
    for (int mm = 0; mm < n; ++mm)
        for (int i = 0; i < n; ++i)
            for (int j = i; j < n; ++j) {
                for (int l = 0; l < n; ++l) {
                    double v = 0.5 * (second_derivative(jets, n, j, l, mm, i) + second_derivative(jets, n, i, l, mm, j) -
                                      second_derivative(jets, n, i, j, mm, l));
                    for (int a = 0; a < n; ++a)
                        v -= geo.dg[idx3(n, mm, l, a)] * geo.gamma[idx3(n, a, i, j)];
                    t[static_cast<std::size_t>(l)] = v;
                }
                for (int k = 0; k < n; ++k) {
                    double s = 0.0;
                    for (int l = 0; l < n; ++l)
                        s += geo.ginv(k, l) * t[static_cast<std::size_t>(l)];
                    geo.dgamma[idx4(n, mm, k, i, j)] = s;
                    geo.dgamma[idx4(n, mm, k, j, i)] = s;
                }
            }

    geo.riem.assign(static_cast<std::size_t>(n * n * n * n), 0.0);
    for (int l = 0; l < n; ++l)
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j) {
                if (i == j)
                    continue;
                for (int k = 0; k < n; ++k) {
                    double v = geo.dgamma[idx4(n, i, l, j, k)] - geo.dgamma[idx4(n, j, l, i, k)];
                    for (int mm = 0; mm < n; ++mm)
                        v += geo.gamma[idx3(n, l, i, mm)] * geo.gamma[idx3(n, mm, j, k)] -
                             geo.gamma[idx3(n, l, j, mm)] * geo.gamma[idx3(n, mm, i, k)];
                    geo.riem[idx4(n, l, i, j, k)] = v;
                }
            }

    geo.ricci = SmallMatrix(n, n);
    for (int j = 0; j < n; ++j)
        for (int k = j; k < n; ++k) {
            double s = 0.0;
            for (int i = 0; i < n; ++i)
                s += geo.riem[idx4(n, i, i, j, k)];
            geo.ricci(j, k) = s;
        }
    // Symmetrise: the two triangles agree up to rounding.
    for (int j = 0; j < n; ++j)
        for (int k = j + 1; k < n; ++k) {
            double s = 0.0;
            for (int i = 0; i < n; ++i)
                s += geo.riem[idx4(n, i, i, k, j)];
            const double avg = 0.5 * (geo.ricci(j, k) + s);
            geo.ricci(j, k) = avg;
            geo.ricci(k, j) = avg;
        }
    double r = 0.0;
    for (int j = 0; j < n; ++j)
        for (int k = 0; k < n; ++k)
            r += geo.ginv(j, k) * geo.ricci(j, k);
    geo.scalar = r;
    return geo;
}

double scalar_curvature(const MetricChart& m, std::span<const double> x)
{
    return local_geometry(m, x).scalar;
}

double covector_norm(const SmallMatrix& ginv, std::span<const double> w)
{
    const int n = ginv.rows;
    double s = 0.0;
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j)
            s += ginv(i, j) * w[static_cast<std::size_t>(i)] * w[static_cast<std::size_t>(j)];
    return std::sqrt(std::max(s, 0.0));
}

double tensor_norm2(const SmallMatrix& ginv, const SmallMatrix& t)
{
    const SmallMatrix a = multiply(ginv, t);
    const SmallMatrix b = multiply(a, a);
    double s = 0.0;
    for (int i = 0; i < ginv.rows; ++i)
        s += b(i, i);
    return s;
}

namespace {

template <class F>
std::vector<double> richardson_gradient(int n, std::span<const double> x, double h, F&& value)
{
    std::vector<double> out(static_cast<std::size_t>(n));
    std::vector<double> y(x.begin(), x.end());
    for (int i = 0; i < n; ++i) {
        auto central = [&](double step) {
            const double xi = x[static_cast<std::size_t>(i)];
            y[static_cast<std::size_t>(i)] = xi + step;
            const double up = value(y);
            y[static_cast<std::size_t>(i)] = xi - step;
            const double down = value(y);
            y[static_cast<std::size_t>(i)] = xi;
            return (up - down) / (2.0 * step);
        };
        const double d1 = central(h);
        const double d2 = central(0.5 * h);
        out[static_cast<std::size_t>(i)] = (4.0 * d2 - d1) / 3.0;
    }
    return out;
}

} // namespace

std::vector<double> scalar_curvature_gradient(const MetricChart& m, std::span<const double> x)
{
    return richardson_gradient(m.dim(), x, kGradientStep,
                               [&](const std::vector<double>& y) { return scalar_curvature(m, y); });
}

CurvatureJet curvature_at(const MetricChart& m, std::span<const double> x)
{
    const LocalGeometry geo = local_geometry(m, x);
    CurvatureJet c;
    c.point.assign(x.begin(), x.end());
    c.christoffel = geo.gamma;
    c.ricci = geo.ricci;
    c.scalar = geo.scalar;
    c.ricci_norm2 = tensor_norm2(geo.ginv, geo.ricci);
    c.grad_R = scalar_curvature_gradient(m, x);
    return c;
}

double scalar_curvature_laplacian(const MetricChart& m, std::span<const double> x)
{
    const int n = m.dim();
    const LocalGeometry geo = local_geometry(m, x);
    const std::vector<double> dr = scalar_curvature_gradient(m, x);
    const double r0 = geo.scalar;
    std::vector<double> y(x.begin(), x.end());
    auto at = [&](int i, double si, int j, double sj) {
        y[static_cast<std::size_t>(i)] += si;
        y[static_cast<std::size_t>(j)] += sj;
        const double v = scalar_curvature(m, y);
        y[static_cast<std::size_t>(i)] = x[static_cast<std::size_t>(i)];
        y[static_cast<std::size_t>(j)] = x[static_cast<std::size_t>(j)];
        return v;
    };
    auto second = [&](int i, int j, double h) {
        if (i == j) {
            const double up = at(i, h, i, 0.0);
            const double down = at(i, -h, i, 0.0);
            return (up - 2.0 * r0 + down) / (h * h);
        }
        return (at(i, h, j, h) - at(i, h, j, -h) - at(i, -h, j, h) + at(i, -h, j, -h)) / (4.0 * h * h);
    };
    double lap = 0.0;
    for (int i = 0; i < n; ++i)
        for (int j = i; j < n; ++j) {
            const double d1 = second(i, j, kHessianStep);
            const double d2 = second(i, j, 0.5 * kHessianStep);
            double hij = (4.0 * d2 - d1) / 3.0;
            for (int k = 0; k < n; ++k)
                hij -= geo.christoffel(k, i, j) * dr[static_cast<std::size_t>(k)];
            lap += (i == j ? 1.0 : 2.0) * geo.ginv(i, j) * hij;
        }
    return lap;
}

double bianchi_defect(const MetricChart& m, std::span<const double> x)
{
    const int n = m.dim();
    const LocalGeometry geo = local_geometry(m, x);
    const std::vector<double> dr = scalar_curvature_gradient(m, x);

    // d_i R_jk by central differences of the exact Ricci tensor, Richardson once.
    std::vector<double> dric(static_cast<std::size_t>(n * n * n), 0.0);
    std::vector<double> y(x.begin(), x.end());
    for (int i = 0; i < n; ++i) {
        auto central = [&](double h) {
            y[static_cast<std::size_t>(i)] = x[static_cast<std::size_t>(i)] + h;
            const SmallMatrix up = local_geometry(m, y).ricci;
            y[static_cast<std::size_t>(i)] = x[static_cast<std::size_t>(i)] - h;
            const SmallMatrix down = local_geometry(m, y).ricci;
            y[static_cast<std::size_t>(i)] = x[static_cast<std::size_t>(i)];
            SmallMatrix d(n, n);
            for (int j = 0; j < n; ++j)
                for (int k = 0; k < n; ++k)
                    d(j, k) = (up(j, k) - down(j, k)) / (2.0 * h);
            return d;
        };
        const SmallMatrix d1 = central(kGradientStep);
        const SmallMatrix d2 = central(0.5 * kGradientStep);
        for (int j = 0; j < n; ++j)
            for (int k = 0; k < n; ++k)
                dric[idx3(n, i, j, k)] = (4.0 * d2(j, k) - d1(j, k)) / 3.0;
    }

    std::vector<double> defect(static_cast<std::size_t>(n), 0.0);
    for (int k = 0; k < n; ++k) {
        double div = 0.0;
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j) {
                double cov = dric[idx3(n, i, j, k)];
                for (int mm = 0; mm < n; ++mm)
                    cov -= geo.christoffel(mm, i, j) * geo.ricci(mm, k) + geo.christoffel(mm, i, k) * geo.ricci(j, mm);
                div += geo.ginv(i, j) * cov;
            }
        defect[static_cast<std::size_t>(k)] = div - 0.5 * dr[static_cast<std::size_t>(k)];
    }
    return covector_norm(geo.ginv, defect);
}

SmallMatrix covariant_hessian(const LocalGeometry& geo, const JetValue& f)
{
    const int n = geo.n;
    SmallMatrix h(n, n);
    for (int i = 0; i < n; ++i)
        for (int j = i; j < n; ++j) {
            double v = f.hessian(i, j);
            for (int k = 0; k < n; ++k)
                v -= geo.christoffel(k, i, j) * f.gradient(k);
            h(i, j) = v;
            h(j, i) = v;
        }
    return h;
}

WeightedOperators weighted_operators_at(const MetricChart& m, const Expression& f, const Expression& u,
                                        std::span<const double> x)
{
    const int n = m.dim();
    const LocalGeometry geo = local_geometry(m, x);
    const JetValue fj = f.eval_jet(x, n);
    const JetValue uj = u.eval_jet(x, n);
    WeightedOperators w;
    w.hess_f = covariant_hessian(geo, fj);
    const SmallMatrix hess_u = covariant_hessian(geo, uj);
    double lap_u = 0.0;
    double drift = 0.0;
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) {
            w.lap_f += geo.ginv(i, j) * w.hess_f(i, j);
            lap_u += geo.ginv(i, j) * hess_u(i, j);
            drift += geo.ginv(i, j) * fj.gradient(i) * uj.gradient(j);
        }
    w.drift_lap_u = lap_u - drift;
    w.ric_f = SmallMatrix(n, n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j)
            w.ric_f(i, j) = geo.ricci(i, j) + w.hess_f(i, j);
    return w;
}

ClosedFormCurvature closed_form_curvature(const MetricChart& m, std::span<const double> x)
{
    const auto& tag = m.tag();
    if (!tag)
        throw NotApplicable("chart has no structure tag");
    const int n = m.dim();
    ClosedFormCurvature out;
    switch (tag->kind) {
    case StructureKind::Euclidean:
        out.ricci = SmallMatrix(n, n);
        out.christoffel = std::vector<double>(static_cast<std::size_t>(n * n * n), 0.0);
        out.scalar = 0.0;
        return out;
    case StructureKind::Conformal: {
        const JetValue phi = parse(tag->phi).eval_jet(x, n);
        double lap0 = 0.0;
        double grad2 = 0.0;
        for (int i = 0; i < n; ++i) {
            lap0 += phi.hessian(i, i);
            grad2 += phi.gradient(i) * phi.gradient(i);
        }
        const double nn = n;
        SmallMatrix ric(n, n);
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j) {
                ric(i, j) = -(nn - 2.0) * (phi.hessian(i, j) - phi.gradient(i) * phi.gradient(j));
                if (i == j)
                    ric(i, j) -= lap0 + (nn - 2.0) * grad2;
            }
        out.ricci = ric;
        out.scalar = std::exp(-2.0 * phi.value) * (-2.0 * (nn - 1.0) * lap0 - (nn - 2.0) * (nn - 1.0) * grad2);
        std::vector<double> gam(static_cast<std::size_t>(n * n * n), 0.0);
        for (int k = 0; k < n; ++k)
            for (int i = 0; i < n; ++i)
                for (int j = 0; j < n; ++j) {
                    double v = 0.0;
                    if (i == k)
                        v += phi.gradient(j);
                    if (j == k)
                        v += phi.gradient(i);
                    if (i == j)
                        v -= phi.gradient(k);
                    gam[idx3(n, k, i, j)] = v;
                }
        out.christoffel = std::move(gam);
        return out;
    }
    case StructureKind::RotationallySymmetric: {
        const JetValue phi = parse(tag->phi).eval_jet(x, n);
        const double p = phi.value;
        const double p1 = phi.gradient(0);
        const double p2 = phi.hessian(0, 0);
        const double nn = n;
        out.ricci_rr = -(nn - 1.0) * p2 / p;
        out.scalar = -2.0 * (nn - 1.0) * p2 / p + (nn - 1.0) * (nn - 2.0) * (1.0 - p1 * p1) / (p * p);
        return out;
    }
    case StructureKind::WarpedProduct: {
        const MetricChart& base = m.base_chart();
        const int b = base.dim();
        const int k = n - b;
        const auto bx = x.first(static_cast<std::size_t>(b));
        const LocalGeometry bg = local_geometry(base, bx);
        const JetValue h = parse(tag->warp).eval_jet(bx, b);
        const SmallMatrix hh = covariant_hessian(bg, h);
        double lap_h = 0.0;
        double grad2 = 0.0;
        for (int i = 0; i < b; ++i)
            for (int j = 0; j < b; ++j) {
                lap_h += bg.ginv(i, j) * hh(i, j);
                grad2 += bg.ginv(i, j) * h.gradient(i) * h.gradient(j);
            }
        const double kk = k;
        SmallMatrix ric(n, n);
        for (int i = 0; i < b; ++i)
            for (int j = 0; j < b; ++j)
                ric(i, j) = bg.ricci(i, j) - kk / h.value * hh(i, j);
        for (int a = b; a < n; ++a)
            ric(a, a) = -(h.value * lap_h + (kk - 1.0) * grad2);
        out.ricci = ric;
        out.scalar = bg.scalar - 2.0 * kk * lap_h / h.value - kk * (kk - 1.0) * grad2 / (h.value * h.value);
        return out;
    }
    }
    return out;
}

} // namespace solitonlab
