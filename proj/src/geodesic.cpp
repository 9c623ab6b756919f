#include "solitonlab/geodesic.hpp"

#include "solitonlab/errors.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <random>
#include <stdexcept>

namespace solitonlab {

namespace {

// State layout: x (n), v (n), transverse parallel frame E (q vectors of
// length n), Jacobi matrix A (q x q, row-major) and A' (q x q), q = n - 1.
struct Layout
{
    int n;
    int q;
    std::size_t x() const { return 0; }
    std::size_t v() const { return static_cast<std::size_t>(n); }
    std::size_t e() const { return static_cast<std::size_t>(2 * n); }
    std::size_t a() const { return e() + static_cast<std::size_t>(q * n); }
    std::size_t b() const { return a() + static_cast<std::size_t>(q * q); }
    std::size_t size() const { return b() + static_cast<std::size_t>(q * q); }
};

class OutOfChart
{};

void derivative(const MetricChart& m, const Layout& L, const std::vector<double>& y, std::vector<double>& dy,
                LocalGeometry* keep)
{
    const int n = L.n;
    const int q = L.q;
    const std::span<const double> x(y.data(), static_cast<std::size_t>(n));
    for (double xi : x)
        if (!std::isfinite(xi))
            throw OutOfChart{};
    if (!m.domain().contains(x))
        throw OutOfChart{};

    LocalGeometry geo;
    try {
        geo = local_geometry(m, x);
    } catch (const DomainError&) {
        throw OutOfChart{};
    } catch (const SingularMetric&) {
        throw OutOfChart{};
    }

    const double* v = y.data() + L.v();
    const double* E = y.data() + L.e();
    const double* A = y.data() + L.a();
    const double* B = y.data() + L.b();
    dy.assign(L.size(), 0.0);

    for (int k = 0; k < n; ++k) {
        dy[L.x() + static_cast<std::size_t>(k)] = v[k];
        double acc = 0.0;
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j)
                acc += geo.christoffel(k, i, j) * v[i] * v[j];
        dy[L.v() + static_cast<std::size_t>(k)] = -acc;
    }
    for (int a = 0; a < q; ++a)
        for (int k = 0; k < n; ++k) {
            double acc = 0.0;
            for (int i = 0; i < n; ++i)
                for (int j = 0; j < n; ++j)
                    acc += geo.christoffel(k, i, j) * v[i] * E[a * n + j];
            dy[L.e() + static_cast<std::size_t>(a * n + k)] = -acc;
        }

    // RV^l_i = R^l_ijk v^j v^k, so R(X, v)v = RV X.
    SmallMatrix rv(n, n);
    for (int l = 0; l < n; ++l)
        for (int i = 0; i < n; ++i) {
            double acc = 0.0;
            for (int j = 0; j < n; ++j)
                for (int k = 0; k < n; ++k)
                    acc += geo.riemann(l, i, j, k) * v[j] * v[k];
            rv(l, i) = acc;
        }
    SmallMatrix K(q, q);
    for (int a = 0; a < q; ++a) {
        double rve[kMaxDim];
        for (int l = 0; l < n; ++l) {
            double acc = 0.0;
            for (int i = 0; i < n; ++i)
                acc += rv(l, i) * E[a * n + i];
            rve[l] = acc;
        }
        for (int b = 0; b < q; ++b) {
            double acc = 0.0;
            for (int l = 0; l < n; ++l)
                for (int mm = 0; mm < n; ++mm)
                    acc += geo.g(l, mm) * rve[l] * E[b * n + mm];
            K(a, b) = acc;
        }
    }
    for (int a = 0; a < q; ++a)
        for (int b = 0; b < a; ++b) {
            const double s = 0.5 * (K(a, b) + K(b, a));
            K(a, b) = s;
            K(b, a) = s;
        }
    for (int i = 0; i < q * q; ++i)
        dy[L.a() + static_cast<std::size_t>(i)] = B[i];
    for (int a = 0; a < q; ++a)
        for (int c = 0; c < q; ++c) {
            double acc = 0.0;
            for (int b = 0; b < q; ++b)
                acc += K(a, b) * A[b * q + c];
            dy[L.b() + static_cast<std::size_t>(a * q + c)] = -acc;
        }
    if (keep)
        *keep = std::move(geo);
}

void rk4_step(const MetricChart& m, const Layout& L, const std::vector<double>& y, double h, std::vector<double>& out,
              LocalGeometry* geo_at_start)
{
    const std::size_t N = L.size();
    std::vector<double> k1, k2, k3, k4, t(N);
    derivative(m, L, y, k1, geo_at_start);
    for (std::size_t i = 0; i < N; ++i)
        t[i] = y[i] + 0.5 * h * k1[i];
    derivative(m, L, t, k2, nullptr);
    for (std::size_t i = 0; i < N; ++i)
        t[i] = y[i] + 0.5 * h * k2[i];
    derivative(m, L, t, k3, nullptr);
    for (std::size_t i = 0; i < N; ++i)
        t[i] = y[i] + h * k3[i];
    derivative(m, L, t, k4, nullptr);
    out.resize(N);
    for (std::size_t i = 0; i < N; ++i)
        out[i] = y[i] + h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
}

SmallMatrix block(const Layout& L, const std::vector<double>& y, std::size_t offset)
{
    SmallMatrix M(L.q, L.q);
    for (int a = 0; a < L.q; ++a)
        for (int b = 0; b < L.q; ++b)
            M(a, b) = y[offset + static_cast<std::size_t>(a * L.q + b)];
    return M;
}

// Gram-Schmidt of the columns of A with each q_j kept on the same side as
// the previous step's q_j; a diagonal entry of R changes sign exactly when a
// Jacobi field in the span passes through zero.
std::vector<double> tracked_qr_diagonal(const SmallMatrix& A, SmallMatrix& Q)
{
    const int q = A.rows;
    std::vector<double> diag(static_cast<std::size_t>(q));
    SmallMatrix next(q, q);
    for (int j = 0; j < q; ++j) {
        double u[kMaxDim];
        for (int i = 0; i < q; ++i)
            u[i] = A(i, j);
        for (int k = 0; k < j; ++k) {
            double d = 0.0;
            for (int i = 0; i < q; ++i)
                d += next(i, k) * A(i, j);
            for (int i = 0; i < q; ++i)
                u[i] -= d * next(i, k);
        }
        double nrm = 0.0;
        for (int i = 0; i < q; ++i)
            nrm += u[i] * u[i];
        nrm = std::sqrt(nrm);
        double align = 0.0;
        for (int i = 0; i < q; ++i)
            align += u[i] * Q(i, j);
        const double s = align < 0.0 ? -1.0 : 1.0;
        for (int i = 0; i < q; ++i)
            next(i, j) = nrm > 0.0 ? s * u[i] / nrm : Q(i, j);
        double d = 0.0;
        for (int i = 0; i < q; ++i)
            d += next(i, j) * A(i, j);
        diag[static_cast<std::size_t>(j)] = d;
    }
    Q = next;
    return diag;
}

double quad(const SmallMatrix& g, const double* v)
{
    double acc = 0.0;
    for (int i = 0; i < g.rows; ++i)
        for (int j = 0; j < g.cols; ++j)
            acc += g(i, j) * v[i] * v[j];
    return acc;
}

} // namespace

std::vector<double> frame_direction(const MetricChart& m, std::span<const double> p, std::span<const double> u)
{
    const SmallMatrix g = m.metric_at(p);
    const auto chol = cholesky(g);
    if (!chol)
        throw SingularMetric("metric is not positive definite at the base point");
    const SmallMatrix E = orthonormal_frame(*chol);
    const int n = m.dim();
    std::vector<double> out(static_cast<std::size_t>(n), 0.0);
    for (int i = 0; i < n; ++i)
        for (int a = 0; a < n; ++a)
            out[static_cast<std::size_t>(i)] += E(i, a) * u[static_cast<std::size_t>(a)];
    return out;
}

GeodesicRay shoot(const MetricChart& m, std::span<const double> p, std::span<const double> theta, double r_max,
                  double h, const Expression* f)
{
    const int n = m.dim();
    if (n < 2)
        throw DomainError("geodesic shooting needs dimension >= 2");
    if (!(h > 0.0) || !(r_max > 0.0))
        throw DomainError("step and radius must be positive");
    if (static_cast<int>(p.size()) != n || static_cast<int>(theta.size()) != n)
        throw DomainError("base point or direction has the wrong dimension");
    if (!m.domain().contains(p))
        throw LeftDomain(0.0);

    const Layout L{n, n - 1};
    const SmallMatrix g0 = m.metric_at(p);
    const auto chol0 = cholesky(g0);
    if (!chol0)
        throw SingularMetric("metric is not positive definite at the base point");

    GeodesicRay ray;
    ray.base_point.assign(p.begin(), p.end());
    ray.direction.assign(theta.begin(), theta.end());
    const double speed = std::sqrt(quad(g0, ray.direction.data()));
    if (!(speed > 0.0))
        throw DomainError("direction has zero length");
    for (double& c : ray.direction)
        c /= speed;

    // Transverse frame: g-Gram-Schmidt of the coordinate basis against theta.
    std::vector<std::vector<double>> frame{ray.direction};
    for (int c = 0; c < n && static_cast<int>(frame.size()) < n; ++c) {
        std::vector<double> u(static_cast<std::size_t>(n), 0.0);
        u[static_cast<std::size_t>(c)] = 1.0;
        for (const auto& e : frame) {
            double d = 0.0;
            for (int i = 0; i < n; ++i)
                for (int j = 0; j < n; ++j)
                    d += g0(i, j) * e[static_cast<std::size_t>(i)] * u[static_cast<std::size_t>(j)];
            for (int i = 0; i < n; ++i)
                u[static_cast<std::size_t>(i)] -= d * e[static_cast<std::size_t>(i)];
        }
        const double nrm = std::sqrt(quad(g0, u.data()));
        if (nrm < 1e-8)
            continue;
        for (double& ui : u)
            ui /= nrm;
        frame.push_back(std::move(u));
    }

    std::vector<double> y(L.size(), 0.0);
    for (int i = 0; i < n; ++i) {
        y[L.x() + static_cast<std::size_t>(i)] = p[static_cast<std::size_t>(i)];
        y[L.v() + static_cast<std::size_t>(i)] = ray.direction[static_cast<std::size_t>(i)];
    }
    for (int a = 0; a < L.q; ++a) {
        for (int i = 0; i < n; ++i)
            y[L.e() + static_cast<std::size_t>(a * n + i)] = frame[static_cast<std::size_t>(a + 1)][static_cast<std::size_t>(i)];
        y[L.b() + static_cast<std::size_t>(a * L.q + a)] = 1.0;
    }

    const long steps = std::max(1L, static_cast<long>(std::ceil(r_max / h - 1e-9)));
    const double step = r_max / static_cast<double>(steps);
    ray.h = step;
    ray.samples.reserve(static_cast<std::size_t>(steps + 1));

    if (f) {
        const LocalGeometry geo = local_geometry(m, p);
        const JetValue fj = f->eval_jet(p, n);
        const SmallMatrix H = covariant_hessian(geo, fj);
        ray.f0 = fj.value;
        for (int i = 0; i < n; ++i)
            ray.f1 += fj.grad[i] * ray.direction[static_cast<std::size_t>(i)];
        ray.f2 = quad(H, ray.direction.data());
    }

    auto record = [&](double r, const std::vector<double>& state, const LocalGeometry& geo) {
        RaySample s;
        s.r = r;
        s.x.assign(state.begin() + static_cast<long>(L.x()), state.begin() + static_cast<long>(L.x()) + n);
        s.v.assign(state.begin() + static_cast<long>(L.v()), state.begin() + static_cast<long>(L.v()) + n);
        const SmallMatrix A = block(L, state, L.a());
        const SmallMatrix B = block(L, state, L.b());
        s.J = determinant(A);
        if (r == 0.0) {
            s.w = std::numeric_limits<double>::infinity();
        } else if (const auto Ainv = inverse(A)) {
            const SmallMatrix BA = multiply(B, *Ainv);
            double tr = 0.0;
            for (int a = 0; a < L.q; ++a)
                tr += BA(a, a);
            s.w = tr;
        } else {
            s.w = -std::numeric_limits<double>::infinity();
        }
        s.ric_rr = quad(geo.ricci, s.v.data());
        s.scalar = geo.scalar;
        s.f = f ? f->evaluate(s.x) : 0.0;
        const double drift = std::abs(quad(geo.g, s.v.data()) - 1.0);
        ray.max_energy_drift = std::max(ray.max_energy_drift, drift);
        if (drift > kMaxEnergyDrift)
            throw StepTooLarge(r, drift);
        ray.samples.push_back(std::move(s));
    };

    SmallMatrix Q = SmallMatrix::identity(L.q);
    std::vector<double> prev_diag(static_cast<std::size_t>(L.q), 1.0);
    std::vector<double> next;
    LocalGeometry geo;
    double r = 0.0;
    for (long i = 0; i <= steps; ++i) {
        r = static_cast<double>(i) * step;
        const bool last = i == steps;
        try {
            if (last) {
                std::vector<double> dummy;
                derivative(m, L, y, dummy, &geo);
            } else {
                rk4_step(m, L, y, step, next, &geo);
            }
        } catch (const OutOfChart&) {
            // The sample at r is still valid when its own geometry evaluates;
            // a stage beyond the boundary only ends the ray.
            try {
                std::vector<double> dummy;
                derivative(m, L, y, dummy, &geo);
                record(r, y, geo);
            } catch (const OutOfChart&) {
            }
            ray.hit_boundary = true;
            break;
        }
        record(r, y, geo);
        if (last)
            break;

        if (!ray.conjugate_radius) {
            SmallMatrix Qtrial = Q;
            const auto diag = tracked_qr_diagonal(block(L, next, L.a()), Qtrial);
            int flipped = -1;
            for (int a = 0; a < L.q && flipped < 0; ++a)
                if (diag[static_cast<std::size_t>(a)] * prev_diag[static_cast<std::size_t>(a)] <= 0.0 && i > 0)
                    flipped = a;
            if (flipped >= 0) {
                double lo = 0.0;
                double hi = step;
                std::vector<double> trial;
                while (hi - lo > step / 100.0) {
                    const double mid = 0.5 * (lo + hi);
                    try {
                        rk4_step(m, L, y, mid, trial, nullptr);
                    } catch (const OutOfChart&) {
                        break;
                    }
                    SmallMatrix Qm = Q;
                    const auto dm = tracked_qr_diagonal(block(L, trial, L.a()), Qm);
                    if (dm[static_cast<std::size_t>(flipped)] * prev_diag[static_cast<std::size_t>(flipped)] > 0.0)
                        lo = mid;
                    else
                        hi = mid;
                }
                ray.conjugate_radius = r + 0.5 * (lo + hi);
            }
            Q = Qtrial;
            prev_diag = diag;
        }
        y.swap(next);
    }
    return ray;
}

double cut_radius(const GeodesicRay& ray)
{
    return ray.conjugate_radius ? *ray.conjugate_radius : std::numeric_limits<double>::infinity();
}

std::vector<RiccatiPoint> riccati_audit(const GeodesicRay& ray)
{
    std::vector<RiccatiPoint> out;
    const auto& s = ray.samples;
    if (s.size() < 3 || ray.base_point.size() < 2)
        return out;
    const double q = static_cast<double>(ray.base_point.size() - 1);
    const double limit = cut_radius(ray);
    // w = (n-1)/r + regular part; the singular part is differentiated exactly
    // and the regular part (which vanishes at r = 0) by centred differences.
    auto regular = [&](std::size_t i) { return i == 0 ? 0.0 : s[i].w - q / s[i].r; };
    for (std::size_t i = 1; i + 1 < s.size(); ++i) {
        if (!(s[i + 1].r < limit))
            break;
        const double dreg = (regular(i + 1) - regular(i - 1)) / (s[i + 1].r - s[i - 1].r);
        const double dw = dreg - q / (s[i].r * s[i].r);
        out.push_back({s[i].r, dw + s[i].w * s[i].w / q + s[i].ric_rr});
    }
    return out;
}

void write_ray_csv(std::ostream& out, const GeodesicRay& ray)
{
    const std::size_t n = ray.base_point.size();
    out << "r";
    for (std::size_t i = 0; i < n; ++i)
        out << ",x" << i + 1;
    out << ",J,w,Ric_rr,f\n";
    char buf[32];
    auto put = [&](double v) {
        std::snprintf(buf, sizeof buf, "%.17g", v);
        out << buf;
    };
    for (const auto& s : ray.samples) {
        put(s.r);
        for (double c : s.x) {
            out << ',';
            put(c);
        }
        for (double c : {s.J, s.w, s.ric_rr, s.f}) {
            out << ',';
            put(c);
        }
        out << '\n';
    }
}

std::vector<std::vector<double>> direction_set(int n, int count, std::uint64_t seed)
{
    if (n < 1 || count < 1)
        throw std::invalid_argument("direction_set: need n >= 1 and count >= 1");
    std::vector<std::vector<double>> out;
    out.reserve(static_cast<std::size_t>(count));
    if (n == 1) {
        for (int i = 0; i < count; ++i)
            out.push_back({i % 2 == 0 ? 1.0 : -1.0});
        return out;
    }
    if (n == 2) {
        for (int i = 0; i < count; ++i) {
            const double t = 2.0 * M_PI * (i + 0.5) / count;
            out.push_back({std::cos(t), std::sin(t)});
        }
        return out;
    }
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> normal;
    while (static_cast<int>(out.size()) < count) {
        std::vector<double> u(static_cast<std::size_t>(n));
        double norm = 0.0;
        for (double& c : u) {
            c = normal(rng);
            norm += c * c;
        }
        if (norm < 1e-12)
            continue;
        for (double& c : u)
            c /= std::sqrt(norm);
        out.push_back(std::move(u));
    }
    return out;
}

} // namespace solitonlab
