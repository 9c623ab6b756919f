#include "solitonlab/soliton.hpp"

#include "solitonlab/errors.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace solitonlab {

std::string to_string(SolitonClass c)
{
    switch (c) {
    case SolitonClass::Shrinking:
        return "shrinking";
    case SolitonClass::Steady:
        return "steady";
    case SolitonClass::Expanding:
        return "expanding";
    }
    return "steady";
}

std::string to_string(Exactness e)
{
    return e == Exactness::Exact ? "exact" : "paper-claimed";
}

SolitonClass SolitonInstance::soliton_class() const
{
    if (lambda > 0.0)
        return SolitonClass::Shrinking;
    if (lambda < 0.0)
        return SolitonClass::Expanding;
    return SolitonClass::Steady;
}

bool SolitonInstance::is_schouten() const
{
    return dim() >= 2 && std::fabs(rho - schouten_rho()) <= 1e-12;
}

namespace {

SmallMatrix soliton_tensor(const SolitonInstance& s, const LocalGeometry& geo, const JetValue& f)
{
    const SmallMatrix hess = covariant_hessian(geo, f);
    const double c = s.rho * geo.scalar + s.lambda;
    SmallMatrix t(geo.n, geo.n);
    for (int i = 0; i < geo.n; ++i)
        for (int j = 0; j < geo.n; ++j)
            t(i, j) = geo.ricci(i, j) + hess(i, j) - c * geo.g(i, j);
    return t;
}

} // namespace

double soliton_residual(const SolitonInstance& s, std::span<const double> x)
{
    const LocalGeometry geo = local_geometry(s.metric, x);
    const JetValue f = s.f.eval_jet(x, s.dim());
    return std::sqrt(std::max(0.0, tensor_norm2(geo.ginv, soliton_tensor(s, geo, f))));
}

double IdentityReport::max_residual() const
{
    return std::max({max_soliton, max_trace, max_gradient, max_laplacian});
}

IdentityReport derived_identities_audit(const SolitonInstance& s, const std::vector<std::vector<double>>& points)
{
    const int n = s.dim();
    const double nn = n;
    const double k = 1.0 - 2.0 * (nn - 1.0) * s.rho;
    IdentityReport rep;
    for (const auto& x : points) {
        const LocalGeometry geo = local_geometry(s.metric, x);
        const JetValue f = s.f.eval_jet(x, n);
        const SmallMatrix hess = covariant_hessian(geo, f);
        const std::vector<double> dr = scalar_curvature_gradient(s.metric, x);
        const double lap_r = scalar_curvature_laplacian(s.metric, x);
        const double r = geo.scalar;

        PointIdentities p;
        p.point = x;
        p.soliton = std::sqrt(std::max(0.0, tensor_norm2(geo.ginv, soliton_tensor(s, geo, f))));

        double lap_f = 0.0;
        double dr_df = 0.0;
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j) {
                lap_f += geo.ginv(i, j) * hess(i, j);
                dr_df += geo.ginv(i, j) * dr[static_cast<std::size_t>(i)] * f.gradient(j);
            }
        p.trace = std::fabs(lap_f - ((nn * s.rho - 1.0) * r + nn * s.lambda));

        std::vector<double> v(static_cast<std::size_t>(n));
        for (int a = 0; a < n; ++a) {
            double ric_grad = 0.0;
            for (int j = 0; j < n; ++j)
                for (int l = 0; l < n; ++l)
                    ric_grad += geo.ricci(a, j) * geo.ginv(j, l) * f.gradient(l);
            v[static_cast<std::size_t>(a)] = k * dr[static_cast<std::size_t>(a)] - 2.0 * ric_grad;
        }
        p.gradient = covector_norm(geo.ginv, v);

        const double ric2 = tensor_norm2(geo.ginv, geo.ricci);
        p.laplacian = std::fabs(k * lap_r - dr_df - 2.0 * (s.rho * r * r - ric2 + s.lambda * r));
        rep.points.push_back(std::move(p));
    }
    const double count = static_cast<double>(std::max<std::size_t>(1, rep.points.size()));
    for (const auto& p : rep.points) {
        rep.max_soliton = std::max(rep.max_soliton, p.soliton);
        rep.max_trace = std::max(rep.max_trace, p.trace);
        rep.max_gradient = std::max(rep.max_gradient, p.gradient);
        rep.max_laplacian = std::max(rep.max_laplacian, p.laplacian);
        rep.mean_soliton += p.soliton / count;
        rep.mean_trace += p.trace / count;
        rep.mean_gradient += p.gradient / count;
        rep.mean_laplacian += p.laplacian / count;
    }
    return rep;
}

double estimate_f0(const SolitonInstance& s)
{
    if (s.f0_hint)
        return *s.f0_hint;
    const double sign = s.lambda < 0.0 ? -1.0 : 1.0;
    const int n = s.dim();
    // Cyclic coordinate descent: a golden-section line search along each
    // axis in turn, starting from the base point.
    std::vector<double> y = s.base_point;
    auto value = [&](double t, int axis) {
        const double keep = y[static_cast<std::size_t>(axis)];
        y[static_cast<std::size_t>(axis)] = t;
        double v = std::numeric_limits<double>::infinity();
        try {
            v = sign * s.f.evaluate(y);
        } catch (const DomainError&) {
        }
        y[static_cast<std::size_t>(axis)] = keep;
        return v;
    };
    double best = sign * s.f.evaluate(y);
    const double inv_phi = (std::sqrt(5.0) - 1.0) / 2.0;
    for (int sweep = 0; sweep < 100; ++sweep) {
        const double before = best;
        for (int axis = 0; axis < n; ++axis) {
            const Interval& iv = s.metric.sample_box().axes[static_cast<std::size_t>(axis)];
            double a = iv.lo;
            double b = iv.hi;
            double c = b - inv_phi * (b - a);
            double d = a + inv_phi * (b - a);
            double fc = value(c, axis);
            double fd = value(d, axis);
            for (int it = 0; it < 200 && b - a > 1e-12; ++it) {
                if (fc < fd) {
                    b = d;
                    d = c;
                    fd = fc;
                    c = b - inv_phi * (b - a);
                    fc = value(c, axis);
                } else {
                    a = c;
                    c = d;
                    fc = fd;
                    d = a + inv_phi * (b - a);
                    fd = value(d, axis);
                }
            }
            const double candidates[] = {c, d, iv.lo, iv.hi};
            for (double t : candidates) {
                const double v = value(t, axis);
                if (v < best) {
                    best = v;
                    y[static_cast<std::size_t>(axis)] = t;
                }
            }
        }
        if (!(best < before - 1e-15 * (1.0 + std::fabs(before))))
            break;
    }
    return sign * best;
}

SchoutenReport schouten_bounds_audit(const SolitonInstance& s, const std::vector<RadialSample>& samples)
{
    if (!s.is_schouten())
        throw NotSchouten("rho = " + std::to_string(s.rho) + " is not 1/(2(n-1)) = " + std::to_string(s.schouten_rho()));
    const int n = s.dim();
    const double lambda = s.lambda;
    SchoutenReport rep;
    rep.f0 = estimate_f0(s);
    rep.f0_from_hint = s.f0_hint.has_value();
    // The sampled values can only improve the extremum estimate.
    if (!rep.f0_from_hint)
        for (const auto& smp : samples) {
            const double v = s.f.evaluate(smp.x);
            rep.f0 = lambda < 0.0 ? std::max(rep.f0, v) : std::min(rep.f0, v);
        }

    rep.min_r_lambda_lower = rep.min_r_lambda_upper = std::numeric_limits<double>::infinity();
    rep.min_grad_lower = rep.min_grad_upper = std::numeric_limits<double>::infinity();
    for (const auto& smp : samples) {
        const LocalGeometry geo = local_geometry(s.metric, smp.x);
        const JetValue f = s.f.eval_jet(smp.x, n);
        BoundMargins m;
        m.r = smp.r;
        m.point = smp.x;
        m.scalar = geo.scalar;
        m.f_minus_f0 = f.value - rep.f0;
        m.grad_f2 = covector_norm(geo.ginv, f.gradient()) * covector_norm(geo.ginv, f.gradient());
        m.r_lambda_lower = geo.scalar * lambda;
        m.r_lambda_upper = 2.0 * (n - 1) * lambda * lambda - geo.scalar * lambda;
        m.grad_lower = m.grad_f2 - 2.0 * lambda * m.f_minus_f0;
        m.grad_upper = 4.0 * lambda * m.f_minus_f0 - m.grad_f2;
        rep.min_r_lambda_lower = std::min(rep.min_r_lambda_lower, m.r_lambda_lower);
        rep.min_r_lambda_upper = std::min(rep.min_r_lambda_upper, m.r_lambda_upper);
        rep.min_grad_lower = std::min(rep.min_grad_lower, m.grad_lower);
        rep.min_grad_upper = std::min(rep.min_grad_upper, m.grad_upper);
        if (geo.scalar < 0.0)
            rep.negative_scalar_seen = true;
        const double scale = 1.0 + std::fabs(geo.scalar * lambda) + m.grad_f2;
        if (m.r_lambda_lower < -kMarginTolerance * scale || m.r_lambda_upper < -kMarginTolerance * scale)
            rep.scalar_bounds_hold = false;
        if (m.grad_lower < -kMarginTolerance * scale || m.grad_upper < -kMarginTolerance * scale)
            rep.gradient_bounds_hold = false;
        rep.samples.push_back(std::move(m));
    }

    if (lambda > 0.0) {
        std::vector<const BoundMargins*> far;
        for (const auto& m : rep.samples)
            if (m.r > 2.0)
                far.push_back(&m);
        rep.growth_samples = static_cast<int>(far.size());
        if (!far.empty()) {
            for (int step = 0; step <= 1000; ++step) {
                const double a = 0.01 * step;
                bool ok = true;
                for (const auto* m : far) {
                    const double lower = lambda / 4.0 * (m->r - a) * (m->r - a);
                    if (lower > m->f_minus_f0 + kMarginTolerance * (1.0 + m->f_minus_f0)) {
                        ok = false;
                        break;
                    }
                }
                if (ok) {
                    rep.a1 = a;
                    break;
                }
            }
            for (int step = 0; step <= 1000; ++step) {
                const double a = 0.01 * step;
                bool ok = true;
                for (const auto* m : far) {
                    const double upper = lambda * (m->r + a) * (m->r + a);
                    if (m->f_minus_f0 > upper + kMarginTolerance * (1.0 + upper)) {
                        ok = false;
                        break;
                    }
                }
                if (ok) {
                    rep.a2 = a;
                    break;
                }
            }
        }
    }
    return rep;
}

std::vector<ClaimFinding> claimed_value_findings(const SolitonInstance& s,
                                                 const std::vector<std::vector<double>>& points)
{
    std::vector<ClaimFinding> out;
    const int n = s.dim();
    std::optional<Expression> claimed_r;
    std::optional<Expression> claimed_c;
    if (s.claims && !s.claims->scalar.empty())
        claimed_r = parse(s.claims->scalar);
    if (s.claims && !s.claims->ric_f.empty())
        claimed_c = parse(s.claims->ric_f);
    for (const auto& x : points) {
        const LocalGeometry geo = local_geometry(s.metric, x);
        const JetValue f = s.f.eval_jet(x, n);
        const SmallMatrix hess = covariant_hessian(geo, f);
        ClaimFinding c;
        c.point = x;
        c.scalar_computed = geo.scalar;
        c.ric_f_computed = s.rho * geo.scalar + s.lambda;
        double tr = 0.0;
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j)
                tr += geo.ginv(i, j) * (geo.ricci(i, j) + hess(i, j));
        c.ric_f_trace = tr / n;
        c.soliton_residual = std::sqrt(std::max(0.0, tensor_norm2(geo.ginv, soliton_tensor(s, geo, f))));
        if (claimed_r)
            c.scalar_claimed = claimed_r->evaluate(x);
        if (claimed_c) {
            const double cv = claimed_c->evaluate(x);
            c.ric_f_claimed = cv;
            SmallMatrix t(n, n);
            for (int i = 0; i < n; ++i)
                for (int j = 0; j < n; ++j)
                    t(i, j) = geo.ricci(i, j) + hess(i, j) - cv * geo.g(i, j);
            c.ric_f_claim_residual = std::sqrt(std::max(0.0, tensor_norm2(geo.ginv, t)));
        }
        out.push_back(std::move(c));
    }
    return out;
}

} // namespace solitonlab
