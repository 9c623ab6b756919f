#include "solitonlab/volume.hpp"

#include "solitonlab/errors.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <limits>

namespace solitonlab {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kRadiusSlack = 1e-9;

void add_point(SphereGrid& g, std::vector<double> d, double w)
{
    g.directions.push_back(std::move(d));
    g.weights.push_back(w);
}

// All sign variants of (a, b, c) with zero entries left alone.
void add_signed(SphereGrid& g, double a, double b, double c, double w)
{
    for (int sa : {1, -1})
        for (int sb : {1, -1})
            for (int sc : {1, -1}) {
                if ((a == 0.0 && sa < 0) || (b == 0.0 && sb < 0) || (c == 0.0 && sc < 0))
                    continue;
                add_point(g, {sa * a, sb * b, sc * c}, w);
            }
}

// Orbit of (a, b, c) under coordinate permutations and sign changes,
// deduplicated.
void add_orbit(SphereGrid& g, double a, double b, double c, double w)
{
    std::vector<std::vector<double>> seen;
    std::array<double, 3> v{a, b, c};
    std::sort(v.begin(), v.end());
    do {
        std::vector<double> base(v.begin(), v.end());
        if (std::find(seen.begin(), seen.end(), base) != seen.end())
            continue;
        seen.push_back(base);
        add_signed(g, v[0], v[1], v[2], w);
    } while (std::next_permutation(v.begin(), v.end()));
}

SphereGrid lebedev(int level)
{
    SphereGrid g;
    g.n = 3;
    const double area = 4.0 * M_PI;
    const double s2 = 1.0 / std::sqrt(2.0);
    const double s3 = 1.0 / std::sqrt(3.0);
    if (level < 0) {
        add_orbit(g, 1.0, 0.0, 0.0, area / 6.0);
    } else if (level == 0) {
        add_orbit(g, 1.0, 0.0, 0.0, area / 21.0);
        add_orbit(g, s2, s2, 0.0, area * 4.0 / 105.0);
        add_orbit(g, s3, s3, s3, area * 9.0 / 280.0);
    } else {
        const double l = 1.0 / std::sqrt(11.0);
        const double m = 3.0 / std::sqrt(11.0);
        add_orbit(g, 1.0, 0.0, 0.0, area * 4.0 / 315.0);
        add_orbit(g, s2, s2, 0.0, area * 64.0 / 2835.0);
        add_orbit(g, s3, s3, s3, area * 27.0 / 1280.0);
        add_orbit(g, l, l, m, area * 14641.0 / 725760.0);
    }
    return g;
}

// int_0^pi sin^k
double sine_power_integral(int k)
{
    return std::sqrt(M_PI) * std::tgamma((k + 1) / 2.0) / std::tgamma(k / 2.0 + 1.0);
}

SphereGrid hyperspherical(int n, int level)
{
    const int M = std::max(2, static_cast<int>(std::lround(4.0 * std::pow(2.0, level))));
    const int polar = n - 2;
    // Per polar angle j the density is sin^{n-2-j}; each factor is rescaled
    // to its exact integral so the total weight is exact.
    std::vector<std::vector<double>> node_w(static_cast<std::size_t>(polar));
    std::vector<double> nodes(static_cast<std::size_t>(M));
    for (int i = 0; i < M; ++i)
        nodes[static_cast<std::size_t>(i)] = M_PI * (i + 0.5) / M;
    for (int j = 0; j < polar; ++j) {
        const int k = n - 2 - j;
        auto& w = node_w[static_cast<std::size_t>(j)];
        double sum = 0.0;
        for (double t : nodes) {
            w.push_back(std::pow(std::sin(t), k));
            sum += w.back();
        }
        const double scale = sine_power_integral(k) / sum;
        for (double& x : w)
            x *= scale;
    }
    const int Ma = 2 * M;

    SphereGrid g;
    g.n = n;
    std::vector<int> idx(static_cast<std::size_t>(polar), 0);
    while (true) {
        for (int a = 0; a < Ma; ++a) {
            const double az = 2.0 * M_PI * (a + 0.5) / Ma;
            std::vector<double> d(static_cast<std::size_t>(n));
            double w = 2.0 * M_PI / Ma;
            double sin_prod = 1.0;
            for (int j = 0; j < polar; ++j) {
                const double t = nodes[static_cast<std::size_t>(idx[static_cast<std::size_t>(j)])];
                d[static_cast<std::size_t>(j)] = sin_prod * std::cos(t);
                sin_prod *= std::sin(t);
                w *= node_w[static_cast<std::size_t>(j)][static_cast<std::size_t>(idx[static_cast<std::size_t>(j)])];
            }
            d[static_cast<std::size_t>(n - 2)] = sin_prod * std::cos(az);
            d[static_cast<std::size_t>(n - 1)] = sin_prod * std::sin(az);
            add_point(g, std::move(d), w);
        }
        int j = polar - 1;
        while (j >= 0 && ++idx[static_cast<std::size_t>(j)] == M) {
            idx[static_cast<std::size_t>(j)] = 0;
            --j;
        }
        if (j < 0)
            break;
    }
    return g;
}

struct SolitonTerms
{
    double lambda = 0.0;
    double rho = 0.0;
};

RayProfile make_profile(const SolitonTerms& t, const GeodesicRay& ray)
{
    RayProfile p;
    const auto& smp = ray.samples;
    const std::size_t N = smp.size();
    const int n = static_cast<int>(ray.base_point.size());
    p.h = ray.h;
    p.conjugate = cut_radius(ray);

    std::vector<double> J(N), Jf(N), f(N), trho(N);
    p.s.resize(N);
    for (std::size_t i = 0; i < N; ++i) {
        const RaySample& q = smp[i];
        p.s[i] = q.r;
        J[i] = q.r < p.conjugate ? std::max(q.J, 0.0) : 0.0;
        f[i] = q.f;
        Jf[i] = J[i] * std::exp(-q.f);
        trho[i] = q.r * t.rho * q.scalar;
    }
    p.vol = cumulative_simpson(J, ray.h);
    p.volf = cumulative_simpson(Jf, ray.h);
    const std::vector<double> F = cumulative_simpson(f, ray.h);
    const std::vector<double> I1 = cumulative_simpson(trho, ray.h);
    const std::vector<double> G = cumulative_simpson(I1, ray.h);

    const double f0 = ray.f0;
    const double f1 = ray.f1;
    const double f2 = ray.f2;
    const double R0 = smp.empty() ? 0.0 : smp.front().scalar;
    p.phi.resize(N);
    p.psi.resize(N);
    std::vector<double> e13(N), e14(N);
    for (std::size_t i = 0; i < N; ++i) {
        const double s = p.s[i];
        if (s < kSeriesSteps * ray.h) {
            p.phi[i] = (-t.lambda / 6.0 + f2 / 6.0) * s * s;
            p.psi[i] = -f0 - s * f1 + s * s * (-t.lambda / 6.0 - f2 / 3.0 - t.rho * R0 / 6.0);
        } else {
            const double avg = 2.0 * F[i] / s;
            p.phi[i] = -t.lambda * s * s / 6.0 + f[i] + f0 - avg;
            p.psi[i] = -t.lambda * s * s / 6.0 + f0 - avg - G[i] / s;
        }
        const double sn = std::pow(s, n - 1);
        e13[i] = std::exp(p.phi[i]) * sn;
        e14[i] = std::exp(p.psi[i]) * sn;
    }
    p.b_phi = cumulative_simpson(e13, ray.h);
    p.b_psi = cumulative_simpson(e14, ray.h);
    return p;
}

SolitonTerms terms(const SolitonInstance& s)
{
    return {s.lambda, s.rho};
}

std::vector<GeodesicRay> shoot_grid(const MetricChart& m, std::span<const double> p, const SphereGrid& grid,
                                    double r_max, double h, const Expression* f, int workers)
{
    if (grid.n != m.dim())
        throw DomainError("sphere grid dimension does not match the metric");
    std::vector<GeodesicRay> rays(grid.size());
    parallel_for(static_cast<int>(grid.size()), workers, [&](int i) {
        const auto th = frame_direction(m, p, grid.directions[static_cast<std::size_t>(i)]);
        rays[static_cast<std::size_t>(i)] = shoot(m, p, th, r_max, h, f);
    });
    return rays;
}

double max_radius(std::span<const double> r_grid)
{
    if (r_grid.empty())
        throw DomainError("empty radius grid");
    double r = 0.0;
    for (double x : r_grid) {
        if (!(x > 0.0))
            throw DomainError("radii must be positive");
        r = std::max(r, x);
    }
    return r;
}

void require_reach(const GeodesicRay& ray, double r)
{
    if (ray.end_radius() + kRadiusSlack < r)
        throw LeftDomain(ray.end_radius());
}

std::vector<RayProfile> profiles(const SolitonInstance& s, std::span<const double> r_grid, const SphereGrid& grid,
                                 const VolumeOptions& opt, std::vector<GeodesicRay>* keep = nullptr)
{
    const double r_max = max_radius(r_grid);
    std::vector<GeodesicRay> rays = shoot_grid(s.metric, s.base_point, grid, r_max, opt.h, &s.f, opt.workers);
    std::vector<RayProfile> out;
    out.reserve(rays.size());
    for (const auto& ray : rays) {
        require_reach(ray, r_max);
        out.push_back(make_profile(terms(s), ray));
    }
    if (keep)
        *keep = std::move(rays);
    return out;
}

std::vector<double> reduce(const std::vector<RayProfile>& prof, const SphereGrid& grid, std::span<const double> r_grid,
                           std::vector<double> RayProfile::*column)
{
    std::vector<double> out;
    for (double r : r_grid) {
        double acc = 0.0;
        for (std::size_t i = 0; i < prof.size(); ++i)
            acc += grid.weights[i] * prof[i].at(prof[i].*column, r);
        out.push_back(acc);
    }
    return out;
}

} // namespace

double SphereGrid::total_weight() const
{
    double s = 0.0;
    for (double w : weights)
        s += w;
    return s;
}

SphereGrid SphereGrid::standard(int n, int level)
{
    if (n < 2)
        throw DomainError("sphere grids need n >= 2");
    if (n == 2) {
        SphereGrid g;
        g.n = 2;
        const int M = std::max(8, static_cast<int>(std::lround(64.0 * std::pow(2.0, level))));
        for (int k = 0; k < M; ++k) {
            const double t = 2.0 * M_PI * (k + 0.5) / M;
            add_point(g, {std::cos(t), std::sin(t)}, 2.0 * M_PI / M);
        }
        return g;
    }
    if (n == 3)
        return lebedev(std::clamp(level, -1, 1));
    return hyperspherical(n, level);
}

double sphere_area(int n)
{
    return 2.0 * std::pow(M_PI, n / 2.0) / std::tgamma(n / 2.0);
}

std::vector<double> cumulative_simpson(std::span<const double> y, double h)
{
    const std::size_t N = y.size();
    std::vector<double> c(N, 0.0);
    if (N < 2)
        return c;
    if (N == 2) {
        c[1] = 0.5 * h * (y[0] + y[1]);
        return c;
    }
    for (std::size_t i = 1; i < N; ++i) {
        if (i % 2 == 0) {
            c[i] = c[i - 2] + h / 3.0 * (y[i - 2] + 4.0 * y[i - 1] + y[i]);
        } else if (i + 1 < N) {
            c[i] = c[i - 1] + h / 12.0 * (5.0 * y[i - 1] + 8.0 * y[i] - y[i + 1]);
        } else {
            c[i] = c[i - 1] + h / 12.0 * (-y[i - 2] + 8.0 * y[i - 1] + 5.0 * y[i]);
        }
    }
    return c;
}

double RayProfile::at(const std::vector<double>& column, double r) const
{
    if (s.empty())
        throw LeftDomain(0.0);
    if (r >= s.back()) {
        if (r > s.back() + kRadiusSlack)
            throw LeftDomain(s.back());
        return column.back();
    }
    const auto i = std::min(static_cast<std::size_t>(std::floor(r / h + 1e-9)), s.size() - 2);
    const double t = (r - s[i]) / h;
    return (1.0 - t) * column[i] + t * column[i + 1];
}

RayProfile ray_profile(const SolitonInstance& s, const GeodesicRay& ray)
{
    return make_profile(terms(s), ray);
}

double phi(const SolitonInstance& s, const GeodesicRay& ray, double r)
{
    if (r < kSeriesSteps * ray.h)
        return (-s.lambda / 6.0 + ray.f2 / 6.0) * r * r;
    const RayProfile p = ray_profile(s, ray);
    return p.at(p.phi, r);
}

double psi(const SolitonInstance& s, const GeodesicRay& ray, double r)
{
    if (r < kSeriesSteps * ray.h) {
        const double R0 = ray.samples.empty() ? 0.0 : ray.samples.front().scalar;
        return -ray.f0 - r * ray.f1 + r * r * (-s.lambda / 6.0 - ray.f2 / 3.0 - s.rho * R0 / 6.0);
    }
    const RayProfile p = ray_profile(s, ray);
    return p.at(p.psi, r);
}

std::vector<double> ball_volume(const MetricChart& m, std::span<const double> p, std::span<const double> r_grid,
                                const SphereGrid& grid, double h, int workers)
{
    const double r_max = max_radius(r_grid);
    const std::vector<GeodesicRay> rays = shoot_grid(m, p, grid, r_max, h, nullptr, workers);
    std::vector<RayProfile> prof;
    for (const auto& ray : rays) {
        require_reach(ray, std::min(r_max, cut_radius(ray)));
        prof.push_back(make_profile(SolitonTerms{}, ray));
    }
    std::vector<double> out;
    for (double r : r_grid) {
        double acc = 0.0;
        for (std::size_t i = 0; i < prof.size(); ++i) {
            // Past the conjugate radius the capped integrand is zero, so the
            // last tabulated value is the whole contribution.
            const double rr = std::min(r, prof[i].s.back());
            acc += grid.weights[i] * prof[i].at(prof[i].vol, rr);
        }
        out.push_back(acc);
    }
    return out;
}

std::vector<double> weighted_ball_volume(const SolitonInstance& s, std::span<const double> r_grid,
                                         const SphereGrid& grid, const VolumeOptions& opt)
{
    return reduce(profiles(s, r_grid, grid, opt), grid, r_grid, &RayProfile::volf);
}

std::vector<double> phi_bound(const SolitonInstance& s, std::span<const double> r_grid, const SphereGrid& grid,
                             const VolumeOptions& opt)
{
    return reduce(profiles(s, r_grid, grid, opt), grid, r_grid, &RayProfile::b_phi);
}

std::vector<double> psi_bound(const SolitonInstance& s, std::span<const double> r_grid, const SphereGrid& grid,
                             const VolumeOptions& opt)
{
    return reduce(profiles(s, r_grid, grid, opt), grid, r_grid, &RayProfile::b_psi);
}

std::vector<std::optional<double>> gaussian_growth_bound(int n, std::span<const double> r_grid, const SphereGrid& grid, double r0,
                                            double h)
{
    const double r_max = max_radius(r_grid);
    const auto steps = static_cast<std::size_t>(std::max(1.0, std::ceil(r_max / h - 1e-9)));
    const double step = r_max / static_cast<double>(steps);
    std::vector<double> y(steps + 1);
    for (std::size_t i = 0; i <= steps; ++i) {
        const double t = step * static_cast<double>(i);
        y[i] = std::exp(0.5 * t * t) * std::pow(t, n - 1);
    }
    const std::vector<double> c = cumulative_simpson(y, step);
    const double w = grid.total_weight();
    std::vector<std::optional<double>> out;
    for (double r : r_grid) {
        if (r + kRadiusSlack < r0) {
            out.emplace_back();
            continue;
        }
        const auto i = std::min(static_cast<std::size_t>(std::floor(r / step + 1e-9)), steps - 1);
        const double t = (r - step * static_cast<double>(i)) / step;
        out.emplace_back(w * ((1.0 - t) * c[i] + t * c[i + 1]));
    }
    return out;
}

ComparisonReport compare_volumes(const SolitonInstance& s, std::span<const double> r_grid, const SphereGrid& grid,
                                 const VolumeOptions& opt)
{
    ComparisonReport rep;
    rep.soliton_id = s.id;
    rep.base_point = s.base_point;
    rep.directions = static_cast<int>(grid.size());
    rep.h = opt.h;
    rep.shrinking = s.lambda > 0.0;

    std::vector<GeodesicRay> rays;
    const std::vector<RayProfile> prof = profiles(s, r_grid, grid, opt, &rays);
    const double r_max = max_radius(r_grid);

    // Hypotheses sampled along every ray inside its conjugate radius.
    rep.min_scalar = kInf;
    rep.min_rho_scalar = kInf;
    double max_scalar = -kInf;
    for (const auto& ray : rays) {
        if (ray.conjugate_radius && *ray.conjugate_radius < r_max)
            ++rep.conjugate_rays;
        for (const auto& q : ray.samples) {
            if (q.r >= cut_radius(ray))
                break;
            rep.min_scalar = std::min(rep.min_scalar, q.scalar);
            max_scalar = std::max(max_scalar, q.scalar);
            rep.min_rho_scalar = std::min(rep.min_rho_scalar, s.rho * q.scalar);
        }
    }
    const bool positive_case = s.rho > 0.0 && rep.min_scalar >= -kMarginTolerance;
    const bool negative_case = s.rho < 0.0 && max_scalar <= kMarginTolerance;
    rep.phi_hypotheses = rep.shrinking && (positive_case || negative_case);
    if (!rep.shrinking)
        rep.warnings.push_back("lambda <= 0: the unweighted bound assumes a shrinking soliton");
    if (!(positive_case || negative_case))
        rep.warnings.push_back("sampled scalar curvature violates the sign hypothesis of the unweighted bound");
    if (s.exactness != Exactness::Exact)
        rep.warnings.push_back("entry is paper-claimed; the soliton equation is not satisfied exactly");

    GrowthBound cor;
    cor.delta = opt.delta.value_or(rep.min_rho_scalar);
    cor.c = 0.5 * (s.lambda + cor.delta);
    rep.growth_hypotheses = rep.shrinking && cor.delta > -s.lambda;
    if (rep.min_rho_scalar < cor.delta - kMarginTolerance) {
        rep.growth_hypotheses = false;
        rep.warnings.push_back("sampled rho R drops below delta");
    }
    if (rep.growth_hypotheses) {
        // Smallest a on the 0.01 grid in [0, 10] with f >= c r^2 - a r on the samples.
        double need = 0.0;
        bool feasible = true;
        for (const auto& ray : rays)
            for (const auto& q : ray.samples) {
                if (q.r >= cut_radius(ray))
                    break;
                const double gap = cor.c * q.r * q.r - q.f;
                if (q.r == 0.0) {
                    if (gap > kMarginTolerance)
                        feasible = false;
                    continue;
                }
                need = std::max(need, (gap - kMarginTolerance) / q.r);
            }
        const double k = std::ceil(need * 100.0 - 1e-9);
        if (feasible && k <= 1000.0) {
            cor.a = std::max(0.0, k) / 100.0;
            std::vector<double> sorted(r_grid.begin(), r_grid.end());
            std::sort(sorted.begin(), sorted.end());
            for (double r : sorted)
                if (-cor.c * r * r + *cor.a * r <= 0.5 * r * r + kMarginTolerance) {
                    cor.r0 = r;
                    break;
                }
        } else {
            rep.warnings.push_back("no constant a in [0, 10] makes f >= c r^2 - a r on the samples");
        }
    }
    std::vector<std::optional<double>> b15(r_grid.size());
    if (cor.r0)
        b15 = gaussian_growth_bound(s.dim(), r_grid, grid, *cor.r0, opt.h);
    rep.growth = cor;

    const auto vol = [&] {
        std::vector<double> out;
        for (double r : r_grid) {
            double acc = 0.0;
            for (std::size_t i = 0; i < prof.size(); ++i)
                acc += grid.weights[i] * prof[i].at(prof[i].vol, r);
            out.push_back(acc);
        }
        return out;
    }();
    const std::vector<double> volf = reduce(prof, grid, r_grid, &RayProfile::volf);
    const std::vector<double> b_phi = reduce(prof, grid, r_grid, &RayProfile::b_phi);
    const std::vector<double> b_psi = reduce(prof, grid, r_grid, &RayProfile::b_psi);

    for (std::size_t i = 0; i < r_grid.size(); ++i) {
        ComparisonRow row;
        row.r = r_grid[i];
        row.vol = vol[i];
        row.volf = volf[i];
        row.bound_phi = b_phi[i];
        row.bound_psi = b_psi[i];
        row.bound_growth = b15[i];
        row.equal_phi = std::abs(row.bound_phi - row.vol) <= kEqualityTolerance * row.vol;
        row.equal_psi = std::abs(row.bound_psi - row.volf) <= kEqualityTolerance * row.volf;
        row.holds_phi = row.vol <= row.bound_phi * (1.0 + kEqualityTolerance);
        row.holds_psi = row.volf <= row.bound_psi * (1.0 + kEqualityTolerance);
        if (row.bound_growth)
            row.holds_growth = row.volf <= *row.bound_growth * (1.0 + kEqualityTolerance);
        if (!rep.rows.empty() && row.r > rep.rows.back().r &&
            (row.vol < rep.rows.back().vol || row.volf < rep.rows.back().volf))
            rep.monotone = false;
        rep.rows.push_back(row);
    }
    return rep;
}

nlohmann::json ComparisonReport::to_json() const
{
    using nlohmann::json;
    json j;
    j["schema"] = 1;
    j["soliton"] = soliton_id;
    j["base_point"] = base_point;
    j["directions"] = directions;
    j["h"] = h;
    j["min_scalar"] = min_scalar;
    j["min_rho_scalar"] = min_rho_scalar;
    j["shrinking"] = shrinking;
    j["phi_hypotheses"] = phi_hypotheses;
    j["growth_hypotheses"] = growth_hypotheses;
    j["conjugate_rays"] = conjugate_rays;
    j["monotone"] = monotone;
    j["warnings"] = warnings;
    if (growth) {
        json c;
        c["delta"] = growth->delta;
        c["c"] = growth->c;
        c["a"] = growth->a ? json(*growth->a) : json(nullptr);
        c["r0"] = growth->r0 ? json(*growth->r0) : json(nullptr);
        j["growth"] = c;
    }
    json rs = json::array();
    for (const auto& r : rows) {
        json o;
        o["r"] = r.r;
        o["vol"] = r.vol;
        o["volf"] = r.volf;
        o["bound_phi"] = r.bound_phi;
        o["bound_psi"] = r.bound_psi;
        o["bound_growth"] = r.bound_growth ? json(*r.bound_growth) : json(nullptr);
        o["margin_phi"] = r.margin_phi();
        o["margin_psi"] = r.margin_psi();
        o["margin_growth"] = r.bound_growth ? json(*r.bound_growth - r.volf) : json(nullptr);
        o["equal_phi"] = r.equal_phi;
        o["equal_psi"] = r.equal_psi;
        o["holds_phi"] = r.holds_phi;
        o["holds_psi"] = r.holds_psi;
        o["holds_growth"] = r.holds_growth ? json(*r.holds_growth) : json(nullptr);
        rs.push_back(o);
    }
    j["rows"] = rs;
    return j;
}

void ComparisonReport::write_csv(std::ostream& out) const
{
    out << "r,vol,bound_phi,volf,bound_psi,bound_growth,margin_phi,margin_psi,margin_growth,equal_phi,equal_psi,holds_phi,holds_psi,holds_growth\n";
    char buf[64];
    auto num = [&](double v) {
        std::snprintf(buf, sizeof buf, "%.17g", v);
        return std::string(buf);
    };
    for (const auto& r : rows) {
        out << num(r.r) << ',' << num(r.vol) << ',' << num(r.bound_phi) << ',' << num(r.volf) << ','
            << num(r.bound_psi) << ',' << (r.bound_growth ? num(*r.bound_growth) : "") << ',' << num(r.margin_phi()) << ','
            << num(r.margin_psi()) << ',' << (r.bound_growth ? num(*r.bound_growth - r.volf) : "") << ',' << r.equal_phi << ','
            << r.equal_psi << ',' << r.holds_phi << ',' << r.holds_psi << ','
            << (r.holds_growth ? std::to_string(static_cast<int>(*r.holds_growth)) : "") << '\n';
    }
}

} // namespace solitonlab
