#include "solitonlab/catalog.hpp"
#include "solitonlab/errors.hpp"
#include "solitonlab/geodesic.hpp"

#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <sstream>

using namespace solitonlab;

namespace {

double sample_at(const GeodesicRay& ray, double r, double RaySample::*field)
{
    const auto i = static_cast<std::size_t>(std::lround(r / ray.h));
    EXPECT_NEAR(ray.samples.at(i).r, r, 1e-9);
    return ray.samples.at(i).*field;
}

std::vector<double> unit_circle(int k, int count)
{
    const double t = 2.0 * M_PI * (k + 0.5) / count;
    return {std::cos(t), std::sin(t)};
}

} // namespace

TEST(Geodesic, EuclideanStraightLine)
{
    const MetricChart m = MetricChart::euclidean(3, Box::unbounded(3));
    const std::vector<double> p{0.1, -0.2, 0.3};
    const std::vector<double> th{0.6, 0.0, 0.8};
    const GeodesicRay ray = shoot(m, p, th, 2.0);
    EXPECT_FALSE(ray.hit_boundary);
    EXPECT_FALSE(ray.conjugate_radius);
    EXPECT_TRUE(std::isinf(cut_radius(ray)));
    const RaySample& last = ray.samples.back();
    EXPECT_NEAR(last.r, 2.0, 1e-12);
    EXPECT_NEAR(last.x[0], 0.1 + 1.2, 1e-12);
    EXPECT_NEAR(last.x[2], 0.3 + 1.6, 1e-12);
    for (double r : {0.5, 1.0, 2.0}) {
        EXPECT_NEAR(sample_at(ray, r, &RaySample::J), r * r, 1e-12);
        EXPECT_NEAR(sample_at(ray, r, &RaySample::w), 2.0 / r, 1e-10);
    }
    EXPECT_LE(ray.max_energy_drift, 1e-8);
}

TEST(Geodesic, FirstSampleMatchesSeries)
{
    for (const auto& s : {catalog::sphere(3, 1.0), catalog::example_23()}) {
        std::vector<double> th(static_cast<std::size_t>(s.dim()), 0.0);
        th[0] = 1.0;
        const GeodesicRay ray = shoot(s.metric, s.base_point, th, 0.1);
        const RaySample& first = ray.samples.at(1);
        EXPECT_NEAR(first.J / std::pow(first.r, s.dim() - 1), 1.0, 1e-4) << s.id;
    }
}

TEST(Geodesic, SphereConjugateRadius)
{
    // Base point on the equator of the stereographic chart; this great circle
    // stays inside |x| <= 1.
    const SolitonInstance s2 = catalog::sphere(2, 1.0);
    const GeodesicRay ray = shoot(s2.metric, std::vector<double>{1.0, 0.0}, std::vector<double>{0.0, 1.0}, 4.0);
    ASSERT_TRUE(ray.conjugate_radius);
    EXPECT_NEAR(*ray.conjugate_radius, M_PI, 1e-4);
    EXPECT_NEAR(sample_at(ray, 1.0, &RaySample::J), std::sin(1.0), 1e-9);
    EXPECT_LE(ray.max_energy_drift, 1e-8);

    const SolitonInstance s3 = catalog::sphere(3, 1.0);
    const GeodesicRay ray3 =
        shoot(s3.metric, std::vector<double>{1.0, 0.0, 0.0}, std::vector<double>{0.0, 0.6, 0.8}, 4.0);
    ASSERT_TRUE(ray3.conjugate_radius);
    EXPECT_NEAR(*ray3.conjugate_radius, M_PI, 1e-4);
    EXPECT_NEAR(sample_at(ray3, 2.0, &RaySample::J), std::pow(std::sin(2.0), 2), 1e-9);
    // det A = sin^2 r does not change sign at pi.
    EXPECT_GT(sample_at(ray3, 3.5, &RaySample::J), 0.0);
}

TEST(Geodesic, HyperbolicPlaneHasNoConjugatePoint)
{
    const SolitonInstance h = catalog::hyperbolic_plane();
    for (int k = 0; k < 4; ++k) {
        const GeodesicRay ray = shoot(h.metric, h.base_point, frame_direction(h.metric, h.base_point, unit_circle(k, 4)));
        EXPECT_FALSE(ray.conjugate_radius);
        EXPECT_FALSE(ray.hit_boundary);
        for (double r : {1.0, 3.0, 10.0})
            EXPECT_NEAR(sample_at(ray, r, &RaySample::J) / std::sinh(r), 1.0, 1e-8);
        EXPECT_LE(ray.max_energy_drift, 1e-8);
    }
}

TEST(Geodesic, JIndependentOfDirectionOnModelSpaces)
{
    for (const auto& s : {catalog::sphere(2, 1.0), catalog::hyperbolic_plane()}) {
        double lo = 1e300;
        double hi = -1e300;
        for (int k = 0; k < 16; ++k) {
            const auto th = frame_direction(s.metric, s.base_point, unit_circle(k, 16));
            const GeodesicRay ray = shoot(s.metric, s.base_point, th, 1.5);
            const double J = sample_at(ray, 1.5, &RaySample::J);
            lo = std::min(lo, J);
            hi = std::max(hi, J);
        }
        EXPECT_LE(hi - lo, 1e-6) << s.id;
    }
}

TEST(Geodesic, RungeKuttaOrder)
{
    const SolitonInstance s = catalog::example_23();
    const auto th = frame_direction(s.metric, s.base_point, std::vector<double>{0.6, 0.0, 0.0, 0.8, 0.0});
    const double h = 1e-2;
    const GeodesicRay ref = shoot(s.metric, s.base_point, th, 1.0, h / 8.0);
    auto error = [&](double step) {
        const GeodesicRay ray = shoot(s.metric, s.base_point, th, 1.0, step);
        const auto ratio = static_cast<std::size_t>(std::lround(step / ref.h));
        double e = 0.0;
        for (std::size_t i = 0; i < ray.samples.size(); ++i)
            for (std::size_t c = 0; c < 5; ++c)
                e = std::max(e, std::abs(ray.samples[i].x[c] - ref.samples[i * ratio].x[c]));
        return e;
    };
    const double coarse = error(h);
    const double fine = error(h / 2.0);
    EXPECT_GT(coarse, 0.0);
    EXPECT_GE(coarse / fine, 12.0);
}

TEST(Geodesic, RiccatiEqualityCases)
{
    const MetricChart e2 = MetricChart::euclidean(2, Box::unbounded(2));
    const GeodesicRay flat = shoot(e2, std::vector<double>{0.0, 0.0}, std::vector<double>{0.8, 0.6}, 3.0);
    for (const auto& pt : riccati_audit(flat))
        EXPECT_NEAR(pt.slack, 0.0, 1e-6) << pt.r;

    const SolitonInstance s2 = catalog::sphere(2, 1.0);
    const GeodesicRay ray = shoot(s2.metric, s2.base_point, std::vector<double>{0.5, 0.0}, 2.0);
    const auto audit = riccati_audit(ray);
    const auto it = std::min_element(audit.begin(), audit.end(), [](const RiccatiPoint& a, const RiccatiPoint& b) {
        return std::abs(a.r - M_PI / 2) < std::abs(b.r - M_PI / 2);
    });
    ASSERT_NE(it, audit.end());
    EXPECT_NEAR(it->slack, 0.0, 1e-6);
    EXPECT_NEAR(sample_at(ray, 1.0, &RaySample::w), std::cos(1.0) / std::sin(1.0), 1e-8);
}

TEST(Geodesic, RiccatiInequalityOnExample23)
{
    const SolitonInstance s = catalog::example_23();
    for (int axis = 0; axis < 5; ++axis) {
        std::vector<double> u(5, 0.0);
        u[static_cast<std::size_t>(axis)] = 1.0;
        const GeodesicRay ray = shoot(s.metric, s.base_point, frame_direction(s.metric, s.base_point, u), 2.0);
        const auto audit = riccati_audit(ray);
        ASSERT_FALSE(audit.empty());
        for (const auto& pt : audit)
            EXPECT_LE(pt.slack, 1e-5) << axis << " " << pt.r;
    }
}

TEST(Geodesic, TruncatesAtChartBoundary)
{
    const MetricChart m = MetricChart::euclidean(2, Box::cube(2, -1.0, 1.0));
    const GeodesicRay ray = shoot(m, std::vector<double>{0.0, 0.0}, std::vector<double>{1.0, 0.0}, 3.0, 1e-2);
    EXPECT_TRUE(ray.hit_boundary);
    EXPECT_LE(ray.end_radius(), 1.0);
    EXPECT_GE(ray.end_radius(), 0.98);
    EXPECT_THROW(shoot(m, std::vector<double>{2.0, 0.0}, std::vector<double>{1.0, 0.0}), LeftDomain);
}

TEST(Geodesic, RayCsvColumns)
{
    const SolitonInstance g = catalog::gaussian(2, 1.0);
    const GeodesicRay ray = shoot(g.metric, g.base_point, std::vector<double>{1.0, 0.0}, 0.01, 1e-3, &g.f);
    std::ostringstream os;
    write_ray_csv(os, ray);
    std::istringstream is(os.str());
    std::string header;
    std::getline(is, header);
    EXPECT_EQ(header, "r,x1,x2,J,w,Ric_rr,f");
    EXPECT_DOUBLE_EQ(ray.samples.back().f, 0.5 * 0.01 * 0.01);
    EXPECT_DOUBLE_EQ(ray.f2, 1.0);
}

TEST(Geodesic, ParallelForCoversEveryIndex)
{
    std::vector<int> hit(37, 0);
    parallel_for(37, 4, [&](int i) { hit[static_cast<std::size_t>(i)] += 1; });
    EXPECT_TRUE(std::all_of(hit.begin(), hit.end(), [](int c) { return c == 1; }));
}
