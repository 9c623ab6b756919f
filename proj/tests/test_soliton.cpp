#include "solitonlab/catalog.hpp"
#include "solitonlab/errors.hpp"
#include "solitonlab/soliton.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <fstream>
#include <sstream>

using namespace solitonlab;

namespace {

std::vector<RadialSample> axis_samples(int n, double r_max, int count)
{
    std::vector<RadialSample> out;
    for (int i = 1; i <= count; ++i) {
        RadialSample s;
        s.r = r_max * i / count;
        s.x.assign(static_cast<std::size_t>(n), 0.0);
        s.x[0] = s.r;
        out.push_back(s);
    }
    return out;
}

} // namespace

TEST(Soliton, GaussianIsExact)
{
    for (int n : {2, 3, 4}) {
        const SolitonInstance s = catalog::gaussian(n, 1.0);
        for (const auto& x : sample_points(s.metric, 100, 1))
            EXPECT_LE(soliton_residual(s, x), 1e-12);
        const IdentityReport r = derived_identities_audit(s, sample_points(s.metric, 20, 2));
        EXPECT_LE(r.max_trace, 1e-12);
        EXPECT_LE(r.max_gradient, 1e-12);
        EXPECT_LE(r.max_laplacian, 1e-12);
    }
}

TEST(Soliton, ProductEinsteinIsExact)
{
    const SolitonInstance s = catalog::product_einstein(3, 2, 0.25, 1.0);
    EXPECT_NEAR(s.parameters["sphere_radius"].get<double>(), 1.0 / std::sqrt(2.0), 1e-15);
    const auto pts = sample_points(s.metric, 50, 3);
    for (const auto& x : pts) {
        EXPECT_LE(soliton_residual(s, x), 1e-9);
        EXPECT_NEAR(scalar_curvature(s.metric, x), 4.0, 1e-10);
    }
    const IdentityReport r = derived_identities_audit(s, pts);
    EXPECT_LE(r.max_residual(), 1e-6);
    EXPECT_GE(r.max_soliton, r.mean_soliton);
}

TEST(Soliton, ProductEinsteinOtherDimensions)
{
    const SolitonInstance s = catalog::product_einstein(5, 3, 0.1, 2.0);
    for (const auto& x : sample_points(s.metric, 20, 5))
        EXPECT_LE(soliton_residual(s, x), 1e-9);
}

TEST(Soliton, ExampleTwoOneIsExact)
{
    const SolitonInstance s = catalog::example_21();
    for (const auto& x : sample_points(s.metric, 100, 9))
        EXPECT_LE(soliton_residual(s, x), 1e-9);
    const IdentityReport r = derived_identities_audit(s, sample_points(s.metric, 20, 10));
    EXPECT_LE(r.max_residual(), 1e-6);
    const auto findings = claimed_value_findings(s, {{1.0, 0.0, 0.0}, {0.5, 0.3, 0.0}});
    EXPECT_NEAR(findings[0].ric_f_trace, -1.00234594589465, 1e-12);
    EXPECT_NEAR(findings[1].ric_f_trace, -1.68486059678436, 1e-12);
    EXPECT_NEAR(*findings[0].scalar_claimed, findings[0].scalar_computed, 1e-11);
    EXPECT_LE(*findings[0].ric_f_claim_residual, 1e-11);
}

TEST(Soliton, ExampleTwoTwoResidualsAreFindings)
{
    const SolitonInstance s = catalog::example_22();
    EXPECT_EQ(s.exactness, Exactness::PaperClaimed);
    EXPECT_NEAR(soliton_residual(s, std::vector<double>{0.0, 0.0, 0.0}), 2.0 / 3.0, 1e-12);
    EXPECT_NEAR(soliton_residual(s, std::vector<double>{0.5, 0.0, 0.0}), 0.4578, 1e-4);
    EXPECT_NEAR(soliton_residual(s, std::vector<double>{1.0, 0.0, 0.0}), 0.4102, 1e-4);
    const auto f = claimed_value_findings(s, {{0.0, 0.0, 0.0}});
    EXPECT_NEAR(f[0].scalar_computed, -4.0, 1e-12);
    EXPECT_NEAR(*f[0].scalar_claimed, -4.0 / 3.0, 1e-12);
}

TEST(Soliton, ExampleTwoThree)
{
    const SolitonInstance s = catalog::example_23();
    EXPECT_EQ(s.dim(), 5);
    EXPECT_TRUE(s.is_schouten());
    EXPECT_NEAR(s.rho, 1.0 / 8.0, 1e-15);
    const std::vector<double> origin(5, 0.0);
    EXPECT_NEAR(scalar_curvature(s.metric, origin), -12.0, 1e-12);
    EXPECT_NEAR(soliton_residual(s, origin), std::sqrt(2.0), 1e-10);
    const auto f = claimed_value_findings(s, {origin});
    EXPECT_NEAR(*f[0].scalar_claimed, -12.0, 1e-12);

    const SchoutenReport rep = schouten_bounds_audit(s, axis_samples(5, 1.0, 10));
    EXPECT_TRUE(rep.negative_scalar_seen);
    EXPECT_FALSE(rep.scalar_bounds_hold);
    EXPECT_LT(rep.min_r_lambda_lower, 0.0);
}

TEST(Soliton, GaussianSchoutenBounds)
{
    const double lambda = 1.0;
    const SolitonInstance s = catalog::gaussian(3, lambda);
    const SchoutenReport rep = schouten_bounds_audit(s, axis_samples(3, 4.0, 40));
    EXPECT_EQ(rep.f0, 0.0);
    EXPECT_TRUE(rep.scalar_bounds_hold);
    EXPECT_TRUE(rep.gradient_bounds_hold);
    for (const auto& m : rep.samples) {
        EXPECT_NEAR(m.grad_lower, 0.0, 1e-12);
        EXPECT_NEAR(m.grad_upper, 2.0 * lambda * m.f_minus_f0, 1e-12);
    }
    ASSERT_TRUE(rep.a1.has_value());
    ASSERT_TRUE(rep.a2.has_value());
    EXPECT_EQ(*rep.a1, 0.0);
    EXPECT_EQ(*rep.a2, 0.0);
    EXPECT_EQ(rep.growth_samples, 20);
}

TEST(Soliton, F0EstimateWithoutHint)
{
    SolitonInstance s = catalog::gaussian(2, 1.0);
    s.f0_hint.reset();
    s.base_point = {0.7, -0.3};
    EXPECT_NEAR(estimate_f0(s), 0.0, 1e-10);
}

TEST(Soliton, NotSchoutenRejected)
{
    EXPECT_THROW(schouten_bounds_audit(catalog::sphere(), axis_samples(2, 1.0, 3)), NotSchouten);
}

TEST(Soliton, ResidualInvariantUnderConstantShift)
{
    SolitonInstance a = catalog::product_einstein();
    SolitonInstance b = a;
    b.f_source = a.f_source + " + 17.25";
    b.f = parse(b.f_source);
    for (const auto& x : sample_points(a.metric, 20, 4))
        EXPECT_LE(std::fabs(soliton_residual(a, x) - soliton_residual(b, x)), 1e-12);
}

TEST(Soliton, ClassFollowsLambda)
{
    EXPECT_EQ(catalog::gaussian().soliton_class(), SolitonClass::Shrinking);
    EXPECT_EQ(catalog::example_21().soliton_class(), SolitonClass::Steady);
    EXPECT_EQ(catalog::hyperbolic_plane().soliton_class(), SolitonClass::Expanding);
}

TEST(Catalog, BuiltinEntries)
{
    const auto all = catalog::builtin();
    ASSERT_EQ(all.size(), 8u);
    for (std::size_t i = 0; i < all.size(); ++i) {
        EXPECT_EQ(all[i].id, catalog::ids()[i]);
        EXPECT_NO_THROW(verify_exactness(all[i], "/"));
        EXPECT_LE(tag_consistency(all[i].metric, 10, 1), 1e-10) << all[i].id;
        if (all[i].exactness == Exactness::Exact)
            EXPECT_LT(exactness_residual(all[i]), kExactResidual) << all[i].id;
    }
}

TEST(Catalog, ShippedFileMatchesBuilders)
{
    const auto loaded = load_catalog(SOLITONLAB_SOURCE_DIR "/data/catalog.json");
    const auto built = catalog::builtin();
    ASSERT_EQ(loaded.size(), built.size());
    for (std::size_t i = 0; i < built.size(); ++i)
        EXPECT_EQ(to_json(loaded[i]), to_json(built[i])) << built[i].id;
}

TEST(Catalog, JsonRoundTrip)
{
    for (const auto& s : catalog::builtin()) {
        const SolitonInstance t = soliton_from_json(to_json(s), "/soliton");
        EXPECT_EQ(to_json(t).dump(), to_json(s).dump());
        EXPECT_EQ(t.f.to_string(), s.f.to_string());
    }
}

TEST(Catalog, ExactnessEnforcedAtLoad)
{
    nlohmann::json doc = catalog_document({catalog::example_22()});
    doc["entries"][0]["exactness"] = "exact";
    const std::string path = ::testing::TempDir() + "/tampered_catalog.json";
    std::ofstream(path) << doc.dump();
    try {
        load_catalog(path);
        FAIL() << "expected ConfigError";
    } catch (const ConfigError& e) {
        EXPECT_EQ(e.pointer(), "/entries/0");
    }
}

TEST(Catalog, ConfigErrorsCarryPointers)
{
    nlohmann::json j = to_json(catalog::gaussian());
    j.erase("lambda");
    try {
        soliton_from_json(j, "/soliton");
        FAIL();
    } catch (const ConfigError& e) {
        EXPECT_EQ(e.pointer(), "/soliton/lambda");
    }
    try {
        soliton_from_json({{"catalog", "gaussian"}, {"params", {{"n", "two"}}}}, "/soliton");
        FAIL();
    } catch (const ConfigError& e) {
        EXPECT_EQ(e.pointer(), "/soliton/params/n");
    }
    try {
        soliton_from_json({{"catalog", "nope"}}, "/soliton");
        FAIL();
    } catch (const ConfigError& e) {
        EXPECT_EQ(e.pointer(), "/soliton/params");
    }
    nlohmann::json bad = to_json(catalog::gaussian());
    bad["metric"]["g"][0] = "cosh(";
    try {
        soliton_from_json(bad, "/soliton");
        FAIL();
    } catch (const ConfigError& e) {
        EXPECT_EQ(e.pointer(), "/soliton/metric/g");
    }
    nlohmann::json cls = to_json(catalog::gaussian());
    cls["class"] = "expanding";
    EXPECT_THROW(soliton_from_json(cls, "/soliton"), ConfigError);
}

TEST(Catalog, BuildWithParameters)
{
    const SolitonInstance g = soliton_from_json({{"catalog", "gaussian"}, {"params", {{"n", 3}, {"lambda", 2.0}}}}, "/s");
    EXPECT_EQ(g.dim(), 3);
    EXPECT_EQ(g.lambda, 2.0);
    EXPECT_NEAR(g.rho, 0.25, 1e-15);
    const SolitonInstance e = catalog::example_23(2, 4, 0.5, {0.0, 0.6, 0.0, 0.8});
    EXPECT_EQ(e.dim(), 6);
    EXPECT_NEAR(scalar_curvature(e.metric, std::vector<double>(6, 0.0)), -20.0, 1e-10);
}
