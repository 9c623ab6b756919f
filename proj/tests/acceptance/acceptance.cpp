// Acceptance suite: one PASS/FAIL line per criterion. Every tolerance and
// time limit is a named constant below; nothing is adjusted at run time.

#include "solitonlab/catalog.hpp"
#include "solitonlab/errors.hpp"
#include "solitonlab/geodesic.hpp"
#include "solitonlab/scenario.hpp"
#include "solitonlab/spectral.hpp"
#include "solitonlab/volume.hpp"

#include <json.hpp>

#include <chrono>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

using namespace solitonlab;
namespace fs = std::filesystem;

namespace {

// 1, 2: exactness of the Gaussian and product entries.
constexpr double kGaussianSoliton = 1e-10;
constexpr double kGaussianIdentities = 1e-8;
constexpr double kProductResidual = 1e-8;
constexpr int kIdentityPoints = 100;
constexpr double kIdentitySeconds = 5.0;
// 3: curvature engine.
constexpr double kBianchi = 1e-5;
constexpr double kClosedForm = 1e-8;
constexpr int kBianchiPoints = 20;
// 4: Riccati inequality.
constexpr int kRiccatiDirections = 16;
constexpr double kRiccatiRadius = 3.0;
constexpr double kRiccatiSlack = 1e-5;
constexpr double kRiccatiEquality = 1e-6;
// 5: ball volumes.
constexpr double kEuclideanVolume = 1e-3;
constexpr double kHemisphere = 2e-3;
constexpr double kRefinement = 2e-3;
constexpr double kVolumeSeconds = 60.0;
// 6, 7: volume bounds.
constexpr double kBoundMargin = 5e-3;   // relative
constexpr double kBoundEquality = 5e-3; // relative
constexpr double kWeightedVolume = 3e-3;
// 8: weighted growth bound.
constexpr double kGrowthR0 = 2.0;
constexpr double kGrowthValue = 3e-3;
// 9: spectral gap.
constexpr double kOuLow = 0.99;
constexpr double kOuHigh = 1.01;
constexpr double kOuSeconds = 30.0;
constexpr double kPairing = 1e-3;
constexpr double kPairLevel = 1e-2;
// 10: Example 2.3 finding.
constexpr double kScalarAtOrigin = -12.0;
constexpr double kScalarTolerance = 1e-9;

const std::vector<double> kBoundRadii{0.5, 1.0, 2.0};

double rel(double a, double b)
{
    return std::abs(a - b) / std::abs(b);
}

double seconds_since(std::chrono::steady_clock::time_point t0)
{
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

std::string g(double v)
{
    std::ostringstream os;
    os.precision(4);
    os << v;
    return os.str();
}

struct Outcome
{
    bool pass = true;
    std::vector<std::string> notes;

    void require(bool ok, const std::string& what)
    {
        if (!ok) {
            pass = false;
            notes.push_back("FAILED " + what);
        }
    }
    void note(const std::string& what) { notes.push_back(what); }
};

int run_cli(const std::string& args, const fs::path& out)
{
    const std::string cmd = "SOLITONLAB_OUT='" + out.string() + "' '" SOLITONLAB_CLI "' " + args + " > '" +
                            (out.string() + ".stdout") + "' 2>&1";
    const int status = std::system(cmd.c_str());
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::string slurp(const fs::path& p)
{
    std::ifstream in(p, std::ios::binary);
    std::ostringstream os;
    os << in.rdbuf();
    return os.str();
}

fs::path work_dir()
{
    const fs::path d = fs::temp_directory_path() / "solitonlab-acceptance";
    fs::create_directories(d);
    return d;
}

Outcome gaussian_exactness()
{
    Outcome o;
    const auto t0 = std::chrono::steady_clock::now();
    for (int n : {2, 3, 4}) {
        const SolitonInstance s = catalog::gaussian(n, 1.0);
        const auto pts = sample_points(s.metric, kIdentityPoints, 1000 + n);
        double worst = 0.0;
        for (const auto& x : pts)
            worst = std::max(worst, soliton_residual(s, x));
        const IdentityReport id = derived_identities_audit(s, pts);
        const double identities = std::max({id.max_trace, id.max_gradient, id.max_laplacian});
        o.require(worst <= kGaussianSoliton, "n=" + std::to_string(n) + " soliton residual " + g(worst));
        o.require(identities <= kGaussianIdentities, "n=" + std::to_string(n) + " identity residual " + g(identities));
        o.note("n=" + std::to_string(n) + ": " + g(worst) + "/" + g(identities));
    }
    const double t = seconds_since(t0);
    o.require(t < kIdentitySeconds, "runtime " + g(t) + " s");
    o.note(g(t) + " s");
    return o;
}

Outcome product_exactness()
{
    Outcome o;
    const auto t0 = std::chrono::steady_clock::now();
    const SolitonInstance s = catalog::product_einstein(3, 2, 0.25, 1.0);
    const double radius = s.parameters.at("sphere_radius").get<double>();
    o.require(std::abs(radius - 1.0 / std::sqrt(2.0)) < 1e-15, "fiber radius " + g(radius));
    const auto pts = sample_points(s.metric, kIdentityPoints, 2000);
    double worst = 0.0;
    for (const auto& x : pts)
        worst = std::max(worst, soliton_residual(s, x));
    const IdentityReport id = derived_identities_audit(s, pts);
    const double identities = std::max({id.max_trace, id.max_gradient, id.max_laplacian});
    o.require(worst <= kProductResidual, "soliton residual " + g(worst));
    o.require(identities <= kProductResidual, "identity residual " + g(identities));
    const double t = seconds_since(t0);
    o.require(t < kIdentitySeconds, "runtime " + g(t) + " s");
    o.note(g(worst) + "/" + g(identities) + ", " + g(t) + " s");
    return o;
}

Outcome curvature_engine()
{
    Outcome o;
    double worst = 0.0;
    for (const auto& s : catalog::builtin()) {
        double m = 0.0;
        for (const auto& x : sample_points(s.metric, kBianchiPoints, 3000)) {
            try {
                m = std::max(m, bianchi_defect(s.metric, x));
            } catch (const DomainError&) {
            }
        }
        o.require(m <= kBianchi, s.id + " Bianchi " + g(m));
        worst = std::max(worst, m);
    }
    o.note("max Bianchi " + g(worst));

    // Constant curvature: Ric = (n-1) K g and R = n (n-1) K.
    struct Model
    {
        SolitonInstance s;
        double K;
    };
    const std::vector<Model> models{{catalog::sphere(2, 1.0), 1.0},
                                    {catalog::sphere(3, 2.0), 0.25},
                                    {catalog::hyperbolic_plane(), -1.0}};
    double dev = 0.0;
    for (const auto& [s, K] : models) {
        const int n = s.dim();
        for (const auto& x : sample_points(s.metric, kBianchiPoints, 3100)) {
            const LocalGeometry geo = local_geometry(s.metric, x);
            dev = std::max(dev, std::abs(geo.scalar - n * (n - 1) * K));
            for (int i = 0; i < n; ++i)
                for (int j = 0; j < n; ++j)
                    dev = std::max(dev, std::abs(geo.ricci(i, j) - (n - 1) * K * geo.g(i, j)));
            const ClosedFormCurvature cf = closed_form_curvature(s.metric, x);
            dev = std::max(dev, std::abs(cf.scalar - geo.scalar));
        }
    }
    o.require(dev <= kClosedForm, "closed-form deviation " + g(dev));
    o.note("closed-form deviation " + g(dev));
    return o;
}

double riccati_max(const SolitonInstance& s, int& rays_out)
{
    double worst = -INFINITY;
    const auto dirs = direction_set(s.dim(), kRiccatiDirections, 4000);
    for (const auto& u : dirs) {
        const auto theta = frame_direction(s.metric, s.base_point, u);
        const GeodesicRay ray = shoot(s.metric, s.base_point, theta, kRiccatiRadius, kDefaultStep, &s.f);
        for (const auto& p : riccati_audit(ray))
            worst = std::max(worst, p.slack);
        ++rays_out;
    }
    return worst;
}

double slack_at(const MetricChart& m, std::vector<double> p, std::vector<double> theta, double r)
{
    const GeodesicRay ray = shoot(m, p, theta, r + 0.01);
    double best = INFINITY, slack = NAN;
    for (const auto& pt : riccati_audit(ray))
        if (std::abs(pt.r - r) < best) {
            best = std::abs(pt.r - r);
            slack = pt.slack;
        }
    return slack;
}

Outcome riccati()
{
    Outcome o;
    for (const auto& s : catalog::builtin()) {
        int rays = 0;
        const double m = riccati_max(s, rays);
        o.require(m <= kRiccatiSlack, s.id + " slack " + g(m));
        o.note(s.id + " " + g(m));
    }
    const MetricChart e2 = MetricChart::euclidean(2, Box::unbounded(2));
    const double flat = slack_at(e2, {0.0, 0.0}, {0.6, 0.8}, M_PI / 2);
    const SolitonInstance s2 = catalog::sphere(2, 1.0);
    const double round = slack_at(s2.metric, {1.0, 0.0}, {0.0, 1.0}, M_PI / 2);
    o.require(std::abs(flat) <= kRiccatiEquality, "Euclidean equality " + g(flat));
    o.require(std::abs(round) <= kRiccatiEquality, "sphere equality " + g(round));
    o.note("equality " + g(flat) + "/" + g(round));
    return o;
}

Outcome ball_volumes()
{
    Outcome o;
    const auto t0 = std::chrono::steady_clock::now();
    for (int n : {2, 3}) {
        const MetricChart e = MetricChart::euclidean(n, Box::unbounded(n));
        const std::vector<double> origin(static_cast<std::size_t>(n), 0.0);
        const std::vector<double> radii{0.5, 1.0, 2.0};
        const auto v = ball_volume(e, origin, radii, SphereGrid::standard(n));
        const double omega = n == 2 ? M_PI : 4.0 * M_PI / 3.0;
        for (std::size_t i = 0; i < radii.size(); ++i) {
            const double err = rel(v[i], omega * std::pow(radii[i], n));
            o.require(err <= kEuclideanVolume, "E^" + std::to_string(n) + " r=" + g(radii[i]) + " error " + g(err));
        }
    }
    const SolitonInstance s2 = catalog::sphere(2, 1.0);
    const std::vector<double> half{M_PI / 2};
    const double hemi = ball_volume(s2.metric, s2.base_point, half, SphereGrid::standard(2))[0];
    const double fine =
        ball_volume(s2.metric, s2.base_point, half, SphereGrid::standard(2, 1), kDefaultStep / 2)[0];
    o.require(rel(hemi, 2.0 * M_PI) <= kHemisphere, "hemisphere error " + g(rel(hemi, 2.0 * M_PI)));
    o.require(rel(fine, hemi) <= kRefinement, "refinement change " + g(rel(fine, hemi)));
    const double t = seconds_since(t0);
    o.require(t < kVolumeSeconds, "runtime " + g(t) + " s");
    o.note("hemisphere " + g(rel(hemi, 2.0 * M_PI)) + ", refinement " + g(rel(fine, hemi)) + ", " + g(t) + " s");
    return o;
}

Outcome unweighted_bound()
{
    Outcome o;
    for (const auto& s : {catalog::gaussian(2, 1.0), catalog::gaussian(3, 1.0), catalog::product_einstein()}) {
        const ComparisonReport rep = compare_volumes(s, kBoundRadii, SphereGrid::standard(s.dim()));
        o.require(rep.phi_hypotheses, s.id + " hypotheses");
        double worst = INFINITY;
        for (const auto& row : rep.rows) {
            const double m = row.margin_phi() / row.vol;
            worst = std::min(worst, m);
            o.require(m >= -kBoundMargin, s.id + " r=" + g(row.r) + " margin " + g(m));
            if (s.id == "gaussian")
                o.require(rel(row.bound_phi, row.vol) <= kBoundEquality,
                          "gaussian equality at r=" + g(row.r) + ": " + g(rel(row.bound_phi, row.vol)));
        }
        o.note(s.id + " n=" + std::to_string(s.dim()) + " min margin " + g(worst));
    }
    return o;
}

Outcome weighted_bound()
{
    Outcome o;
    for (const auto& s : catalog::builtin()) {
        VolumeOptions opt;
        if (s.dim() >= 5)
            opt.h = 1e-2;
        const ComparisonReport rep = compare_volumes(s, kBoundRadii, SphereGrid::standard(s.dim()), opt);
        double worst = INFINITY;
        for (const auto& row : rep.rows)
            worst = std::min(worst, row.margin_psi() / row.volf);
        if (s.exactness == Exactness::Exact) {
            o.require(worst >= -kBoundMargin, s.id + " min margin " + g(worst));
            o.note(s.id + " " + g(worst));
        } else {
            o.note(s.id + " (not a soliton, not gated) " + g(worst));
        }
        if (s.id == "gaussian") {
            for (const auto& row : rep.rows)
                o.require(rel(row.bound_psi, row.volf) <= kBoundEquality, "gaussian equality at r=" + g(row.r));
            const double oracle = 2.0 * M_PI * (1.0 - std::exp(-2.0));
            o.require(rel(rep.rows[2].volf, oracle) <= kWeightedVolume,
                      "Vol_f(2) error " + g(rel(rep.rows[2].volf, oracle)));
        }
    }
    return o;
}

Outcome growth_bound()
{
    Outcome o;
    const SolitonInstance s = catalog::gaussian(2, 1.0);
    const std::vector<double> radii{0.5, 1.0, 1.5, 2.0, 2.5, 3.0, 3.5, 4.0};
    VolumeOptions opt;
    opt.delta = 0.0;
    const ComparisonReport rep = compare_volumes(s, radii, SphereGrid::standard(2), opt);
    o.require(rep.growth && rep.growth->r0, "no r0 found");
    if (!rep.growth || !rep.growth->r0)
        return o;
    const double r0 = *rep.growth->r0;
    o.require(r0 <= kGrowthR0, "r0 " + g(r0));
    int checked = 0;
    for (const auto& row : rep.rows) {
        if (row.r < r0)
            continue;
        o.require(row.bound_growth && row.holds_growth && *row.holds_growth, "bound fails at r=" + g(row.r));
        ++checked;
    }
    const double oracle = 2.0 * M_PI * (std::exp(0.5) - 1.0);
    const auto& r1 = rep.rows[1];
    o.require(r1.bound_growth && rel(*r1.bound_growth, oracle) <= kGrowthValue, "bound value at r=1");
    o.note("r0 " + g(r0) + ", " + std::to_string(checked) + " radii, value error " +
           (r1.bound_growth ? g(rel(*r1.bound_growth, oracle)) : std::string("n/a")));
    return o;
}

Outcome spectral_gap()
{
    Outcome o;
    const auto t0 = std::chrono::steady_clock::now();
    const SpectralResult ou = smallest_nonzero(SpectralProblem::make(1, 10.0, 2001, "x1^2/2"), 2);
    const double t_ou = seconds_since(t0);
    const double l1 = ou.eigenvalues[1];
    o.require(l1 >= kOuLow && l1 <= kOuHigh, "OU lambda1 " + g(l1));
    o.require(t_ou < kOuSeconds, "OU runtime " + g(t_ou) + " s");
    o.note("OU " + std::to_string(l1) + " in " + g(t_ou) + " s");

    const SpectralProblem fine = SpectralProblem::make(2, 8.0, 401, "(x1^2 + x2^2)/2");
    const SpectralProblem coarse = SpectralProblem::make(2, 8.0, 201, "(x1^2 + x2^2)/2");
    const SpectralResult rf = smallest_nonzero(fine, 3);
    const SpectralResult rc = smallest_nonzero(coarse, 2);
    const double pair = std::abs(rf.eigenvalues[2] - rf.eigenvalues[1]);
    const double eps = std::abs(rf.eigenvalues[1] - rc.eigenvalues[1]) / 3.0;
    o.require(pair <= kPairing, "pairing " + g(pair));
    o.require(std::abs(rf.eigenvalues[1] - 1.0) <= kPairLevel, "level " + g(rf.eigenvalues[1]));
    o.require(rf.eigenvalues[1] >= 1.0 - eps, "lambda1 " + std::to_string(rf.eigenvalues[1]) + " below 1 - " + g(eps));
    o.note("2-d " + std::to_string(rf.eigenvalues[1]) + "/" + std::to_string(rf.eigenvalues[2]) + ", eps_N " + g(eps));

    const GapReport flat = gap_audit(catalog::euclidean_flat(1), SpectralProblem::make(1, 6.0, 201, "0"));
    bool decreasing = true;
    for (std::size_t i = 1; i < flat.sweep_lambda1.size(); ++i)
        decreasing = decreasing && flat.sweep_lambda1[i] < flat.sweep_lambda1[i - 1];
    o.require(decreasing, "flat lambda1 does not decrease with L");
    o.require(!flat.discrete_spectrum, "flat control not flagged");
    o.note("flat sweep " + g(flat.sweep_lambda1.front()) + " -> " + g(flat.sweep_lambda1.back()));
    return o;
}

Outcome incomplete_example()
{
    Outcome o;
    const fs::path out = work_dir() / "example-2.3";
    const int code = run_cli("run '" SOLITONLAB_SOURCE_DIR "/scenarios/example-2.3-audit.json'", out);
    o.require(code == 0, "exit code " + std::to_string(code));
    const auto report = nlohmann::json::parse(slurp(out / "report.json"), nullptr, false);
    if (report.is_discarded()) {
        o.require(false, "report.json unreadable");
        return o;
    }
    const auto& sb = report["tasks"]["schouten-bounds"]["report"];
    const double r0 = report["tasks"]["identity-audit"]["report"]["scalar_at_base"].get<double>();
    o.require(std::abs(r0 - kScalarAtOrigin) <= kScalarTolerance, "R(0) " + g(r0));
    o.require(sb["scalar_sign_violated"].get<bool>(), "violation flag missing");
    bool record = false;
    for (const auto& f : report["findings"])
        record = record || f["message"] == "R < 0, Prop 2.2 violated (incomplete metric)";
    o.require(record, "finding record missing");
    o.note("R(0) = " + g(r0) + ", exit " + std::to_string(code));
    return o;
}

Outcome determinism()
{
    Outcome o;
    const fs::path a = work_dir() / "gaussian-full-a";
    const fs::path b = work_dir() / "gaussian-full-b";
    const std::string cfg = "run '" SOLITONLAB_SOURCE_DIR "/scenarios/gaussian-full.json'";
    const int ca = run_cli(cfg, a);
    const int cb = run_cli(cfg, b);
    o.require(ca == 0 && cb == 0, "exit codes " + std::to_string(ca) + ", " + std::to_string(cb));
    const std::string ra = slurp(a / "report.json");
    const std::string rb = slurp(b / "report.json");
    o.require(!ra.empty() && ra == rb, "reports differ");
    const auto report = nlohmann::json::parse(ra, nullptr, false);
    if (!report.is_discarded()) {
        bool flags = true;
        for (const char* t : {"volume-13", "volume-14"})
            for (const auto& row : report["tasks"][t]["report"]["rows"])
                if (row["r"].get<double>() <= 2.0)
                    flags = flags && row["equal"].get<bool>();
        const double l1 = report["tasks"]["spectral"]["report"]["lambda1"].get<double>();
        o.require(flags, "equality flags");
        o.require(std::abs(l1 - 1.0) <= 0.01, "lambda1 " + g(l1));
    }
    o.note(std::to_string(ra.size()) + " bytes");
    return o;
}

} // namespace

int main()
{
    const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria{
        {"Gaussian soliton exactness", gaussian_exactness},
        {"product-Einstein exactness", product_exactness},
        {"curvature engine", curvature_engine},
        {"Riccati inequality", riccati},
        {"ball volumes", ball_volumes},
        {"unweighted volume bound", unweighted_bound},
        {"weighted volume bound", weighted_bound},
        {"weighted growth bound", growth_bound},
        {"spectral gap", spectral_gap},
        {"incomplete example finding", incomplete_example},
        {"determinism", determinism},
    };
    int failed = 0;
    for (std::size_t i = 0; i < criteria.size(); ++i) {
        Outcome o;
        try {
            o = criteria[i].second();
        } catch (const std::exception& e) {
            o.pass = false;
            o.notes.push_back(std::string("exception: ") + e.what());
        }
        std::cout << "criterion " << (i + 1) << ": " << (o.pass ? "PASS" : "FAIL") << "  " << criteria[i].first;
        std::string sep = "  [";
        for (const auto& n : o.notes) {
            std::cout << sep << n;
            sep = "; ";
        }
        std::cout << (o.notes.empty() ? "" : "]") << std::endl;
        if (!o.pass)
            ++failed;
    }
    std::cout << (criteria.size() - failed) << "/" << criteria.size() << " criteria passed" << std::endl;
    return failed == 0 ? 0 : 1;
}
