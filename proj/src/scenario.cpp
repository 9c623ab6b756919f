#include "solitonlab/scenario.hpp"

#include "solitonlab/catalog.hpp"
#include "solitonlab/config.hpp"
#include "solitonlab/errors.hpp"
#include "solitonlab/geodesic.hpp"
#include "solitonlab/parallel.hpp"
#include "solitonlab/spectral.hpp"
#include "solitonlab/volume.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <ctime>
#include <fstream>
#include <iomanip>
#include <limits>
#include <mutex>
#include <set>
#include <sstream>
#include <thread>

namespace solitonlab {

using nlohmann::json;

namespace {

constexpr double kSchoutenSpacing = 0.25; // radial spacing of bound samples
constexpr int kCsvStride = 10;            // keep every tenth ray sample in tables

const std::set<std::string> kRootKeys{"schema", "name", "soliton", "tasks", "parameters", "output"};
const std::set<std::string> kParameterKeys{"samples", "seed",  "r_grid", "h",        "sphere_level",
                                           "directions", "r_max", "delta", "spectral", "tolerances"};

void reject_unknown(const json& obj, const std::set<std::string>& known, const std::string& pointer)
{
    for (const auto& item : obj.items())
        if (!known.contains(item.key()))
            throw ConfigError(config::child(pointer, item.key()), "unknown field");
}

double positive(const json& obj, const std::string& key, const std::string& pointer, double fallback)
{
    const double v = config::optional<double>(obj, key, pointer, fallback);
    if (!(v > 0.0) || !std::isfinite(v))
        throw ConfigError(config::child(pointer, key), "must be positive");
    return v;
}

bool is_volume(const std::string& task)
{
    return task.rfind("volume-", 0) == 0;
}

std::string format_g(double v, int digits = 4)
{
    std::ostringstream os;
    os << std::setprecision(digits) << v;
    return os.str();
}

json finite_or_null(double v)
{
    return std::isfinite(v) ? json(v) : json(nullptr);
}

std::string timestamp()
{
    const auto now = std::chrono::system_clock::now();
    const std::time_t t = std::chrono::system_clock::to_time_t(now);
    std::tm tm{};
    gmtime_r(&t, &tm);
    const auto ms =
        std::chrono::duration_cast<std::chrono::milliseconds>(now.time_since_epoch()).count() % 1000;
    std::ostringstream os;
    os << std::put_time(&tm, "%Y-%m-%dT%H:%M:%S") << '.' << std::setw(3) << std::setfill('0') << ms << 'Z';
    return os.str();
}

// Named pass/fail check. Hard checks gate the exit code for every entry;
// the others only for exact entries and become findings otherwise.
struct Check
{
    std::string name;
    bool ok = true;
    bool hard = false;
    std::string detail;
};

void settle(TaskOutcome& out, const SolitonInstance& s, const std::vector<Check>& checks)
{
    const bool exact = s.exactness == Exactness::Exact;
    bool failed = false;
    json cj = json::object();
    for (const auto& c : checks) {
        cj[c.name] = c.ok;
        if (c.ok)
            continue;
        if (c.hard || exact) {
            out.failures.push_back(c.name + ": " + c.detail);
            failed = true;
        } else {
            out.findings.push_back({out.task, c.name + " does not hold: " + c.detail, json::object()});
        }
    }
    out.report["checks"] = cj;
    if (failed)
        out.status = "fail";
    else if (!out.findings.empty())
        out.status = "finding";
    else
        out.status = "pass";
}

std::string point_columns(int n)
{
    std::string s;
    for (int i = 1; i <= n; ++i)
        s += "x" + std::to_string(i) + ",";
    return s;
}

void write_point(std::ostream& os, const std::vector<double>& x)
{
    for (double c : x)
        os << c << ',';
}

double scalar_at_base(const SolitonInstance& s)
{
    return local_geometry(s.metric, s.base_point).scalar;
}

// Samples that failed evaluation (chart singularities inside the sample box)
// are skipped and counted.
std::vector<std::vector<double>> audit_points(const Scenario& sc, int& skipped)
{
    std::vector<std::vector<double>> keep;
    skipped = 0;
    for (auto& x : sample_points(sc.soliton.metric, sc.params.samples, sc.params.seed)) {
        try {
            (void)local_geometry(sc.soliton.metric, x);
            (void)sc.soliton.f.evaluate(x);
            keep.push_back(std::move(x));
        } catch (const DomainError&) {
            ++skipped;
        } catch (const SingularMetric&) {
            ++skipped;
        }
    }
    return keep;
}

std::vector<GeodesicRay> audit_rays(const Scenario& sc, const Expression* f, int workers)
{
    const SolitonInstance& s = sc.soliton;
    const auto dirs = direction_set(s.dim(), sc.params.directions, sc.params.seed);
    std::vector<GeodesicRay> rays(dirs.size());
    parallel_for(static_cast<int>(dirs.size()), workers, [&](int i) {
        const auto theta = frame_direction(s.metric, s.base_point, dirs[static_cast<std::size_t>(i)]);
        rays[static_cast<std::size_t>(i)] = shoot(s.metric, s.base_point, theta, sc.params.r_max, sc.params.h, f);
    });
    return rays;
}

TaskOutcome identity_task(const Scenario& sc)
{
    const SolitonInstance& s = sc.soliton;
    const Tolerances& tol = sc.params.tolerances;
    TaskOutcome out;
    out.task = "identity-audit";
    int skipped = 0;
    const auto points = audit_points(sc, skipped);

    double max_soliton = 0.0;
    double max_bianchi = 0.0;
    std::optional<double> max_closed_form;
    std::ostringstream csv;
    csv << std::setprecision(17) << point_columns(s.dim()) << "soliton,bianchi\n";
    for (const auto& x : points) {
        const double res = soliton_residual(s, x);
        const double bianchi = bianchi_defect(s.metric, x);
        max_soliton = std::max(max_soliton, res);
        max_bianchi = std::max(max_bianchi, bianchi);
        write_point(csv, x);
        csv << res << ',' << bianchi << '\n';
        if (!s.metric.tag())
            continue;
        try {
            const ClosedFormCurvature cf = closed_form_curvature(s.metric, x);
            const LocalGeometry geo = local_geometry(s.metric, x);
            double dev = std::abs(cf.scalar - geo.scalar) / std::max(1.0, std::abs(cf.scalar));
            if (cf.ricci)
                for (int i = 0; i < s.dim(); ++i)
                    for (int j = 0; j < s.dim(); ++j)
                        dev = std::max(dev, std::abs((*cf.ricci)(i, j) - geo.ricci(i, j)) /
                                                std::max(1.0, std::abs((*cf.ricci)(i, j))));
            max_closed_form = std::max(max_closed_form.value_or(0.0), dev);
        } catch (const NotApplicable&) {
        }
    }
    const double tag_dev = tag_consistency(s.metric, sc.params.samples, sc.params.seed);
    const double r_base = scalar_at_base(s);

    out.report["points"] = points.size();
    out.report["skipped_points"] = skipped;
    out.report["max_soliton_residual"] = max_soliton;
    out.report["max_bianchi_defect"] = max_bianchi;
    out.report["max_closed_form_deviation"] = max_closed_form ? json(*max_closed_form) : json(nullptr);
    out.report["tag_consistency"] = tag_dev;
    out.report["scalar_at_base"] = r_base;
    out.report["base_point"] = s.base_point;

    if (s.claims) {
        std::vector<std::vector<double>> probe{s.base_point};
        for (std::size_t i = 0; i < std::min<std::size_t>(points.size(), 4); ++i)
            probe.push_back(points[i]);
        json cj = json::array();
        for (const auto& c : claimed_value_findings(s, probe)) {
            json e;
            e["point"] = c.point;
            e["scalar_computed"] = c.scalar_computed;
            e["scalar_claimed"] = c.scalar_claimed ? json(*c.scalar_claimed) : json(nullptr);
            e["ric_f_computed"] = c.ric_f_computed;
            e["ric_f_trace"] = c.ric_f_trace;
            e["ric_f_claimed"] = c.ric_f_claimed ? json(*c.ric_f_claimed) : json(nullptr);
            e["ric_f_claim_residual"] = c.ric_f_claim_residual ? json(*c.ric_f_claim_residual) : json(nullptr);
            e["soliton_residual"] = c.soliton_residual;
            cj.push_back(e);
        }
        out.report["claims"] = cj;
        const json& base = cj.front();
        if (!base["scalar_claimed"].is_null() &&
            std::abs(base["scalar_computed"].get<double>() - base["scalar_claimed"].get<double>()) > tol.curvature)
            out.findings.push_back({out.task, "claimed scalar curvature differs from the computed one at the base point",
                                    base});
    }

    std::vector<Check> checks;
    checks.push_back({"soliton_residual", max_soliton <= tol.soliton, false,
                      "max " + format_g(max_soliton) + " > " + format_g(tol.soliton)});
    checks.push_back({"bianchi", max_bianchi <= tol.bianchi, true,
                      "max " + format_g(max_bianchi) + " > " + format_g(tol.bianchi)});
    if (max_closed_form)
        checks.push_back({"closed_form_curvature", *max_closed_form <= tol.curvature, true,
                          "max " + format_g(*max_closed_form) + " > " + format_g(tol.curvature)});
    checks.push_back({"structure_tag", tag_dev <= tol.curvature, true, "deviation " + format_g(tag_dev)});
    settle(out, s, checks);
    out.tables.emplace_back("identity.csv", csv.str());
    out.summary = "soliton residual " + format_g(max_soliton, 3) + ", Bianchi " + format_g(max_bianchi, 3) +
                  ", R(p) " + format_g(r_base, 6);
    return out;
}

TaskOutcome derived_identities_task(const Scenario& sc)
{
    const SolitonInstance& s = sc.soliton;
    const Tolerances& tol = sc.params.tolerances;
    TaskOutcome out;
    out.task = "lemma21";
    int skipped = 0;
    const auto points = audit_points(sc, skipped);
    const IdentityReport rep = derived_identities_audit(s, points);

    std::ostringstream csv;
    csv << std::setprecision(17) << point_columns(s.dim()) << "soliton,trace,gradient,laplacian\n";
    for (const auto& p : rep.points) {
        write_point(csv, p.point);
        csv << p.soliton << ',' << p.trace << ',' << p.gradient << ',' << p.laplacian << '\n';
    }
    out.report["points"] = rep.points.size();
    out.report["skipped_points"] = skipped;
    out.report["max"] = {{"soliton", rep.max_soliton},
                         {"trace", rep.max_trace},
                         {"gradient", rep.max_gradient},
                         {"laplacian", rep.max_laplacian}};
    out.report["mean"] = {{"soliton", rep.mean_soliton},
                          {"trace", rep.mean_trace},
                          {"gradient", rep.mean_gradient},
                          {"laplacian", rep.mean_laplacian}};

    std::vector<Check> checks;
    checks.push_back({"soliton_residual", rep.max_soliton <= tol.soliton, false, format_g(rep.max_soliton)});
    checks.push_back({"trace_identity", rep.max_trace <= tol.identities, false, format_g(rep.max_trace)});
    checks.push_back({"gradient_identity", rep.max_gradient <= tol.identities, false, format_g(rep.max_gradient)});
    checks.push_back({"laplacian_identity", rep.max_laplacian <= tol.identities, false, format_g(rep.max_laplacian)});
    settle(out, s, checks);
    out.tables.emplace_back("lemma21.csv", csv.str());
    out.summary = "max identity residual " + format_g(rep.max_residual(), 3);
    return out;
}

TaskOutcome schouten_task(const Scenario& sc, int workers)
{
    const SolitonInstance& s = sc.soliton;
    TaskOutcome out;
    out.task = "schouten-bounds";
    if (!s.is_schouten())
        throw NotSchouten("rho is not 1/(2(n-1))");

    const auto rays = audit_rays(sc, nullptr, workers);
    std::vector<RadialSample> samples;
    for (const auto& ray : rays) {
        const double cut = cut_radius(ray);
        const int every = std::max(1, static_cast<int>(std::lround(kSchoutenSpacing / ray.h)));
        for (std::size_t i = static_cast<std::size_t>(every); i < ray.samples.size();
             i += static_cast<std::size_t>(every))
            if (ray.samples[i].r < cut)
                samples.push_back({ray.samples[i].r, ray.samples[i].x});
    }
    const SchoutenReport rep = schouten_bounds_audit(s, samples);
    const double r_base = scalar_at_base(s);

    std::ostringstream csv;
    csv << std::setprecision(17) << "r," << point_columns(s.dim())
        << "R,f_minus_f0,grad_f2,r_lambda_lower,r_lambda_upper,grad_lower,grad_upper\n";
    for (const auto& m : rep.samples) {
        csv << m.r << ',';
        write_point(csv, m.point);
        csv << m.scalar << ',' << m.f_minus_f0 << ',' << m.grad_f2 << ',' << m.r_lambda_lower << ','
            << m.r_lambda_upper << ',' << m.grad_lower << ',' << m.grad_upper << '\n';
    }

    const bool sign_violated = !rep.scalar_bounds_hold && rep.negative_scalar_seen && s.lambda != 0.0;
    out.report["samples"] = rep.samples.size();
    out.report["f0"] = rep.f0;
    out.report["f0_from_hint"] = rep.f0_from_hint;
    out.report["min_margin"] = {{"r_lambda_lower", rep.min_r_lambda_lower},
                                {"r_lambda_upper", rep.min_r_lambda_upper},
                                {"grad_lower", rep.min_grad_lower},
                                {"grad_upper", rep.min_grad_upper}};
    out.report["scalar_bounds_hold"] = rep.scalar_bounds_hold;
    out.report["gradient_bounds_hold"] = rep.gradient_bounds_hold;
    out.report["negative_scalar_seen"] = rep.negative_scalar_seen;
    out.report["scalar_sign_violated"] = sign_violated;
    out.report["scalar_at_base"] = r_base;
    out.report["growth"] = {{"a1", rep.a1 ? json(*rep.a1) : json(nullptr)},
                            {"a2", rep.a2 ? json(*rep.a2) : json(nullptr)},
                            {"samples", rep.growth_samples}};

    if (sign_violated) {
        double min_r = std::numeric_limits<double>::infinity();
        for (const auto& m : rep.samples)
            min_r = std::min(min_r, m.scalar);
        out.findings.push_back({out.task, "R < 0, Prop 2.2 violated (incomplete metric)",
                                {{"base_point", s.base_point},
                                 {"scalar_at_base", r_base},
                                 {"min_scalar", min_r},
                                 {"lambda", s.lambda}}});
    }
    std::vector<Check> checks;
    checks.push_back({"scalar_bounds", rep.scalar_bounds_hold, false,
                      "min margins " + format_g(rep.min_r_lambda_lower) + ", " + format_g(rep.min_r_lambda_upper)});
    checks.push_back({"gradient_bounds", rep.gradient_bounds_hold, false,
                      "min margins " + format_g(rep.min_grad_lower) + ", " + format_g(rep.min_grad_upper)});
    settle(out, s, checks);
    out.tables.emplace_back("schouten.csv", csv.str());
    out.summary = std::to_string(rep.samples.size()) + " samples, R lambda margin " +
                  format_g(rep.min_r_lambda_lower, 3) + ", gradient margin " + format_g(rep.min_grad_lower, 3);
    return out;
}

TaskOutcome riccati_task(const Scenario& sc, int workers)
{
    const SolitonInstance& s = sc.soliton;
    TaskOutcome out;
    out.task = "riccati";
    const auto rays = audit_rays(sc, &s.f, workers);

    std::ostringstream csv;
    csv << std::setprecision(17) << "direction,r,slack\n";
    json per = json::array();
    double max_slack = -std::numeric_limits<double>::infinity();
    std::size_t audited = 0;
    for (std::size_t d = 0; d < rays.size(); ++d) {
        const auto pts = riccati_audit(rays[d]);
        double m = -std::numeric_limits<double>::infinity();
        for (std::size_t i = 0; i < pts.size(); ++i) {
            m = std::max(m, pts[i].slack);
            if (i % kCsvStride == 0)
                csv << d << ',' << pts[i].r << ',' << pts[i].slack << '\n';
        }
        audited += pts.size();
        max_slack = std::max(max_slack, m);
        per.push_back({{"direction", rays[d].direction},
                       {"conjugate_radius", finite_or_null(cut_radius(rays[d]))},
                       {"end_radius", rays[d].end_radius()},
                       {"hit_boundary", rays[d].hit_boundary},
                       {"max_energy_drift", rays[d].max_energy_drift},
                       {"max_slack", finite_or_null(m)},
                       {"samples", pts.size()}});
    }
    out.report["rays"] = per;
    out.report["max_slack"] = finite_or_null(max_slack);
    out.report["audited_samples"] = audited;
    out.report["r_max"] = sc.params.r_max;

    std::vector<Check> checks;
    checks.push_back({"riccati_slack", max_slack <= sc.params.tolerances.riccati, true,
                      "max slack " + format_g(max_slack) + " > " + format_g(sc.params.tolerances.riccati)});
    checks.push_back({"samples_audited", audited > 0, true, "no sample before the conjugate radius"});
    settle(out, s, checks);
    out.tables.emplace_back("riccati.csv", csv.str());
    std::ostringstream ray_csv;
    write_ray_csv(ray_csv, rays.front());
    out.tables.emplace_back("ray.csv", ray_csv.str());
    out.summary = std::to_string(rays.size()) + " rays, max slack " + format_g(max_slack, 3);
    return out;
}

TaskOutcome spectral_task(const Scenario& sc, int workers)
{
    const SolitonInstance& s = sc.soliton;
    TaskOutcome out;
    out.task = "spectral";
    SolverOptions opt;
    opt.workers = workers;
    const SpectralProblem p = SpectralProblem::make(s.dim(), sc.params.spectral_L, sc.params.spectral_N, "0");
    const GapReport rep = gap_audit(s, p, opt);
    out.report = rep.to_json();
    out.report["N"] = sc.params.spectral_N;
    out.report["L"] = sc.params.spectral_L;

    std::ostringstream csv;
    csv << std::setprecision(17) << "L,lambda1,min_gap\n";
    for (std::size_t i = 0; i < rep.sweep_L.size(); ++i)
        csv << rep.sweep_L[i] << ',' << rep.sweep_lambda1[i] << ',' << rep.sweep_min_gap[i] << '\n';

    std::vector<Check> checks;
    if (s.lambda > 0.0)
        checks.push_back({"gap_bound", rep.bound_holds, false,
                          "lambda1 " + format_g(rep.lambda1, 8) + " < lambda " + format_g(s.lambda)});
    settle(out, s, checks);
    out.tables.emplace_back("spectral.csv", csv.str());
    out.summary = "lambda1 " + format_g(rep.lambda1, 6) + " (lambda " + format_g(s.lambda) + ", error " +
                  format_g(rep.refinement_error, 2) + (rep.discrete_spectrum ? ")" : ", no gap)");
    return out;
}

json row_json(const ComparisonRow& r, const std::string& which)
{
    json j;
    j["r"] = r.r;
    if (which == "13") {
        j["vol"] = r.vol;
        j["bound"] = r.bound_phi;
        j["margin"] = r.margin_phi();
        j["equal"] = r.equal_phi;
        j["holds"] = r.holds_phi;
    } else if (which == "14") {
        j["volf"] = r.volf;
        j["bound"] = r.bound_psi;
        j["margin"] = r.margin_psi();
        j["equal"] = r.equal_psi;
        j["holds"] = r.holds_psi;
    } else {
        j["volf"] = r.volf;
        j["bound"] = r.bound_growth ? json(*r.bound_growth) : json(nullptr);
        j["margin"] = r.bound_growth ? json(*r.bound_growth - r.volf) : json(nullptr);
        j["holds"] = r.holds_growth ? json(*r.holds_growth) : json(nullptr);
    }
    return j;
}

std::vector<TaskOutcome> volume_tasks(const Scenario& sc, int workers)
{
    const SolitonInstance& s = sc.soliton;
    VolumeOptions opt;
    opt.h = sc.params.h;
    opt.workers = workers;
    opt.delta = sc.params.delta;
    const SphereGrid grid = SphereGrid::standard(s.dim(), sc.params.sphere_level);
    const ComparisonReport rep = compare_volumes(s, sc.params.r_grid, grid, opt);

    json common;
    common["directions"] = rep.directions;
    common["h"] = rep.h;
    common["conjugate_rays"] = rep.conjugate_rays;
    common["monotone"] = rep.monotone;
    common["min_scalar"] = rep.min_scalar;
    common["warnings"] = rep.warnings;

    std::vector<TaskOutcome> outs;
    bool table_attached = false;
    for (const auto& task : sc.tasks) {
        if (!is_volume(task))
            continue;
        TaskOutcome out;
        out.task = task;
        out.report = common;
        const std::string which = task.substr(7);
        json rows = json::array();
        for (const auto& r : rep.rows)
            rows.push_back(row_json(r, which));
        out.report["rows"] = rows;
        std::vector<Check> checks;
        if (which == "13") {
            out.report["hypotheses"] = rep.phi_hypotheses;
            bool all = true;
            for (const auto& r : rep.rows)
                all = all && r.holds_phi;
            if (rep.phi_hypotheses)
                checks.push_back({"bound", all, false, "volume exceeds the bound"});
            if (!rep.phi_hypotheses)
                out.summary = "hypotheses not met; ";
            out.summary += "bound " + format_g(rep.rows.back().bound_phi, 6) + " vs vol " +
                           format_g(rep.rows.back().vol, 6) + " at r = " + format_g(rep.rows.back().r);
        } else if (which == "14") {
            bool all = true;
            for (const auto& r : rep.rows)
                all = all && r.holds_psi;
            checks.push_back({"bound", all, false, "weighted volume exceeds the bound"});
            out.summary = "bound " + format_g(rep.rows.back().bound_psi, 6) + " vs vol_f " +
                          format_g(rep.rows.back().volf, 6) + " at r = " + format_g(rep.rows.back().r);
        } else {
            out.report["hypotheses"] = rep.growth_hypotheses;
            if (rep.growth) {
                const GrowthBound& c = *rep.growth;
                out.report["delta"] = c.delta;
                out.report["c"] = c.c;
                out.report["a"] = c.a ? json(*c.a) : json(nullptr);
                out.report["r0"] = c.r0 ? json(*c.r0) : json(nullptr);
            }
            bool all = true;
            int checked = 0;
            for (const auto& r : rep.rows)
                if (r.holds_growth) {
                    all = all && *r.holds_growth;
                    ++checked;
                }
            out.report["rows_checked"] = checked;
            if (rep.growth_hypotheses)
                checks.push_back({"bound", all, false, "weighted volume exceeds the growth bound"});
            if (rep.growth && rep.growth->r0)
                out.summary = "r0 " + format_g(*rep.growth->r0) + ", " + std::to_string(checked) + " radii checked";
            else
                out.summary = "no admissible r0";
        }
        settle(out, s, checks);
        if ((which == "13" && !rep.phi_hypotheses) || (which == "15" && !rep.growth_hypotheses))
            if (out.status == "pass")
                out.status = "not-applicable";
        if (!table_attached) {
            std::ostringstream csv;
            csv << std::setprecision(17);
            rep.write_csv(csv);
            out.tables.emplace_back("volume.csv", csv.str());
            table_attached = true;
        }
        outs.push_back(std::move(out));
    }
    return outs;
}

class Log
{
public:
    explicit Log(std::ostream* out) : out_(out) {}

    void line(const std::string& msg)
    {
        if (!out_)
            return;
        std::lock_guard<std::mutex> lock(mu_);
        *out_ << timestamp() << ' ' << msg << '\n';
        out_->flush();
    }

private:
    std::ostream* out_;
    std::mutex mu_;
};

} // namespace

const std::vector<std::string>& task_names()
{
    static const std::vector<std::string> names{"identity-audit", "lemma21",   "riccati",   "schouten-bounds",
                                                "spectral",       "volume-13", "volume-14", "volume-15"};
    return names;
}

Resolution resolution_from_string(const std::string& name)
{
    if (name == "low")
        return Resolution::Low;
    if (name == "default")
        return Resolution::Default;
    if (name == "high")
        return Resolution::High;
    throw ConfigError("", "unknown resolution '" + name + "'");
}

Scenario scenario_from_json(const json& j)
{
    using namespace config;
    if (!j.is_object())
        throw ConfigError("", "expected an object");
    reject_unknown(j, kRootKeys, "");
    if (j.contains("schema") && optional<int>(j, "schema", "", kReportSchema) != kReportSchema)
        throw ConfigError("/schema", "unsupported schema version");

    Scenario sc;
    sc.name = required<std::string>(j, "name", "");
    if (sc.name.empty() || sc.name.find('/') != std::string::npos)
        throw ConfigError("/name", "must be a non-empty name without '/'");
    if (!j.contains("soliton"))
        throw ConfigError("/soliton", "required field is missing");
    sc.soliton = soliton_from_json(j.at("soliton"), "/soliton");
    verify_exactness(sc.soliton, "/soliton");

    if (!j.contains("tasks") || !j.at("tasks").is_array() || j.at("tasks").empty())
        throw ConfigError("/tasks", "expected a non-empty array of task names");
    std::set<std::string> requested;
    for (std::size_t i = 0; i < j.at("tasks").size(); ++i) {
        const std::string t = as<std::string>(j.at("tasks")[i], child("/tasks", i));
        const auto& names = task_names();
        if (std::find(names.begin(), names.end(), t) == names.end())
            throw ConfigError(child("/tasks", i), "unknown task '" + t + "'");
        requested.insert(t);
    }
    for (const auto& t : task_names())
        if (requested.contains(t))
            sc.tasks.push_back(t);

    const json pj = j.contains("parameters") ? j.at("parameters") : json::object();
    const std::string pp = "/parameters";
    if (!pj.is_object())
        throw ConfigError(pp, "expected an object");
    reject_unknown(pj, kParameterKeys, pp);
    ScenarioParameters& par = sc.params;
    par.samples = optional<int>(pj, "samples", pp, par.samples);
    if (par.samples < 1)
        throw ConfigError(child(pp, "samples"), "must be at least 1");
    const long long seed = optional<long long>(pj, "seed", pp, static_cast<long long>(par.seed));
    if (seed < 0)
        throw ConfigError(child(pp, "seed"), "must be non-negative");
    par.seed = static_cast<std::uint64_t>(seed);
    par.h = positive(pj, "h", pp, par.h);
    par.sphere_level = optional<int>(pj, "sphere_level", pp, par.sphere_level);
    if (par.sphere_level < -2 || par.sphere_level > 3)
        throw ConfigError(child(pp, "sphere_level"), "must lie in [-2, 3]");
    par.directions = optional<int>(pj, "directions", pp, par.directions);
    if (par.directions < 1)
        throw ConfigError(child(pp, "directions"), "must be at least 1");
    par.r_max = positive(pj, "r_max", pp, par.r_max);
    if (pj.contains("delta") && !pj.at("delta").is_null())
        par.delta = as<double>(pj.at("delta"), child(pp, "delta"));

    if (pj.contains("r_grid")) {
        const std::string rp = child(pp, "r_grid");
        if (!pj.at("r_grid").is_array() || pj.at("r_grid").empty())
            throw ConfigError(rp, "expected a non-empty array of radii");
        for (std::size_t i = 0; i < pj.at("r_grid").size(); ++i) {
            const double r = as<double>(pj.at("r_grid")[i], child(rp, i));
            if (!(r > 0.0) || (!par.r_grid.empty() && r <= par.r_grid.back()))
                throw ConfigError(child(rp, i), "radii must be positive and strictly increasing");
            par.r_grid.push_back(r);
        }
    }
    const bool wants_volume = std::any_of(sc.tasks.begin(), sc.tasks.end(), is_volume);
    if (wants_volume && par.r_grid.empty())
        throw ConfigError(child(pp, "r_grid"), "required by the volume tasks");

    const bool wants_spectral = requested.contains("spectral");
    if (pj.contains("spectral")) {
        const std::string sp = child(pp, "spectral");
        const json& sj = pj.at("spectral");
        if (!sj.is_object())
            throw ConfigError(sp, "expected an object");
        reject_unknown(sj, {"N", "L"}, sp);
        par.spectral_N = required<int>(sj, "N", sp);
        par.spectral_L = required<double>(sj, "L", sp);
        if (par.spectral_N < 51 || par.spectral_N % 2 == 0)
            throw ConfigError(child(sp, "N"), "must be odd and at least 51");
        if (!(par.spectral_L > 0.0))
            throw ConfigError(child(sp, "L"), "must be positive");
    } else if (wants_spectral) {
        throw ConfigError(child(pp, "spectral"), "required by the spectral task");
    }

    if (pj.contains("tolerances")) {
        const std::string tp = child(pp, "tolerances");
        const json& tj = pj.at("tolerances");
        if (!tj.is_object())
            throw ConfigError(tp, "expected an object");
        reject_unknown(tj, {"soliton", "identities", "bianchi", "curvature", "riccati"}, tp);
        Tolerances& t = par.tolerances;
        t.soliton = positive(tj, "soliton", tp, t.soliton);
        t.identities = positive(tj, "identities", tp, t.identities);
        t.bianchi = positive(tj, "bianchi", tp, t.bianchi);
        t.curvature = positive(tj, "curvature", tp, t.curvature);
        t.riccati = positive(tj, "riccati", tp, t.riccati);
    }
    sc.output = optional<std::string>(j, "output", "", "");
    return sc;
}

Scenario load_scenario(const std::filesystem::path& path)
{
    std::ifstream in(path);
    if (!in)
        throw ConfigError("", "cannot open " + path.string());
    json j;
    try {
        j = json::parse(in);
    } catch (const json::parse_error& e) {
        throw ConfigError("", std::string("malformed JSON: ") + e.what());
    }
    return scenario_from_json(j);
}

void apply_resolution(Scenario& s, Resolution r)
{
    ScenarioParameters& p = s.params;
    switch (r) {
    case Resolution::Default:
        return;
    case Resolution::Low:
        p.h *= 2.0;
        p.sphere_level = std::max(-2, p.sphere_level - 1);
        if (p.spectral_N > 0)
            p.spectral_N = std::max(51, 2 * ((p.spectral_N - 1) / 4) + 1);
        return;
    case Resolution::High:
        p.h /= 2.0;
        p.sphere_level = std::min(3, p.sphere_level + 1);
        if (p.spectral_N > 0)
            p.spectral_N = 2 * (p.spectral_N - 1) + 1;
        return;
    }
}

json RunResult::report() const
{
    json j;
    j["schema"] = kReportSchema;
    j["scenario"] = scenario;
    j["exit_code"] = exit_code;
    json tasks_j = json::object();
    json findings = json::array();
    for (const auto& t : tasks) {
        json tj;
        tj["status"] = t.status;
        tj["report"] = t.report;
        tj["failures"] = t.failures;
        tj["summary"] = t.summary;
        json tables = json::array();
        for (const auto& tab : t.tables)
            tables.push_back(tab.first);
        tj["tables"] = tables;
        tasks_j[t.task] = tj;
        for (const auto& f : t.findings)
            findings.push_back({{"task", f.task}, {"message", f.message}, {"data", f.data}});
    }
    j["tasks"] = tasks_j;
    j["findings"] = findings;
    return j;
}

void RunResult::write_summary(std::ostream& out) const
{
    out << "scenario " << scenario << '\n';
    for (const auto& t : tasks) {
        out << "  " << std::left << std::setw(17) << t.task << std::setw(16) << t.status << t.summary << '\n';
        for (const auto& f : t.failures)
            out << "      failed: " << f << '\n';
        for (const auto& f : t.findings)
            out << "      finding: " << f.message << '\n';
    }
    out << (exit_code == 0 ? "result: pass" : "result: FAIL") << '\n';
}

RunResult run_scenario(const Scenario& sc, const RunOptions& opt)
{
    const int hw = static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
    const int workers = opt.workers > 0 ? opt.workers : hw;
    Log log(opt.log);

    // Volume tasks share one set of rays and run as a single unit.
    std::vector<std::string> units;
    for (const auto& t : sc.tasks)
        if (!is_volume(t))
            units.push_back(t);
    if (std::any_of(sc.tasks.begin(), sc.tasks.end(), is_volume))
        units.push_back("volume");

    const int outer = opt.parallel ? std::min<int>(workers, static_cast<int>(units.size())) : 1;
    const int inner = opt.parallel ? 1 : workers;
    std::vector<std::vector<TaskOutcome>> results(units.size());
    log.line("scenario " + sc.name + " start, " + std::to_string(units.size()) + " units");
    parallel_for(static_cast<int>(units.size()), outer, [&](int u) {
        const std::string& unit = units[static_cast<std::size_t>(u)];
        log.line(unit + " start");
        std::vector<TaskOutcome>& out = results[static_cast<std::size_t>(u)];
        try {
            if (unit == "identity-audit")
                out.push_back(identity_task(sc));
            else if (unit == "lemma21")
                out.push_back(derived_identities_task(sc));
            else if (unit == "schouten-bounds")
                out.push_back(schouten_task(sc, inner));
            else if (unit == "riccati")
                out.push_back(riccati_task(sc, inner));
            else if (unit == "spectral")
                out.push_back(spectral_task(sc, inner));
            else
                out = volume_tasks(sc, inner);
        } catch (const std::exception& e) {
            const bool not_applicable =
                dynamic_cast<const NotApplicable*>(&e) || dynamic_cast<const NotSchouten*>(&e);
            out.clear();
            for (const auto& t : sc.tasks) {
                if (t != unit && !(unit == "volume" && is_volume(t)))
                    continue;
                TaskOutcome o;
                o.task = t;
                o.status = not_applicable ? "not-applicable" : "error";
                o.report["reason"] = e.what();
                o.summary = e.what();
                if (!not_applicable) {
                    if (sc.soliton.exactness == Exactness::Exact)
                        o.failures.push_back(std::string("task error: ") + e.what());
                    else
                        o.findings.push_back({t, std::string("task error: ") + e.what(), json::object()});
                }
                out.push_back(std::move(o));
            }
        }
        log.line(unit + " done");
    });

    RunResult r;
    r.scenario = sc.name;
    for (auto& group : results)
        for (auto& t : group)
            r.tasks.push_back(std::move(t));
    std::sort(r.tasks.begin(), r.tasks.end(), [](const TaskOutcome& a, const TaskOutcome& b) { return a.task < b.task; });
    for (const auto& t : r.tasks)
        if (!t.failures.empty())
            r.exit_code = 1;
    log.line("scenario " + sc.name + " done, exit " + std::to_string(r.exit_code));
    return r;
}

void write_outputs(const RunResult& r, const std::filesystem::path& dir)
{
    std::filesystem::create_directories(dir);
    {
        std::ofstream out(dir / "report.json");
        out << r.report().dump(2) << '\n';
        if (!out)
            throw Error("cannot write " + (dir / "report.json").string());
    }
    for (const auto& t : r.tasks)
        for (const auto& [name, text] : t.tables) {
            std::ofstream out(dir / name);
            out << text;
            if (!out)
                throw Error("cannot write " + (dir / name).string());
        }
}

} // namespace solitonlab
