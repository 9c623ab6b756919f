#include "solitonlab/catalog.hpp"

#include "solitonlab/config.hpp"
#include "solitonlab/errors.hpp"

#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>

namespace solitonlab {

namespace {

using nlohmann::json;

std::string num(double v)
{
    const std::string s = format_literal(v);
    return v < 0.0 ? "(" + s + ")" : s;
}

std::string squared_norm(int first, int last)
{
    std::string s;
    for (int i = first; i <= last; ++i) {
        if (!s.empty())
            s += " + ";
        s += "x" + std::to_string(i) + "^2";
    }
    return s.empty() ? "0" : s;
}

// The point at infinity of a stereographic chart is at finite distance; rays
// are cut off at |x_i| = 10a, which leaves room for every ball of radius
// below 2a atan(10).
Box stereographic_domain(int n, double a)
{
    Box b;
    b.axes.assign(static_cast<std::size_t>(n), Interval{-10.0 * a, 10.0 * a, false, false});
    return b;
}

std::string stereographic_phi(int first, int last, double a)
{
    const std::string a2 = num(a * a);
    return "log(2*" + a2 + "/(" + a2 + " + " + squared_norm(first, last) + "))";
}

SolitonInstance finish(SolitonInstance s)
{
    s.f = parse(s.f_source);
    if (s.f.arity() > s.dim())
        throw ConfigError("/f", "potential uses more coordinates than the metric has");
    if (s.base_point.empty())
        s.base_point.assign(static_cast<std::size_t>(s.dim()), 0.0);
    if (static_cast<int>(s.base_point.size()) != s.dim())
        throw ConfigError("/base_point", "base point dimension does not match the metric");
    return s;
}

void require_dim(int n, int lo, const std::string& pointer)
{
    if (n < lo || n > kMaxDim)
        throw ConfigError(pointer, "dimension must be in [" + std::to_string(lo) + ", " + std::to_string(kMaxDim) + "]");
}

json interval_json(const Interval& iv)
{
    json j;
    j["lo"] = std::isfinite(iv.lo) ? json(iv.lo) : json(nullptr);
    j["hi"] = std::isfinite(iv.hi) ? json(iv.hi) : json(nullptr);
    j["lo_closed"] = iv.lo_closed;
    j["hi_closed"] = iv.hi_closed;
    return j;
}

Interval interval_from_json(const json& j, const std::string& pointer)
{
    using namespace config;
    Interval iv;
    if (!j.is_object())
        throw ConfigError(pointer, "expected an interval object");
    if (j.contains("lo") && !j.at("lo").is_null())
        iv.lo = as<double>(j.at("lo"), child(pointer, "lo"));
    if (j.contains("hi") && !j.at("hi").is_null())
        iv.hi = as<double>(j.at("hi"), child(pointer, "hi"));
    iv.lo_closed = optional<bool>(j, "lo_closed", pointer, false);
    iv.hi_closed = optional<bool>(j, "hi_closed", pointer, false);
    if (!(iv.lo < iv.hi))
        throw ConfigError(pointer, "interval is empty");
    return iv;
}

json box_json(const Box& b)
{
    json a = json::array();
    for (const auto& iv : b.axes)
        a.push_back(interval_json(iv));
    return a;
}

Box box_from_json(const json& j, const std::string& pointer, int n)
{
    if (!j.is_array() || static_cast<int>(j.size()) != n)
        throw ConfigError(pointer, "expected an array of " + std::to_string(n) + " intervals");
    Box b;
    for (std::size_t i = 0; i < j.size(); ++i)
        b.axes.push_back(interval_from_json(j[i], config::child(pointer, i)));
    return b;
}

} // namespace

namespace catalog {

SolitonInstance euclidean_flat(int n)
{
    require_dim(n, 1, "/params/n");
    SolitonInstance s;
    s.id = "euclidean-flat";
    s.description = "flat R^n with constant potential (Ricci-flat, steady)";
    s.metric = MetricChart::euclidean(n, Box::unbounded(n));
    s.metric.set_sample_box(Box::cube(n, -2.0, 2.0));
    s.f_source = "0";
    s.rho = 0.0;
    s.lambda = 0.0;
    s.parameters = {{"n", n}};
    return finish(std::move(s));
}

SolitonInstance gaussian(int n, double lambda, std::optional<double> rho)
{
    require_dim(n, 2, "/params/n");
    SolitonInstance s;
    s.id = "gaussian";
    s.description = "Gaussian soliton: flat R^n with f = lambda |x|^2 / 2";
    s.metric = MetricChart::euclidean(n, Box::unbounded(n));
    s.metric.set_sample_box(Box::cube(n, -2.0, 2.0));
    s.f_source = num(lambda) + "*(" + squared_norm(1, n) + ")/2";
    s.rho = rho.value_or(1.0 / (2.0 * (n - 1)));
    s.lambda = lambda;
    s.f0_hint = 0.0;
    s.parameters = {{"n", n}, {"lambda", lambda}, {"rho", s.rho}};
    return finish(std::move(s));
}

SolitonInstance product_einstein(int n, int k, double rho, double lambda)
{
    require_dim(n, 3, "/params/n");
    if (k < 2 || k >= n)
        throw ConfigError("/params/k", "sphere factor dimension must be in [2, n)");
    if (!(lambda > 0.0))
        throw ConfigError("/params/lambda", "the product construction needs lambda > 0");
    if (!(rho * k < 1.0))
        throw ConfigError("/params/rho", "the product construction needs rho k < 1");
    const double a2 = (k - 1) * (1.0 - rho * k) / lambda;
    const double a = std::sqrt(a2);
    const double mu = lambda / (1.0 - rho * k);

    SolitonInstance s;
    s.id = "product-einstein";
    s.description = "S^k(a) x R^(n-k), sphere in stereographic coordinates, Gaussian potential on the flat factor";
    const MetricChart base = MetricChart::conformal(k, stereographic_domain(k, a), stereographic_phi(1, k, a));
    s.metric = MetricChart::warped_product(base, n - k, "1");
    s.metric.set_sample_box(Box::cube(n, -1.0, 1.0));
    s.f_source = num(mu) + "*(" + squared_norm(k + 1, n) + ")/2";
    s.rho = rho;
    s.lambda = lambda;
    s.f0_hint = 0.0;
    s.parameters = {{"n", n}, {"k", k}, {"rho", rho}, {"lambda", lambda}, {"sphere_radius", a}};
    return finish(std::move(s));
}

SolitonInstance example_21()
{
    SolitonInstance s;
    s.id = "example-2.1";
    s.description = "coth^2(x1) (dx1^2 + dx2^2 + dx3^2) on x1 > 0 with f = (2/3) log cosh x1";
    Box d = Box::unbounded(3);
    d.axes[0] = Interval{0.0, std::numeric_limits<double>::infinity(), false, false};
    s.metric = MetricChart::conformal(3, d, "log(coth(x1))");
    Box sb = Box::cube(3, -1.0, 1.0);
    sb.axes[0] = Interval{0.4, 2.5, true, true};
    s.metric.set_sample_box(sb);
    s.f_source = "(2/3)*log(cosh(x1))";
    s.rho = 1.0 / 3.0;
    s.lambda = 0.0;
    s.base_point = {1.0, 0.0, 0.0};
    s.claims = ClaimedValues{"-(2 + 4*cosh(2*x1))/cosh(x1)^4", "-(2 + 4*cosh(2*x1))/(3*cosh(x1)^4)"};
    s.parameters = json::object();
    return finish(std::move(s));
}

SolitonInstance example_22()
{
    SolitonInstance s;
    s.id = "example-2.2";
    s.description = "cosh^2(x1) (dx1^2 + dx2^2 + dx3^2) on R^3 with f = (8 log cosh x1 + cos 2x1)/12";
    s.metric = MetricChart::conformal(3, Box::unbounded(3), "log(cosh(x1))");
    s.metric.set_sample_box(Box::cube(3, -1.0, 1.0));
    s.f_source = "(8*log(cosh(x1)) + cos(2*x1))/12";
    s.rho = 1.0 / 3.0;
    s.lambda = 1.0 / 3.0;
    s.exactness = Exactness::PaperClaimed;
    s.claims = ClaimedValues{"-(3 + cosh(2*x1))/(3*cosh(x1)^4)", "-(3 - sinh(x1)^4)/(3*cosh(x1)^4)"};
    s.parameters = json::object();
    return finish(std::move(s));
}

SolitonInstance example_23(int m, int n, double c, std::vector<double> alpha)
{
    if (n < 3)
        throw ConfigError("/params/n", "base dimension must be at least 3");
    if (m < 1)
        throw ConfigError("/params/m", "fiber dimension must be at least 1");
    require_dim(m + n, 4, "/params/m");
    if (static_cast<int>(alpha.size()) != n)
        throw ConfigError("/params/alpha", "alpha must have n entries");
    double norm2 = 0.0;
    for (double a : alpha)
        norm2 += a * a;
    if (std::fabs(norm2 - 1.0) > 1e-12)
        throw ConfigError("/params/alpha", "alpha must be a unit vector");

    std::string xi;
    for (int i = 0; i < n; ++i) {
        if (alpha[static_cast<std::size_t>(i)] == 0.0)
            continue;
        if (!xi.empty())
            xi += " + ";
        xi += num(alpha[static_cast<std::size_t>(i)]) + "*x" + std::to_string(i + 1);
    }
    const int total = m + n;
    SolitonInstance s;
    s.id = "example-2.3";
    s.description = "e^{2 xi} delta on R^n warped with e^xi over a flat R^m, xi = alpha . x (incomplete)";
    const MetricChart base = MetricChart::conformal(n, Box::unbounded(n), xi);
    s.metric = MetricChart::warped_product(base, m, "exp(" + xi + ")");
    s.metric.set_sample_box(Box::cube(total, -1.0, 1.0));
    s.f_source = num(c / 2.0) + "*exp(" + xi + ") - " + num((2.0 - m - n) / 2.0) + "*(" + xi + ")";
    s.rho = 1.0 / (2.0 * (total - 1));
    s.lambda = c;
    s.exactness = Exactness::PaperClaimed;
    s.claims = ClaimedValues{num(-double((total - 2) * (total - 1))) + "*exp(-2*(" + xi + "))",
                             num(c) + " + " + num((2.0 - m - n) / 2.0) + "*exp(-2*(" + xi + "))"};
    s.parameters = {{"m", m}, {"n", n}, {"c", c}, {"alpha", alpha}};
    return finish(std::move(s));
}

SolitonInstance sphere(int n, double a)
{
    require_dim(n, 2, "/params/n");
    if (!(a > 0.0))
        throw ConfigError("/params/a", "radius must be positive");
    SolitonInstance s;
    s.id = "sphere";
    s.description = "round sphere of radius a, stereographic chart centred at a point";
    s.metric = MetricChart::conformal(n, stereographic_domain(n, a), stereographic_phi(1, n, a));
    s.metric.set_sample_box(Box::cube(n, -a, a));
    s.f_source = "0";
    s.rho = 0.0;
    s.lambda = (n - 1) / (a * a);
    s.parameters = {{"n", n}, {"a", a}};
    return finish(std::move(s));
}

SolitonInstance hyperbolic_plane()
{
    SolitonInstance s;
    s.id = "hyperbolic-plane";
    s.description = "hyperbolic plane, upper half-plane model (dx1^2 + dx2^2)/x2^2";
    Box d = Box::unbounded(2);
    d.axes[1] = Interval{0.0, std::numeric_limits<double>::infinity(), false, false};
    s.metric = MetricChart::conformal(2, d, "-log(x2)");
    Box sb = Box::cube(2, -1.0, 1.0);
    sb.axes[1] = Interval{0.3, 3.0, true, true};
    s.metric.set_sample_box(sb);
    s.f_source = "0";
    s.rho = 0.0;
    s.lambda = -1.0;
    s.base_point = {0.0, 1.0};
    s.parameters = json::object();
    return finish(std::move(s));
}

const std::vector<std::string>& ids()
{
    static const std::vector<std::string> v = {"euclidean-flat", "gaussian", "product-einstein", "example-2.1",
                                               "example-2.2", "example-2.3", "sphere", "hyperbolic-plane"};
    return v;
}

std::vector<SolitonInstance> builtin()
{
    return {euclidean_flat(), gaussian(),  product_einstein(), example_21(),
            example_22(),     example_23(), sphere(),          hyperbolic_plane()};
}

SolitonInstance build(const std::string& id, const json& params, const std::string& pointer)
{
    using namespace config;
    if (!params.is_null() && !params.is_object())
        throw ConfigError(pointer, "params must be an object");
    const json p = params.is_null() ? json::object() : params;
    try {
        if (id == "euclidean-flat")
            return euclidean_flat(optional<int>(p, "n", pointer, 3));
        if (id == "gaussian") {
            std::optional<double> rho;
            if (p.contains("rho"))
                rho = as<double>(p.at("rho"), child(pointer, "rho"));
            return gaussian(optional<int>(p, "n", pointer, 2), optional<double>(p, "lambda", pointer, 1.0), rho);
        }
        if (id == "product-einstein")
            return product_einstein(optional<int>(p, "n", pointer, 3), optional<int>(p, "k", pointer, 2),
                                    optional<double>(p, "rho", pointer, 0.25), optional<double>(p, "lambda", pointer, 1.0));
        if (id == "example-2.1")
            return example_21();
        if (id == "example-2.2")
            return example_22();
        if (id == "example-2.3") {
            std::vector<double> alpha = {0.6, 0.8, 0.0};
            if (p.contains("alpha")) {
                alpha.clear();
                const json& a = p.at("alpha");
                if (!a.is_array())
                    throw ConfigError(child(pointer, "alpha"), "expected an array");
                for (std::size_t i = 0; i < a.size(); ++i)
                    alpha.push_back(as<double>(a[i], child(child(pointer, "alpha"), i)));
            }
            return example_23(optional<int>(p, "m", pointer, 2), optional<int>(p, "n", pointer, 3),
                              optional<double>(p, "c", pointer, 1.0), alpha);
        }
        if (id == "sphere")
            return sphere(optional<int>(p, "n", pointer, 2), optional<double>(p, "a", pointer, 1.0));
        if (id == "hyperbolic-plane")
            return hyperbolic_plane();
    } catch (const ConfigError& e) {
        // Builder errors name the parameter relative to the entry.
        const std::string& rel = e.pointer();
        if (rel.rfind("/params/", 0) == 0)
            throw ConfigError(pointer + rel.substr(7), e.message());
        throw;
    }
    throw ConfigError(pointer, "unknown catalog id '" + id + "'");
}

} // namespace catalog

json to_json(const SolitonInstance& s)
{
    json j;
    j["id"] = s.id;
    j["description"] = s.description;
    j["parameters"] = s.parameters;
    json m;
    m["dim"] = s.dim();
    m["g"] = s.metric.coefficient_sources();
    m["domain"] = box_json(s.metric.domain());
    m["sample_box"] = box_json(s.metric.sample_box());
    if (const auto& t = s.metric.tag()) {
        json st;
        st["kind"] = to_string(t->kind);
        if (!t->phi.empty())
            st["phi"] = t->phi;
        if (t->kind == StructureKind::WarpedProduct) {
            st["base_dim"] = t->base_dim;
            st["warp"] = t->warp;
            st["fiber"] = t->fiber;
        }
        m["structure"] = st;
    }
    j["metric"] = m;
    j["f"] = s.f_source;
    j["rho"] = s.rho;
    j["lambda"] = s.lambda;
    j["class"] = to_string(s.soliton_class());
    j["exactness"] = to_string(s.exactness);
    j["base_point"] = s.base_point;
    j["f0_hint"] = s.f0_hint ? json(*s.f0_hint) : json(nullptr);
    if (s.claims) {
        json c;
        if (!s.claims->scalar.empty())
            c["scalar"] = s.claims->scalar;
        if (!s.claims->ric_f.empty())
            c["ric_f"] = s.claims->ric_f;
        j["claims"] = c;
    }
    return j;
}

SolitonInstance soliton_from_json(const json& j, const std::string& pointer)
{
    using namespace config;
    if (!j.is_object())
        throw ConfigError(pointer, "expected an object");
    if (j.contains("catalog")) {
        const std::string id = required<std::string>(j, "catalog", pointer);
        return catalog::build(id, j.contains("params") ? j.at("params") : json(nullptr), child(pointer, "params"));
    }

    const std::string mp = child(pointer, "metric");
    if (!j.contains("metric"))
        throw ConfigError(mp, "required field is missing");
    const json& mj = j.at("metric");
    const int n = required<int>(mj, "dim", mp);
    require_dim(n, 1, child(mp, "dim"));
    const std::string gp = child(mp, "g");
    if (!mj.contains("g") || !mj.at("g").is_array())
        throw ConfigError(gp, "expected an array of packed coefficients");
    std::vector<std::string> g;
    for (std::size_t i = 0; i < mj.at("g").size(); ++i)
        g.push_back(as<std::string>(mj.at("g")[i], child(gp, i)));
    const Box domain = mj.contains("domain") ? box_from_json(mj.at("domain"), child(mp, "domain"), n) : Box::unbounded(n);

    std::optional<StructureTag> tag;
    if (mj.contains("structure") && !mj.at("structure").is_null()) {
        const std::string sp = child(mp, "structure");
        const json& sj = mj.at("structure");
        StructureTag t;
        try {
            t.kind = structure_kind_from_string(required<std::string>(sj, "kind", sp));
        } catch (const ConfigError& e) {
            throw ConfigError(child(sp, "kind"), e.message());
        }
        t.phi = optional<std::string>(sj, "phi", sp, "");
        t.base_dim = optional<int>(sj, "base_dim", sp, 0);
        t.warp = optional<std::string>(sj, "warp", sp, "");
        t.fiber = optional<std::string>(sj, "fiber", sp, "flat");
        tag = t;
    }

    SolitonInstance s;
    try {
        s.metric = MetricChart(n, domain, g, tag);
    } catch (const SyntaxError& e) {
        throw ConfigError(gp, e.what());
    } catch (const UnknownIdentifier& e) {
        throw ConfigError(gp, e.what());
    } catch (const ConfigError& e) {
        throw ConfigError(pointer + e.pointer(), e.message());
    }
    if (mj.contains("sample_box"))
        s.metric.set_sample_box(box_from_json(mj.at("sample_box"), child(mp, "sample_box"), n));

    s.id = optional<std::string>(j, "id", pointer, "inline");
    s.description = optional<std::string>(j, "description", pointer, "");
    s.f_source = required<std::string>(j, "f", pointer);
    s.rho = required<double>(j, "rho", pointer);
    s.lambda = required<double>(j, "lambda", pointer);
    const std::string ex = optional<std::string>(j, "exactness", pointer, "paper-claimed");
    if (ex == "exact")
        s.exactness = Exactness::Exact;
    else if (ex == "paper-claimed")
        s.exactness = Exactness::PaperClaimed;
    else
        throw ConfigError(child(pointer, "exactness"), "expected 'exact' or 'paper-claimed'");
    if (j.contains("class")) {
        const std::string c = as<std::string>(j.at("class"), child(pointer, "class"));
        if (c != to_string(s.soliton_class()))
            throw ConfigError(child(pointer, "class"), "class '" + c + "' does not match the sign of lambda");
    }
    if (j.contains("base_point") && !j.at("base_point").is_null()) {
        const json& bp = j.at("base_point");
        if (!bp.is_array())
            throw ConfigError(child(pointer, "base_point"), "expected an array");
        for (std::size_t i = 0; i < bp.size(); ++i)
            s.base_point.push_back(as<double>(bp[i], child(child(pointer, "base_point"), i)));
    }
    if (j.contains("f0_hint") && !j.at("f0_hint").is_null())
        s.f0_hint = as<double>(j.at("f0_hint"), child(pointer, "f0_hint"));
    if (j.contains("claims") && j.at("claims").is_object()) {
        const std::string cp = child(pointer, "claims");
        s.claims = ClaimedValues{optional<std::string>(j.at("claims"), "scalar", cp, ""),
                                 optional<std::string>(j.at("claims"), "ric_f", cp, "")};
    }
    if (j.contains("parameters") && j.at("parameters").is_object())
        s.parameters = j.at("parameters");
    try {
        return finish(std::move(s));
    } catch (const SyntaxError& e) {
        throw ConfigError(child(pointer, "f"), e.what());
    } catch (const UnknownIdentifier& e) {
        throw ConfigError(child(pointer, "f"), e.what());
    } catch (const ConfigError& e) {
        throw ConfigError(pointer + e.pointer(), e.message());
    }
}

double exactness_residual(const SolitonInstance& s)
{
    double worst = 0.0;
    for (const auto& x : sample_points(s.metric, kExactSamples, 0x5eed))
        worst = std::max(worst, soliton_residual(s, x));
    return worst;
}

void verify_exactness(const SolitonInstance& s, const std::string& pointer)
{
    if (s.exactness != Exactness::Exact)
        return;
    const double r = exactness_residual(s);
    if (!(r < kExactResidual)) {
        std::ostringstream os;
        os << "entry '" << s.id << "' is tagged exact but its soliton residual reaches " << r;
        throw ConfigError(pointer, os.str());
    }
}

json catalog_document(const std::vector<SolitonInstance>& entries)
{
    json doc;
    doc["schema"] = 1;
    doc["entries"] = json::array();
    for (const auto& s : entries)
        doc["entries"].push_back(to_json(s));
    return doc;
}

std::vector<SolitonInstance> load_catalog(const std::string& path)
{
    std::ifstream in(path);
    if (!in)
        throw ConfigError("", "cannot open catalog file '" + path + "'");
    json doc;
    try {
        doc = json::parse(in);
    } catch (const json::parse_error& e) {
        throw ConfigError("", e.what());
    }
    if (config::required<int>(doc, "schema", "") != 1)
        throw ConfigError("/schema", "unsupported catalog schema");
    if (!doc.contains("entries") || !doc.at("entries").is_array())
        throw ConfigError("/entries", "expected an array");
    std::vector<SolitonInstance> out;
    const json& entries = doc.at("entries");
    for (std::size_t i = 0; i < entries.size(); ++i) {
        const std::string p = config::child("/entries", i);
        SolitonInstance s = soliton_from_json(entries[i], p);
        verify_exactness(s, p);
        out.push_back(std::move(s));
    }
    return out;
}

} // namespace solitonlab
