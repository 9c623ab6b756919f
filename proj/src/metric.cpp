#include "solitonlab/metric.hpp"

#include "solitonlab/errors.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>

namespace solitonlab {

namespace {

int packed_count(int n)
{
    return n * (n + 1) / 2;
}

std::string square_of(const std::string& s)
{
    return "(" + s + ")^2";
}

double relative_gap(double a, double b)
{
    return std::fabs(a - b) / (1.0 + std::fabs(b));
}

} // namespace

bool Box::contains(std::span<const double> x) const
{
    for (std::size_t i = 0; i < axes.size(); ++i)
        if (!axes[i].contains(x[i]))
            return false;
    return true;
}

Box Box::cube(int n, double lo, double hi)
{
    Box b;
    b.axes.assign(static_cast<std::size_t>(n), Interval{lo, hi, true, true});
    return b;
}

std::string to_string(StructureKind kind)
{
    switch (kind) {
    case StructureKind::Euclidean:
        return "euclidean";
    case StructureKind::Conformal:
        return "conformal";
    case StructureKind::WarpedProduct:
        return "warped-product";
    case StructureKind::RotationallySymmetric:
        return "rotationally-symmetric";
    }
    return "euclidean";
}

StructureKind structure_kind_from_string(const std::string& name)
{
    if (name == "euclidean")
        return StructureKind::Euclidean;
    if (name == "conformal")
        return StructureKind::Conformal;
    if (name == "warped-product")
        return StructureKind::WarpedProduct;
    if (name == "rotationally-symmetric")
        return StructureKind::RotationallySymmetric;
    throw ConfigError("/metric/structure/kind", "unknown structure kind '" + name + "'");
}

MetricChart::MetricChart(int n, Box domain, std::vector<std::string> packed_coefficients,
                         std::optional<StructureTag> tag)
    : n_(n), domain_(std::move(domain)), sources_(std::move(packed_coefficients)), tag_(std::move(tag))
{
    if (n < 1 || n > kMaxDim)
        throw ConfigError("/metric/dim", "dimension must be in [1, " + std::to_string(kMaxDim) + "]");
    if (domain_.dim() != n)
        throw ConfigError("/metric/domain", "domain dimension does not match the metric");
    if (static_cast<int>(sources_.size()) != packed_count(n))
        throw ConfigError("/metric/g", "expected " + std::to_string(packed_count(n)) + " packed coefficients");
    coefficients_.reserve(sources_.size());
    for (const auto& s : sources_) {
        Expression e = parse(s);
        if (e.arity() > n)
            throw ConfigError("/metric/g", "coefficient '" + s + "' uses more than " + std::to_string(n) + " coordinates");
        coefficients_.push_back(std::move(e));
    }

    sample_box_ = domain_;
    for (auto& a : sample_box_.axes) {
        a.lo = std::max(a.lo, -1.0);
        a.hi = std::min(a.hi, 1.0);
        a.lo_closed = a.hi_closed = true;
    }

    if (tag_ && tag_->kind == StructureKind::WarpedProduct) {
        const int m = tag_->base_dim;
        if (m < 1 || m >= n)
            throw ConfigError("/metric/structure/base_dim", "base dimension must be in [1, n)");
        if (tag_->fiber != "flat")
            throw ConfigError("/metric/structure/fiber", "only flat fibers are supported");
        std::vector<std::string> base_sources;
        for (int i = 0; i < m; ++i)
            for (int j = i; j < m; ++j)
                base_sources.push_back(sources_[static_cast<std::size_t>(JetValue::packed_index(n, i, j))]);
        Box base_domain{std::vector<Interval>(domain_.axes.begin(), domain_.axes.begin() + m)};
        base_ = std::make_shared<const MetricChart>(m, std::move(base_domain), std::move(base_sources));
    }
}

MetricChart MetricChart::euclidean(int n, Box domain)
{
    std::vector<std::string> c;
    for (int i = 0; i < n; ++i)
        for (int j = i; j < n; ++j)
            c.emplace_back(i == j ? "1" : "0");
    return MetricChart(n, std::move(domain), std::move(c), StructureTag{StructureKind::Euclidean, "", 0, "", "flat"});
}

MetricChart MetricChart::conformal(int n, Box domain, const std::string& phi)
{
    std::vector<std::string> c;
    for (int i = 0; i < n; ++i)
        for (int j = i; j < n; ++j)
            c.emplace_back(i == j ? "exp(2*(" + phi + "))" : "0");
    return MetricChart(n, std::move(domain), std::move(c), StructureTag{StructureKind::Conformal, phi, 0, "", "flat"});
}

MetricChart MetricChart::rotationally_symmetric(int n, const std::string& profile)
{
    Box domain = Box::unbounded(n);
    domain.axes[0] = Interval{0.0, std::numeric_limits<double>::infinity(), false, false};
    for (int i = 1; i + 1 < n; ++i)
        domain.axes[static_cast<std::size_t>(i)] = Interval{0.0, M_PI, false, false};

    std::vector<std::string> c;
    for (int i = 0; i < n; ++i)
        for (int j = i; j < n; ++j) {
            if (i != j) {
                c.emplace_back("0");
                continue;
            }
            if (i == 0) {
                c.emplace_back("1");
                continue;
            }
            std::string s = square_of(profile);
            for (int k = 1; k < i; ++k)
                s += "*sin(x" + std::to_string(k + 1) + ")^2";
            c.push_back(std::move(s));
        }
    MetricChart m(n, std::move(domain), std::move(c),
                  StructureTag{StructureKind::RotationallySymmetric, profile, 0, "", "flat"});
    Box sb = Box::cube(n, 0.2, 2.8);
    for (int i = n > 2 ? n - 1 : 1; i < n; ++i)
        sb.axes[static_cast<std::size_t>(i)] = Interval{-3.0, 3.0, true, true};
    m.set_sample_box(std::move(sb));
    return m;
}

MetricChart MetricChart::warped_product(const MetricChart& base, int fiber_dim, const std::string& warp)
{
    const int m = base.dim();
    const int n = m + fiber_dim;
    std::vector<std::string> c;
    const std::string h2 = square_of(warp);
    for (int i = 0; i < n; ++i)
        for (int j = i; j < n; ++j) {
            if (i < m && j < m)
                c.push_back(base.sources_[static_cast<std::size_t>(JetValue::packed_index(m, i, j))]);
            else if (i == j)
                c.push_back(h2);
            else
                c.emplace_back("0");
        }
    Box domain = base.domain_;
    for (int k = 0; k < fiber_dim; ++k)
        domain.axes.emplace_back();
    MetricChart out(n, std::move(domain), std::move(c), StructureTag{StructureKind::WarpedProduct, "", m, warp, "flat"});
    Box sb = base.sample_box_;
    for (int k = 0; k < fiber_dim; ++k)
        sb.axes.push_back(Interval{-1.0, 1.0, true, true});
    out.set_sample_box(std::move(sb));
    return out;
}

const Expression& MetricChart::coefficient(int i, int j) const
{
    return coefficients_[static_cast<std::size_t>(JetValue::packed_index(n_, i, j))];
}

void MetricChart::set_sample_box(Box box)
{
    if (box.dim() != n_)
        throw ConfigError("/metric/sample_box", "sample box dimension does not match the metric");
    sample_box_ = std::move(box);
}

MetricChart MetricChart::scaled(double c) const
{
    char buf[64];
    auto res = std::to_chars(buf, buf + sizeof(buf), c);
    const std::string factor(buf, res.ptr);
    std::vector<std::string> s;
    s.reserve(sources_.size());
    for (const auto& src : sources_)
        s.push_back(factor + "*(" + src + ")");
    // The scaled chart keeps its coefficients but drops the structure tag,
    // whose closed forms assume the unscaled normalisation.
    MetricChart out(n_, domain_, std::move(s));
    out.sample_box_ = sample_box_;
    return out;
}

SmallMatrix MetricChart::metric_at(std::span<const double> x) const
{
    SmallMatrix g(n_, n_);
    int k = 0;
    for (int i = 0; i < n_; ++i)
        for (int j = i; j < n_; ++j, ++k) {
            const double v = coefficients_[static_cast<std::size_t>(k)].evaluate(x.first(static_cast<std::size_t>(n_)));
            g(i, j) = v;
            g(j, i) = v;
        }
    return g;
}

void MetricChart::metric_jets(std::span<const double> x, std::vector<JetValue>& out) const
{
    out.resize(coefficients_.size());
    for (std::size_t k = 0; k < coefficients_.size(); ++k)
        out[k] = coefficients_[k].eval_jet(x, n_);
}

const MetricChart& MetricChart::base_chart() const
{
    if (!base_)
        throw NotApplicable("chart has no warped-product base");
    return *base_;
}

std::vector<std::vector<double>> sample_points(const MetricChart& m, int count, std::uint64_t seed)
{
    std::mt19937_64 rng(seed);
    const Box& box = m.sample_box();
    std::vector<std::vector<double>> pts;
    pts.reserve(static_cast<std::size_t>(count));
    for (int c = 0; c < count; ++c) {
        std::vector<double> p(static_cast<std::size_t>(m.dim()));
        for (int i = 0; i < m.dim(); ++i) {
            const Interval& a = box.axes[static_cast<std::size_t>(i)];
            std::uniform_real_distribution<double> u(a.lo, a.hi);
            p[static_cast<std::size_t>(i)] = u(rng);
        }
        pts.push_back(std::move(p));
    }
    return pts;
}

SmallMatrix metric_cholesky(const SmallMatrix& g)
{
    auto l = cholesky(g);
    if (!l)
        throw SingularMetric("metric is not positive definite");
    return *l;
}

double tag_consistency(const MetricChart& m, int samples, std::uint64_t seed)
{
    const auto& tag = m.tag();
    if (!tag)
        return 0.0;
    const int n = m.dim();
    double worst = 0.0;
    std::vector<JetValue> jets;
    for (const auto& x : sample_points(m, samples, seed)) {
        const SmallMatrix g = m.metric_at(x);
        SmallMatrix expect(n, n);
        switch (tag->kind) {
        case StructureKind::Euclidean:
            expect = SmallMatrix::identity(n);
            break;
        case StructureKind::Conformal: {
            const double e2 = std::exp(2.0 * parse(tag->phi).evaluate(x));
            for (int i = 0; i < n; ++i)
                expect(i, i) = e2;
            break;
        }
        case StructureKind::RotationallySymmetric: {
            const double phi = parse(tag->phi).evaluate(x);
            expect(0, 0) = 1.0;
            double s = phi * phi;
            for (int i = 1; i < n; ++i) {
                expect(i, i) = s;
                s *= std::pow(std::sin(x[static_cast<std::size_t>(i)]), 2);
            }
            break;
        }
        case StructureKind::WarpedProduct: {
            const int b = tag->base_dim;
            const Expression h = parse(tag->warp);
            const JetValue hj = h.eval_jet(x, n);
            for (int i = b; i < n; ++i)
                worst = std::max(worst, std::fabs(hj.gradient(i)));
            m.metric_jets(x, jets);
            for (int i = 0; i < b; ++i)
                for (int j = i; j < b; ++j) {
                    const JetValue& gj = jets[static_cast<std::size_t>(JetValue::packed_index(n, i, j))];
                    for (int k = b; k < n; ++k)
                        worst = std::max(worst, std::fabs(gj.gradient(k)));
                }
            for (int i = 0; i < b; ++i)
                for (int j = 0; j < b; ++j)
                    expect(i, j) = g(i, j);
            for (int i = b; i < n; ++i)
                expect(i, i) = hj.value * hj.value;
            break;
        }
        }
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j)
                worst = std::max(worst, relative_gap(g(i, j), expect(i, j)));
    }
    return worst;
}

} // namespace solitonlab
