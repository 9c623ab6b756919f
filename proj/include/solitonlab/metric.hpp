#pragma once

#include "solitonlab/expr.hpp"
#include "solitonlab/linalg.hpp"

#include <cstdint>
#include <limits>
#include <memory>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <vector>

namespace solitonlab {

struct Interval
{
    double lo = -std::numeric_limits<double>::infinity();
    double hi = std::numeric_limits<double>::infinity();
    bool lo_closed = false;
    bool hi_closed = false;

    bool contains(double x) const
    {
        const bool above = lo_closed ? x >= lo : x > lo;
        const bool below = hi_closed ? x <= hi : x < hi;
        return above && below;
    }
};

/// Axis-aligned box with per-axis open/closed ends.
struct Box
{
    std::vector<Interval> axes;

    int dim() const { return static_cast<int>(axes.size()); }
    bool contains(std::span<const double> x) const;

    static Box unbounded(int n) { return Box{std::vector<Interval>(static_cast<std::size_t>(n))}; }
    static Box cube(int n, double lo, double hi);
};

enum class StructureKind : std::uint8_t
{
    Euclidean,
    Conformal,             ///< g = exp(2 phi) delta
    WarpedProduct,         ///< g = g_B (+) h^2 delta_F, flat fiber
    RotationallySymmetric, ///< g = dr^2 + phi(r)^2 g_sphere in polar angles
};

struct StructureTag
{
    StructureKind kind = StructureKind::Euclidean;
    std::string phi;     ///< conformal exponent, or radial profile in x1
    int base_dim = 0;    ///< warped product: coordinates x1..x_base_dim
    std::string warp;    ///< warped product: h on the base coordinates
    std::string fiber = "flat";
};

std::string to_string(StructureKind kind);
StructureKind structure_kind_from_string(const std::string& name);

/// Coordinate metric on a box. Coefficients are closed-form expressions,
/// stored as the packed upper triangle (row-major).
class MetricChart
{
public:
    MetricChart() = default;
    MetricChart(int n, Box domain, std::vector<std::string> packed_coefficients,
                std::optional<StructureTag> tag = std::nullopt);

    static MetricChart euclidean(int n, Box domain);
    static MetricChart conformal(int n, Box domain, const std::string& phi);
    /// dr^2 + phi(r)^2 g_{S^{n-1}} in coordinates (r, theta_1, ..., theta_{n-1}).
    static MetricChart rotationally_symmetric(int n, const std::string& profile);
    /// Base block from `base` (its own coordinates come first) and fiber
    /// h^2 delta on `fiber_dim` flat coordinates.
    static MetricChart warped_product(const MetricChart& base, int fiber_dim, const std::string& warp);

    int dim() const noexcept { return n_; }
    const Box& domain() const noexcept { return domain_; }
    const std::optional<StructureTag>& tag() const noexcept { return tag_; }
    const std::vector<std::string>& coefficient_sources() const noexcept { return sources_; }
    const Expression& coefficient(int i, int j) const;

    /// Box used to draw random audit points; defaults to the domain clipped to [-1,1].
    const Box& sample_box() const noexcept { return sample_box_; }
    void set_sample_box(Box box);

    /// Same chart with every coefficient multiplied by c.
    MetricChart scaled(double c) const;

    SmallMatrix metric_at(std::span<const double> x) const;
    /// g_ij jets in packed order.
    void metric_jets(std::span<const double> x, std::vector<JetValue>& out) const;

    /// Base chart of a warped-product tag (first base_dim coordinates).
    const MetricChart& base_chart() const;

private:
    int n_ = 0;
    Box domain_;
    Box sample_box_;
    std::vector<std::string> sources_;
    std::vector<Expression> coefficients_;
    std::optional<StructureTag> tag_;
    std::shared_ptr<const MetricChart> base_;
};

/// Uniform random points from the chart's sample box.
std::vector<std::vector<double>> sample_points(const MetricChart& m, int count, std::uint64_t seed);

/// Cholesky of g at x; throws SingularMetric.
SmallMatrix metric_cholesky(const SmallMatrix& g);

/// Maximum deviation of the coefficients from the form asserted by the
/// structure tag over `samples` random points (0 when no tag is present).
double tag_consistency(const MetricChart& m, int samples, std::uint64_t seed);

} // namespace solitonlab
