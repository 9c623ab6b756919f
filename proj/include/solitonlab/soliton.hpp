#pragma once

#include "solitonlab/curvature.hpp"

#include <json.hpp>

#include <optional>
#include <span>
#include <string>
#include <vector>

namespace solitonlab {

enum class SolitonClass
{
    Shrinking,
    Steady,
    Expanding,
};

enum class Exactness
{
    Exact,
    PaperClaimed,
};

std::string to_string(SolitonClass c);
std::string to_string(Exactness e);

/// Closed-form values asserted for an entry, checked as findings.
struct ClaimedValues
{
    std::string scalar;   ///< claimed R
    std::string ric_f;    ///< claimed multiple c(x) with Ric + Hess f = c(x) g
};

/// Metric, potential and parameters of a gradient rho-Einstein soliton
/// Ric + Hess f = (rho R + lambda) g.
struct SolitonInstance
{
    std::string id;
    std::string description;
    MetricChart metric;
    std::string f_source;
    Expression f;
    double rho = 0.0;
    double lambda = 0.0;
    Exactness exactness = Exactness::Exact;
    std::vector<double> base_point;
    std::optional<double> f0_hint;
    std::optional<ClaimedValues> claims;
    nlohmann::json parameters = nlohmann::json::object(); ///< builder parameters, for listing

    int dim() const { return metric.dim(); }
    SolitonClass soliton_class() const;
    double schouten_rho() const { return 1.0 / (2.0 * (dim() - 1)); }
    bool is_schouten() const;
};

/// ||Ric + Hess f - (rho R + lambda) g|| in the g-norm.
double soliton_residual(const SolitonInstance& s, std::span<const double> x);

struct PointIdentities
{
    std::vector<double> point;
    double soliton = 0.0; ///< soliton equation residual
    double trace = 0.0;   ///< |Delta f - ((n rho - 1) R + n lambda)|
    double gradient = 0.0; ///< |(1 - 2(n-1) rho) dR - 2 Ric(grad f)|_g
    double laplacian = 0.0; ///< |(1 - 2(n-1) rho) Delta R - <dR, df> - 2(rho R^2 - |Ric|^2 + lambda R)|
};

struct BoundMargins
{
    double r = 0.0;
    std::vector<double> point;
    double scalar = 0.0;
    double f_minus_f0 = 0.0;
    double grad_f2 = 0.0;
    double r_lambda_lower = 0.0;  ///< R lambda
    double r_lambda_upper = 0.0;  ///< 2(n-1) lambda^2 - R lambda
    double grad_lower = 0.0;      ///< |grad f|^2 - 2 lambda (f - f0)
    double grad_upper = 0.0;      ///< 4 lambda (f - f0) - |grad f|^2
};

struct IdentityReport
{
    std::vector<PointIdentities> points;
    double max_soliton = 0.0;
    double max_trace = 0.0;
    double max_gradient = 0.0;
    double max_laplacian = 0.0;
    double mean_soliton = 0.0;
    double mean_trace = 0.0;
    double mean_gradient = 0.0;
    double mean_laplacian = 0.0;

    double max_residual() const;
};

IdentityReport derived_identities_audit(const SolitonInstance& s, const std::vector<std::vector<double>>& points);

/// A point at distance r from the base point (arc length along a geodesic).
struct RadialSample
{
    double r = 0.0;
    std::vector<double> x;
};

struct SchoutenReport
{
    double f0 = 0.0;
    bool f0_from_hint = false;
    std::vector<BoundMargins> samples;
    double min_r_lambda_lower = 0.0;
    double min_r_lambda_upper = 0.0;
    double min_grad_lower = 0.0;
    double min_grad_upper = 0.0;
    bool scalar_bounds_hold = true;
    bool gradient_bounds_hold = true;
    bool negative_scalar_seen = false;
    /// Smallest grid constants for the quadratic growth of f; empty when none
    /// in [0, 10] works or no sample lies beyond distance 2.
    std::optional<double> a1;
    std::optional<double> a2;
    int growth_samples = 0;
};

/// Tolerance below which a margin counts as satisfied.
inline constexpr double kMarginTolerance = 1e-9;

/// Throws NotSchouten when rho differs from 1/(2(n-1)) by more than 1e-12.
SchoutenReport schouten_bounds_audit(const SolitonInstance& s, const std::vector<RadialSample>& samples);

/// Minimum (lambda >= 0) or maximum (lambda < 0) of f by cyclic coordinate
/// descent from the base point, restricted to the sample box.
double estimate_f0(const SolitonInstance& s);

struct ClaimFinding
{
    std::vector<double> point;
    double scalar_computed = 0.0;
    std::optional<double> scalar_claimed;
    double ric_f_computed = 0.0;  ///< rho R + lambda implied by the computed R
    double ric_f_trace = 0.0;     ///< tr_g(Ric + Hess f) / n
    std::optional<double> ric_f_claimed;
    std::optional<double> ric_f_claim_residual; ///< ||Ric + Hess f - claim g||_g
    double soliton_residual = 0.0;
};

std::vector<ClaimFinding> claimed_value_findings(const SolitonInstance& s,
                                                 const std::vector<std::vector<double>>& points);

} // namespace solitonlab
