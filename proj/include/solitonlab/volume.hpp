#pragma once

#include "solitonlab/geodesic.hpp"
#include "solitonlab/soliton.hpp"

#include <json.hpp>

#include <optional>
#include <ostream>
#include <span>
#include <string>
#include <vector>

namespace solitonlab {

/// Directions on S^{n-1} (Euclidean unit vectors in a g-orthonormal frame at
/// the base point) with quadrature weights summing to |S^{n-1}|.
struct SphereGrid
{
    int n = 0;
    std::vector<std::vector<double>> directions;
    std::vector<double> weights;

    /// level 0 is the default rule and each level up roughly doubles the
    /// point count. n = 2: offset uniform rule with 64 * 2^level points.
    /// n = 3: Lebedev rules with 6, 26 and 50 points for levels -1, 0, 1.
    /// n >= 4: midpoint product rule in hyperspherical angles.
    static SphereGrid standard(int n, int level = 0);

    std::size_t size() const { return weights.size(); }
    double total_weight() const;
};

/// |S^{n-1}| = 2 pi^{n/2} / Gamma(n/2).
double sphere_area(int n);

/// Cumulative composite Simpson integral of samples on a uniform grid.
/// Even indices use the composite rule, odd ones add a three-point partial
/// panel.
std::vector<double> cumulative_simpson(std::span<const double> y, double h);

/// Radial integrals along one ray, tabulated at every ray sample.
struct RayProfile
{
    std::vector<double> s;
    std::vector<double> phi;
    std::vector<double> psi;
    std::vector<double> vol;   ///< int_0^min(s, rho) J
    std::vector<double> volf;  ///< int_0^min(s, rho) J e^{-f}
    std::vector<double> b_phi;   ///< int_0^s e^phi t^{n-1}
    std::vector<double> b_psi;   ///< int_0^s e^psi t^{n-1}
    double conjugate = 0.0;    ///< +inf when none
    double h = 0.0;

    /// Linear interpolation of a tabulated column at radius r.
    double at(const std::vector<double>& column, double r) const;
};

/// Radii below this many steps use the Taylor series of f about the base point.
inline constexpr double kSeriesSteps = 2.0;

RayProfile ray_profile(const SolitonInstance& s, const GeodesicRay& ray);

/// Integrand exponent of the unweighted bound at radius r along the ray.
double phi(const SolitonInstance& s, const GeodesicRay& ray, double r);
/// Integrand exponent of the weighted bound at radius r along the ray.
double psi(const SolitonInstance& s, const GeodesicRay& ray, double r);

/// Vol(B_p(r)) at each radius. Throws LeftDomain if a ray ends before
/// min(r, conjugate radius).
std::vector<double> ball_volume(const MetricChart& m, std::span<const double> p, std::span<const double> r_grid,
                                const SphereGrid& grid, double h = kDefaultStep, int workers = 1);

struct VolumeOptions
{
    double h = kDefaultStep;
    int workers = 1;
    /// Lower bound for rho R used by the large-radius bound; defaults to the
    /// sampled minimum.
    std::optional<double> delta;
};

std::vector<double> weighted_ball_volume(const SolitonInstance& s, std::span<const double> r_grid,
                                         const SphereGrid& grid, const VolumeOptions& opt = {});
std::vector<double> phi_bound(const SolitonInstance& s, std::span<const double> r_grid, const SphereGrid& grid,
                             const VolumeOptions& opt = {});
std::vector<double> psi_bound(const SolitonInstance& s, std::span<const double> r_grid, const SphereGrid& grid,
                             const VolumeOptions& opt = {});

/// Gaussian comparison integral sum_theta w int_0^r e^{t^2/2} t^{n-1} dt
/// for grid radii r >= r0; empty entries below r0.
std::vector<std::optional<double>> gaussian_growth_bound(int n, std::span<const double> r_grid, const SphereGrid& grid, double r0,
                                            double h = kDefaultStep);

/// Relative tolerance for equality flags and for the inequality checks.
inline constexpr double kEqualityTolerance = 5e-3;

struct ComparisonRow
{
    double r = 0.0;
    double vol = 0.0;
    double volf = 0.0;
    double bound_phi = 0.0;
    double bound_psi = 0.0;
    std::optional<double> bound_growth;
    bool equal_phi = false; ///< |bound_phi - vol| <= 0.5% of vol
    bool equal_psi = false;
    bool holds_phi = false; ///< vol <= bound_phi (1 + 0.5%)
    bool holds_psi = false;
    std::optional<bool> holds_growth;

    double margin_phi() const { return bound_phi - vol; }
    double margin_psi() const { return bound_psi - volf; }
};

struct GrowthBound
{
    double delta = 0.0;
    double c = 0.0;             ///< (lambda + delta) / 2
    std::optional<double> a;    ///< smallest grid constant with f >= c r^2 - a r
    std::optional<double> r0;
};

struct ComparisonReport
{
    std::string soliton_id;
    std::vector<double> base_point;
    int directions = 0;
    double h = 0.0;
    std::vector<ComparisonRow> rows;

    // Sampled hypotheses.
    double min_scalar = 0.0;
    double min_rho_scalar = 0.0;
    bool shrinking = false;
    bool phi_hypotheses = false; ///< lambda > 0, rho > 0, R >= 0 on samples
    bool growth_hypotheses = false;
    std::optional<GrowthBound> growth;
    std::vector<std::string> warnings;
    int conjugate_rays = 0;  ///< rays whose conjugate radius lies inside the grid
    bool monotone = true;

    nlohmann::json to_json() const;
    void write_csv(std::ostream& out) const;
};

/// Vol, Vol_f and the three bounds on one shared set of rays.
ComparisonReport compare_volumes(const SolitonInstance& s, std::span<const double> r_grid, const SphereGrid& grid,
                                 const VolumeOptions& opt = {});

} // namespace solitonlab
