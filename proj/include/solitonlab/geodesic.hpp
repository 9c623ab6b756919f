#pragma once

#include "solitonlab/curvature.hpp"
#include "solitonlab/parallel.hpp"

#include <cstdint>
#include <limits>
#include <optional>
#include <ostream>
#include <span>
#include <vector>

namespace solitonlab {

struct RaySample
{
    double r = 0.0;
    std::vector<double> x;
    std::vector<double> v;
    double J = 0.0;          ///< det of the transverse Jacobi matrix
    double w = 0.0;          ///< d/dr log J; +inf at r = 0
    double ric_rr = 0.0;     ///< Ric(v, v)
    double scalar = 0.0;     ///< R
    double f = 0.0;          ///< potential, 0 when none was given
};

/// Unit-speed geodesic from a base point with its polar area element.
struct GeodesicRay
{
    std::vector<double> base_point;
    std::vector<double> direction; ///< g-unit tangent vector at the base point
    double h = 0.0;
    std::vector<RaySample> samples;
    /// First conjugate radius; empty means none before the end of the ray.
    std::optional<double> conjugate_radius;
    /// Set when the ray stopped early at the chart boundary.
    bool hit_boundary = false;
    double max_energy_drift = 0.0;

    /// Radial derivatives of f at the base point: f(p), df(v), Hess f(v, v).
    double f0 = 0.0;
    double f1 = 0.0;
    double f2 = 0.0;

    double end_radius() const { return samples.empty() ? 0.0 : samples.back().r; }
};

inline constexpr double kDefaultStep = 1e-3;
inline constexpr double kDefaultRadius = 10.0;
/// StepTooLarge is raised once |g(v, v) - 1| exceeds this.
inline constexpr double kMaxEnergyDrift = 1e-6;

/// Integrates the geodesic, its parallel frame and the transverse Jacobi
/// matrix by classical RK4 with a fixed step (adjusted down so that r_max is
/// a whole number of steps). `f`, if given, is sampled along the ray.
GeodesicRay shoot(const MetricChart& m, std::span<const double> p, std::span<const double> theta,
                  double r_max = kDefaultRadius, double h = kDefaultStep, const Expression* f = nullptr);

/// First conjugate radius, or +inf when the ray has none.
double cut_radius(const GeodesicRay& ray);

struct RiccatiPoint
{
    double r = 0.0;
    double slack = 0.0; ///< w' + w^2/(n-1) + Ric(dr, dr)
};

/// Slack of the Riccati inequality at the interior samples before the
/// conjugate radius.
std::vector<RiccatiPoint> riccati_audit(const GeodesicRay& ray);

/// Columns r, x1..xn, J, w, Ric_rr, f.
void write_ray_csv(std::ostream& out, const GeodesicRay& ray);

/// Maps a Euclidean unit vector u to the g-unit vector E u, with E the
/// g-orthonormal frame from the Cholesky factor of g(p).
std::vector<double> frame_direction(const MetricChart& m, std::span<const double> p, std::span<const double> u);

/// `count` Euclidean unit vectors: equally spaced angles for n = 2, seeded
/// normalised Gaussians otherwise (both signs of the axis for n = 1).
std::vector<std::vector<double>> direction_set(int n, int count, std::uint64_t seed);

} // namespace solitonlab
