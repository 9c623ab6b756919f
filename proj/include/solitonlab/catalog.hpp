#pragma once

#include "solitonlab/soliton.hpp"

#include <json.hpp>

#include <optional>
#include <string>
#include <vector>

namespace solitonlab {

namespace catalog {

SolitonInstance euclidean_flat(int n = 3);
/// Flat R^n with f = lambda |x|^2 / 2; rho defaults to the Schouten value.
SolitonInstance gaussian(int n = 2, double lambda = 1.0, std::optional<double> rho = std::nullopt);
/// S^k(a) x R^(n-k) with a^2 = (k-1)(1 - rho k)/lambda and
/// f = lambda/(1 - rho k) |t|^2 / 2 on the flat factor.
SolitonInstance product_einstein(int n = 3, int k = 2, double rho = 0.25, double lambda = 1.0);
/// coth^2(x1) delta on {x1 > 0} in R^3, f = (2/3) log cosh x1, rho = 1/3, lambda = 0.
SolitonInstance example_21();
/// cosh^2(x1) delta on R^3, f = (8 log cosh x1 + cos 2x1)/12, rho = lambda = 1/3.
SolitonInstance example_22();
/// e^{2 xi} delta on R^n times a flat R^m with warping e^xi, xi = alpha . x.
SolitonInstance example_23(int m = 2, int n = 3, double c = 1.0, std::vector<double> alpha = {0.6, 0.8, 0.0});
/// Round sphere of radius a in a stereographic chart (Einstein, f = 0).
SolitonInstance sphere(int n = 2, double a = 1.0);
/// Upper half-plane model of curvature -1 (Einstein, f = 0).
SolitonInstance hyperbolic_plane();

/// Ids of the built-in entries in listing order.
const std::vector<std::string>& ids();
/// All built-in entries with default parameters, in listing order.
std::vector<SolitonInstance> builtin();
/// Build an entry from its id and parameter object; errors carry `pointer`.
SolitonInstance build(const std::string& id, const nlohmann::json& params, const std::string& pointer);

} // namespace catalog

nlohmann::json to_json(const SolitonInstance& s);

/// Accepts an inline definition or {"catalog": id, "params": {...}}.
SolitonInstance soliton_from_json(const nlohmann::json& j, const std::string& pointer);

/// Residual threshold and sample count enforced for exact entries.
inline constexpr double kExactResidual = 1e-9;
inline constexpr int kExactSamples = 100;

/// Largest soliton residual over the entry's exactness sample.
double exactness_residual(const SolitonInstance& s);

/// Throws ConfigError for an exact entry whose residual reaches kExactResidual.
void verify_exactness(const SolitonInstance& s, const std::string& pointer);

/// Reads a catalog file {"schema": 1, "entries": [...]}, enforcing exactness.
std::vector<SolitonInstance> load_catalog(const std::string& path);

nlohmann::json catalog_document(const std::vector<SolitonInstance>& entries);

} // namespace solitonlab
