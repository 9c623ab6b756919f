#pragma once

#include "solitonlab/expr.hpp"
#include "solitonlab/soliton.hpp"

#include <json.hpp>

#include <cstdint>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

namespace solitonlab {

/// Drifted Laplacian on the Euclidean box [-L, L]^n with weighted Neumann
/// boundary conditions and measure e^{-f} dx.
struct SpectralProblem
{
    int n = 1;
    double L = 10.0;
    int N = 201; ///< grid points per axis, odd and >= 51
    std::string f_source = "0";
    Expression f;

    static SpectralProblem make(int n, double L, int N, const std::string& f);
    double spacing() const { return 2.0 * L / (N - 1); }
    std::size_t unknowns() const;
};

/// Node-centred finite-volume discretisation. The quadratic form is
/// sum over grid edges of e^{-f(midpoint)} h^{n-2} (u_j - u_i)^2, and the
/// lumped mass is e^{-f(node)} h^n; both carry a factor 1/2 per axis on
/// which the dual cell or dual face is cut by the boundary.
class SpectralOperator
{
public:
    SpectralOperator() = default;
    explicit SpectralOperator(const SpectralProblem& p, int workers = 1);

    int dim() const { return n_; }
    int points_per_axis() const { return N_; }
    std::size_t size() const { return mass_.size(); }
    const std::vector<double>& mass() const { return mass_; }
    double coordinate(int axis, std::size_t node) const;

    /// out = K u
    void apply_stiffness(const double* u, double* out) const;
    /// out = M^{-1/2} K M^{-1/2} y, the symmetric form of the pencil (K, M).
    void apply_symmetric(const double* y, double* out) const;
    /// Unit vector spanning the kernel of the symmetric form (M^{1/2} 1).
    const std::vector<double>& kernel_vector() const { return kernel_; }
    const std::vector<double>& sqrt_mass() const { return sqrt_mass_; }
    const std::vector<double>& inv_sqrt_mass() const { return inv_sqrt_mass_; }

    /// max |<S a, b> - <a, S b>| / (|a| |b| |S|) over a few seeded random pairs.
    double max_asymmetry(std::uint64_t seed = 7) const;

private:
    int n_ = 0;
    int N_ = 0;
    double L_ = 0.0;
    double h_ = 0.0;
    int workers_ = 1;
    std::vector<double> mass_;
    std::vector<double> sqrt_mass_;
    std::vector<double> inv_sqrt_mass_;
    std::vector<double> kernel_;
    std::vector<std::vector<double>> edge_; ///< per axis; weight of the edge (i, i + stride), 0 if none
    std::vector<std::size_t> stride_;
    mutable std::vector<double> scratch_;
    mutable std::vector<double> scratch2_;
};

SpectralOperator assemble(const SpectralProblem& p, int workers = 1);

struct SolverOptions
{
    int block = 3;
    double tolerance = 1e-9;     ///< relative Ritz residual of the inverted operator
    double cg_tolerance = 1e-12; ///< relative residual of the inner solves
    std::uint64_t seed = 12345;
    int workers = 1;
};

struct SpectralResult
{
    std::vector<double> eigenvalues; ///< ascending, eigenvalues[0] is the constant mode
    std::vector<double> residuals;   ///< |Delta_f u + lambda u| / |u| in the weighted norm
    std::vector<std::vector<double>> vectors; ///< nodal values of u, weighted-unit norm
    double constant_cv = 0.0;        ///< coefficient of variation of the kernel eigenvector
    long operator_applications = 0;
    long cg_iterations = 0;
    std::vector<std::string> warnings;

    nlohmann::json to_json() const;
};

/// m lowest eigenpairs (m >= 2, including the constant mode) by shift-invert
/// block Lanczos at shift 0 with the constant vector deflated. Throws
/// NoConvergence after 10 m sqrt(unknowns) operator applications.
SpectralResult smallest_nonzero(const SpectralProblem& p, int m, const SolverOptions& opt = {});

/// Weighted Rayleigh quotient of u on the grid. Throws DegenerateTestFunction
/// when the weighted variance is below 1e-14.
double rayleigh(const SpectralProblem& p, const Expression& u);

/// CSV slice of an eigenvector: all nodes for n = 1, the line x2 = ... = 0
/// otherwise. Columns x, u.
void write_eigenvector_slice(std::ostream& out, const SpectralProblem& p, const std::vector<double>& u);

struct GapReport
{
    double lambda = 0.0;             ///< soliton constant
    double lambda1 = 0.0;
    double lambda1_coarse = 0.0;     ///< on the grid with (N - 1)/2 + 1 points
    double refinement_error = 0.0;   ///< |lambda1 - lambda1_coarse| / 3
    double margin = 0.0;             ///< lambda1 - lambda
    bool bound_holds = false;        ///< lambda1 >= lambda - refinement_error
    std::vector<double> eigenvalues;
    std::vector<double> residuals;
    std::vector<double> sweep_L;
    std::vector<double> sweep_lambda1;
    std::vector<double> sweep_min_gap; ///< smallest gap between distinct levels among the first seven
    bool discrete_spectrum = false;    ///< truncation-stability proxy
    std::vector<std::string> warnings;

    nlohmann::json to_json() const;
};

/// Needs a Euclidean-background soliton; p.f is replaced by the soliton's potential.
GapReport gap_audit(const SolitonInstance& s, const SpectralProblem& p, const SolverOptions& opt = {});

} // namespace solitonlab
