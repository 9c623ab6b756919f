#pragma once

#include "solitonlab/metric.hpp"

#include <optional>
#include <span>
#include <vector>

namespace solitonlab {

/// Metric, connection and curvature at one point, all from exact jets of g.
///
/// Index conventions: christoffel(k,i,j) = Gamma^k_ij,
/// riemann(l,i,j,k) = R^l_ijk with R(d_i,d_j)d_k = R^l_ijk d_l and
/// R^l_ijk = d_i Gamma^l_jk - d_j Gamma^l_ik + Gamma^l_im Gamma^m_jk - Gamma^l_jm Gamma^m_ik,
/// ricci R_jk = R^i_ijk.
struct LocalGeometry
{
    int n = 0;
    SmallMatrix g;
    SmallMatrix ginv;
    SmallMatrix chol;
    std::vector<double> dg;           ///< d_m g_ij at [(m*n + i)*n + j]
    std::vector<double> gamma;        ///< [(k*n + i)*n + j]
    std::vector<double> dgamma;       ///< d_m Gamma^k_ij at [((m*n + k)*n + i)*n + j]
    std::vector<double> riem;         ///< [((l*n + i)*n + j)*n + k]
    SmallMatrix ricci;
    double scalar = 0.0;

    double christoffel(int k, int i, int j) const { return gamma[static_cast<std::size_t>((k * n + i) * n + j)]; }
    double riemann(int l, int i, int j, int k) const
    {
        return riem[static_cast<std::size_t>(((l * n + i) * n + j) * n + k)];
    }
};

/// Throws SingularMetric if g is not positive definite at x, DomainError
/// from the coefficient expressions.
LocalGeometry local_geometry(const MetricChart& m, std::span<const double> x);

/// Connection only (no curvature); cheaper, used by the geodesic equation.
void christoffel_at(const MetricChart& m, std::span<const double> x, LocalGeometry& out);

double scalar_curvature(const MetricChart& m, std::span<const double> x);

struct CurvatureJet
{
    std::vector<double> point;
    std::vector<double> christoffel; ///< Gamma^k_ij at [(k*n + i)*n + j]
    SmallMatrix ricci;
    double scalar = 0.0;
    double ricci_norm2 = 0.0;        ///< |Ric|^2_g
    std::vector<double> grad_R;      ///< coordinate differential dR
};

/// Step of the central difference used for dR (Richardson-extrapolated once).
inline constexpr double kGradientStep = 1e-4;
/// Step of the central second difference used for the Hessian of R.
inline constexpr double kHessianStep = 5e-3;

CurvatureJet curvature_at(const MetricChart& m, std::span<const double> x);

/// Central-difference gradient of R with one Richardson step.
std::vector<double> scalar_curvature_gradient(const MetricChart& m, std::span<const double> x);

/// Laplace-Beltrami of R: g^ij (d_i d_j R - Gamma^k_ij d_k R), second
/// derivatives by central differences with one Richardson step.
double scalar_curvature_laplacian(const MetricChart& m, std::span<const double> x);

/// |div Ric - dR/2|_g at x; div Ric by central differences of the exact Ricci tensor.
double bianchi_defect(const MetricChart& m, std::span<const double> x);

struct WeightedOperators
{
    SmallMatrix hess_f;  ///< covariant Hessian of f
    double lap_f = 0.0;
    double drift_lap_u = 0.0; ///< Delta_f u = Delta u - <grad f, grad u>
    SmallMatrix ric_f;   ///< Ric + Hess f
};

WeightedOperators weighted_operators_at(const MetricChart& m, const Expression& f, const Expression& u,
                                        std::span<const double> x);

/// Covariant Hessian of f at x from an already computed geometry.
SmallMatrix covariant_hessian(const LocalGeometry& geo, const JetValue& f);

/// Closed-form curvature from the structure tag. Fields a tag cannot supply are empty.
struct ClosedFormCurvature
{
    std::optional<SmallMatrix> ricci;
    std::optional<std::vector<double>> christoffel;
    std::optional<double> ricci_rr; ///< rotationally symmetric: Ric(dr, dr)
    double scalar = 0.0;
};

/// Throws NotApplicable when the chart carries no tag.
ClosedFormCurvature closed_form_curvature(const MetricChart& m, std::span<const double> x);

/// g-norm helpers.
double covector_norm(const SmallMatrix& ginv, std::span<const double> w);
double tensor_norm2(const SmallMatrix& ginv, const SmallMatrix& t);

} // namespace solitonlab
