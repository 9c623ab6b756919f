#include "solitonlab/spectral.hpp"

#include "solitonlab/errors.hpp"
#include "solitonlab/parallel.hpp"
#include "solitonlab/kernels.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <random>

namespace solitonlab {

namespace {

// Grid index helpers: node i has axis-k coordinate (i / N^k) % N.
int axis_index(std::size_t node, std::size_t stride, int N)
{
    return static_cast<int>((node / stride) % static_cast<std::size_t>(N));
}

void orthogonalize(std::vector<double>& x, const std::vector<double>& q)
{
    const auto& K = kernels::active();
    const double d = K.dot(q.data(), x.data(), x.size());
    K.axpy(-d, q.data(), x.data(), x.size());
}

double norm(const std::vector<double>& x)
{
    return std::sqrt(kernels::active().dot(x.data(), x.data(), x.size()));
}

// Conjugate gradients for S x = b on the complement of the kernel vector.
long solve_deflated(const SpectralOperator& op, const std::vector<double>& b, std::vector<double>& x, double tol)
{
    const auto& K = kernels::active();
    const std::size_t n = b.size();
    std::vector<double> r = b;
    orthogonalize(r, op.kernel_vector());
    x.assign(n, 0.0);
    std::vector<double> p = r, q(n);
    double rr = K.dot(r.data(), r.data(), n);
    const double stop = tol * tol * rr;
    const long limit = 20 * static_cast<long>(n) + 100;
    long it = 0;
    while (rr > stop && it < limit) {
        op.apply_symmetric(p.data(), q.data());
        const double alpha = rr / K.dot(p.data(), q.data(), n);
        K.axpy(alpha, p.data(), x.data(), n);
        K.axpy(-alpha, q.data(), r.data(), n);
        const double rr_new = K.dot(r.data(), r.data(), n);
        const double beta = rr_new / rr;
        rr = rr_new;
        for (std::size_t i = 0; i < n; ++i)
            p[i] = r[i] + beta * p[i];
        ++it;
    }
    if (rr > stop)
        throw NoConvergence(it);
    orthogonalize(x, op.kernel_vector());
    return it;
}

bool euclidean_background(const SolitonInstance& s)
{
    if (s.metric.tag() && s.metric.tag()->kind == StructureKind::Euclidean)
        return true;
    for (const auto& x : sample_points(s.metric, 8, 99)) {
        const SmallMatrix g = s.metric.metric_at(x);
        for (int i = 0; i < s.dim(); ++i)
            for (int j = 0; j < s.dim(); ++j)
                if (std::abs(g(i, j) - (i == j ? 1.0 : 0.0)) > 1e-14)
                    return false;
    }
    return true;
}

} // namespace

SpectralProblem SpectralProblem::make(int n, double L, int N, const std::string& f)
{
    if (n < 1 || n > 3)
        throw DomainError("spectral problems support n = 1, 2, 3");
    if (!(L > 0.0))
        throw DomainError("box half-width must be positive");
    if (N < 51 || N % 2 == 0)
        throw DomainError("grid points per axis must be odd and >= 51");
    SpectralProblem p;
    p.n = n;
    p.L = L;
    p.N = N;
    p.f_source = f;
    p.f = parse(f);
    if (p.f.arity() > n)
        throw DomainError("potential uses more coordinates than the box has");
    return p;
}

std::size_t SpectralProblem::unknowns() const
{
    std::size_t s = 1;
    for (int k = 0; k < n; ++k)
        s *= static_cast<std::size_t>(N);
    return s;
}

SpectralOperator::SpectralOperator(const SpectralProblem& p, int workers)
    : n_(p.n), N_(p.N), L_(p.L), h_(p.spacing()), workers_(std::max(1, workers))
{
    const std::size_t size = p.unknowns();
    stride_.resize(static_cast<std::size_t>(n_));
    std::size_t s = 1;
    for (int k = 0; k < n_; ++k) {
        stride_[static_cast<std::size_t>(k)] = s;
        s *= static_cast<std::size_t>(N_);
    }
    mass_.assign(size, 0.0);
    edge_.assign(static_cast<std::size_t>(n_), std::vector<double>(size, 0.0));

    const double hn = std::pow(h_, n_);
    const double hn2 = std::pow(h_, n_ - 2);
    auto body = [&](int chunk) {
        const std::size_t lo = size * static_cast<std::size_t>(chunk) / static_cast<std::size_t>(workers_);
        const std::size_t hi = size * static_cast<std::size_t>(chunk + 1) / static_cast<std::size_t>(workers_);
        std::vector<double> x(static_cast<std::size_t>(n_));
        for (std::size_t i = lo; i < hi; ++i) {
            double cut = 1.0;
            for (int k = 0; k < n_; ++k) {
                const int a = axis_index(i, stride_[static_cast<std::size_t>(k)], N_);
                x[static_cast<std::size_t>(k)] = -L_ + h_ * a;
                if (a == 0 || a == N_ - 1)
                    cut *= 0.5;
            }
            mass_[i] = std::exp(-p.f.evaluate(x)) * hn * cut;
            for (int k = 0; k < n_; ++k) {
                const int a = axis_index(i, stride_[static_cast<std::size_t>(k)], N_);
                if (a == N_ - 1)
                    continue;
                // Dual face of the edge: halved on every other axis where the node is on the boundary.
                double face = 1.0;
                for (int j = 0; j < n_; ++j) {
                    if (j == k)
                        continue;
                    const int b = axis_index(i, stride_[static_cast<std::size_t>(j)], N_);
                    if (b == 0 || b == N_ - 1)
                        face *= 0.5;
                }
                std::vector<double> mid = x;
                mid[static_cast<std::size_t>(k)] += 0.5 * h_;
                edge_[static_cast<std::size_t>(k)][i] = std::exp(-p.f.evaluate(mid)) * hn2 * face;
            }
        }
    };
    parallel_for(workers_, workers_, body);

    sqrt_mass_.resize(size);
    inv_sqrt_mass_.resize(size);
    kernel_.resize(size);
    double total = 0.0;
    for (std::size_t i = 0; i < size; ++i) {
        if (!(mass_[i] > 0.0) || !std::isfinite(mass_[i]))
            throw DomainError("weight e^{-f} underflows or overflows on the grid; shrink the box");
        sqrt_mass_[i] = std::sqrt(mass_[i]);
        inv_sqrt_mass_[i] = 1.0 / sqrt_mass_[i];
        total += mass_[i];
    }
    const double scale = 1.0 / std::sqrt(total);
    for (std::size_t i = 0; i < size; ++i)
        kernel_[i] = sqrt_mass_[i] * scale;
    scratch_.resize(size);
    scratch2_.resize(size);
}

double SpectralOperator::coordinate(int axis, std::size_t node) const
{
    return -L_ + h_ * axis_index(node, stride_[static_cast<std::size_t>(axis)], N_);
}

void SpectralOperator::apply_stiffness(const double* u, double* out) const
{
    const auto& K = kernels::active();
    const std::size_t size = mass_.size();
    std::fill(out, out + size, 0.0);
    for (int k = 0; k < n_; ++k) {
        const std::size_t s = stride_[static_cast<std::size_t>(k)];
        const double* w = edge_[static_cast<std::size_t>(k)].data();
        const std::size_t len = size - s;
        // Chunks write disjoint output ranges; the two passes are separated
        // so that out[i] and out[i + s] are never written concurrently.
        parallel_for(workers_, workers_, [&](int c) {
            const std::size_t lo = len * static_cast<std::size_t>(c) / static_cast<std::size_t>(workers_);
            const std::size_t hi = len * static_cast<std::size_t>(c + 1) / static_cast<std::size_t>(workers_);
            K.weighted_difference(w + lo, u + lo, u + lo + s, out + lo, hi - lo);
        });
        parallel_for(workers_, workers_, [&](int c) {
            const std::size_t lo = len * static_cast<std::size_t>(c) / static_cast<std::size_t>(workers_);
            const std::size_t hi = len * static_cast<std::size_t>(c + 1) / static_cast<std::size_t>(workers_);
            K.weighted_difference(w + lo, u + lo + s, u + lo, out + lo + s, hi - lo);
        });
    }
}

void SpectralOperator::apply_symmetric(const double* y, double* out) const
{
    const auto& K = kernels::active();
    const std::size_t size = mass_.size();
    K.mul(inv_sqrt_mass_.data(), y, scratch_.data(), size);
    apply_stiffness(scratch_.data(), scratch2_.data());
    K.mul(inv_sqrt_mass_.data(), scratch2_.data(), out, size);
}

double SpectralOperator::max_asymmetry(std::uint64_t seed) const
{
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> nd;
    const std::size_t size = mass_.size();
    std::vector<double> a(size), b(size), Sa(size), Sb(size);
    double worst = 0.0;
    for (int trial = 0; trial < 4; ++trial) {
        for (std::size_t i = 0; i < size; ++i) {
            a[i] = nd(rng);
            b[i] = nd(rng);
        }
        apply_symmetric(a.data(), Sa.data());
        apply_symmetric(b.data(), Sb.data());
        const auto& K = kernels::active();
        const double lhs = K.dot(Sa.data(), b.data(), size);
        const double rhs = K.dot(a.data(), Sb.data(), size);
        const double scale = norm(Sa) * norm(b) + norm(a) * norm(Sb);
        worst = std::max(worst, std::abs(lhs - rhs) / scale);
    }
    return worst;
}

SpectralOperator assemble(const SpectralProblem& p, int workers)
{
    return SpectralOperator(p, workers);
}

SpectralResult smallest_nonzero(const SpectralProblem& p, int m, const SolverOptions& opt)
{
    if (m < 2)
        throw DomainError("request at least the constant mode and one more eigenpair");
    const SpectralOperator op(p, opt.workers);
    const std::size_t size = op.size();
    const int wanted = m - 1;
    const int block = std::max(opt.block, 1);
    const long budget = static_cast<long>(10.0 * m * std::sqrt(static_cast<double>(size)));
    const auto& K = kernels::active();

    SpectralResult res;
    std::vector<std::vector<double>> V;
    std::vector<std::vector<double>> W; // T V with T the deflated inverse
    std::vector<std::vector<double>> pending;

    std::mt19937_64 rng(opt.seed);
    std::normal_distribution<double> nd;
    for (int b = 0; b < block; ++b) {
        std::vector<double> v(size);
        for (double& x : v)
            x = nd(rng);
        pending.push_back(std::move(v));
    }

    Eigen::MatrixXd H;
    Eigen::VectorXd theta;
    Eigen::MatrixXd Y;
    while (true) {
        // Orthonormalise the pending block against the kernel and the basis, twice.
        for (auto& v : pending) {
            const double before = norm(v);
            for (int pass = 0; pass < 2; ++pass) {
                orthogonalize(v, op.kernel_vector());
                for (const auto& q : V)
                    orthogonalize(v, q);
            }
            const double nv = norm(v);
            if (!(nv > 1e-10 * before))
                continue;
            for (double& x : v)
                x /= nv;
            V.push_back(std::move(v));
            std::vector<double> w;
            res.cg_iterations += solve_deflated(op, V.back(), w, opt.cg_tolerance);
            ++res.operator_applications;
            W.push_back(std::move(w));
        }
        pending.clear();
        const int k = static_cast<int>(V.size());
        if (k == 0 || res.operator_applications > budget)
            throw NoConvergence(res.operator_applications);

        H.resize(k, k);
        for (int a = 0; a < k; ++a)
            for (int b = 0; b <= a; ++b) {
                const double x = 0.5 * (K.dot(V[static_cast<std::size_t>(a)].data(), W[static_cast<std::size_t>(b)].data(), size) +
                                        K.dot(V[static_cast<std::size_t>(b)].data(), W[static_cast<std::size_t>(a)].data(), size));
                H(a, b) = x;
                H(b, a) = x;
            }
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(H);
        theta = es.eigenvalues(); // ascending; the wanted ones are the largest
        Y = es.eigenvectors();

        bool converged = k >= wanted + block;
        for (int j = 0; j < wanted && converged; ++j) {
            const int col = k - 1 - j;
            std::vector<double> r(size, 0.0);
            for (int a = 0; a < k; ++a) {
                K.axpy(Y(a, col), W[static_cast<std::size_t>(a)].data(), r.data(), size);
                K.axpy(-theta(col) * Y(a, col), V[static_cast<std::size_t>(a)].data(), r.data(), size);
            }
            if (norm(r) > opt.tolerance * std::abs(theta(col)))
                converged = false;
        }
        if (converged)
            break;
        // Next block: T applied to the newest basis vectors.
        for (int b = std::max(0, k - block); b < k; ++b)
            pending.push_back(W[static_cast<std::size_t>(b)]);
        if (static_cast<long>(V.size()) >= static_cast<long>(size) - 1)
            throw NoConvergence(res.operator_applications);
    }

    const int k = static_cast<int>(V.size());
    // Constant mode from the kernel vector itself.
    {
        std::vector<double> z = op.kernel_vector(), Sz(size);
        op.apply_symmetric(z.data(), Sz.data());
        const double lam0 = K.dot(z.data(), Sz.data(), size);
        K.axpy(-lam0, z.data(), Sz.data(), size);
        res.eigenvalues.push_back(lam0);
        res.residuals.push_back(norm(Sz));
        std::vector<double> u(size);
        K.mul(op.inv_sqrt_mass().data(), z.data(), u.data(), size);
        double mean = 0.0;
        for (double x : u)
            mean += x;
        mean /= static_cast<double>(size);
        double var = 0.0;
        for (double x : u)
            var += (x - mean) * (x - mean);
        res.constant_cv = std::sqrt(var / static_cast<double>(size)) / std::abs(mean);
        res.vectors.push_back(std::move(u));
    }
    for (int j = 0; j < wanted; ++j) {
        const int col = k - 1 - j;
        std::vector<double> y(size, 0.0);
        for (int a = 0; a < k; ++a)
            K.axpy(Y(a, col), V[static_cast<std::size_t>(a)].data(), y.data(), size);
        const double ny = norm(y);
        for (double& x : y)
            x /= ny;
        std::vector<double> Sy(size);
        op.apply_symmetric(y.data(), Sy.data());
        const double lam = K.dot(y.data(), Sy.data(), size);
        K.axpy(-lam, y.data(), Sy.data(), size);
        res.eigenvalues.push_back(lam);
        res.residuals.push_back(norm(Sy));
        std::vector<double> u(size);
        K.mul(op.inv_sqrt_mass().data(), y.data(), u.data(), size);
        res.vectors.push_back(std::move(u));
    }
    // Ritz values come out in descending order of 1/lambda; keep pairs aligned while sorting.
    std::vector<std::size_t> order(res.eigenvalues.size());
    for (std::size_t i = 0; i < order.size(); ++i)
        order[i] = i;
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return res.eigenvalues[a] < res.eigenvalues[b]; });
    SpectralResult sorted = res;
    for (std::size_t i = 0; i < order.size(); ++i) {
        sorted.eigenvalues[i] = res.eigenvalues[order[i]];
        sorted.residuals[i] = res.residuals[order[i]];
        sorted.vectors[i] = res.vectors[order[i]];
    }

    const double edge_weight = std::exp(-p.f.evaluate(std::vector<double>(static_cast<std::size_t>(p.n), p.L)));
    if (edge_weight > 1e-12)
        sorted.warnings.push_back("e^{-f} at the box corner exceeds 1e-12; truncation may dominate");
    return sorted;
}

double rayleigh(const SpectralProblem& p, const Expression& u)
{
    if (u.arity() > p.n)
        throw DomainError("test function uses more coordinates than the box has");
    const SpectralOperator op(p);
    const std::size_t size = op.size();
    std::vector<double> val(size), Ku(size), x(static_cast<std::size_t>(p.n));
    for (std::size_t i = 0; i < size; ++i) {
        for (int k = 0; k < p.n; ++k)
            x[static_cast<std::size_t>(k)] = op.coordinate(k, i);
        val[i] = u.evaluate(x);
    }
    const auto& m = op.mass();
    double total = 0.0;
    double mean = 0.0;
    for (std::size_t i = 0; i < size; ++i) {
        total += m[i];
        mean += m[i] * val[i];
    }
    mean /= total;
    double var = 0.0;
    for (std::size_t i = 0; i < size; ++i)
        var += m[i] * (val[i] - mean) * (val[i] - mean);
    if (var < 1e-14)
        throw DegenerateTestFunction("weighted variance of the test function is below 1e-14");
    op.apply_stiffness(val.data(), Ku.data());
    return kernels::active().dot(val.data(), Ku.data(), size) / var;
}

void write_eigenvector_slice(std::ostream& out, const SpectralProblem& p, const std::vector<double>& u)
{
    out << "x,u\n";
    const std::size_t mid_offset = [&] {
        // Node index with x1 = -L and all other coordinates at the centre.
        std::size_t off = 0;
        std::size_t stride = static_cast<std::size_t>(p.N);
        for (int k = 1; k < p.n; ++k) {
            off += stride * static_cast<std::size_t>(p.N / 2);
            stride *= static_cast<std::size_t>(p.N);
        }
        return off;
    }();
    char buf[64];
    for (int i = 0; i < p.N; ++i) {
        std::snprintf(buf, sizeof buf, "%.17g,%.17g\n", -p.L + p.spacing() * i,
                      u.at(mid_offset + static_cast<std::size_t>(i)));
        out << buf;
    }
}

nlohmann::json SpectralResult::to_json() const
{
    nlohmann::json j;
    j["eigenvalues"] = eigenvalues;
    j["residuals"] = residuals;
    j["constant_cv"] = constant_cv;
    j["operator_applications"] = operator_applications;
    j["cg_iterations"] = cg_iterations;
    j["warnings"] = warnings;
    return j;
}

nlohmann::json GapReport::to_json() const
{
    nlohmann::json j;
    j["lambda"] = lambda;
    j["lambda1"] = lambda1;
    j["lambda1_coarse"] = lambda1_coarse;
    j["refinement_error"] = refinement_error;
    j["margin"] = margin;
    j["bound_holds"] = bound_holds;
    j["eigenvalues"] = eigenvalues;
    j["residuals"] = residuals;
    j["sweep_L"] = sweep_L;
    j["sweep_lambda1"] = sweep_lambda1;
    j["sweep_min_gap"] = sweep_min_gap;
    j["discrete_spectrum"] = discrete_spectrum;
    j["warnings"] = warnings;
    return j;
}

GapReport gap_audit(const SolitonInstance& s, const SpectralProblem& p, const SolverOptions& opt)
{
    if (!euclidean_background(s))
        throw NotApplicable("spectral audit needs a Euclidean-background soliton");
    if (s.f.arity() > p.n)
        throw NotApplicable("potential depends on coordinates outside the spectral box");

    GapReport rep;
    rep.lambda = s.lambda;
    const SpectralProblem fine = SpectralProblem::make(p.n, p.L, p.N, s.f_source);
    const SpectralResult r = smallest_nonzero(fine, 3, opt);
    rep.eigenvalues = r.eigenvalues;
    rep.residuals = r.residuals;
    rep.warnings = r.warnings;
    rep.lambda1 = r.eigenvalues.at(1);

    // The coarse grid may have an even point count; build it directly.
    SpectralProblem coarse = fine;
    coarse.N = (p.N - 1) / 2 + 1;
    if (coarse.N >= 3) {
        rep.lambda1_coarse = smallest_nonzero(coarse, 2, opt).eigenvalues.at(1);
        rep.refinement_error = std::abs(rep.lambda1 - rep.lambda1_coarse) / 3.0;
    }
    rep.margin = rep.lambda1 - rep.lambda;
    rep.bound_holds = rep.lambda1 >= rep.lambda - rep.refinement_error;

    // Truncation stability: the gap must neither collapse as L grows nor
    // close between distinct levels.
    double first = 0.0;
    bool stable = true;
    for (double L : {6.0, 8.0, 10.0}) {
        const SpectralProblem q = SpectralProblem::make(p.n, L, p.N, s.f_source);
        const SpectralResult sr = smallest_nonzero(q, 7, opt);
        std::vector<double> levels;
        for (double e : sr.eigenvalues)
            if (levels.empty() || e - levels.back() > 1e-3 * (1.0 + std::abs(e)))
                levels.push_back(e);
        double gap = std::numeric_limits<double>::infinity();
        for (std::size_t i = 0; i + 1 < levels.size(); ++i)
            gap = std::min(gap, levels[i + 1] - levels[i]);
        rep.sweep_L.push_back(L);
        rep.sweep_lambda1.push_back(sr.eigenvalues.at(1));
        rep.sweep_min_gap.push_back(gap);
        if (rep.sweep_L.size() == 1)
            first = sr.eigenvalues.at(1);
        const double floor = 0.1 * std::max(s.lambda, first);
        if (!(gap >= floor))
            stable = false;
    }
    if (rep.sweep_lambda1.back() < 0.5 * rep.sweep_lambda1.front())
        stable = false;
    rep.discrete_spectrum = stable;
    if (!stable)
        rep.warnings.push_back("no spectral gap: lambda1 collapses as the box grows");
    return rep;
}

} // namespace solitonlab
