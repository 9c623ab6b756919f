#include "solitonlab/errors.hpp"
#include "solitonlab/expr.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <cstring>
#include <random>
#include <vector>

using namespace solitonlab;

namespace {

const std::vector<std::string> kCorpus = {
    "x1^2/2",
    "(2/3)*log(cosh(x1))",
    "coth(x1)^2",
    "exp(2*(0.6*x1+0.8*x2))",
    "(8*log(cosh(x1))+cos(2*x1))/12",
    "sin(x1)*cos(x2) - x3^3 + 2.5e-1*x1*x2*x3",
    "sqrt(1 + x1^2 + x2^2) / (2 + tanh(x3))",
    "abs(x1 - 5) * sinh(x2) + x1^x2",
    "-x1^2 * -x2 + 3 - -x3",
    "(x1*x1 + x2*x2)^1.5",
    "log(2/(1 - x1^2 - x2^2))",
    "exp(-(x1^2+x2^2)/4) * pi",
};

std::vector<double> random_point(std::mt19937_64& rng, int n)
{
    std::uniform_real_distribution<double> u(0.1, 0.6);
    std::vector<double> p(static_cast<std::size_t>(n));
    for (auto& v : p)
        v = u(rng);
    return p;
}

} // namespace

TEST(Parse, PolynomialTree)
{
    const Expression e = parse("x1^2/2");
    EXPECT_EQ(e.to_string(), "((x1^2)/2)");
    EXPECT_EQ(e.arity(), 1);
}

TEST(Parse, ExampleTwoOnePotential)
{
    const Expression e = parse("(2/3)*log(cosh(x1))");
    EXPECT_EQ(e.to_string(), "((2/3)*log(cosh(x1)))");
}

TEST(Parse, UnbalancedParenReportsOffset)
{
    try {
        parse("cosh(");
        FAIL() << "expected SyntaxError";
    } catch (const SyntaxError& e) {
        EXPECT_EQ(e.offset(), 5u);
        EXPECT_FALSE(e.expected().empty());
    }
}

TEST(Parse, Errors)
{
    EXPECT_THROW(parse("foo(x1)"), UnknownIdentifier);
    EXPECT_THROW(parse("x0"), UnknownIdentifier);
    EXPECT_THROW(parse("x9"), UnknownIdentifier);
    EXPECT_THROW(parse("x1 x2"), SyntaxError);
    EXPECT_THROW(parse(""), SyntaxError);
    EXPECT_THROW(parse("1 +"), SyntaxError);
    EXPECT_THROW(parse("sin x1"), SyntaxError);
    EXPECT_THROW(parse("(x1"), SyntaxError);
    try {
        parse("2*y");
        FAIL();
    } catch (const UnknownIdentifier& e) {
        EXPECT_EQ(e.name(), "y");
        EXPECT_EQ(e.offset(), 2u);
    }
}

TEST(Parse, PrecedenceAndAssociativity)
{
    const double x[] = {2.0, 3.0};
    EXPECT_DOUBLE_EQ(parse("2^3^2").evaluate(x), 512.0);
    EXPECT_DOUBLE_EQ(parse("-x1^2").evaluate(x), -4.0);
    EXPECT_DOUBLE_EQ(parse("x1 - x2 - 1").evaluate(x), -2.0);
    EXPECT_DOUBLE_EQ(parse("x2 / x1 / 2").evaluate(x), 0.75);
    EXPECT_DOUBLE_EQ(parse("2^-1").evaluate(x), 0.5);
    EXPECT_DOUBLE_EQ(parse("1e2 + .5").evaluate(x), 100.5);
}

TEST(Parse, RoundTripIsStructurallyIdentical)
{
    for (const auto& src : kCorpus) {
        const Expression a = parse(src);
        const Expression b = parse(a.to_string());
        EXPECT_TRUE(a == b) << src;
        EXPECT_EQ(a.to_string(), b.to_string());
    }
    // Literals that do not print exactly in short decimal form still round-trip.
    const Expression c = parse("0.1*x1 + 1e-300 + 123456789.123456789");
    EXPECT_TRUE(c == parse(c.to_string()));
}

TEST(EvalJet, Polynomial)
{
    const double x[] = {3.0};
    const JetValue j = parse("x1^2/2").eval_jet(x);
    EXPECT_DOUBLE_EQ(j.value, 4.5);
    EXPECT_DOUBLE_EQ(j.gradient(0), 3.0);
    EXPECT_DOUBLE_EQ(j.hessian(0, 0), 1.0);
}

TEST(EvalJet, ExampleTwoOnePotentialAtZero)
{
    const double x[] = {0.0};
    const JetValue j = eval_jet(parse("(2/3)*log(cosh(x1))"), x);
    EXPECT_EQ(j.value, 0.0);
    EXPECT_EQ(j.gradient(0), 0.0);
    EXPECT_NEAR(j.hessian(0, 0), 2.0 / 3.0, 1e-15);
}

TEST(EvalJet, DomainErrors)
{
    const double zero[] = {0.0};
    const double neg[] = {-1.0};
    EXPECT_THROW(parse("coth(x1)").eval_jet(zero), DomainError);
    EXPECT_THROW(parse("log(x1)").eval_jet(neg), DomainError);
    EXPECT_THROW(parse("log(x1)").evaluate(zero), DomainError);
    EXPECT_THROW(parse("1/x1").eval_jet(zero), DomainError);
    EXPECT_THROW(parse("x1^0.5").eval_jet(neg), DomainError);
    EXPECT_THROW(parse("sqrt(x1)").eval_jet(neg), DomainError);
    EXPECT_THROW(parse("coth(0)").evaluate(zero), DomainError);
    EXPECT_NO_THROW(parse("x1^3").eval_jet(neg));
    EXPECT_DOUBLE_EQ(parse("x1^3").evaluate(neg), -1.0);
}

TEST(EvalJet, MatchesFiniteDifferences)
{
    std::mt19937_64 rng(7);
    const double h = 1e-5;
    for (const auto& src : kCorpus) {
        const Expression e = parse(src);
        const int n = 3;
        for (int trial = 0; trial < 20; ++trial) {
            std::vector<double> p = random_point(rng, n);
            const JetValue j = e.eval_jet(p);
            for (int i = 0; i < n; ++i) {
                std::vector<double> up = p, down = p;
                up[i] += h;
                down[i] -= h;
                const double fd = (e.evaluate(up) - e.evaluate(down)) / (2 * h);
                EXPECT_LE(std::fabs(fd - j.gradient(i)), 1e-6 * (1 + std::fabs(j.gradient(i)))) << src;
                const JetValue ju = e.eval_jet(up);
                const JetValue jd = e.eval_jet(down);
                for (int k = 0; k < n; ++k) {
                    const double fdh = (ju.gradient(k) - jd.gradient(k)) / (2 * h);
                    EXPECT_LE(std::fabs(fdh - j.hessian(i, k)), 1e-4 * (1 + std::fabs(j.hessian(i, k)))) << src;
                }
            }
        }
    }
}

TEST(EvalJet, GradientRelativeAccuracy)
{
    // Central differences with h=1e-5 agree to 1e-7 relative on smooth inputs.
    const Expression e = parse("exp(0.3*x1)*cosh(x2) + x1*x2^2");
    const std::vector<double> p = {0.7, -0.4};
    const JetValue j = e.eval_jet(p);
    const double h = 1e-5;
    for (int i = 0; i < 2; ++i) {
        std::vector<double> up = p, down = p;
        up[i] += h;
        down[i] -= h;
        const double fd = (e.evaluate(up) - e.evaluate(down)) / (2 * h);
        EXPECT_LE(std::fabs(fd - j.gradient(i)), 1e-7 * std::fabs(j.gradient(i)));
    }
}

TEST(EvalJet, SumAndProductRules)
{
    std::mt19937_64 rng(11);
    const Expression a = parse("sin(x1)*x2 + x3");
    const Expression b = parse("exp(x2 - x3) / (1 + x1^2)");
    const Expression sum = parse("(sin(x1)*x2 + x3) + (exp(x2 - x3) / (1 + x1^2))");
    const Expression prod = parse("(sin(x1)*x2 + x3) * (exp(x2 - x3) / (1 + x1^2))");
    for (int trial = 0; trial < 50; ++trial) {
        const auto p = random_point(rng, 3);
        const JetValue ja = a.eval_jet(p), jb = b.eval_jet(p);
        const JetValue js = sum.eval_jet(p), jp = prod.eval_jet(p);
        const JetValue es = ja + jb, ep = ja * jb;
        EXPECT_EQ(js.value, es.value);
        for (int k = 0; k < 3; ++k)
            EXPECT_EQ(js.grad[k], es.grad[k]);
        for (int k = 0; k < 6; ++k) {
            EXPECT_EQ(js.hess[k], es.hess[k]);
            EXPECT_NEAR(jp.hess[k], ep.hess[k], 1e-15 * (1 + std::fabs(ep.hess[k])));
        }
        EXPECT_EQ(jp.value, ep.value);
    }
}

TEST(EvalJet, Deterministic)
{
    const Expression e = parse("sqrt(1 + x1^2 + x2^2) / (2 + tanh(x3)) + coth(x1)");
    const std::vector<double> p = {0.37, 1.2, -0.8};
    const JetValue a = e.eval_jet(p);
    const JetValue b = parse(e.to_string()).eval_jet(p);
    EXPECT_EQ(std::memcmp(&a.value, &b.value, sizeof(double)), 0);
    EXPECT_EQ(std::memcmp(a.grad.data(), b.grad.data(), sizeof(double) * 3), 0);
    EXPECT_EQ(std::memcmp(a.hess.data(), b.hess.data(), sizeof(double) * 6), 0);
}

TEST(EvalJet, ReducedDimension)
{
    const Expression e = parse("x1*x2");
    const std::vector<double> p = {2.0, 5.0, 99.0};
    const JetValue j = e.eval_jet(p, 2);
    EXPECT_EQ(j.dim, 2);
    EXPECT_DOUBLE_EQ(j.gradient(0), 5.0);
    EXPECT_DOUBLE_EQ(j.hessian(0, 1), 1.0);
    EXPECT_THROW(e.eval_jet(std::vector<double>{1.0}), DomainError);
}
