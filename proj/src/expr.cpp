#include "solitonlab/expr.hpp"

#include "solitonlab/errors.hpp"

#include <array>
#include <cctype>
#include <charconv>
#include <cmath>
#include <cstring>
#include <limits>
#include <utility>

namespace solitonlab {

namespace {

struct FunctionName
{
    const char* name;
    Op op;
};

constexpr std::array<FunctionName, 10> kFunctions{{
    {"exp", Op::Exp},
    {"log", Op::Log},
    {"sin", Op::Sin},
    {"cos", Op::Cos},
    {"sinh", Op::Sinh},
    {"cosh", Op::Cosh},
    {"tanh", Op::Tanh},
    {"coth", Op::Coth},
    {"sqrt", Op::Sqrt},
    {"abs", Op::Abs},
}};

const char* function_name(Op op)
{
    for (const auto& f : kFunctions)
        if (f.op == op)
            return f.name;
    return "?";
}

[[noreturn]] void domain_error(const char* what, double u)
{
    throw DomainError(std::string(what) + " (argument " + std::to_string(u) + ")");
}

// g(u), g'(u), g''(u) for the elementary functions. Derivatives are only
// computed (and their singularities only checked) when `derivs` is set.
std::array<double, 3> elementary(Op op, double u, bool derivs)
{
    switch (op) {
    case Op::Neg:
        return {-u, -1.0, 0.0};
    case Op::Exp: {
        const double e = std::exp(u);
        return {e, e, e};
    }
    case Op::Log:
        if (!(u > 0.0))
            domain_error("log of a non-positive number", u);
        return {std::log(u), 1.0 / u, -1.0 / (u * u)};
    case Op::Sin: {
        const double s = std::sin(u);
        return {s, std::cos(u), -s};
    }
    case Op::Cos: {
        const double c = std::cos(u);
        return {c, -std::sin(u), -c};
    }
    case Op::Sinh:
        return {std::sinh(u), std::cosh(u), std::sinh(u)};
    case Op::Cosh:
        return {std::cosh(u), std::sinh(u), std::cosh(u)};
    case Op::Tanh: {
        const double t = std::tanh(u);
        const double d = 1.0 - t * t;
        return {t, d, -2.0 * t * d};
    }
    case Op::Coth: {
        if (u == 0.0)
            domain_error("coth at its pole", u);
        const double ct = std::cosh(u) / std::sinh(u);
        const double d = 1.0 - ct * ct;
        return {ct, d, -2.0 * ct * d};
    }
    case Op::Sqrt: {
        if (u < 0.0 || (derivs && u == 0.0))
            domain_error("sqrt outside (0, inf)", u);
        const double s = std::sqrt(u);
        if (!derivs)
            return {s, 0.0, 0.0};
        return {s, 0.5 / s, -0.25 / (s * u)};
    }
    case Op::Abs:
        if (derivs && u == 0.0)
            domain_error("abs is not differentiable at 0", u);
        return {std::fabs(u), u > 0.0 ? 1.0 : -1.0, 0.0};
    default:
        break;
    }
    return {0.0, 0.0, 0.0};
}

bool is_integer(double c)
{
    return std::isfinite(c) && std::fabs(c) < 1e15 && std::nearbyint(c) == c;
}

// u^c with a fixed exponent c.
std::array<double, 3> power_constant(double u, double c, bool derivs)
{
    if (c == 0.0)
        return {1.0, 0.0, 0.0};
    if (is_integer(c)) {
        if (u == 0.0 && c < 0.0)
            domain_error("zero raised to a negative power", u);
    } else if (!(u > 0.0)) {
        domain_error("non-integer power of a non-positive base", u);
    }
    const double v = std::pow(u, c);
    if (!derivs)
        return {v, 0.0, 0.0};
    const double d1 = c == 1.0 ? 1.0 : c * std::pow(u, c - 1.0);
    const double d2 = (c == 1.0 || c == 2.0) ? (c == 2.0 ? 2.0 : 0.0) : c * (c - 1.0) * std::pow(u, c - 2.0);
    return {v, d1, d2};
}

void check_finite(double v)
{
    if (!std::isfinite(v))
        throw DomainError("expression evaluated to a non-finite value");
}

double reciprocal_check(double v)
{
    if (v == 0.0)
        throw DomainError("division by zero");
    return 1.0 / v;
}

JetValue jet_pow(const JetValue& base, const JetValue& exponent, bool exponent_constant)
{
    if (exponent_constant) {
        const auto d = power_constant(base.value, exponent.value, true);
        return chain(base, d[0], d[1], d[2]);
    }
    if (!(base.value > 0.0))
        domain_error("variable power of a non-positive base", base.value);
    const double lb = std::log(base.value);
    const JetValue logb = chain(base, lb, 1.0 / base.value, -1.0 / (base.value * base.value));
    const JetValue t = exponent * logb;
    const double e = std::exp(t.value);
    return chain(t, e, e, e);
}

void serialize(const std::vector<ExprNode>& nodes, int i, std::string& out)
{
    const ExprNode& n = nodes[static_cast<std::size_t>(i)];
    switch (n.op) {
    case Op::Constant:
        out += format_literal(n.value);
        return;
    case Op::Variable:
        out += 'x';
        out += std::to_string(n.var + 1);
        return;
    case Op::Neg:
        out += "(-";
        serialize(nodes, n.lhs, out);
        out += ')';
        return;
    case Op::Add:
    case Op::Sub:
    case Op::Mul:
    case Op::Div:
    case Op::Pow: {
        static constexpr char kSym[] = {'+', '-', '*', '/', '^'};
        out += '(';
        serialize(nodes, n.lhs, out);
        out += kSym[static_cast<int>(n.op) - static_cast<int>(Op::Add)];
        serialize(nodes, n.rhs, out);
        out += ')';
        return;
    }
    default:
        out += function_name(n.op);
        out += '(';
        serialize(nodes, n.lhs, out);
        out += ')';
        return;
    }
}

bool structurally_equal(const std::vector<ExprNode>& a, int ia, const std::vector<ExprNode>& b, int ib)
{
    const ExprNode& x = a[static_cast<std::size_t>(ia)];
    const ExprNode& y = b[static_cast<std::size_t>(ib)];
    if (x.op != y.op)
        return false;
    switch (x.op) {
    case Op::Constant:
        return std::memcmp(&x.value, &y.value, sizeof(double)) == 0;
    case Op::Variable:
        return x.var == y.var;
    default:
        break;
    }
    if (!structurally_equal(a, x.lhs, b, y.lhs))
        return false;
    if (x.rhs >= 0 || y.rhs >= 0)
        return x.rhs >= 0 && y.rhs >= 0 && structurally_equal(a, x.rhs, b, y.rhs);
    return true;
}

} // namespace

std::string format_literal(double v)
{
    char buf[64];
    auto res = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, res.ptr);
}

// ---------------------------------------------------------------------------
// Parser
// ---------------------------------------------------------------------------

class Parser
{
public:
    explicit Parser(std::string_view src) : src_(src) {}

    Expression run()
    {
        const int root = expr();
        skip_ws();
        if (pos_ != src_.size())
            throw SyntaxError(pos_, {"operator", "')'", "end of input"});
        auto nodes = std::make_shared<const std::vector<ExprNode>>(std::move(nodes_));
        return Expression(std::move(nodes), root, arity_);
    }

private:
    void skip_ws()
    {
        while (pos_ < src_.size() && (src_[pos_] == ' ' || src_[pos_] == '\t' || src_[pos_] == '\n' || src_[pos_] == '\r'))
            ++pos_;
    }

    bool accept(char c)
    {
        skip_ws();
        if (pos_ < src_.size() && src_[pos_] == c) {
            ++pos_;
            return true;
        }
        return false;
    }

    int add(ExprNode n)
    {
        if (n.lhs >= 0)
            n.constant = nodes_[static_cast<std::size_t>(n.lhs)].constant;
        if (n.rhs >= 0)
            n.constant = n.constant && nodes_[static_cast<std::size_t>(n.rhs)].constant;
        nodes_.push_back(n);
        return static_cast<int>(nodes_.size()) - 1;
    }

    int binary(Op op, int l, int r)
    {
        ExprNode n;
        n.op = op;
        n.lhs = l;
        n.rhs = r;
        return add(n);
    }

    int expr()
    {
        int l = term();
        for (;;) {
            if (accept('+'))
                l = binary(Op::Add, l, term());
            else if (accept('-'))
                l = binary(Op::Sub, l, term());
            else
                return l;
        }
    }

    int term()
    {
        int l = unary();
        for (;;) {
            if (accept('*'))
                l = binary(Op::Mul, l, unary());
            else if (accept('/'))
                l = binary(Op::Div, l, unary());
            else
                return l;
        }
    }

    int unary()
    {
        if (accept('-')) {
            ExprNode n;
            n.op = Op::Neg;
            n.lhs = unary();
            return add(n);
        }
        if (accept('+'))
            return unary();
        return power();
    }

    int power()
    {
        const int base = primary();
        if (accept('^'))
            return binary(Op::Pow, base, unary());
        return base;
    }

    int primary()
    {
        skip_ws();
        if (pos_ >= src_.size())
            throw SyntaxError(pos_, {"number", "identifier", "'('", "'-'"});
        const char c = src_[pos_];
        if (c == '(') {
            ++pos_;
            const int inner = expr();
            if (!accept(')'))
                throw SyntaxError(pos_, {"')'", "operator"});
            return inner;
        }
        if ((c >= '0' && c <= '9') || c == '.')
            return number();
        if (std::isalpha(static_cast<unsigned char>(c)) || c == '_')
            return identifier();
        throw SyntaxError(pos_, {"number", "identifier", "'('", "'-'"});
    }

    int number()
    {
        const std::size_t start = pos_;
        while (pos_ < src_.size() && (std::isdigit(static_cast<unsigned char>(src_[pos_])) || src_[pos_] == '.'))
            ++pos_;
        if (pos_ < src_.size() && (src_[pos_] == 'e' || src_[pos_] == 'E')) {
            std::size_t p = pos_ + 1;
            if (p < src_.size() && (src_[p] == '+' || src_[p] == '-'))
                ++p;
            if (p < src_.size() && std::isdigit(static_cast<unsigned char>(src_[p]))) {
                while (p < src_.size() && std::isdigit(static_cast<unsigned char>(src_[p])))
                    ++p;
                pos_ = p;
            }
        }
        double v = 0.0;
        const char* first = src_.data() + start;
        const char* last = src_.data() + pos_;
        auto res = std::from_chars(first, last, v);
        if (res.ec != std::errc() || res.ptr != last)
            throw SyntaxError(start, {"number"});
        ExprNode n;
        n.op = Op::Constant;
        n.value = v;
        return add(n);
    }

    int identifier()
    {
        const std::size_t start = pos_;
        while (pos_ < src_.size() && (std::isalnum(static_cast<unsigned char>(src_[pos_])) || src_[pos_] == '_'))
            ++pos_;
        const std::string_view name = src_.substr(start, pos_ - start);

        if (name.size() >= 2 && name[0] == 'x' && name[1] != '0') {
            int index = 0;
            auto res = std::from_chars(name.data() + 1, name.data() + name.size(), index);
            if (res.ec == std::errc() && res.ptr == name.data() + name.size() && index >= 1 && index <= kMaxDim) {
                ExprNode n;
                n.op = Op::Variable;
                n.var = index - 1;
                n.constant = false;
                if (index > arity_)
                    arity_ = index;
                return add(n);
            }
        }
        if (name == "pi") {
            ExprNode n;
            n.op = Op::Constant;
            n.value = 3.141592653589793238462643383279502884;
            return add(n);
        }
        for (const auto& f : kFunctions) {
            if (name == f.name) {
                if (!accept('('))
                    throw SyntaxError(pos_, {"'('"});
                ExprNode n;
                n.op = f.op;
                n.lhs = expr();
                if (!accept(')'))
                    throw SyntaxError(pos_, {"')'", "operator"});
                return add(n);
            }
        }
        throw UnknownIdentifier(start, std::string(name));
    }

    std::string_view src_;
    std::size_t pos_ = 0;
    std::vector<ExprNode> nodes_;
    int arity_ = 0;
};

Expression parse(std::string_view source)
{
    return Parser(source).run();
}

// ---------------------------------------------------------------------------
// Expression
// ---------------------------------------------------------------------------

Expression::Expression()
    : nodes_(std::make_shared<const std::vector<ExprNode>>(std::vector<ExprNode>{ExprNode{}})), root_(0), arity_(0)
{}

Expression::Expression(std::shared_ptr<const std::vector<ExprNode>> nodes, int root, int arity)
    : nodes_(std::move(nodes)), root_(root), arity_(arity)
{}

double Expression::evaluate(std::span<const double> point) const
{
    if (static_cast<int>(point.size()) < arity_)
        throw DomainError("point has fewer coordinates than the expression uses");
    const auto& ns = *nodes_;
    thread_local std::vector<double> vals;
    vals.resize(ns.size());
    // Children always precede their parents, so a forward sweep suffices.
    for (std::size_t i = 0; i <= static_cast<std::size_t>(root_); ++i) {
        const ExprNode& n = ns[i];
        double v = 0.0;
        switch (n.op) {
        case Op::Constant:
            v = n.value;
            break;
        case Op::Variable:
            v = point[static_cast<std::size_t>(n.var)];
            break;
        case Op::Add:
            v = vals[n.lhs] + vals[n.rhs];
            break;
        case Op::Sub:
            v = vals[n.lhs] - vals[n.rhs];
            break;
        case Op::Mul:
            v = vals[n.lhs] * vals[n.rhs];
            break;
        case Op::Div:
            v = vals[n.lhs] * reciprocal_check(vals[n.rhs]);
            break;
        case Op::Pow:
            if (ns[static_cast<std::size_t>(n.rhs)].constant) {
                v = power_constant(vals[n.lhs], vals[n.rhs], false)[0];
            } else {
                if (!(vals[n.lhs] > 0.0))
                    domain_error("variable power of a non-positive base", vals[n.lhs]);
                v = std::exp(vals[n.rhs] * std::log(vals[n.lhs]));
            }
            break;
        default:
            v = elementary(n.op, vals[n.lhs], false)[0];
            break;
        }
        check_finite(v);
        vals[i] = v;
    }
    return vals[static_cast<std::size_t>(root_)];
}

JetValue Expression::eval_jet(std::span<const double> point) const
{
    return eval_jet(point, static_cast<int>(point.size()));
}

JetValue Expression::eval_jet(std::span<const double> point, int dim) const
{
    if (dim < arity_ || static_cast<int>(point.size()) < dim)
        throw DomainError("point has fewer coordinates than the expression uses");
    if (dim > kMaxDim)
        throw DomainError("jet dimension exceeds the supported maximum");
    const auto& ns = *nodes_;
    if (ns[static_cast<std::size_t>(root_)].constant)
        return JetValue(dim, evaluate(point));

    thread_local std::vector<JetValue> vals;
    vals.resize(ns.size());
    for (std::size_t i = 0; i <= static_cast<std::size_t>(root_); ++i) {
        const ExprNode& n = ns[i];
        JetValue& out = vals[i];
        if (n.constant) {
            // Constant subtrees only need their value; children were evaluated already.
            double v = 0.0;
            switch (n.op) {
            case Op::Constant:
                v = n.value;
                break;
            case Op::Add:
                v = vals[n.lhs].value + vals[n.rhs].value;
                break;
            case Op::Sub:
                v = vals[n.lhs].value - vals[n.rhs].value;
                break;
            case Op::Mul:
                v = vals[n.lhs].value * vals[n.rhs].value;
                break;
            case Op::Div:
                v = vals[n.lhs].value * reciprocal_check(vals[n.rhs].value);
                break;
            case Op::Pow:
                v = power_constant(vals[n.lhs].value, vals[n.rhs].value, false)[0];
                break;
            default:
                v = elementary(n.op, vals[n.lhs].value, false)[0];
                break;
            }
            check_finite(v);
            out = JetValue(dim, v);
            continue;
        }
        switch (n.op) {
        case Op::Variable:
            out = JetValue::variable(dim, n.var, point[static_cast<std::size_t>(n.var)]);
            break;
        case Op::Add:
            out = vals[n.lhs] + vals[n.rhs];
            break;
        case Op::Sub:
            out = vals[n.lhs] - vals[n.rhs];
            break;
        case Op::Mul:
            out = vals[n.lhs] * vals[n.rhs];
            break;
        case Op::Div: {
            const double v = vals[n.rhs].value;
            const double inv = reciprocal_check(v);
            out = vals[n.lhs] * chain(vals[n.rhs], inv, -inv * inv, 2.0 * inv * inv * inv);
            break;
        }
        case Op::Pow:
            out = jet_pow(vals[n.lhs], vals[n.rhs], ns[static_cast<std::size_t>(n.rhs)].constant);
            break;
        default: {
            const auto d = elementary(n.op, vals[n.lhs].value, true);
            out = chain(vals[n.lhs], d[0], d[1], d[2]);
            break;
        }
        }
        check_finite(out.value);
    }
    return vals[static_cast<std::size_t>(root_)];
}

std::string Expression::to_string() const
{
    std::string out;
    serialize(*nodes_, root_, out);
    return out;
}

bool operator==(const Expression& a, const Expression& b)
{
    return structurally_equal(*a.nodes_, a.root_, *b.nodes_, b.root_);
}

JetValue eval_jet(const Expression& e, std::span<const double> point)
{
    return e.eval_jet(point);
}

} // namespace solitonlab
