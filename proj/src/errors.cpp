#include "solitonlab/errors.hpp"

#include <sstream>
#include <utility>

namespace solitonlab {

namespace {

std::string syntax_message(std::size_t offset, const std::vector<std::string>& expected)
{
    std::ostringstream os;
    os << "syntax error at offset " << offset;
    if (!expected.empty()) {
        os << ": expected ";
        for (std::size_t i = 0; i < expected.size(); ++i) {
            if (i != 0)
                os << (i + 1 == expected.size() ? " or " : ", ");
            os << expected[i];
        }
    }
    return os.str();
}

} // namespace

SyntaxError::SyntaxError(std::size_t offset, std::vector<std::string> expected)
    : Error(syntax_message(offset, expected)), offset_(offset), expected_(std::move(expected))
{}

UnknownIdentifier::UnknownIdentifier(std::size_t offset, std::string name)
    : Error("unknown identifier '" + name + "' at offset " + std::to_string(offset)), offset_(offset),
      name_(std::move(name))
{}

LeftDomain::LeftDomain(double radius)
    : Error("geodesic left the chart domain at r=" + std::to_string(radius)), radius_(radius)
{}

StepTooLarge::StepTooLarge(double radius, double drift)
    : Error("energy drift " + std::to_string(drift) + " at r=" + std::to_string(radius) +
            " exceeds 1e-6; reduce the step"),
      radius_(radius), drift_(drift)
{}

NoConvergence::NoConvergence(long iterations)
    : Error("eigensolver did not converge after " + std::to_string(iterations) + " iterations"),
      iterations_(iterations)
{}

ConfigError::ConfigError(std::string pointer, const std::string& message)
    : Error("config error at '" + pointer + "': " + message), pointer_(std::move(pointer)), message_(message)
{}

} // namespace solitonlab
