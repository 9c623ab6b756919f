#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

namespace solitonlab {

class Error : public std::runtime_error
{
public:
    using std::runtime_error::runtime_error;
};

/// Parse failure with the byte offset where parsing stopped and the tokens
/// that would have been accepted there.
class SyntaxError : public Error
{
public:
    SyntaxError(std::size_t offset, std::vector<std::string> expected);

    std::size_t offset() const noexcept { return offset_; }
    const std::vector<std::string>& expected() const noexcept { return expected_; }

private:
    std::size_t offset_;
    std::vector<std::string> expected_;
};

class UnknownIdentifier : public Error
{
public:
    UnknownIdentifier(std::size_t offset, std::string name);

    std::size_t offset() const noexcept { return offset_; }
    const std::string& name() const noexcept { return name_; }

private:
    std::size_t offset_;
    std::string name_;
};

/// Evaluation outside the domain of an elementary function
/// (log of a non-positive number, division by zero, coth at 0, ...).
class DomainError : public Error
{
public:
    using Error::Error;
};

class SingularMetric : public Error
{
public:
    using Error::Error;
};

class LeftDomain : public Error
{
public:
    explicit LeftDomain(double radius);
    double radius() const noexcept { return radius_; }

private:
    double radius_;
};

class StepTooLarge : public Error
{
public:
    StepTooLarge(double radius, double drift);
    double radius() const noexcept { return radius_; }
    double drift() const noexcept { return drift_; }

private:
    double radius_;
    double drift_;
};

class NotSchouten : public Error
{
public:
    using Error::Error;
};

class NoConvergence : public Error
{
public:
    explicit NoConvergence(long iterations);
    long iterations() const noexcept { return iterations_; }

private:
    long iterations_;
};

class DegenerateTestFunction : public Error
{
public:
    using Error::Error;
};

class NotApplicable : public Error
{
public:
    using Error::Error;
};

/// Invalid scenario or catalog configuration. `pointer()` is a JSON pointer
/// (RFC 6901) into the offending document.
class ConfigError : public Error
{
public:
    ConfigError(std::string pointer, const std::string& message);
    const std::string& pointer() const noexcept { return pointer_; }
    const std::string& message() const noexcept { return message_; }

private:
    std::string pointer_;
    std::string message_;
};

} // namespace solitonlab
