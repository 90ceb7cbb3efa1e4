#ifndef MOBLP_ERROR_HPP
#define MOBLP_ERROR_HPP

#include <cstddef>
#include <stdexcept>
#include <string>

namespace moblp {

/// Malformed input text. `line()` is 1-based, 0 when unknown.
class ParseError : public std::runtime_error {
public:
    ParseError(const std::string& what, std::size_t line)
        : std::runtime_error(line ? "line " + std::to_string(line) + ": " + what : what), line_(line) {}
    std::size_t line() const noexcept { return line_; }

private:
    std::size_t line_;
};

/// Inconsistent matrix/vector shapes.
class DimensionError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class InvalidArgument : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// The simplex iteration cap was hit; signals cycling or a pathological input.
class NumericalError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// The LP relaxation of an instance is empty.
class InfeasibleError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

}  // namespace moblp

#endif  // MOBLP_ERROR_HPP
