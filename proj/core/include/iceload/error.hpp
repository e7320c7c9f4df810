#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace iceload {

// Bad user input: configuration, files, or arguments that violate a contract.
class InputError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// A text file failed to parse. Carries the 1-based line number.
class ParseError : public InputError {
public:
    ParseError(const std::string& source, std::size_t line, const std::string& what)
        : InputError(source + ":" + std::to_string(line) + ": " + what), line_(line) {}

    std::size_t line() const noexcept { return line_; }

private:
    std::size_t line_;
};

// A numerical step failed (factorization, inverted element, ...).
class NumericalError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

}  // namespace iceload
