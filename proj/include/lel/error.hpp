#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace lel {

/// Base for every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Malformed input: invalid pmf, shape mismatch, out-of-range index.
class ValidationError : public Error {
public:
    using Error::Error;
};

/// An exact enumeration (or a codebook) would exceed the configured size cap.
class CapExceeded : public Error {
public:
    using Error::Error;
};

/// Every codeword assigns zero likelihood to the input sequence.
class AllZeroLikelihood : public Error {
public:
    AllZeroLikelihood()
        : Error("all codewords have zero likelihood for the input sequence") {}
};

/// Configuration text could not be parsed or validated. `line()` is 1-based, 0 when
/// the problem is not tied to a single line.
class ConfigError : public ValidationError {
public:
    ConfigError(std::size_t line, const std::string& what)
        : ValidationError(line == 0 ? what : "line " + std::to_string(line) + ": " + what),
          line_(line) {}

    [[nodiscard]] std::size_t line() const noexcept { return line_; }

private:
    std::size_t line_;
};

}  // namespace lel
