#pragma once

#include <stdexcept>
#include <string>

namespace bel {

/// Base class for every error raised by the toolkit.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Invalid argument, shape mismatch, out-of-range hyperparameter.
class ParameterError : public Error {
public:
    using Error::Error;
};

/// An operation that needs foreground voxels received none.
class EmptyInputError : public Error {
public:
    using Error::Error;
};

/// Malformed or unsupported file content. `field()` names the offending header field.
class FormatError : public Error {
public:
    FormatError(std::string field, const std::string& what)
        : Error(field + ": " + what), field_(std::move(field)) {}

    const std::string& field() const noexcept { return field_; }

private:
    std::string field_;
};

/// Input is well-formed but the requested quantity is undefined on it.
class DegenerateInputError : public Error {
public:
    using Error::Error;
};

}  // namespace bel
