#pragma once

#include <stdexcept>
#include <string>

namespace mxc {

// Every error raised by the library derives from Error so callers can catch
// the whole family at once; the CLI maps the subclasses onto exit codes.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class ConfigError : public Error {
public:
    using Error::Error;
};

class IndexError : public Error {
public:
    using Error::Error;
};

class ShapeError : public Error {
public:
    using Error::Error;
};

class DimensionMismatch : public Error {
public:
    using Error::Error;
};

class SingularM1 : public Error {
public:
    using Error::Error;
};

class CapExceeded : public Error {
public:
    using Error::Error;
};

class IoError : public Error {
public:
    using Error::Error;
};

// Raised when the Schur system cannot reproduce the terminal right-hand side,
// i.e. the requested terminal state is not reachable with the active controls.
class SchurSingular : public Error {
public:
    SchurSingular(const std::string& what, long effective_rank, long dimension, double relative_residual)
        : Error(what)
        , effective_rank_(effective_rank)
        , dimension_(dimension)
        , relative_residual_(relative_residual)
    {
    }

    long effective_rank() const noexcept { return effective_rank_; }
    long dimension() const noexcept { return dimension_; }
    double relative_residual() const noexcept { return relative_residual_; }

private:
    long effective_rank_;
    long dimension_;
    double relative_residual_;
};

}  // namespace mxc
