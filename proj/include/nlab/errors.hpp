#pragma once

#include <stdexcept>
#include <string>

namespace nlab {

class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Bad grid/domain parameters (h too large, h does not tile the domain, ...).
class GridError : public Error {
public:
    using Error::Error;
};

// A point or ball reaches outside the region where stencils are available.
class OutOfSupportError : public Error {
public:
    using Error::Error;
};

// Zero fields, vanishing sphere integrals and similar degenerate inputs.
class DegenerateError : public Error {
public:
    using Error::Error;
};

class SolverError : public Error {
public:
    SolverError(const std::string& what, double attained_residual)
        : Error(what), attained_residual_(attained_residual) {}
    double attained_residual() const { return attained_residual_; }

private:
    double attained_residual_;
};

class ConfigError : public Error {
public:
    using Error::Error;
};

}  // namespace nlab
