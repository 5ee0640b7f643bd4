#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace kirchpeak {

// Base of every error raised by the library. `kind()` is a stable machine
// readable tag used by the CLI when it reports failures.
class Error : public std::runtime_error {
public:
    Error(std::string kind, const std::string& what);
    const std::string& kind() const noexcept { return kind_; }

private:
    std::string kind_;
};

// Input rejected before any computation (bad parameters, bad manifests).
class ParameterError : public Error {
public:
    explicit ParameterError(const std::string& what) : Error("parameter", what) {}
};

class ShapeError : public Error {
public:
    explicit ShapeError(const std::string& what) : Error("shape", what) {}
};

class DomainError : public Error {
public:
    explicit DomainError(const std::string& what) : Error("domain", what) {}
};

class GeometryError : public Error {
public:
    explicit GeometryError(const std::string& what) : Error("geometry", what) {}
};

class InputError : public Error {
public:
    explicit InputError(const std::string& what) : Error("input", what) {}
};

class TruncationError : public Error {
public:
    explicit TruncationError(const std::string& what) : Error("truncation", what) {}
};

// Computation ran but did not produce an acceptable answer.
class NumericError : public Error {
public:
    NumericError(const std::string& what, std::vector<double> data = {})
        : Error("numeric", what), data_(std::move(data)) {}
    const std::vector<double>& data() const noexcept { return data_; }

protected:
    NumericError(std::string kind, const std::string& what, std::vector<double> data)
        : Error(std::move(kind), what), data_(std::move(data)) {}

private:
    std::vector<double> data_;
};

class IterationFailure : public NumericError {
public:
    IterationFailure(const std::string& what, double last_residual, int iterations)
        : NumericError("iteration", what, {last_residual, double(iterations)}),
          last_residual_(last_residual), iterations_(iterations) {}
    double last_residual() const noexcept { return last_residual_; }
    int iterations() const noexcept { return iterations_; }

private:
    double last_residual_;
    int iterations_;
};

class DegenerateFixedPoint : public NumericError {
public:
    explicit DegenerateFixedPoint(const std::string& what)
        : NumericError("degenerate", what, {}) {}
};

class NoContraction : public NumericError {
public:
    NoContraction(const std::string& what, std::vector<double> ratios)
        : NumericError("no-contraction", what, std::move(ratios)) {}
};

class LinearSolverError : public NumericError {
public:
    LinearSolverError(const std::string& what, double residual)
        : NumericError("linear-solver", what, {residual}) {}
};

// Throws ParameterError carrying `msg` when `cond` is false.
void require(bool cond, const std::string& msg);

}  // namespace kirchpeak
