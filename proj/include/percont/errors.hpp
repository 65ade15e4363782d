#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

namespace percont {

/// Base class for every error raised by the toolkit.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class ParseError : public Error {
public:
    ParseError(const std::string& what, std::size_t offset)
        : Error(what + " at offset " + std::to_string(offset)), offset_(offset) {}
    std::size_t offset() const noexcept { return offset_; }

private:
    std::size_t offset_;
};

class EvalError : public Error {
public:
    using Error::Error;
};

/// A state, a midpoint or a sample left the open domain of a field.
class DomainViolation : public Error {
public:
    using Error::Error;
};

class DimensionMismatch : public Error {
public:
    using Error::Error;
};

class DomainMissingOrigin : public Error {
public:
    using Error::Error;
};

class EndpointMismatch : public Error {
public:
    using Error::Error;
};

// degree
class ZeroOnBoundary : public Error {
public:
    using Error::Error;
};

class RefinementExhausted : public Error {
public:
    using Error::Error;
};

class SingularJacobian : public Error {
public:
    using Error::Error;
};

// averaging
class NonZeroMeanInput : public Error {
public:
    using Error::Error;
};

// phi
class RangeViolation : public Error {
public:
    using Error::Error;
};

class NewtonDivergence : public Error {
public:
    NewtonDivergence(const std::string& what, double best_residual)
        : Error(what), best_residual_(best_residual) {}
    double best_residual() const noexcept { return best_residual_; }

private:
    double best_residual_;
};

class MissingFactorization : public Error {
public:
    using Error::Error;
};

// bvp
class ConvergenceFailure : public Error {
public:
    ConvergenceFailure(const std::string& what, std::vector<double> best, double best_residual)
        : Error(what), best_(std::move(best)), best_residual_(best_residual) {}
    const std::vector<double>& best_iterate() const noexcept { return best_; }
    double best_residual() const noexcept { return best_residual_; }

private:
    std::vector<double> best_;
    double best_residual_;
};

class SingularLinearSolve : public Error {
public:
    using Error::Error;
};

class NoStartingZero : public Error {
public:
    using Error::Error;
};

// verify
class MismatchDetected : public Error {
public:
    MismatchDetected(const std::string& what, int direct, int eta_product, int theorem_product)
        : Error(what), direct_(direct), eta_(eta_product), theorem_(theorem_product) {}
    int direct() const noexcept { return direct_; }
    int eta_product() const noexcept { return eta_; }
    int theorem_product() const noexcept { return theorem_; }

private:
    int direct_, eta_, theorem_;
};

class PhiChecksFailed : public Error {
public:
    using Error::Error;
};

// cli
class ConfigError : public Error {
public:
    ConfigError(const std::string& key, const std::string& what)
        : Error(key.empty() ? what : key + ": " + what), key_(key) {}
    const std::string& key() const noexcept { return key_; }

private:
    std::string key_;
};

}  // namespace percont
