#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace nira {

class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Caller broke a precondition (dimension mismatch, invalid parameter).
class ContractError : public Error {
public:
    using Error::Error;
};

// Malformed input file.
class ParseError : public Error {
public:
    using Error::Error;
};

// Well-formed input that violates a structural invariant.
class ValidationError : public Error {
public:
    using Error::Error;
};

// A metric that has no defined value for the given input (zero-range PSNR, KL against sigma 0).
class UndefinedMetricError : public Error {
public:
    using Error::Error;
};

// Internal consistency failure in floating-point computation.
class NumericalError : public Error {
public:
    using Error::Error;
};

class TrainingDivergedError : public NumericalError {
public:
    TrainingDivergedError(std::size_t epoch, const std::string& what)
        : NumericalError(what), epoch_(epoch) {}

    std::size_t epoch() const noexcept { return epoch_; }

private:
    std::size_t epoch_;
};

class IoError : public Error {
public:
    using Error::Error;
};

} // namespace nira
