#pragma once

#include <stdexcept>
#include <string>
#include <utility>

namespace propmat {

// Base of every error thrown by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class DecodeError : public Error {
public:
    using Error::Error;
};

class FormatError : public Error {
public:
    using Error::Error;
};

class DimensionError : public Error {
public:
    using Error::Error;
};

// A caller broke a documented precondition (out-of-range alpha, bad parameter).
class ContractError : public Error {
public:
    using Error::Error;
};

// The trimap lacks one of the two known classes.
class UnusableTrimapError : public Error {
public:
    using Error::Error;
};

// Too few boundary samples per class to fill the cross-validation folds.
class DegenerateSampleSetError : public Error {
public:
    using Error::Error;
};

class ConvergenceError : public Error {
public:
    ConvergenceError(const std::string& what, double residual)
        : Error(what), residual_(residual) {}

    double residual() const noexcept { return residual_; }

private:
    double residual_;
};

class ManifestError : public Error {
public:
    using Error::Error;
};

// Wraps a failure with the name of the pipeline stage that raised it.
class StageError : public Error {
public:
    StageError(std::string stage, const std::string& what)
        : Error(stage + ": " + what), stage_(std::move(stage)) {}

    const std::string& stage() const noexcept { return stage_; }

private:
    std::string stage_;
};

}  // namespace propmat
