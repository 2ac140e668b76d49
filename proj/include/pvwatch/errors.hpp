#pragma once

#include <stdexcept>
#include <string>

namespace pvwatch {

// Base for everything this library throws on purpose.
struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Bad or incomplete configuration (CLI exit code 2).
struct ConfigError : Error {
    using Error::Error;
};

// Two-bus fixed point failed to converge (CLI exit code 3).
struct PowerFlowDivergence : Error {
    using Error::Error;
};

// Data-shape problems: misaligned labels/frames, intervals outside the
// frame, length mismatches (CLI exit code 4).
struct DataError : Error {
    using Error::Error;
};

// Model file schema/version does not match (CLI exit code 5).
struct SchemaMismatch : Error {
    using Error::Error;
};

// Evaluation set contains a single class (CLI exit code 6).
struct SingleClassLabels : Error {
    using Error::Error;
};

struct MissingChannel : DataError {
    using DataError::DataError;
};

struct NonUniformSampling : DataError {
    using DataError::DataError;
};

struct NonFiniteValue : DataError {
    using DataError::DataError;
};

struct IntervalOutOfRange : DataError {
    using DataError::DataError;
};

struct LengthMismatch : DataError {
    using DataError::DataError;
};

struct MixedOrientation : DataError {
    using DataError::DataError;
};

struct EmptyFrame : DataError {
    using DataError::DataError;
};

struct FrameTooShort : DataError {
    using DataError::DataError;
};

struct TooFewSamples : DataError {
    using DataError::DataError;
};

struct DimensionMismatch : DataError {
    using DataError::DataError;
};

struct NonConvergence : Error {
    using Error::Error;
};

struct NonFiniteLoss : Error {
    using Error::Error;
};

struct DegenerateSubsample : DataError {
    using DataError::DataError;
};

struct DegenerateLabels : DataError {
    using DataError::DataError;
};

struct AllZeroCounts : DataError {
    using DataError::DataError;
};

} // namespace pvwatch
