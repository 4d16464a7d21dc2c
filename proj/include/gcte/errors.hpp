#pragma once

#include <stdexcept>
#include <string>

namespace gcte {

// Base for everything thrown by this library. The CLI maps subclasses to
// exit codes, so new error types should pick an existing category or extend
// the mapping in tools/main.cpp.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Bad model definition: non-stationary coefficients, malformed model file.
class ModelError : public Error {
public:
    using Error::Error;
};

// Bad input data: malformed CSV, missing values, unknown column names.
class DataError : public Error {
public:
    using Error::Error;
};

// Inconsistent dimensions between arguments, or a symmetry violation.
class ShapeError : public Error {
public:
    using Error::Error;
};

// Invalid causality query: overlapping roles, empty predictee/predictor,
// lag orders outside the supported range.
class QueryError : public Error {
public:
    using Error::Error;
};

// Too few rows to estimate the requested moments or regression.
class InsufficientData : public Error {
public:
    using Error::Error;
};

// Cholesky factorization hit a non-positive pivot. `pivot_index` is the
// zero-based row at which elimination failed.
class NotPositiveDefinite : public Error {
public:
    NotPositiveDefinite(const std::string& what, int index)
        : Error(what), pivot_index(index) {}
    int pivot_index;
};

// The conditioning block of a partial covariance is singular or too close
// to singular to invert. `pivot_index` is the offending row.
class SingularConditioner : public Error {
public:
    SingularConditioner(const std::string& what, int index)
        : Error(what), pivot_index(index) {}
    int pivot_index;
};

// A regression design has (numerically) linearly dependent columns.
// `column` is the zero-based design column with the smallest pivot and
// `label` its human-readable name, e.g. "Y[t-2]".
class CollinearRegressors : public Error {
public:
    CollinearRegressors(const std::string& what, int column_index, std::string column_label)
        : Error(what), column(column_index), label(std::move(column_label)) {}
    int column;
    std::string label;
};

// Residual covariance is singular: the target is perfectly predictable
// from the regressors, so log-ratio statistics are undefined.
class DegenerateResiduals : public Error {
public:
    using Error::Error;
};

// An iterative scheme (fixed-point autocovariance solve, power iteration)
// exhausted its iteration budget.
class ConvergenceError : public Error {
public:
    using Error::Error;
};

// Invariant violation that indicates a bug in this library rather than a
// problem with the caller's input.
class InternalError : public Error {
public:
    using Error::Error;
};

} // namespace gcte
