#pragma once

#include <stdexcept>
#include <string>

namespace shapcause {

// Exact enumeration (coalitions or orderings) would exceed a configured cap.
class CapacityError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// A value function or model produced a non-finite value.
class EvaluationError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Cholesky or solve failure on a singular / non-positive-definite matrix.
// Never downgraded to a pseudo-inverse; callers opt into regularization explicitly.
class LinearAlgebraError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// The dataset has no rows matching the requested coalition values, so the
// empirical conditional expectation cannot be estimated.
class ConditioningInfeasibleError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// The backend does not support the given model kind (e.g. closed forms
// require a linear model).
class UnsupportedBackendError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Malformed input file (JSON/CSV); message names the file and the field.
class InputError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

}  // namespace shapcause
