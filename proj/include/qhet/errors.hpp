#pragma once

#include <stdexcept>

namespace qhet {

// Problems with input data (CSV syntax, invalid study summaries). CLI exit 2.
class DataError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Numeric failures: non-convergence, degenerate fits, moment nonexistence.
// Domain violations use std::domain_error. CLI exit 3 for both.
class NumericError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

}  // namespace qhet
