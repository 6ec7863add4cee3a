// Copyright 2026 The mae-codec Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <stdexcept>
#include <string>

namespace mae {

/// Caller broke an operation's precondition (shape, range, index).
class ContractViolation : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// Input outside the mathematical domain of a primitive (log of a
/// non-positive value, division by zero).
class NumericDomainError : public std::domain_error {
public:
    using std::domain_error::domain_error;
};

/// Symbol outside its table, truncated payload, or inconsistent count.
class CodingError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Malformed or mismatched file (bad magic, version, model hash).
class FormatError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Entropy-model support too narrow to hold the required probability mass.
class RangeError : public std::range_error {
public:
    using std::range_error::range_error;
};

/// Training produced a non-finite loss.
class TrainingDiverged : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

} // namespace mae
