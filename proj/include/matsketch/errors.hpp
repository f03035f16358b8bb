#pragma once

#include <stdexcept>
#include <string>

namespace matsketch {

/// Caller violated a precondition (bad sizes, invalid options, stale indices).
class UsageError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// The input data itself is unusable (unreadable file, ragged CSV, NaN under
/// the reject policy, degenerate all-constant matrix).
class DataError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Numeric failure (eigensolver non-convergence, broken theorem inequality).
class NumericError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Process exit codes used by the CLI.
inline constexpr int kExitOk = 0;
inline constexpr int kExitUsage = 2;
inline constexpr int kExitData = 3;
inline constexpr int kExitNumeric = 4;

} // namespace matsketch
