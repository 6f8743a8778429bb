#pragma once

#include <stdexcept>
#include <string>

namespace avgq {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Model or configuration rejected on ingest.
class ValidationError : public Error {
public:
    using Error::Error;
};

class RowSumError : public ValidationError {
public:
    RowSumError(int s, int a, double actual);
    int state;
    int action;
    double actual;
};

class RewardRangeError : public ValidationError {
public:
    RewardRangeError(int s, int a, double value);
    int state;
    int action;
    double value;
};

/// A schedule produced a discount or step size outside its admissible range,
/// usually because c_N is too small for epoch k.
class InfeasibleEpoch : public Error {
public:
    InfeasibleEpoch(int k, std::string reason);
    int epoch;
    std::string reason;
};

class NonConvergence : public Error {
public:
    NonConvergence(long iterations, double residual);
    long iterations;
    double residual;
};

} // namespace avgq
