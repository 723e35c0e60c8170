#pragma once

#include <stdexcept>
#include <string>

namespace gmmnet {

struct ShapeError : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

struct InvalidMatrix : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

struct InvalidDimension : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

struct IndexError : std::out_of_range {
    using std::out_of_range::out_of_range;
};

struct NumericalFailure : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct InvalidSubset : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

struct InvalidRotation : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

struct InvalidConfidence : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

struct InvalidDistance : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

struct UnderdeterminedGroup : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

struct UnsupportedActivation : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

struct InvalidK : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

struct ZeroRowError : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

struct CacheError : std::logic_error {
    using std::logic_error::logic_error;
};

struct InsufficientComponents : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

// Carries the epoch at which the loss became non-finite.
struct DivergenceError : std::runtime_error {
    int epoch;
    DivergenceError(int epoch_, const std::string& msg)
        : std::runtime_error(msg), epoch(epoch_) {}
};

struct IoError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

}  // namespace gmmnet
