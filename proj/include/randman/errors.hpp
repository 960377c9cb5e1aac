#pragma once

#include <stdexcept>
#include <string>

namespace randman {

/// Bad argument to a constructor or operation (nonpositive period, 2p > m, ...).
class InvalidArgument : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// A metric or Jacobian that is singular, indefinite or too badly conditioned.
class NumericalDegeneracy : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// The isotropy correction of a wave model could not be carried out.
class ModelConstructionError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class UnsupportedOrder : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// Inconsistent experiment configuration; raised before any computation.
class ConfigError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

class IoError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Should be unreachable for valid inputs (e.g. a zero pivot in the Z matrix).
class InternalConsistencyError : public std::logic_error {
public:
    using std::logic_error::logic_error;
};

}  // namespace randman
