#pragma once

#include <stdexcept>
#include <string>

namespace aop {

/// Argument shape or range violates an operation's precondition.
class InvalidInput : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// An evaluator or indicator produced a non-finite value.
class NumericalDomainError : public std::domain_error {
public:
    using std::domain_error::domain_error;
};

class UnsupportedOperation : public std::logic_error {
public:
    using std::logic_error::logic_error;
};

class CheckpointFormatError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Training produced a non-finite loss. The message carries the diagnostics.
class NumericalDivergence : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class IoError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

}  // namespace aop
