#ifndef LUMLOSS_ERRORS_HPP
#define LUMLOSS_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace lumloss {

// Bad shapes, bad arguments, malformed configs. CLI exit code 1.
class InvalidInput : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

// NaN/Inf in a loss or gradient, aborted training. CLI exit code 2.
class NumericalError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Unreadable files and malformed image or checkpoint payloads. CLI exit code 3.
class FormatError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class CorruptCheckpoint : public FormatError {
public:
    using FormatError::FormatError;
};

}

#endif
