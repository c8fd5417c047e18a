#pragma once

#include <stdexcept>
#include <string>

namespace blurforge {

// Invalid user input: bad dimensions, malformed files, missing paths.
class InputError : public std::runtime_error {
public:
    explicit InputError(const std::string& msg) : std::runtime_error(msg) {}
};

// Invalid kernel/tool configuration: odd channel counts, group-sum mismatch.
class ConfigError : public std::runtime_error {
public:
    explicit ConfigError(const std::string& msg) : std::runtime_error(msg) {}
};

// The calibration system is singular (no exposure variation, constant images).
class CalibrationDegenerateError : public std::runtime_error {
public:
    explicit CalibrationDegenerateError(const std::string& msg) : std::runtime_error(msg) {}
};

// A response curve is not strictly monotonic after isotonic enforcement.
class InvalidCurveError : public std::runtime_error {
public:
    explicit InvalidCurveError(const std::string& msg) : std::runtime_error(msg) {}
};

// A depth frame has no valid pixels to label.
class UnlabeledError : public std::runtime_error {
public:
    explicit UnlabeledError(const std::string& msg) : std::runtime_error(msg) {}
};

// A depth sequence is all-zero and cannot be normalized.
class DegenerateDepthError : public std::runtime_error {
public:
    explicit DegenerateDepthError(const std::string& msg) : std::runtime_error(msg) {}
};

}  // namespace blurforge
