#pragma once

#include <stdexcept>
#include <string>

namespace liangflow {

// Numerical failure inside an engine: non-convergence, an invariant broken
// beyond roundoff, or an engine asked to handle a model/state it cannot.
class EngineError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// A requested computation would exceed a hard size guard (2^L state vectors,
// dense matrices).
class ResourceError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Malformed or invalid run configuration. line() is 0 when the problem is not
// attached to a particular line (e.g. a missing key).
class ConfigError : public std::runtime_error {
public:
    ConfigError(int line, const std::string& message)
        : std::runtime_error(line > 0 ? "line " + std::to_string(line) + ": " + message : message),
          line_(line) {}

    int line() const noexcept { return line_; }

private:
    int line_;
};

} // namespace liangflow
