#pragma once

#include <stdexcept>
#include <string>

namespace repoforge {

struct IoError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Source could not be parsed; carries the file and position.
struct AnalysisError : std::runtime_error {
    std::string path;
    int line = 0;
    AnalysisError(std::string p, int ln, const std::string& msg)
        : std::runtime_error(p + ":" + std::to_string(ln) + ": " + msg),
          path(std::move(p)),
          line(ln) {}
};

struct BackendError : std::runtime_error {
    bool retryable = false;
    BackendError(const std::string& msg, bool retry = false)
        : std::runtime_error(msg), retryable(retry) {}
};

struct SimulationError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct GroundingError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

}  // namespace repoforge
