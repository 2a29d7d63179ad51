#pragma once

#include <stdexcept>
#include <string>

namespace ewdecay {

// Bad user input: config files, CLI arguments, malformed mesh files.
struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Structurally broken data: inconsistent mesh indices, wrong tags, ...
struct ValidationError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Tensor field lacks the required index symmetries at a sample point.
struct SymmetryViolation : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Assembly-time failures (degenerate element, loss of ellipticity, ...).
struct AssemblyError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// The explicit time loop produced NaN/Inf or left the trust region.
struct BlowUpError : std::runtime_error {
    long step;
    double time;
    double max_abs_u;
    BlowUpError(long step_, double time_, double max_abs_u_, const std::string& what_)
        : std::runtime_error(what_), step(step_), time(time_), max_abs_u(max_abs_u_) {}
};

} // namespace ewdecay
