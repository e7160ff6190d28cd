#pragma once

#include <stdexcept>
#include <string>

namespace causalnet {

// Scenario/input problems. The CLI maps these to exit code 2.
struct ValidationError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// A finite window was too small to certify the requested result.
struct WindowTooSmall : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// An enumeration would exceed the configured cap.
struct CapExceeded : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct SupportNotContained : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct ZeroProbability : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct PreconditionViolation : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Backward extension: p(c_+) == p(c_-) makes the 2x2 step matrix singular.
struct NotInvertible : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Backward extension produced a value outside [0,1] (ratio constraint failed).
struct NegativeProbability : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct MissingRegion : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct NoCandidateRegion : std::runtime_error {
    using std::runtime_error::runtime_error;
};

}  // namespace causalnet
