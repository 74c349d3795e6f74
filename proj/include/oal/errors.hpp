#ifndef OAL_ERRORS_HPP
#define OAL_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace oal {

struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct DimensionMismatch : Error {
    using Error::Error;
};

// Requested coherent amplitude leaves more than 1e-10 Poisson mass above the
// retained Fock levels.
struct TruncationTooSmall : Error {
    using Error::Error;
};

struct StepTooLarge : Error {
    using Error::Error;
};

struct DeltaPTooLarge : Error {
    using Error::Error;
};

struct NegativeProbability : Error {
    using Error::Error;
};

struct NegligibleBranch : Error {
    using Error::Error;
};

struct NotPure : Error {
    using Error::Error;
};

struct ConfigError : Error {
    using Error::Error;
};

} // namespace oal

#endif
