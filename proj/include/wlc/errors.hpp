#pragma once

#include <stdexcept>
#include <string>

namespace wlc {

// Base for all structured failures raised by the library. Each leaf type
// corresponds to one named error state of the public operation contracts.
struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct InvalidMatrix : Error {
    using Error::Error;
};
struct NotPSD : Error {
    using Error::Error;
};
struct SingularMatrix : Error {
    using Error::Error;
};
struct Unsupported : Error {
    using Error::Error;
};
struct OddMoment : Error {
    using Error::Error;
};
struct GridTooSmall : Error {
    using Error::Error;
};
struct OutsideEventE : Error {
    using Error::Error;
};
struct KinkHit : Error {
    using Error::Error;
};
struct SmoothnessViolation : Error {
    using Error::Error;
};
struct MassTooSmall : Error {
    using Error::Error;
};
struct InvalidData : Error {
    using Error::Error;
};
struct InvertibilityUnverified : Error {
    using Error::Error;
};
struct ConfigError : Error {
    using Error::Error;
};

}  // namespace wlc
