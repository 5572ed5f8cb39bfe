#pragma once

#include <stdexcept>
#include <string>

namespace qlab {

struct Error : std::runtime_error {
    explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

struct InvalidInput : Error {
    using Error::Error;
};

struct NotErgodic : Error {
    using Error::Error;
};
struct ZeroMass : Error {
    using Error::Error;
};
struct NotHurwitz : Error {
    using Error::Error;
};
struct IllConditioned : Error {
    using Error::Error;
};
struct NotPositiveDefinite : Error {
    using Error::Error;
};
struct StepTooLarge : Error {
    using Error::Error;
};
struct DegenerateSpectrum : Error {
    using Error::Error;
};
struct BoundViolated : Error {
    using Error::Error;
};
struct SandwichViolated : Error {
    using Error::Error;
};
struct SlemDegenerate : Error {
    using Error::Error;
};
struct HorizonTooShort : Error {
    using Error::Error;
};
struct DomainError : Error {
    using Error::Error;
};

} // namespace qlab
