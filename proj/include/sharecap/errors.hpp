#pragma once

#include <stdexcept>
#include <string>

namespace sharecap {

struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Offered load reached or exceeded capacity; carries the computed value.
struct UnstableLoad : Error {
    explicit UnstableLoad(double rho_value)
        : Error("unstable load: rho = " + std::to_string(rho_value)), rho(rho_value) {}
    double rho;
};

struct InvalidClass : Error {
    using Error::Error;
};

struct InconsistentMeasurement : Error {
    using Error::Error;
};

struct EmptySystem : Error {
    using Error::Error;
};

struct ConfigError : Error {
    using Error::Error;
};

struct ProbeStarved : Error {
    using Error::Error;
};

struct UnknownMcs : Error {
    using Error::Error;
};

struct MalformedRecord : Error {
    using Error::Error;
};

struct EmptyInput : Error {
    using Error::Error;
};

} // namespace sharecap
