#pragma once

#include <stdexcept>
#include <string>

namespace gkdv {

struct Error : std::runtime_error {
    explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

// No well of the effective potential below the requested energy level.
struct NoPeriodicOrbit : Error {
    explicit NoPeriodicOrbit(const std::string& msg) : Error(msg) {}
};

// Turning point nearly double: solitary-wave / equilibrium boundary.
struct DegenerateOrbit : Error {
    explicit DegenerateOrbit(const std::string& msg) : Error(msg) {}
};

struct QuadratureFailure : Error {
    explicit QuadratureFailure(const std::string& msg) : Error(msg) {}
};

struct IntegrationFailure : Error {
    explicit IntegrationFailure(const std::string& msg) : Error(msg) {}
};

struct GradientUnresolved : Error {
    explicit GradientUnresolved(const std::string& msg) : Error(msg) {}
};

struct SingularSystem : Error {
    explicit SingularSystem(const std::string& msg) : Error(msg) {}
};

struct DegenerateIndex : Error {
    explicit DegenerateIndex(const std::string& msg) : Error(msg) {}
};

struct ProfileResolutionTooCoarse : Error {
    explicit ProfileResolutionTooCoarse(const std::string& msg) : Error(msg) {}
};

struct FitUnstable : Error {
    explicit FitUnstable(const std::string& msg) : Error(msg) {}
};

struct RootLost : Error {
    explicit RootLost(const std::string& msg) : Error(msg) {}
};

struct ConfigError : Error {
    explicit ConfigError(const std::string& msg) : Error(msg) {}
};

}  // namespace gkdv
