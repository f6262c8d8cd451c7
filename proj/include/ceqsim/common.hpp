#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

namespace ceqsim {

// Thrown for malformed scenario documents, bad overrides, and
// inconsistent controller/network configuration.
class ConfigError : public std::runtime_error {
public:
    explicit ConfigError(const std::string& msg) : std::runtime_error(msg) {}
};

// Thrown when a runtime contract is violated (controller emitting an
// out-of-range rate, queries on unknown ramp ids, ...).
class ContractError : public std::runtime_error {
public:
    explicit ContractError(const std::string& msg) : std::runtime_error(msg) {}
};

constexpr const char* kArtifactVersion = "0.1.0";

// Deterministic 64-bit uniform in [0,1) from a raw generator draw.
template <typename Rng>
double uniform01(Rng& rng) {
    return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

} // namespace ceqsim
