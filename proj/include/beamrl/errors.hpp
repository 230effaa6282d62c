#pragma once

#include <stdexcept>
#include <string>

namespace beamrl {

/// Invalid user-supplied configuration (bad preset, out-of-range value, malformed file).
class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// A caller broke a documented precondition (negative power, NaN action, index out of range).
class ContractViolation : public std::logic_error {
public:
    using std::logic_error::logic_error;
};

/// An object was used in the wrong lifecycle state (step after done, backward without forward).
class UsageError : public std::logic_error {
public:
    using std::logic_error::logic_error;
};

namespace detail {
[[noreturn]] void throw_contract(const std::string& what);
[[noreturn]] void throw_config(const std::string& what);
}  // namespace detail

inline void require(bool cond, const char* what) {
    if (!cond) detail::throw_contract(what);
}

}  // namespace beamrl
