#pragma once

#include <stdexcept>
#include <string>

namespace pae {

// Incompatible tensor/matrix shapes. Messages name the offending shapes.
class DimensionError : public std::runtime_error {
public:
    explicit DimensionError(const std::string& what) : std::runtime_error(what) {}
};

// A caller broke an operation's precondition (non-scalar loss, k over the
// enumeration bound, non-binary targets, ...).
class ContractError : public std::logic_error {
public:
    explicit ContractError(const std::string& what) : std::logic_error(what) {}
};

// Invalid run/training configuration (bad learning rate, rate out of range,
// malformed config file, ...).
class ConfigError : public std::runtime_error {
public:
    explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

// Unreadable, truncated, or incompatible checkpoint file.
class CheckpointError : public std::runtime_error {
public:
    explicit CheckpointError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace pae
