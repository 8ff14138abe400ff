#pragma once

#include <stdexcept>
#include <string>
#include <utility>

namespace slackhop {

/// Argument outside the domain of a kinematic or analysis map.
class DomainError : public std::domain_error {
public:
    using std::domain_error::domain_error;
};

/// Leg configuration where the length/angle map degenerates.
class SingularityError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// A metric that cannot be evaluated for the given record (zero apex, too few steps, ...).
class MetricError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Guard that was expected to change sign did not, or bisection failed.
class EventError : public std::logic_error {
public:
    using std::logic_error::logic_error;
};

/// Invalid scenario / sweep configuration. `field()` names the offending key path.
class ConfigError : public std::invalid_argument {
public:
    ConfigError(std::string field, std::string reason)
        : std::invalid_argument(field + ": " + reason), field_(std::move(field)), reason_(std::move(reason)) {}

    const std::string& field() const noexcept { return field_; }
    const std::string& reason() const noexcept { return reason_; }

private:
    std::string field_;
    std::string reason_;
};

}  // namespace slackhop
