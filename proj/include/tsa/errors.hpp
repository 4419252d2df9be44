#pragma once

#include <optional>
#include <stdexcept>
#include <string>

namespace tsa {

/// Raised when a model is evaluated outside the region where its geometry
/// is defined (strings fully consumed, triangle inequality violated, ...).
class ModelDomainError : public std::domain_error {
public:
    explicit ModelDomainError(const std::string& what,
                              std::optional<double> admissible_limit = std::nullopt)
        : std::domain_error(what), admissible_limit_(admissible_limit) {}

    /// Largest (or boundary) admissible input, when one exists. For the
    /// overtwist phase this is the maximum motor angle in radians.
    [[nodiscard]] std::optional<double> admissible_limit() const { return admissible_limit_; }

private:
    std::optional<double> admissible_limit_;
};

/// Overtwisting requested for a configuration that cannot form uniform coils.
class TrainingGateError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Malformed configuration or data file; messages carry the source location.
class InputError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

}  // namespace tsa
