#pragma once

#include <limits>

namespace tsa {

/// Saturating creep s * (1 - exp(-rate * c / s)) over a cycle count c.
/// An infinite saturation degenerates to the linear drift rate * c.
struct SaturatingCreep {
    double rate = 0.0;  ///< initial drift per cycle
    double saturation = std::numeric_limits<double>::infinity();

    [[nodiscard]] double operator()(double cycles) const;

    /// Cycles needed to reach `fraction` of the asymptote.
    [[nodiscard]] double cycles_to_fraction(double fraction) const;

    /// Creep that reaches `fraction` of `saturation` after exactly `horizon_cycles`.
    [[nodiscard]] static SaturatingCreep reaching(double saturation, double horizon_cycles,
                                                  double fraction = 0.99);
};

}  // namespace tsa
