// Resistance-based strain self-sensing for conductive (SCP) string pairs.
//
// Forward model:
//   R[k] = r0 + sensitivity * strain[k] + transient[k] + creep(cycles[k])
//   transient[k] = transient[k-1] * exp(-dt / tau) + gain * (strain[k] - strain[k-1])
#pragma once

#include <cstddef>
#include <limits>
#include <span>
#include <vector>

#include "tsa/creep.hpp"

namespace tsa::sensing {

struct ResistanceParams {
    double r0_ohm = 10.0;
    double sensitivity_ohm_per_pct = -0.05;  ///< per percent strain (strain < 0 when contracted)
    double tau_transient_s = 2.0;
    double transient_gain_ohm_per_pct = -0.01;
    double creep_rate_ohm_per_cycle = 0.0;
    double creep_saturation_ohm = std::numeric_limits<double>::infinity();

    void validate() const;
    [[nodiscard]] SaturatingCreep creep() const {
        return {creep_rate_ohm_per_cycle, creep_saturation_ohm};
    }
};

/// Transient component alone; exposed for inspection and testing.
[[nodiscard]] std::vector<double> transient_component(const ResistanceParams& params,
                                                      std::span<const double> strain_pct,
                                                      std::span<const double> time_s);

[[nodiscard]] std::vector<double> resistance_forward(const ResistanceParams& params,
                                                     std::span<const double> strain_pct,
                                                     std::span<const double> time_s,
                                                     std::span<const double> cycles);

enum class BaselineKind { None, Linear, SaturatingExponential };

struct Detrended {
    std::vector<double> series;
    BaselineKind kind = BaselineKind::None;
    std::vector<std::size_t> anchors;  ///< indices the baseline was fitted on
    std::vector<double> baseline;      ///< fitted baseline, minus its value at t[0]
};

/// Removes slow drift measured at the cycle minima. The output keeps the
/// input's level at the first sample.
[[nodiscard]] Detrended detrend_creep(std::span<const double> resistance,
                                      std::span<const double> time_s);

/// Inverts the first-order transient, removes creep drift from the
/// resulting static resistance, then inverts the affine strain map. Throws
/// std::domain_error when the map is not invertible.
[[nodiscard]] std::vector<double> estimate_strain(const ResistanceParams& params,
                                                  std::span<const double> resistance,
                                                  std::span<const double> time_s);

/// Least-squares r0 and sensitivity from paired strain/resistance samples;
/// the remaining fields are copied from `base`.
[[nodiscard]] ResistanceParams fit_resistance_baseline(const ResistanceParams& base,
                                                       std::span<const double> strain_pct,
                                                       std::span<const double> resistance);

}  // namespace tsa::sensing
