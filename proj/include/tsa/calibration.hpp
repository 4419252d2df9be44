// Fitting two-phase parameters to observed endpoint data.
//
// The residual is a weighted sum of squared relative errors: contraction
// terms carry weight 1.0, optional speed and torque terms 0.2 each.
// Contractions are measured against the loaded zero-twist length.
#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <vector>

#include "tsa/core_model.hpp"

namespace tsa::calibration {

/// Returned by `residual` for parameters the model cannot evaluate.
inline constexpr double kInfeasiblePenalty = 1e6;
inline constexpr double kContractionWeight = 1.0;
inline constexpr double kRateWeight = 0.2;
inline constexpr std::size_t kParamCount = 6;
inline constexpr std::size_t kDefaultGridCap = 10'000'000;

struct ObservedEndpoints {
    core::StringSpec spec;
    core::LoadCase load;
    double theta_max_rev = 0.0;
    double contraction_regular_pct = 0.0;
    double contraction_total_pct = 0.0;
    std::optional<double> max_speed_regular_mm_s;
    std::optional<double> max_speed_overtwist_mm_s;
    std::optional<double> max_torque_regular_Nm;
    std::optional<double> max_torque_overtwist_Nm;
    /// Constant motor speed of the experiment; speed targets are ignored without it.
    std::optional<double> motor_speed_rev_s;

    void validate() const;
};

struct Predictions {
    double contraction_regular_pct = 0.0;
    double contraction_total_pct = 0.0;
    double slope_regular_mm_per_rad = 0.0;    ///< max |dL/dtheta| in phase 1
    double slope_overtwist_mm_per_rad = 0.0;  ///< |dL/dtheta| in phase 2
    double torque_regular_Nm = 0.0;
    double torque_overtwist_Nm = 0.0;
    std::optional<double> speed_regular_mm_s;
    std::optional<double> speed_overtwist_mm_s;
};

/// Model endpoints for the observed configuration. Throws on infeasible params.
[[nodiscard]] Predictions predict(const core::TwoPhaseParams& params,
                                  const ObservedEndpoints& obs);

[[nodiscard]] double residual(const core::TwoPhaseParams& params, const ObservedEndpoints& obs);

/// Packs parameters in the fixed order
/// {r_eff, theta_star, coil_diameter, coil_pitch, eta, compliance}.
[[nodiscard]] std::array<double, kParamCount> to_array(const core::TwoPhaseParams& params);
[[nodiscard]] core::TwoPhaseParams from_array(const std::array<double, kParamCount>& values);

struct Interval {
    double lo = 0.0;
    double hi = 0.0;
};

struct ParamBounds {
    std::array<Interval, kParamCount> box;

    /// Bounds implied by the string description and observation.
    [[nodiscard]] static ParamBounds defaults_for(const ObservedEndpoints& obs);
    /// Degenerate box at a single point.
    [[nodiscard]] static ParamBounds point(const core::TwoPhaseParams& params);
};

struct FitOptions {
    std::uint64_t seed = 0;
    int starts = 12;
    int max_iterations = 3000;  ///< per simplex run
    int polish_rounds = 4;      ///< simplex restarts at the incumbent
    unsigned threads = 1;
    /// Additional start points evaluated before the seeded ones.
    std::vector<core::TwoPhaseParams> extra_starts;
};

struct FitResult {
    core::TwoPhaseParams params;
    double residual = 0.0;
    int iterations = 0;
    bool converged = true;
};

[[nodiscard]] FitResult fit_two_phase(const ObservedEndpoints& obs, const ParamBounds& bounds,
                                      const FitOptions& options = {});

struct GridAxis {
    double lo = 0.0;
    double hi = 0.0;
    std::size_t count = 1;  ///< 1 evaluates lo only

    [[nodiscard]] double at(std::size_t i) const;
};

struct GridSpec {
    std::array<GridAxis, kParamCount> axes;

    [[nodiscard]] std::size_t total_points() const;
    /// `count` points per axis spanning `bounds`.
    [[nodiscard]] static GridSpec over(const ParamBounds& bounds, std::size_t count);
};

struct GridResult {
    core::TwoPhaseParams params;
    double residual = 0.0;
    std::size_t evaluated = 0;
};

/// Exhaustive search; ties go to the lexicographically smallest parameters.
[[nodiscard]] GridResult grid_oracle(const ObservedEndpoints& obs, const GridSpec& grid,
                                     std::size_t cap = kDefaultGridCap, unsigned threads = 1);

}  // namespace tsa::calibration
