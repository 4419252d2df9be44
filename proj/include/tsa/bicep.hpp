// One-joint robotic bicep driven by a TSA running point-to-point from the
// upper arm (distance a from the joint) to the forearm (distance b).
//
// With string length l the interior angle at the joint is
// psi = acos((a^2 + b^2 - l^2) / (2ab)); the reported bending angle is
// phi = gamma - psi, so phi grows as the string shortens.
#pragma once

#include <array>
#include <cstddef>
#include <vector>

#include "tsa/core_model.hpp"
#include "tsa/errors.hpp"

namespace tsa::bicep {

/// Inconsistency limit for a geometry fit, degrees per point.
inline constexpr double kFitToleranceDeg = 1.5;

struct BicepGeometry {
    double a_mm = 100.0;
    double b_mm = 100.0;
    double gamma_deg = 180.0;
    double payload_g = 700.0;
    double forearm_length_mm = 300.0;

    void validate() const;
};

struct LengthInterval {
    double lo = 0.0;
    double hi = 0.0;
};

/// Open interval (|a - b|, a + b) of admissible string lengths.
[[nodiscard]] LengthInterval admissible_lengths(const BicepGeometry& geom);

[[nodiscard]] double angle_from_length(const BicepGeometry& geom, double length_mm);

/// Accepts the closed range [gamma - 180, gamma]; the endpoints map to a + b and |a - b|.
[[nodiscard]] double length_from_angle(const BicepGeometry& geom, double angle_deg);

/// Perpendicular distance from the joint to the string line, mm.
[[nodiscard]] double moment_arm(const BicepGeometry& geom, double angle_deg);

/// Quasi-static string tension (N) holding the payload at `angle_deg`.
/// The bending angle is measured from the forearm hanging straight down,
/// so the forearm inclination from horizontal is angle - 90 deg.
[[nodiscard]] double string_tension(const BicepGeometry& geom, double angle_deg);

struct AnglePair {
    double length_mm = 0.0;
    double angle_deg = 0.0;
};

struct BicepFit {
    BicepGeometry geometry;
    double residual_deg2 = 0.0;           ///< summed squared angle error
    std::array<double, 3> errors_deg{};   ///< model minus observed
    double max_abs_error_deg = 0.0;
    bool consistent = false;              ///< every point within kFitToleranceDeg
};

struct BicepFitOptions {
    double search_max_mm = 400.0;
    double coarse_step_mm = 1.0;
};

/// Least-squares (a, b, gamma) from three observations. `payload_g` and
/// `forearm_length_mm` are copied from `base`.
[[nodiscard]] BicepFit fit_bicep(const std::array<AnglePair, 3>& pairs,
                                 const BicepGeometry& base = {},
                                 const BicepFitOptions& options = {});

struct BicepGrid {
    double max_mm = 400.0;
    std::size_t length_steps = 160;  ///< nodes on (0, max_mm] for a and b
    std::size_t gamma_steps = 360;   ///< nodes on (0, 360) degrees
};

/// Brute-force 3-D search over (a, b, gamma). Ties go to the smallest
/// (a, b, gamma) in lexicographic order.
[[nodiscard]] BicepFit bicep_grid_oracle(const std::array<AnglePair, 3>& pairs,
                                         const BicepGrid& grid = {},
                                         const BicepGeometry& base = {});

struct SweepPoint {
    double theta_rev = 0.0;
    double length_mm = 0.0;
    double angle_deg = 0.0;
    double tension_N = 0.0;
};

/// Bending angle along a motor-angle sweep from 0 to theta_max_rev. Tension is
/// infinite where the string line passes through the joint.
[[nodiscard]] std::vector<SweepPoint> sweep(const BicepGeometry& geom,
                                            const core::StringSpec& spec,
                                            const core::TwoPhaseParams& params,
                                            const core::LoadCase& load, double theta_max_rev,
                                            std::size_t samples);

}  // namespace tsa::bicep
