// Quasi-static kinematics of a two-phase twisted string actuator.
//
// Phase 1 (regular twisting): the string pair wraps into a double helix and
// shortens along L(theta) = sqrt(L_eff^2 - (theta * r_eff)^2).
// Phase 2 (overtwisting): beyond theta_star the packed bundle coils like a
// single thicker rod; one coil forms per motor revolution and each coil
// consumes (coil arc length - pitch) of axial length.
//
// Units: mm, g, rad, s, N, N*m.
#pragma once

#include <numbers>
#include <optional>

namespace tsa::core {

inline constexpr double kGravity = 9.81;  // m/s^2
inline constexpr double kTwoPi = 2.0 * std::numbers::pi;

enum class Material { Stiff, Compliant };
enum class Phase { Regular, Overtwist };

/// Which one-sided derivative to take at the phase kink.
enum class Side { Left, Right };

struct StringSpec {
    double diameter_mm = 1.0;
    double initial_length_mm = 200.0;  ///< loaded untwisted length L0
    Material material = Material::Stiff;
    int ply = 1;
    /// Measured bundle diameters; defaults are derived from diameter_mm.
    std::optional<double> bundle_regular_mm;
    std::optional<double> bundle_overtwist_mm;

    /// Throws std::invalid_argument on a non-physical description.
    void validate() const;
};

struct TwoPhaseParams {
    double r_eff_mm = 1.0;
    double theta_star_rad = 0.0;
    double coil_diameter_mm = 1.0;
    double coil_pitch_mm = 1.0;
    double eta = 1.0;
    double compliance_mm_per_N = 0.0;

    /// Centerline length of one coil turn, sqrt((pi D)^2 + p^2).
    [[nodiscard]] double coil_arc_length() const;
    /// Axial length consumed by one coil.
    [[nodiscard]] double coil_contraction() const { return coil_arc_length() - coil_pitch_mm; }
};

struct LoadCase {
    double mass_g = 0.0;

    [[nodiscard]] double force_N() const { return mass_g * 1e-3 * kGravity; }
};

struct ActuatorState {
    double theta_rad = 0.0;
    Phase phase = Phase::Regular;
    double length_mm = 0.0;
    double coil_count = 0.0;
};

/// Checks the parameter invariants against the string they describe.
/// Throws std::invalid_argument naming the first violated invariant.
void validate(const StringSpec& spec, const TwoPhaseParams& params);

/// Loaded zero-twist length, L0 + compliance * F.
[[nodiscard]] double effective_length(const StringSpec& spec, const TwoPhaseParams& params,
                                      const LoadCase& load);

[[nodiscard]] double length_regular(const StringSpec& spec, const TwoPhaseParams& params,
                                    const LoadCase& load, double theta);

/// Throws ModelDomainError once the coils have consumed the bundle; the
/// error carries the largest admissible theta.
[[nodiscard]] double length_overtwist(const StringSpec& spec, const TwoPhaseParams& params,
                                      const LoadCase& load, double theta);

[[nodiscard]] double length(const StringSpec& spec, const TwoPhaseParams& params,
                            const LoadCase& load, double theta);

/// Largest motor angle the model admits before the bundle is fully coiled.
[[nodiscard]] double max_theta(const StringSpec& spec, const TwoPhaseParams& params,
                               const LoadCase& load);

/// Number of coils formed at theta (zero in the regular phase).
[[nodiscard]] double coil_count(const TwoPhaseParams& params, double theta);

[[nodiscard]] ActuatorState state_at(const StringSpec& spec, const TwoPhaseParams& params,
                                     const LoadCase& load, double theta);

/// (L - L0) / L0 * 100. Negative for contraction.
[[nodiscard]] double strain(double length_mm, double initial_length_mm);

/// dL/dtheta in mm/rad. At theta_star a side must be given.
[[nodiscard]] double transmission_ratio(const StringSpec& spec, const TwoPhaseParams& params,
                                        const LoadCase& load, double theta,
                                        std::optional<Side> side = std::nullopt);

[[nodiscard]] double linear_speed(const StringSpec& spec, const TwoPhaseParams& params,
                                  const LoadCase& load, double theta, double motor_speed,
                                  std::optional<Side> side = std::nullopt);

/// Quasi-static motor torque F |dL/dtheta| / eta, in N*m.
[[nodiscard]] double required_torque(const StringSpec& spec, const TwoPhaseParams& params,
                                     const LoadCase& load, double theta,
                                     std::optional<Side> side = std::nullopt);

/// Untwisted length needed to deliver a displacement at a given contraction.
[[nodiscard]] double size_for_displacement(double required_displacement_mm,
                                           double contraction_fraction);

[[nodiscard]] double bundle_diameter(const StringSpec& spec, Phase phase);

[[nodiscard]] constexpr double rev_to_rad(double rev) { return rev * kTwoPi; }
[[nodiscard]] constexpr double rad_to_rev(double rad) { return rad / kTwoPi; }

}  // namespace tsa::core
