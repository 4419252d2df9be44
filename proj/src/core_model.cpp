#include "tsa/core_model.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

#include <fmt/format.h>

#include "tsa/errors.hpp"

namespace tsa::core {

namespace {

void require_nonnegative_theta(double theta) {
    if (!(theta >= 0.0)) {
        throw std::invalid_argument(fmt::format("motor angle must be >= 0, got {} rad", theta));
    }
}

}  // namespace

void StringSpec::validate() const {
    if (!(diameter_mm > 0.0)) {
        throw std::invalid_argument("string diameter must be positive");
    }
    if (!(initial_length_mm > 0.0)) {
        throw std::invalid_argument("initial length must be positive");
    }
    if (initial_length_mm < 20.0 * diameter_mm) {
        throw std::invalid_argument(fmt::format(
            "string is not slender: initial length {} mm < 20 x diameter {} mm",
            initial_length_mm, diameter_mm));
    }
    if (ply < 1) {
        throw std::invalid_argument("ply count must be >= 1");
    }
    if (bundle_regular_mm && !(*bundle_regular_mm > 0.0)) {
        throw std::invalid_argument("regular bundle diameter must be positive");
    }
    if (bundle_overtwist_mm && !(*bundle_overtwist_mm > 0.0)) {
        throw std::invalid_argument("overtwist bundle diameter must be positive");
    }
}

double TwoPhaseParams::coil_arc_length() const {
    return std::hypot(std::numbers::pi * coil_diameter_mm, coil_pitch_mm);
}

void validate(const StringSpec& spec, const TwoPhaseParams& params) {
    spec.validate();
    const double d = spec.diameter_mm;
    if (!(params.r_eff_mm >= 0.5 * d && params.r_eff_mm <= 2.0 * d)) {
        throw std::invalid_argument(fmt::format(
            "r_eff {} mm outside [{}, {}] mm for a {} mm string", params.r_eff_mm, 0.5 * d,
            2.0 * d, d));
    }
    if (!(params.theta_star_rad > 0.0)) {
        throw std::invalid_argument("theta_star must be positive");
    }
    if (!(params.theta_star_rad * params.r_eff_mm < spec.initial_length_mm)) {
        throw std::invalid_argument("theta_star * r_eff must stay below the initial length");
    }
    if (!(params.coil_diameter_mm > 0.0) || !(params.coil_pitch_mm >= 0.0)) {
        throw std::invalid_argument("coil diameter must be positive and pitch non-negative");
    }
    if (!(params.coil_arc_length() > params.coil_pitch_mm)) {
        throw std::invalid_argument("coils must consume length (arc length > pitch)");
    }
    if (!(params.eta > 0.0 && params.eta <= 1.0)) {
        throw std::invalid_argument("friction efficiency must lie in (0, 1]");
    }
    if (!(params.compliance_mm_per_N >= 0.0)) {
        throw std::invalid_argument("compliance must be non-negative");
    }
}

double effective_length(const StringSpec& spec, const TwoPhaseParams& params,
                        const LoadCase& load) {
    if (!(load.mass_g >= 0.0)) {
        throw std::invalid_argument("load mass must be non-negative");
    }
    return spec.initial_length_mm + params.compliance_mm_per_N * load.force_N();
}

double length_regular(const StringSpec& spec, const TwoPhaseParams& params, const LoadCase& load,
                      double theta) {
    validate(spec, params);
    require_nonnegative_theta(theta);
    if (theta > params.theta_star_rad) {
        throw std::invalid_argument("regular-phase length requested beyond theta_star");
    }
    const double l_eff = effective_length(spec, params, load);
    const double wound = theta * params.r_eff_mm;
    if (wound >= l_eff) {
        throw ModelDomainError("strings fully consumed by the double helix",
                               l_eff / params.r_eff_mm);
    }
    return std::sqrt((l_eff - wound) * (l_eff + wound));
}

double max_theta(const StringSpec& spec, const TwoPhaseParams& params, const LoadCase& load) {
    const double l1 = length_regular(spec, params, load, params.theta_star_rad);
    return params.theta_star_rad + kTwoPi * l1 / params.coil_arc_length();
}

double length_overtwist(const StringSpec& spec, const TwoPhaseParams& params,
                        const LoadCase& load, double theta) {
    if (theta < params.theta_star_rad) {
        throw std::invalid_argument("overtwist length requested below theta_star");
    }
    const double l1 = length_regular(spec, params, load, params.theta_star_rad);
    const double coils = coil_count(params, theta);
    if (coils * params.coil_arc_length() > l1) {
        const double limit = params.theta_star_rad + kTwoPi * l1 / params.coil_arc_length();
        throw ModelDomainError(
            fmt::format("bundle fully consumed by coils at {:.4f} rev (maximum {:.4f} rev)",
                        rad_to_rev(theta), rad_to_rev(limit)),
            limit);
    }
    return l1 - coils * params.coil_contraction();
}

double length(const StringSpec& spec, const TwoPhaseParams& params, const LoadCase& load,
              double theta) {
    require_nonnegative_theta(theta);
    if (theta <= params.theta_star_rad) {
        return length_regular(spec, params, load, theta);
    }
    return length_overtwist(spec, params, load, theta);
}

double coil_count(const TwoPhaseParams& params, double theta) {
    return theta > params.theta_star_rad ? (theta - params.theta_star_rad) / kTwoPi : 0.0;
}

ActuatorState state_at(const StringSpec& spec, const TwoPhaseParams& params, const LoadCase& load,
                       double theta) {
    ActuatorState state;
    state.theta_rad = theta;
    state.length_mm = length(spec, params, load, theta);
    state.phase = theta <= params.theta_star_rad ? Phase::Regular : Phase::Overtwist;
    state.coil_count = coil_count(params, theta);
    return state;
}

double strain(double length_mm, double initial_length_mm) {
    if (!(initial_length_mm > 0.0)) {
        throw std::invalid_argument("initial length must be positive");
    }
    return (length_mm - initial_length_mm) / initial_length_mm * 100.0;
}

double transmission_ratio(const StringSpec& spec, const TwoPhaseParams& params,
                          const LoadCase& load, double theta, std::optional<Side> side) {
    require_nonnegative_theta(theta);
    bool regular = theta < params.theta_star_rad;
    if (theta == params.theta_star_rad) {
        if (!side) {
            throw std::invalid_argument(
                "transmission ratio at theta_star needs a one-sided derivative");
        }
        regular = *side == Side::Left;
    }
    if (regular) {
        const double l = length_regular(spec, params, load, theta);
        return -theta * params.r_eff_mm * params.r_eff_mm / l;
    }
    // Evaluated for the domain check only; the slope itself is constant.
    (void)length_overtwist(spec, params, load, theta);
    return -params.coil_contraction() / kTwoPi;
}

double linear_speed(const StringSpec& spec, const TwoPhaseParams& params, const LoadCase& load,
                    double theta, double motor_speed, std::optional<Side> side) {
    return std::abs(transmission_ratio(spec, params, load, theta, side)) * std::abs(motor_speed);
}

double required_torque(const StringSpec& spec, const TwoPhaseParams& params,
                       const LoadCase& load, double theta, std::optional<Side> side) {
    const double ratio_m = std::abs(transmission_ratio(spec, params, load, theta, side)) * 1e-3;
    return load.force_N() * ratio_m / params.eta;
}

double size_for_displacement(double required_displacement_mm, double contraction_fraction) {
    if (!(required_displacement_mm >= 0.0)) {
        throw std::invalid_argument("required displacement must be non-negative");
    }
    if (!(contraction_fraction > 0.0 && contraction_fraction < 1.0)) {
        throw std::invalid_argument("contraction fraction must lie in (0, 1)");
    }
    return required_displacement_mm / contraction_fraction;
}

double bundle_diameter(const StringSpec& spec, Phase phase) {
    const double regular = spec.bundle_regular_mm.value_or(2.0 * spec.diameter_mm);
    if (phase == Phase::Regular) {
        return regular;
    }
    return spec.bundle_overtwist_mm.value_or(2.0 * regular);
}

}  // namespace tsa::core
