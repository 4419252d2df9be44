#include "tsa/bicep.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>

#include <fmt/format.h>

#include "tsa/nelder_mead.hpp"

namespace tsa::bicep {

namespace {

constexpr double kDeg = 180.0 / std::numbers::pi;

double cos_interior(double a, double b, double length) {
    return (a * a + b * b - length * length) / (2.0 * (a * b));
}

void check_pairs(const std::array<AnglePair, 3>& pairs) {
    for (std::size_t i = 0; i < pairs.size(); ++i) {
        if (!(pairs[i].length_mm > 0.0)) {
            throw std::invalid_argument("bicep observation lengths must be positive");
        }
        for (std::size_t j = i + 1; j < pairs.size(); ++j) {
            if (pairs[i].length_mm == pairs[j].length_mm || pairs[i].angle_deg == pairs[j].angle_deg) {
                throw std::invalid_argument(
                    "underdetermined bicep fit: observations must have distinct lengths and angles");
            }
        }
    }
}

bool admissible(double a, double b, double length) {
    return std::abs(a - b) <= length && length <= a + b;
}

// Least-squares gamma for fixed (a, b) is the mean of phi_i + psi_i.
double summed_error(double a, double b, const std::array<AnglePair, 3>& pairs, double* gamma) {
    std::array<double, 3> psi{};
    double mean = 0.0;
    for (std::size_t i = 0; i < 3; ++i) {
        if (!admissible(a, b, pairs[i].length_mm)) {
            return std::numeric_limits<double>::infinity();
        }
        psi[i] = std::acos(std::clamp(cos_interior(a, b, pairs[i].length_mm), -1.0, 1.0)) * kDeg;
        mean += pairs[i].angle_deg + psi[i];
    }
    mean /= 3.0;
    double sum = 0.0;
    for (std::size_t i = 0; i < 3; ++i) {
        const double e = mean - psi[i] - pairs[i].angle_deg;
        sum += e * e;
    }
    if (gamma) *gamma = mean;
    return sum;
}

BicepFit summarize(BicepGeometry geom, const std::array<AnglePair, 3>& pairs) {
    BicepFit fit;
    fit.geometry = geom;
    for (std::size_t i = 0; i < 3; ++i) {
        const double e = angle_from_length(geom, pairs[i].length_mm) - pairs[i].angle_deg;
        fit.errors_deg[i] = e;
        fit.residual_deg2 += e * e;
        fit.max_abs_error_deg = std::max(fit.max_abs_error_deg, std::abs(e));
    }
    fit.consistent = fit.max_abs_error_deg <= kFitToleranceDeg;
    return fit;
}

}  // namespace

void BicepGeometry::validate() const {
    if (!(a_mm > 0.0) || !(b_mm > 0.0)) {
        throw std::invalid_argument("bicep lever arms must be positive");
    }
    if (!(payload_g >= 0.0) || !(forearm_length_mm >= 0.0)) {
        throw std::invalid_argument("payload and forearm length must be non-negative");
    }
}

LengthInterval admissible_lengths(const BicepGeometry& geom) {
    return {std::abs(geom.a_mm - geom.b_mm), geom.a_mm + geom.b_mm};
}

double angle_from_length(const BicepGeometry& geom, double length_mm) {
    geom.validate();
    const LengthInterval range = admissible_lengths(geom);
    if (!(length_mm >= range.lo && length_mm <= range.hi)) {
        throw ModelDomainError(
            fmt::format("string length {} mm violates the triangle inequality; admissible ({}, {}) mm",
                        length_mm, range.lo, range.hi),
            range.hi);
    }
    const double c = std::clamp(cos_interior(geom.a_mm, geom.b_mm, length_mm), -1.0, 1.0);
    return geom.gamma_deg - std::acos(c) * kDeg;
}

double length_from_angle(const BicepGeometry& geom, double angle_deg) {
    geom.validate();
    const double psi = geom.gamma_deg - angle_deg;
    if (!(psi >= 0.0 && psi <= 180.0)) {
        throw std::invalid_argument(fmt::format(
            "bending angle {} deg outside the reachable range [{}, {}] deg", angle_deg,
            geom.gamma_deg - 180.0, geom.gamma_deg));
    }
    const double a = geom.a_mm;
    const double b = geom.b_mm;
    const double sq = a * a + b * b - 2.0 * (a * b) * std::cos(psi / kDeg);
    return std::sqrt(std::max(0.0, sq));
}

double moment_arm(const BicepGeometry& geom, double angle_deg) {
    const double length = length_from_angle(geom, angle_deg);
    const double psi = (geom.gamma_deg - angle_deg) / kDeg;
    if (length <= 0.0) return 0.0;
    return geom.a_mm * geom.b_mm * std::sin(psi) / length;
}

double string_tension(const BicepGeometry& geom, double angle_deg) {
    const double arm = moment_arm(geom, angle_deg);
    const double weight = geom.payload_g * 1e-3 * core::kGravity;
    const double gravity_torque =
        weight * geom.forearm_length_mm * std::cos((angle_deg - 90.0) / kDeg);
    if (weight == 0.0) return 0.0;
    if (!(std::abs(arm) > 1e-9 * (geom.a_mm + geom.b_mm))) {
        throw ModelDomainError(fmt::format(
            "singular bicep configuration at {} deg: string line passes through the joint",
            angle_deg));
    }
    return gravity_torque / arm;
}

BicepFit fit_bicep(const std::array<AnglePair, 3>& pairs, const BicepGeometry& base,
                   const BicepFitOptions& options) {
    check_pairs(pairs);
    if (!(options.coarse_step_mm > 0.0) || !(options.search_max_mm > options.coarse_step_mm)) {
        throw std::invalid_argument("invalid bicep search range");
    }
    // Search in s = a + b and d = b - a. Every pair is admissible exactly
    // when s >= longest and d <= shortest, so the constraints become a box
    // and the optimum may sit on its edge.
    double shortest = pairs[0].length_mm;
    double longest = pairs[0].length_mm;
    for (const auto& p : pairs) {
        shortest = std::min(shortest, p.length_mm);
        longest = std::max(longest, p.length_mm);
    }
    const double s_max = 2.0 * options.search_max_mm;
    if (!(s_max > longest)) {
        throw std::invalid_argument("no admissible bicep geometry within the search range");
    }
    const auto error_sd = [&](double s, double d) {
        return summed_error(0.5 * (s - d), 0.5 * (s + d), pairs, nullptr);
    };

    double best = std::numeric_limits<double>::infinity();
    double best_s = longest;
    double best_d = 0.0;
    const auto s_steps = static_cast<std::size_t>((s_max - longest) / options.coarse_step_mm);
    const auto d_steps = static_cast<std::size_t>(shortest / options.coarse_step_mm);
    for (std::size_t i = 0; i <= s_steps + 1; ++i) {
        const double s = std::min(s_max, longest + options.coarse_step_mm * static_cast<double>(i));
        for (std::size_t j = 0; j <= d_steps + 1; ++j) {
            const double d = std::min(shortest, options.coarse_step_mm * static_cast<double>(j));
            if (!(d < s)) continue;
            const double r = error_sd(s, d);
            if (r < best) {
                best = r;
                best_s = s;
                best_d = d;
            }
        }
    }
    if (!std::isfinite(best)) {
        throw std::invalid_argument("no admissible bicep geometry within the search range");
    }

    NelderMeadOptions nm;
    nm.initial_step = 0.5 * options.coarse_step_mm;
    nm.max_iterations = 5000;
    nm.f_tolerance = 1e-16;
    nm.x_tolerance = 1e-10;
    nm.lower = {longest, 0.0};
    nm.upper = {s_max, shortest};
    const Objective objective = [&](std::span<const double> x) { return error_sd(x[0], x[1]); };
    NelderMeadResult refined = nelder_mead(objective, {best_s, best_d}, nm);
    for (int round = 0; round < 3; ++round) {
        NelderMeadResult again = nelder_mead(objective, refined.x, nm);
        if (!(again.value < refined.value)) break;
        refined = again;
    }

    const double a = 0.5 * (refined.x[0] - refined.x[1]);
    const double b = 0.5 * (refined.x[0] + refined.x[1]);
    BicepGeometry geom = base;
    geom.a_mm = a;
    geom.b_mm = b;
    summed_error(a, b, pairs, &geom.gamma_deg);
    return summarize(geom, pairs);
}
BicepFit bicep_grid_oracle(const std::array<AnglePair, 3>& pairs, const BicepGrid& grid,
                           const BicepGeometry& base) {
    check_pairs(pairs);
    if (grid.length_steps == 0 || grid.gamma_steps < 2 || !(grid.max_mm > 0.0)) {
        throw std::invalid_argument("invalid bicep grid");
    }
    double best = std::numeric_limits<double>::infinity();
    BicepGeometry best_geom = base;
    std::array<double, 3> psi{};
    for (std::size_t i = 1; i <= grid.length_steps; ++i) {
        const double a = grid.max_mm * static_cast<double>(i) / static_cast<double>(grid.length_steps);
        for (std::size_t j = 1; j <= grid.length_steps; ++j) {
            const double b =
                grid.max_mm * static_cast<double>(j) / static_cast<double>(grid.length_steps);
            bool ok = true;
            for (std::size_t k = 0; k < 3 && ok; ++k) {
                ok = admissible(a, b, pairs[k].length_mm);
                if (ok) {
                    psi[k] = std::acos(std::clamp(cos_interior(a, b, pairs[k].length_mm), -1.0, 1.0)) *
                             kDeg;
                }
            }
            if (!ok) continue;
            for (std::size_t g = 1; g < grid.gamma_steps; ++g) {
                const double gamma = 360.0 * static_cast<double>(g) /
                                     static_cast<double>(grid.gamma_steps);
                double sum = 0.0;
                for (std::size_t k = 0; k < 3; ++k) {
                    const double e = gamma - psi[k] - pairs[k].angle_deg;
                    sum += e * e;
                }
                if (sum < best) {
                    best = sum;
                    best_geom.a_mm = a;
                    best_geom.b_mm = b;
                    best_geom.gamma_deg = gamma;
                }
            }
        }
    }
    if (!std::isfinite(best)) {
        throw std::invalid_argument("no admissible bicep geometry on the grid");
    }
    return summarize(best_geom, pairs);
}

std::vector<SweepPoint> sweep(const BicepGeometry& geom, const core::StringSpec& spec,
                              const core::TwoPhaseParams& params, const core::LoadCase& load,
                              double theta_max_rev, std::size_t samples) {
    if (samples < 2) throw std::invalid_argument("a sweep needs at least two samples");
    if (!(theta_max_rev >= 0.0)) throw std::invalid_argument("sweep range must be non-negative");
    std::vector<SweepPoint> out;
    out.reserve(samples);
    for (std::size_t k = 0; k < samples; ++k) {
        SweepPoint p;
        p.theta_rev = theta_max_rev * static_cast<double>(k) / static_cast<double>(samples - 1);
        p.length_mm = core::length(spec, params, load, core::rev_to_rad(p.theta_rev));
        p.angle_deg = angle_from_length(geom, p.length_mm);
        // Where the string passes through the joint no finite tension holds the load.
        p.tension_N = std::abs(moment_arm(geom, p.angle_deg)) > 1e-9 * (geom.a_mm + geom.b_mm) ||
                              geom.payload_g == 0.0
                          ? string_tension(geom, p.angle_deg)
                          : std::numeric_limits<double>::infinity();
        out.push_back(p);
    }
    return out;
}

}  // namespace tsa::bicep
