#include "tsa/simulation.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "tsa/errors.hpp"

namespace tsa::simulation {

std::vector<ProfileSample> generate_profile(const ProfileSpec& spec) {
    if (spec.samples_per_cycle < 2 || spec.cycles < 1 || !(spec.period_s > 0.0)) {
        throw std::invalid_argument("profile needs >= 2 samples per cycle, >= 1 cycle, period > 0");
    }
    if (!(spec.start_rev >= 0.0) || !(spec.peak_rev >= spec.start_rev)) {
        throw std::invalid_argument("profile needs 0 <= start_rev <= peak_rev");
    }
    const double amplitude = spec.peak_rev - spec.start_rev;
    const int cycles = spec.kind == ProfileKind::Ramp ? 1 : spec.cycles;
    const int total = cycles * spec.samples_per_cycle;
    std::vector<ProfileSample> out;
    out.reserve(static_cast<std::size_t>(total) + 1);
    for (int k = 0; k <= total; ++k) {
        const double phase = static_cast<double>(k) / spec.samples_per_cycle;  // in cycles
        ProfileSample s;
        s.time_s = phase * spec.period_s;
        s.cycle = phase;
        if (spec.kind == ProfileKind::Ramp) {
            s.theta_rev = spec.start_rev + amplitude * phase;
        } else {
            const double frac = phase - std::floor(phase);
            const double tri = frac <= 0.5 ? 2.0 * frac : 2.0 * (1.0 - frac);
            s.theta_rev = spec.start_rev + amplitude * tri;
        }
        out.push_back(s);
    }
    return out;
}

std::vector<double> count_cycles(std::span<const double> theta_rev) {
    std::vector<double> out(theta_rev.size(), 0.0);
    int completed = 0;
    int direction = 0;
    for (std::size_t k = 1; k < theta_rev.size(); ++k) {
        const double d = theta_rev[k] - theta_rev[k - 1];
        const int dir = d > 0.0 ? 1 : (d < 0.0 ? -1 : 0);
        if (dir != 0) {
            if (direction < 0 && dir > 0) ++completed;
            direction = dir;
        }
        out[k] = completed;
    }
    return out;
}

void check_training_gate(const Setup& setup, double max_theta_rad) {
    if (max_theta_rad <= setup.params.theta_star_rad) return;
    if (setup.spec.material == core::Material::Compliant) return;
    const training::TrainingState state = setup.training.value_or(training::TrainingState{});
    // gated_length carries the diagnostic; the length itself is not needed here.
    if (!training::coiling_available(setup.spec, state, setup.load)) {
        (void)training::gated_length(setup.spec, setup.params, setup.load, state, max_theta_rad);
    }
}

std::vector<Row> simulate(const Setup& setup, std::span<const ProfileSample> profile) {
    std::vector<double> theta(profile.size());
    for (std::size_t k = 0; k < profile.size(); ++k) {
        if (k > 0 && !(profile[k].time_s > profile[k - 1].time_s)) {
            throw std::invalid_argument("profile time must be strictly increasing");
        }
        theta[k] = core::rev_to_rad(profile[k].theta_rev);
    }
    if (!theta.empty()) check_training_gate(setup, *std::max_element(theta.begin(), theta.end()));

    const double reference = core::length(setup.spec, setup.params, setup.load, 0.0);
    std::vector<double> lengths;
    if (setup.hysteresis) {
        lengths = hysteresis::hysteretic_length(setup.spec, setup.params, setup.load,
                                                *setup.hysteresis, theta);
    } else {
        lengths.reserve(theta.size());
        for (double t : theta) lengths.push_back(core::length(setup.spec, setup.params, setup.load, t));
    }

    std::vector<Row> rows(profile.size());
    for (std::size_t k = 0; k < profile.size(); ++k) {
        double motor_speed = 0.0;  // rad/s
        if (profile.size() > 1) {
            const std::size_t lo = k == 0 ? 0 : k - 1;
            const std::size_t hi = k + 1 == profile.size() ? k : k + 1;
            motor_speed = (theta[hi] - theta[lo]) / (profile[hi].time_s - profile[lo].time_s);
        }
        const core::Side side = motor_speed > 0.0 ? core::Side::Right : core::Side::Left;

        Row& r = rows[k];
        r.time_s = profile[k].time_s;
        r.theta_rev = profile[k].theta_rev;
        double length = lengths[k];
        if (setup.length_creep) length -= (*setup.length_creep)(profile[k].cycle);
        r.length_mm = std::max(length, 0.0);
        r.strain_pct = core::strain(r.length_mm, reference);
        r.speed_mm_s = core::linear_speed(setup.spec, setup.params, setup.load, theta[k],
                                          motor_speed, side);
        r.torque_Nm = core::required_torque(setup.spec, setup.params, setup.load, theta[k], side);
        r.coil_count = core::coil_count(setup.params, theta[k]);
        r.phase = theta[k] <= setup.params.theta_star_rad ? core::Phase::Regular
                                                          : core::Phase::Overtwist;
    }
    return rows;
}

}  // namespace tsa::simulation
