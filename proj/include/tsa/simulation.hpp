// Batch simulation over a motor-angle profile.
#pragma once

#include <optional>
#include <span>
#include <vector>

#include "tsa/core_model.hpp"
#include "tsa/creep.hpp"
#include "tsa/hysteresis.hpp"
#include "tsa/training.hpp"

namespace tsa::simulation {

struct ProfileSample {
    double time_s = 0.0;
    double theta_rev = 0.0;
    double cycle = 0.0;  ///< cycle index (fractional for generated profiles)
};

enum class ProfileKind { Triangle, Ramp };

struct ProfileSpec {
    ProfileKind kind = ProfileKind::Triangle;
    double start_rev = 0.0;
    double peak_rev = 1.0;
    double period_s = 10.0;
    int cycles = 1;
    int samples_per_cycle = 200;
};

/// Triangle: start -> peak -> start each period. Ramp: start -> peak once.
[[nodiscard]] std::vector<ProfileSample> generate_profile(const ProfileSpec& spec);

/// Cycle index for a recorded angle trace: the number of completed
/// untwist-to-twist reversals before each sample.
[[nodiscard]] std::vector<double> count_cycles(std::span<const double> theta_rev);

struct Setup {
    core::StringSpec spec;
    core::TwoPhaseParams params;
    core::LoadCase load;
    std::optional<hysteresis::PIModel> hysteresis;
    std::optional<training::TrainingState> training;
    /// Creep of the length baseline over cycles (lifetime runs).
    std::optional<SaturatingCreep> length_creep;
};

struct Row {
    double time_s = 0.0;
    double theta_rev = 0.0;
    double length_mm = 0.0;
    double strain_pct = 0.0;  ///< against the loaded zero-twist length
    double speed_mm_s = 0.0;
    double torque_Nm = 0.0;
    double coil_count = 0.0;
    core::Phase phase = core::Phase::Regular;
};

/// Throws TrainingGateError when a stiff string is driven into the
/// overtwist phase without being able to form uniform coils.
[[nodiscard]] std::vector<Row> simulate(const Setup& setup, std::span<const ProfileSample> profile);

/// Gate check on its own; the message names the training requirement.
void check_training_gate(const Setup& setup, double max_theta_rad);

}  // namespace tsa::simulation
