// Training protocol for stiff strings: repeated twist/untwist cycles at a
// minimum taut load until overtwisting forms uniform inline coils.
#pragma once

#include <array>
#include <string_view>

#include "tsa/core_model.hpp"

namespace tsa::training {

enum class Stage { Perpendicular, Mixed, InlineUneven, Uniform };

/// Cycle counts at which Mixed, InlineUneven and Uniform begin.
using StageThresholds = std::array<int, 3>;
inline constexpr StageThresholds kDefaultThresholds{6, 11, 50};
inline constexpr double kDefaultShorteningFraction = 0.02;

struct TrainingState {
    Stage stage = Stage::Perpendicular;
    int cycles_done = 0;
    double trained_load_g = 0.0;
    StageThresholds thresholds = kDefaultThresholds;
};

[[nodiscard]] std::string_view to_string(Stage stage);

[[nodiscard]] Stage stage_of(int cycles, const StageThresholds& thresholds = kDefaultThresholds);

[[nodiscard]] TrainingState advance_cycle(TrainingState state);

[[nodiscard]] bool coiling_available(const core::StringSpec& spec, const TrainingState& state,
                                     const core::LoadCase& load);

/// Operating string after training: the initial length is reduced once by
/// `shortening_fraction` when the stage reaches Uniform.
[[nodiscard]] core::StringSpec operating_spec(const core::StringSpec& spec,
                                              const TrainingState& state,
                                              double shortening_fraction = kDefaultShorteningFraction);

/// core::length behind the training gate: throws TrainingGateError when
/// theta lies in the overtwist phase and coiling is not available.
[[nodiscard]] double gated_length(const core::StringSpec& spec, const core::TwoPhaseParams& params,
                                  const core::LoadCase& load, const TrainingState& state,
                                  double theta);

}  // namespace tsa::training
