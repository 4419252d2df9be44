#include "tsa/training.hpp"

#include <stdexcept>

#include <fmt/format.h>

#include "tsa/errors.hpp"

namespace tsa::training {

std::string_view to_string(Stage stage) {
    switch (stage) {
        case Stage::Perpendicular: return "Perpendicular";
        case Stage::Mixed: return "Mixed";
        case Stage::InlineUneven: return "InlineUneven";
        case Stage::Uniform: return "Uniform";
    }
    return "Unknown";
}

Stage stage_of(int cycles, const StageThresholds& thresholds) {
    if (!(thresholds[0] < thresholds[1] && thresholds[1] < thresholds[2])) {
        throw std::invalid_argument("training stage thresholds must be strictly ascending");
    }
    if (cycles >= thresholds[2]) return Stage::Uniform;
    if (cycles >= thresholds[1]) return Stage::InlineUneven;
    if (cycles >= thresholds[0]) return Stage::Mixed;
    return Stage::Perpendicular;
}

TrainingState advance_cycle(TrainingState state) {
    ++state.cycles_done;
    const Stage next = stage_of(state.cycles_done, state.thresholds);
    if (next > state.stage) state.stage = next;
    return state;
}

bool coiling_available(const core::StringSpec& spec, const TrainingState& state,
                       const core::LoadCase& load) {
    if (spec.material == core::Material::Compliant) return true;
    return state.stage == Stage::Uniform && load.mass_g >= state.trained_load_g;
}

core::StringSpec operating_spec(const core::StringSpec& spec, const TrainingState& state,
                                double shortening_fraction) {
    if (!(shortening_fraction >= 0.0 && shortening_fraction < 1.0)) {
        throw std::invalid_argument("training shortening must lie in [0, 1)");
    }
    core::StringSpec out = spec;
    if (spec.material == core::Material::Stiff && state.stage == Stage::Uniform) {
        out.initial_length_mm *= 1.0 - shortening_fraction;
    }
    return out;
}

double gated_length(const core::StringSpec& spec, const core::TwoPhaseParams& params,
                    const core::LoadCase& load, const TrainingState& state, double theta) {
    if (theta > params.theta_star_rad && !coiling_available(spec, state, load)) {
        throw TrainingGateError(fmt::format(
            "overtwisting a stiff string requires training to the Uniform stage and a load of at "
            "least the training load (stage {}, {} cycles, trained at {} g, load {} g)",
            to_string(state.stage), state.cycles_done, state.trained_load_g, load.mass_g));
    }
    return core::length(spec, params, load, theta);
}

}  // namespace tsa::training
