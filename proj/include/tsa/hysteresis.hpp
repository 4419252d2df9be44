// Rate-independent Prandtl-Ishlinskii hysteresis built from play operators.
#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "tsa/core_model.hpp"

namespace tsa::hysteresis {

/// Backlash element: y = max(x - r, min(x + r, y_prev)).
class PlayOperator {
public:
    explicit PlayOperator(double threshold, double initial_state = 0.0);

    double update(double input);

    [[nodiscard]] double threshold() const { return threshold_; }
    [[nodiscard]] double state() const { return state_; }

private:
    double threshold_;
    double state_;
};

/// Weighted superposition of play operators. Thresholds are strictly
/// ascending and start at 0; weights are non-negative. An all-zero weight
/// vector is accepted and describes the null correction.
class PIModel {
public:
    PIModel(std::vector<double> thresholds, std::vector<double> weights);

    /// `count` thresholds uniformly spaced on [0, input_range).
    static std::vector<double> uniform_thresholds(double input_range, std::size_t count = 8);

    /// Advances the operator memory by one input sample.
    double step(double input);

    /// Runs a sequence from the current memory without modifying it.
    [[nodiscard]] std::vector<double> apply(std::span<const double> input) const;

    void reset();

    [[nodiscard]] const std::vector<double>& thresholds() const { return thresholds_; }
    [[nodiscard]] const std::vector<double>& weights() const { return weights_; }
    [[nodiscard]] std::vector<double> states() const;

private:
    std::vector<double> thresholds_;
    std::vector<double> weights_;
    std::vector<PlayOperator> operators_;
};

/// Output of a fresh (zero-state) model over `input`.
[[nodiscard]] std::vector<double> pi_apply(const PIModel& model, std::span<const double> input);

struct Identification {
    PIModel model;
    double residual = 0.0;  ///< sum of squared errors at the optimum
    std::size_t rank = 0;
    bool rank_deficient = false;
};

/// Non-negative least-squares fit of PI weights so that the model output
/// tracks `targets`. Requires at least 4 samples per threshold.
[[nodiscard]] Identification pi_identify(std::span<const double> inputs,
                                         std::span<const double> targets,
                                         std::span<const double> thresholds);

/// Backbone length plus the play-operator correction sum_i w_i (theta - play_i(theta)),
/// clamped to (0, L_eff]. Weights are in mm/rad and thresholds in rad.
[[nodiscard]] std::vector<double> hysteretic_length(const core::StringSpec& spec,
                                                    const core::TwoPhaseParams& params,
                                                    const core::LoadCase& load,
                                                    const PIModel& model,
                                                    std::span<const double> theta_sequence);

/// Fits the length correction of `hysteretic_length` to observed lengths.
/// The zero threshold carries no correction and gets weight 0.
[[nodiscard]] Identification identify_length_correction(const core::StringSpec& spec,
                                                        const core::TwoPhaseParams& params,
                                                        const core::LoadCase& load,
                                                        std::span<const double> theta_sequence,
                                                        std::span<const double> lengths,
                                                        std::span<const double> thresholds);

}  // namespace tsa::hysteresis
