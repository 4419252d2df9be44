#include "tsa/hysteresis.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include <Eigen/Dense>
#include <fmt/format.h>

#include "tsa/nnls.hpp"

namespace tsa::hysteresis {

PlayOperator::PlayOperator(double threshold, double initial_state)
    : threshold_(threshold), state_(initial_state) {
    if (!(threshold >= 0.0)) {
        throw std::invalid_argument("play threshold must be non-negative");
    }
}

double PlayOperator::update(double input) {
    state_ = std::max(input - threshold_, std::min(input + threshold_, state_));
    return state_;
}

PIModel::PIModel(std::vector<double> thresholds, std::vector<double> weights)
    : thresholds_(std::move(thresholds)), weights_(std::move(weights)) {
    if (thresholds_.empty() || thresholds_.size() != weights_.size()) {
        throw std::invalid_argument("PI model needs equally many thresholds and weights");
    }
    if (thresholds_.front() != 0.0) {
        throw std::invalid_argument("first PI threshold must be 0");
    }
    for (std::size_t i = 1; i < thresholds_.size(); ++i) {
        if (!(thresholds_[i] > thresholds_[i - 1])) {
            throw std::invalid_argument("PI thresholds must be strictly ascending");
        }
    }
    for (double w : weights_) {
        if (!(w >= 0.0)) throw std::invalid_argument("PI weights must be non-negative");
    }
    operators_.reserve(thresholds_.size());
    for (double r : thresholds_) operators_.emplace_back(r);
}

std::vector<double> PIModel::uniform_thresholds(double input_range, std::size_t count) {
    if (count == 0 || !(input_range > 0.0)) {
        throw std::invalid_argument("threshold grid needs a positive range and count");
    }
    std::vector<double> out(count);
    for (std::size_t i = 0; i < count; ++i) {
        out[i] = input_range * static_cast<double>(i) / static_cast<double>(count);
    }
    return out;
}

double PIModel::step(double input) {
    double y = 0.0;
    for (std::size_t i = 0; i < operators_.size(); ++i) {
        y += weights_[i] * operators_[i].update(input);
    }
    return y;
}

std::vector<double> PIModel::apply(std::span<const double> input) const {
    PIModel copy = *this;
    std::vector<double> out;
    out.reserve(input.size());
    for (double x : input) out.push_back(copy.step(x));
    return out;
}

void PIModel::reset() {
    for (std::size_t i = 0; i < operators_.size(); ++i) {
        operators_[i] = PlayOperator(thresholds_[i]);
    }
}

std::vector<double> PIModel::states() const {
    std::vector<double> out;
    out.reserve(operators_.size());
    for (const auto& op : operators_) out.push_back(op.state());
    return out;
}

std::vector<double> pi_apply(const PIModel& model, std::span<const double> input) {
    PIModel fresh = model;
    fresh.reset();
    return fresh.apply(input);
}

namespace {

// Column i holds the zero-state play response for threshold i.
Eigen::MatrixXd play_responses(std::span<const double> inputs, std::span<const double> thresholds) {
    Eigen::MatrixXd a(static_cast<Eigen::Index>(inputs.size()),
                      static_cast<Eigen::Index>(thresholds.size()));
    for (std::size_t i = 0; i < thresholds.size(); ++i) {
        PlayOperator op(thresholds[i]);
        for (std::size_t k = 0; k < inputs.size(); ++k) {
            a(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(i)) = op.update(inputs[k]);
        }
    }
    return a;
}

void check_sample_count(std::size_t samples, std::size_t thresholds) {
    if (samples < 4 * thresholds) {
        throw std::invalid_argument(fmt::format(
            "underdetermined PI identification: {} samples for {} thresholds (need >= {})",
            samples, thresholds, 4 * thresholds));
    }
}

}  // namespace

Identification pi_identify(std::span<const double> inputs, std::span<const double> targets,
                           std::span<const double> thresholds) {
    if (inputs.size() != targets.size()) {
        throw std::invalid_argument("inputs and targets differ in length");
    }
    std::vector<double> grid(thresholds.begin(), thresholds.end());
    // Validates the grid before any work is done.
    PIModel probe(grid, std::vector<double>(grid.size(), 0.0));
    check_sample_count(inputs.size(), grid.size());

    const Eigen::MatrixXd a = play_responses(inputs, grid);
    const Eigen::VectorXd b = Eigen::Map<const Eigen::VectorXd>(
        targets.data(), static_cast<Eigen::Index>(targets.size()));
    const auto rank = static_cast<std::size_t>(a.colPivHouseholderQr().rank());
    const NnlsResult fit = nnls(a, b);

    std::vector<double> weights(fit.x.data(), fit.x.data() + fit.x.size());
    return Identification{PIModel(std::move(grid), std::move(weights)), fit.residual, rank,
                          rank < thresholds.size()};
}

std::vector<double> hysteretic_length(const core::StringSpec& spec,
                                      const core::TwoPhaseParams& params,
                                      const core::LoadCase& load, const PIModel& model,
                                      std::span<const double> theta_sequence) {
    const double l_eff = core::effective_length(spec, params, load);
    PIModel memory = model;
    memory.reset();
    const auto& weights = model.weights();
    const bool null_model = std::all_of(weights.begin(), weights.end(),
                                        [](double w) { return w == 0.0; });

    std::vector<double> out;
    out.reserve(theta_sequence.size());
    std::vector<double> states;
    for (double theta : theta_sequence) {
        const double backbone = core::length(spec, params, load, theta);
        memory.step(theta);
        if (null_model) {
            out.push_back(backbone);
            continue;
        }
        states = memory.states();
        double correction = 0.0;
        for (std::size_t i = 0; i < states.size(); ++i) {
            correction += weights[i] * (theta - states[i]);
        }
        const double floor = l_eff * 1e-9;
        out.push_back(std::clamp(backbone + correction, floor, l_eff));
    }
    return out;
}

Identification identify_length_correction(const core::StringSpec& spec,
                                          const core::TwoPhaseParams& params,
                                          const core::LoadCase& load,
                                          std::span<const double> theta_sequence,
                                          std::span<const double> lengths,
                                          std::span<const double> thresholds) {
    if (theta_sequence.size() != lengths.size()) {
        throw std::invalid_argument("theta and length sequences differ in length");
    }
    std::vector<double> grid(thresholds.begin(), thresholds.end());
    PIModel probe(grid, std::vector<double>(grid.size(), 0.0));
    check_sample_count(theta_sequence.size(), grid.size());

    const auto n = static_cast<Eigen::Index>(theta_sequence.size());
    const auto m = static_cast<Eigen::Index>(grid.size());
    const Eigen::MatrixXd play = play_responses(theta_sequence, grid);
    // The zero threshold column is identically zero and is left out.
    Eigen::MatrixXd a(n, m - 1);
    Eigen::VectorXd b(n);
    for (Eigen::Index k = 0; k < n; ++k) {
        const double theta = theta_sequence[static_cast<std::size_t>(k)];
        for (Eigen::Index i = 1; i < m; ++i) a(k, i - 1) = theta - play(k, i);
        b(k) = lengths[static_cast<std::size_t>(k)] - core::length(spec, params, load, theta);
    }

    std::vector<double> weights(grid.size(), 0.0);
    double residual = b.squaredNorm();
    std::size_t rank = 0;
    if (m > 1) {
        rank = static_cast<std::size_t>(a.colPivHouseholderQr().rank());
        const NnlsResult fit = nnls(a, b);
        for (Eigen::Index i = 1; i < m; ++i) weights[static_cast<std::size_t>(i)] = fit.x(i - 1);
        residual = fit.residual;
    }
    return Identification{PIModel(std::move(grid), std::move(weights)), residual, rank,
                          rank + 1 < thresholds.size()};
}

}  // namespace tsa::hysteresis
