// Batch command-line front end. Each command writes its data (CSV or
// value) to --out or stdout, and its human-readable report to stdout when
// the data went to a file, otherwise to stderr.
#pragma once

#include <cstdint>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "tsa/bicep.hpp"
#include "tsa/calibration.hpp"
#include "tsa/config.hpp"
#include "tsa/hysteresis.hpp"
#include "tsa/sensing.hpp"
#include "tsa/simulation.hpp"
#include "tsa/training.hpp"

namespace tsa::cli {

enum ExitCode : int {
    kSuccess = 0,
    kInputError = 2,
    kNonConvergence = 3,
    kGateViolation = 4,
};

struct CommonOptions {
    std::optional<std::string> config;
    std::optional<std::uint64_t> seed;  ///< overrides [run] seed
    std::optional<std::string> out;
};

[[nodiscard]] const config::Schema& run_config_schema();

struct LabeledObservation {
    std::string label;
    calibration::ObservedEndpoints endpoints;
};

/// Reads the observation CSV. Throws InputError with line numbers.
[[nodiscard]] std::vector<LabeledObservation> read_observations(const std::string& path);

struct CalibrationOutcome {
    std::string label;
    calibration::ObservedEndpoints endpoints;
    calibration::FitResult fit;
    calibration::Predictions predictions;
};

/// Fits every observation with default bounds.
[[nodiscard]] std::vector<CalibrationOutcome> calibrate_all(
    const std::vector<LabeledObservation>& observations, const calibration::FitOptions& options);

/// Writes the fitted-parameter CSV consumed by `[model] fitted_params`.
void write_fitted_params(std::ostream& out, const std::vector<CalibrationOutcome>& outcomes);

// Configuration blocks.
[[nodiscard]] core::StringSpec read_string_spec(const config::Config& cfg);
[[nodiscard]] core::LoadCase read_load(const config::Config& cfg);
[[nodiscard]] std::optional<calibration::ObservedEndpoints> read_calibration_block(
    const config::Config& cfg, const core::StringSpec& spec, const core::LoadCase& load);
[[nodiscard]] calibration::FitOptions read_fit_options(const config::Config& cfg,
                                                       const CommonOptions& options);
/// Explicit [model], a fitted-parameter file, or a fit of [calibration].
[[nodiscard]] core::TwoPhaseParams resolve_model(const config::Config& cfg,
                                                 const core::StringSpec& spec,
                                                 const core::LoadCase& load,
                                                 const CommonOptions& options,
                                                 std::ostream& report, bool* converged);
[[nodiscard]] std::optional<hysteresis::PIModel> read_hysteresis(const config::Config& cfg,
                                                                 double default_range_rev);
[[nodiscard]] sensing::ResistanceParams read_sensing(const config::Config& cfg);
[[nodiscard]] training::TrainingState read_training(const config::Config& cfg);
[[nodiscard]] simulation::ProfileSpec read_profile(const config::Config& cfg);

int cmd_calibrate(const CommonOptions& options, const std::string& observations_path,
                  std::ostream& out, std::ostream& err);
int cmd_simulate(const CommonOptions& options, const std::optional<std::string>& profile_path,
                 std::ostream& out, std::ostream& err);
int cmd_size(double required_mm, double contraction_pct, std::ostream& out, std::ostream& err);
int cmd_train(const CommonOptions& options, int cycles, std::ostream& out, std::ostream& err);
int cmd_bicep(const CommonOptions& options, std::ostream& out, std::ostream& err);
int cmd_sense(const CommonOptions& options, const std::string& log_path, std::ostream& out,
              std::ostream& err);

/// Parses argv and dispatches to a command.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace tsa::cli
