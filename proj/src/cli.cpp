#include "tsa/cli.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <functional>
#include <limits>
#include <memory>

#include <CLI11.hpp>
#include <fmt/format.h>

#include "tsa/csv.hpp"
#include "tsa/errors.hpp"

namespace tsa::cli {

namespace {

using csv::exact;
using csv::fixed;

const std::set<std::string, std::less<>> kObservationRequired = {
    "diameter_mm",   "initial_length_mm",       "load_g",
    "theta_max_rev", "contraction_regular_pct", "contraction_total_pct"};

const std::set<std::string, std::less<>> kObservationAllowed = {
    "label",
    "diameter_mm",
    "initial_length_mm",
    "material",
    "ply",
    "bundle_regular_mm",
    "bundle_overtwist_mm",
    "load_g",
    "theta_max_rev",
    "contraction_regular_pct",
    "contraction_total_pct",
    "max_speed_regular_mm_s",
    "max_speed_overtwist_mm_s",
    "max_torque_regular_Nm",
    "max_torque_overtwist_Nm",
    "motor_speed_rev_s"};

const std::vector<std::string> kFittedColumns = {
    "label",    "r_eff_mm",   "theta_star_rev",          "coil_diameter_mm",
    "coil_pitch_mm", "eta",   "compliance_mm_per_N",     "residual",
    "iterations",    "converged", "contraction_regular_pct", "contraction_total_pct",
    "torque_regular_Nm", "torque_overtwist_Nm"};

core::Material parse_material(const std::string& value, const std::string& where) {
    if (value == "stiff") return core::Material::Stiff;
    if (value == "compliant") return core::Material::Compliant;
    throw InputError(fmt::format("{}: material must be 'stiff' or 'compliant', got '{}'", where, value));
}

std::string_view phase_name(core::Phase phase) {
    return phase == core::Phase::Regular ? "regular" : "overtwist";
}

// Data goes to the file when one is named, otherwise to `out`. The report
// goes wherever the data does not.
class Sinks {
public:
    Sinks(const std::optional<std::string>& path, std::ostream& out, std::ostream& err) {
        if (path) {
            file_ = std::make_unique<std::ofstream>(*path, std::ios::binary | std::ios::trunc);
            if (!*file_) throw InputError(fmt::format("{}: cannot open output file", *path));
            data_ = file_.get();
            report_ = &out;
        } else {
            data_ = &out;
            report_ = &err;
        }
    }
    std::ostream& data() { return *data_; }
    std::ostream& report() { return *report_; }

private:
    std::unique_ptr<std::ofstream> file_;
    std::ostream* data_ = nullptr;
    std::ostream* report_ = nullptr;
};

std::optional<std::string> output_path(const CommonOptions& options,
                                       const std::optional<config::Config>& cfg) {
    if (options.out) return options.out;
    if (cfg) return cfg->text("output", "path");
    return std::nullopt;
}

config::Config require_config(const CommonOptions& options, std::string_view command) {
    if (!options.config) {
        throw InputError(fmt::format("{}: --config PATH is required", command));
    }
    return config::Config::load(*options.config, run_config_schema());
}

std::optional<config::Config> optional_config(const CommonOptions& options) {
    if (!options.config) return std::nullopt;
    return config::Config::load(*options.config, run_config_schema());
}

// Maps exceptions onto the documented exit codes.
int guarded(std::ostream& err, const std::function<int()>& body) {
    try {
        return body();
    } catch (const TrainingGateError& e) {
        err << "error: " << e.what() << '\n';
        return kGateViolation;
    } catch (const ModelDomainError& e) {
        err << "error: " << e.what() << '\n';
        return kInputError;
    } catch (const InputError& e) {
        err << "error: " << e.what() << '\n';
        return kInputError;
    } catch (const std::invalid_argument& e) {
        err << "error: " << e.what() << '\n';
        return kInputError;
    } catch (const std::domain_error& e) {
        err << "error: " << e.what() << '\n';
        return kInputError;
    }
}

struct ExperimentLog {
    std::vector<double> time_s;
    std::vector<double> theta_rev;
    std::vector<double> resistance_ohm;
};

ExperimentLog read_experiment_log(const std::string& path, bool need_resistance) {
    std::set<std::string, std::less<>> required = {"time_s", "theta_rev"};
    if (need_resistance) required.insert("resistance_ohm");
    const auto table = csv::Table::load(
        path, required, {"time_s", "theta_rev", "length_mm", "force_N", "resistance_ohm"});
    if (table.rows().empty()) throw InputError(fmt::format("{}: no samples", path));
    ExperimentLog log;
    for (const csv::Row& row : table.rows()) {
        const double t = table.require_number(row, "time_s");
        if (!log.time_s.empty() && !(t > log.time_s.back())) {
            throw InputError(fmt::format("{}:{}: time must be strictly increasing", path, row.line));
        }
        log.time_s.push_back(t);
        log.theta_rev.push_back(table.require_number(row, "theta_rev"));
        if (need_resistance) log.resistance_ohm.push_back(table.require_number(row, "resistance_ohm"));
    }
    return log;
}

void report_outcome(std::ostream& report, const CalibrationOutcome& o) {
    const auto& p = o.predictions;
    const auto& e = o.endpoints;
    report << fmt::format("[{}] residual {:.3e}, {} iterations, {}\n", o.label, o.fit.residual,
                          o.fit.iterations, o.fit.converged ? "converged" : "NOT converged");
    auto line = [&](std::string_view name, double model, double target, std::string_view unit) {
        report << fmt::format("  {:<26} target {:>10.4f}  model {:>10.4f}  diff {:+.4f} {}\n", name,
                              target, model, model - target, unit);
    };
    line("contraction_regular_pct", p.contraction_regular_pct, e.contraction_regular_pct, "pp");
    line("contraction_total_pct", p.contraction_total_pct, e.contraction_total_pct, "pp");
    if (e.max_torque_regular_Nm) line("max_torque_regular_Nm", p.torque_regular_Nm, *e.max_torque_regular_Nm, "N*m");
    if (e.max_torque_overtwist_Nm) {
        line("max_torque_overtwist_Nm", p.torque_overtwist_Nm, *e.max_torque_overtwist_Nm, "N*m");
    }
    if (e.max_speed_regular_mm_s && p.speed_regular_mm_s) {
        line("max_speed_regular_mm_s", *p.speed_regular_mm_s, *e.max_speed_regular_mm_s, "mm/s");
    }
    if (e.max_speed_overtwist_mm_s && p.speed_overtwist_mm_s) {
        line("max_speed_overtwist_mm_s", *p.speed_overtwist_mm_s, *e.max_speed_overtwist_mm_s, "mm/s");
    }
}

core::TwoPhaseParams read_fitted_params(const std::string& path, const std::optional<std::string>& label) {
    const auto table = csv::Table::load(path, {"r_eff_mm", "theta_star_rev", "coil_diameter_mm",
                                               "coil_pitch_mm", "eta", "compliance_mm_per_N"});
    const csv::Row* chosen = nullptr;
    for (const csv::Row& row : table.rows()) {
        if (!label || table.text(row, "label") == label) {
            if (chosen && !label) {
                throw InputError(fmt::format("{}: several fitted rows; set [model] fitted_label", path));
            }
            chosen = &row;
            if (label) break;
        }
    }
    if (!chosen) {
        throw InputError(fmt::format("{}: no fitted row{}", path,
                                     label ? fmt::format(" labelled '{}'", *label) : ""));
    }
    core::TwoPhaseParams p;
    p.r_eff_mm = table.require_number(*chosen, "r_eff_mm");
    p.theta_star_rad = core::rev_to_rad(table.require_number(*chosen, "theta_star_rev"));
    p.coil_diameter_mm = table.require_number(*chosen, "coil_diameter_mm");
    p.coil_pitch_mm = table.require_number(*chosen, "coil_pitch_mm");
    p.eta = table.require_number(*chosen, "eta");
    p.compliance_mm_per_N = table.require_number(*chosen, "compliance_mm_per_N");
    return p;
}

}  // namespace

const config::Schema& run_config_schema() {
    static const config::Schema schema = {
        {"string", {"diameter_mm", "initial_length_mm", "material", "ply", "bundle_regular_mm",
                    "bundle_overtwist_mm"}},
        {"load", {"mass_g"}},
        {"model", {"r_eff_mm", "theta_star_rev", "coil_diameter_mm", "coil_pitch_mm", "eta",
                   "compliance_mm_per_N", "fitted_params", "fitted_label"}},
        {"calibration", {"theta_max_rev", "contraction_regular_pct", "contraction_total_pct",
                         "max_speed_regular_mm_s", "max_speed_overtwist_mm_s",
                         "max_torque_regular_Nm", "max_torque_overtwist_Nm", "motor_speed_rev_s",
                         "starts", "max_iterations", "threads"}},
        {"hysteresis", {"preset", "range_rev", "thresholds_rev", "weights_mm_per_rad"}},
        {"sensing", {"r0_ohm", "sensitivity_ohm_per_pct", "tau_transient_s",
                     "transient_gain_ohm_per_pct", "creep_rate_ohm_per_cycle",
                     "creep_saturation_ohm"}},
        {"training", {"cycles_done", "trained_load_g", "thresholds", "shortening_pct"}},
        {"bicep", {"a_mm", "b_mm", "gamma_deg", "pair_lengths_mm", "pair_angles_deg", "payload_g",
                   "forearm_length_mm", "theta_max_rev", "samples"}},
        {"profile", {"kind", "start_rev", "peak_rev", "period_s", "cycles", "samples_per_cycle"}},
        {"lifetime", {"creep_saturation_mm", "creep_rate_mm_per_cycle", "saturation_horizon_cycles"}},
        {"output", {"path"}},
        {"run", {"seed"}},
    };
    return schema;
}

std::vector<LabeledObservation> read_observations(const std::string& path) {
    const auto table = csv::Table::load(path, kObservationRequired, kObservationAllowed);
    std::vector<LabeledObservation> out;
    for (const csv::Row& row : table.rows()) {
        LabeledObservation o;
        o.label = table.text(row, "label").value_or(fmt::format("row{}", out.size() + 1));
        auto& e = o.endpoints;
        const std::string where = fmt::format("{}:{}", path, row.line);
        e.spec.diameter_mm = table.require_number(row, "diameter_mm");
        e.spec.initial_length_mm = table.require_number(row, "initial_length_mm");
        e.spec.material = parse_material(table.text(row, "material").value_or("stiff"), where);
        e.spec.ply = static_cast<int>(table.number(row, "ply").value_or(1.0));
        e.spec.bundle_regular_mm = table.number(row, "bundle_regular_mm");
        e.spec.bundle_overtwist_mm = table.number(row, "bundle_overtwist_mm");
        e.load.mass_g = table.require_number(row, "load_g");
        e.theta_max_rev = table.require_number(row, "theta_max_rev");
        e.contraction_regular_pct = table.require_number(row, "contraction_regular_pct");
        e.contraction_total_pct = table.require_number(row, "contraction_total_pct");
        e.max_speed_regular_mm_s = table.number(row, "max_speed_regular_mm_s");
        e.max_speed_overtwist_mm_s = table.number(row, "max_speed_overtwist_mm_s");
        e.max_torque_regular_Nm = table.number(row, "max_torque_regular_Nm");
        e.max_torque_overtwist_Nm = table.number(row, "max_torque_overtwist_Nm");
        e.motor_speed_rev_s = table.number(row, "motor_speed_rev_s");
        try {
            e.validate();
        } catch (const std::invalid_argument& ex) {
            throw InputError(fmt::format("{}: {}", where, ex.what()));
        }
        out.push_back(std::move(o));
    }
    return out;
}

std::vector<CalibrationOutcome> calibrate_all(const std::vector<LabeledObservation>& observations,
                                              const calibration::FitOptions& options) {
    std::vector<CalibrationOutcome> out;
    out.reserve(observations.size());
    for (const auto& o : observations) {
        const auto bounds = calibration::ParamBounds::defaults_for(o.endpoints);
        CalibrationOutcome c;
        c.label = o.label;
        c.endpoints = o.endpoints;
        c.fit = calibration::fit_two_phase(o.endpoints, bounds, options);
        if (c.fit.residual < calibration::kInfeasiblePenalty) {
            c.predictions = calibration::predict(c.fit.params, o.endpoints);
        } else {
            const double nan = std::numeric_limits<double>::quiet_NaN();
            c.predictions = calibration::Predictions{};
            c.predictions.contraction_regular_pct = nan;
            c.predictions.contraction_total_pct = nan;
            c.predictions.torque_regular_Nm = nan;
            c.predictions.torque_overtwist_Nm = nan;
        }
        out.push_back(std::move(c));
    }
    return out;
}

void write_fitted_params(std::ostream& out, const std::vector<CalibrationOutcome>& outcomes) {
    csv::write_row(out, kFittedColumns);
    for (const auto& o : outcomes) {
        const auto& p = o.fit.params;
        csv::write_row(out, {o.label, exact(p.r_eff_mm), exact(core::rad_to_rev(p.theta_star_rad)),
                             exact(p.coil_diameter_mm), exact(p.coil_pitch_mm), exact(p.eta),
                             exact(p.compliance_mm_per_N), exact(o.fit.residual),
                             std::to_string(o.fit.iterations), o.fit.converged ? "1" : "0",
                             fixed(o.predictions.contraction_regular_pct),
                             fixed(o.predictions.contraction_total_pct),
                             fixed(o.predictions.torque_regular_Nm),
                             fixed(o.predictions.torque_overtwist_Nm)});
    }
}

core::StringSpec read_string_spec(const config::Config& cfg) {
    if (!cfg.has_section("string")) {
        throw InputError(fmt::format("{}: missing [string] section", cfg.source()));
    }
    core::StringSpec spec;
    spec.diameter_mm = cfg.require_number("string", "diameter_mm");
    spec.initial_length_mm = cfg.require_number("string", "initial_length_mm");
    spec.material = parse_material(cfg.text("string", "material").value_or("stiff"), cfg.source());
    spec.ply = static_cast<int>(cfg.integer("string", "ply").value_or(1));
    spec.bundle_regular_mm = cfg.number("string", "bundle_regular_mm");
    spec.bundle_overtwist_mm = cfg.number("string", "bundle_overtwist_mm");
    spec.validate();
    return spec;
}

core::LoadCase read_load(const config::Config& cfg) {
    core::LoadCase load{cfg.number("load", "mass_g").value_or(0.0)};
    if (!(load.mass_g >= 0.0)) throw InputError(fmt::format("{}: load mass must be >= 0", cfg.source()));
    return load;
}

std::optional<calibration::ObservedEndpoints> read_calibration_block(const config::Config& cfg,
                                                                     const core::StringSpec& spec,
                                                                     const core::LoadCase& load) {
    if (!cfg.has("calibration", "contraction_total_pct")) return std::nullopt;
    calibration::ObservedEndpoints e;
    e.spec = spec;
    e.load = load;
    e.theta_max_rev = cfg.require_number("calibration", "theta_max_rev");
    e.contraction_regular_pct = cfg.require_number("calibration", "contraction_regular_pct");
    e.contraction_total_pct = cfg.require_number("calibration", "contraction_total_pct");
    e.max_speed_regular_mm_s = cfg.number("calibration", "max_speed_regular_mm_s");
    e.max_speed_overtwist_mm_s = cfg.number("calibration", "max_speed_overtwist_mm_s");
    e.max_torque_regular_Nm = cfg.number("calibration", "max_torque_regular_Nm");
    e.max_torque_overtwist_Nm = cfg.number("calibration", "max_torque_overtwist_Nm");
    e.motor_speed_rev_s = cfg.number("calibration", "motor_speed_rev_s");
    e.validate();
    return e;
}

calibration::FitOptions read_fit_options(const config::Config& cfg, const CommonOptions& options) {
    calibration::FitOptions fit;
    fit.seed = options.seed.value_or(static_cast<std::uint64_t>(cfg.integer("run", "seed").value_or(0)));
    fit.starts = static_cast<int>(cfg.integer("calibration", "starts").value_or(fit.starts));
    fit.max_iterations =
        static_cast<int>(cfg.integer("calibration", "max_iterations").value_or(fit.max_iterations));
    fit.threads = static_cast<unsigned>(cfg.integer("calibration", "threads").value_or(1));
    if (fit.starts < 1 || fit.max_iterations < 1 || fit.threads < 1) {
        throw InputError(fmt::format("{}: starts, max_iterations and threads must be >= 1", cfg.source()));
    }
    return fit;
}

core::TwoPhaseParams resolve_model(const config::Config& cfg, const core::StringSpec& spec,
                                   const core::LoadCase& load, const CommonOptions& options,
                                   std::ostream& report, bool* converged) {
    if (converged) *converged = true;
    if (const auto path = cfg.path("model", "fitted_params")) {
        auto p = read_fitted_params(*path, cfg.text("model", "fitted_label"));
        core::validate(spec, p);
        return p;
    }
    if (cfg.has("model", "r_eff_mm")) {
        core::TwoPhaseParams p;
        p.r_eff_mm = cfg.require_number("model", "r_eff_mm");
        p.theta_star_rad = core::rev_to_rad(cfg.require_number("model", "theta_star_rev"));
        p.coil_diameter_mm = cfg.require_number("model", "coil_diameter_mm");
        p.coil_pitch_mm = cfg.number("model", "coil_pitch_mm")
                              .value_or(core::bundle_diameter(spec, core::Phase::Regular));
        p.eta = cfg.number("model", "eta").value_or(1.0);
        p.compliance_mm_per_N = cfg.number("model", "compliance_mm_per_N").value_or(0.0);
        core::validate(spec, p);
        return p;
    }
    const auto endpoints = read_calibration_block(cfg, spec, load);
    if (!endpoints) {
        throw InputError(fmt::format(
            "{}: no model parameters: give [model] values, [model] fitted_params, or [calibration] endpoints",
            cfg.source()));
    }
    const auto fit = calibration::fit_two_phase(
        *endpoints, calibration::ParamBounds::defaults_for(*endpoints), read_fit_options(cfg, options));
    if (!(fit.residual < calibration::kInfeasiblePenalty)) {
        throw InputError(fmt::format("{}: no feasible model parameters reproduce the [calibration] endpoints",
                                     cfg.source()));
    }
    CalibrationOutcome outcome{"config", *endpoints, fit, calibration::predict(fit.params, *endpoints)};
    report_outcome(report, outcome);
    if (converged) *converged = fit.converged;
    return fit.params;
}

std::optional<hysteresis::PIModel> read_hysteresis(const config::Config& cfg, double default_range_rev) {
    if (!cfg.has_section("hysteresis")) return std::nullopt;
    const std::string preset = cfg.text("hysteresis", "preset").value_or("none");
    if (const auto weights = cfg.numbers("hysteresis", "weights_mm_per_rad")) {
        const auto thresholds_rev = cfg.numbers("hysteresis", "thresholds_rev");
        if (!thresholds_rev) {
            throw InputError(fmt::format("{}: [hysteresis] weights need thresholds_rev", cfg.source()));
        }
        std::vector<double> thresholds;
        for (double r : *thresholds_rev) thresholds.push_back(core::rev_to_rad(r));
        return hysteresis::PIModel(thresholds, *weights);
    }
    double per_threshold = 0.0;
    if (preset == "none") return std::nullopt;
    if (preset == "stiff") {
        per_threshold = 0.002;
    } else if (preset == "compliant") {
        per_threshold = 0.01;
    } else {
        throw InputError(fmt::format("{}: [hysteresis] preset must be none, stiff or compliant", cfg.source()));
    }
    const double range = cfg.number("hysteresis", "range_rev").value_or(default_range_rev);
    const auto thresholds = hysteresis::PIModel::uniform_thresholds(core::rev_to_rad(range));
    std::vector<double> weights(thresholds.size(), per_threshold);
    weights.front() = 0.0;
    return hysteresis::PIModel(thresholds, weights);
}

sensing::ResistanceParams read_sensing(const config::Config& cfg) {
    sensing::ResistanceParams p;
    p.r0_ohm = cfg.number("sensing", "r0_ohm").value_or(p.r0_ohm);
    p.sensitivity_ohm_per_pct = cfg.number("sensing", "sensitivity_ohm_per_pct").value_or(p.sensitivity_ohm_per_pct);
    p.tau_transient_s = cfg.number("sensing", "tau_transient_s").value_or(p.tau_transient_s);
    p.transient_gain_ohm_per_pct =
        cfg.number("sensing", "transient_gain_ohm_per_pct").value_or(p.transient_gain_ohm_per_pct);
    p.creep_rate_ohm_per_cycle = cfg.number("sensing", "creep_rate_ohm_per_cycle").value_or(p.creep_rate_ohm_per_cycle);
    p.creep_saturation_ohm = cfg.number("sensing", "creep_saturation_ohm").value_or(p.creep_saturation_ohm);
    p.validate();
    return p;
}

training::TrainingState read_training(const config::Config& cfg) {
    training::TrainingState state;
    if (const auto t = cfg.numbers("training", "thresholds")) {
        if (t->size() != 3) {
            throw InputError(fmt::format("{}: [training] thresholds needs three cycle counts", cfg.source()));
        }
        for (std::size_t i = 0; i < 3; ++i) state.thresholds[i] = static_cast<int>((*t)[i]);
    }
    state.cycles_done = static_cast<int>(cfg.integer("training", "cycles_done").value_or(0));
    if (state.cycles_done < 0) throw InputError(fmt::format("{}: cycles_done must be >= 0", cfg.source()));
    state.trained_load_g = cfg.number("training", "trained_load_g").value_or(0.0);
    state.stage = training::stage_of(state.cycles_done, state.thresholds);
    return state;
}

simulation::ProfileSpec read_profile(const config::Config& cfg) {
    if (!cfg.has_section("profile")) {
        throw InputError(fmt::format("{}: no profile file given and no [profile] section", cfg.source()));
    }
    simulation::ProfileSpec p;
    const std::string kind = cfg.text("profile", "kind").value_or("triangle");
    if (kind == "triangle") {
        p.kind = simulation::ProfileKind::Triangle;
    } else if (kind == "ramp") {
        p.kind = simulation::ProfileKind::Ramp;
    } else {
        throw InputError(fmt::format("{}: [profile] kind must be triangle or ramp", cfg.source()));
    }
    p.start_rev = cfg.number("profile", "start_rev").value_or(0.0);
    p.peak_rev = cfg.require_number("profile", "peak_rev");
    p.period_s = cfg.number("profile", "period_s").value_or(p.period_s);
    p.cycles = static_cast<int>(cfg.integer("profile", "cycles").value_or(p.cycles));
    p.samples_per_cycle = static_cast<int>(cfg.integer("profile", "samples_per_cycle").value_or(p.samples_per_cycle));
    return p;
}

int cmd_calibrate(const CommonOptions& options, const std::string& observations_path,
                  std::ostream& out, std::ostream& err) {
    return guarded(err, [&] {
        const auto cfg = optional_config(options);
        const auto observations = read_observations(observations_path);
        if (observations.empty()) {
            err << "error: " << observations_path << ": no observations\n";
            return static_cast<int>(kInputError);
        }
        calibration::FitOptions fit;
        if (cfg) {
            fit = read_fit_options(*cfg, options);
        } else if (options.seed) {
            fit.seed = *options.seed;
        }
        const auto outcomes = calibrate_all(observations, fit);
        Sinks sinks(output_path(options, cfg), out, err);
        write_fitted_params(sinks.data(), outcomes);
        bool all_converged = true;
        for (const auto& o : outcomes) {
            report_outcome(sinks.report(), o);
            all_converged = all_converged && o.fit.converged;
        }
        return static_cast<int>(all_converged ? kSuccess : kNonConvergence);
    });
}

int cmd_simulate(const CommonOptions& options, const std::optional<std::string>& profile_path,
                 std::ostream& out, std::ostream& err) {
    return guarded(err, [&] {
        const auto cfg = require_config(options, "simulate");
        simulation::Setup setup;
        setup.spec = read_string_spec(cfg);
        setup.load = read_load(cfg);

        std::vector<simulation::ProfileSample> profile;
        if (profile_path) {
            const auto log = read_experiment_log(*profile_path, false);
            const auto cycles = simulation::count_cycles(log.theta_rev);
            for (std::size_t k = 0; k < log.time_s.size(); ++k) {
                profile.push_back({log.time_s[k], log.theta_rev[k], cycles[k]});
            }
        } else {
            profile = simulation::generate_profile(read_profile(cfg));
        }
        double peak = 0.0;
        for (const auto& s : profile) peak = std::max(peak, s.theta_rev);

        Sinks sinks(output_path(options, cfg), out, err);
        bool converged = true;
        setup.params = resolve_model(cfg, setup.spec, setup.load, options, sinks.report(), &converged);
        if (cfg.has_section("training")) setup.training = read_training(cfg);
        setup.hysteresis = read_hysteresis(cfg, peak > 0.0 ? peak : 1.0);
        if (cfg.has_section("lifetime")) {
            const double saturation = cfg.require_number("lifetime", "creep_saturation_mm");
            if (const auto horizon = cfg.number("lifetime", "saturation_horizon_cycles")) {
                setup.length_creep = SaturatingCreep::reaching(saturation, *horizon);
            } else {
                setup.length_creep = SaturatingCreep{cfg.require_number("lifetime", "creep_rate_mm_per_cycle"), saturation};
            }
        }

        const auto rows = simulation::simulate(setup, profile);
        csv::write_row(sinks.data(), {"time_s", "theta_rev", "length_mm", "strain_pct", "speed_mm_s",
                                      "torque_Nm", "coil_count", "phase"});
        for (const auto& r : rows) {
            csv::write_row(sinks.data(), {fixed(r.time_s), fixed(r.theta_rev), fixed(r.length_mm),
                                          fixed(r.strain_pct), fixed(r.speed_mm_s), fixed(r.torque_Nm),
                                          fixed(r.coil_count), std::string(phase_name(r.phase))});
        }
        return static_cast<int>(converged ? kSuccess : kNonConvergence);
    });
}

int cmd_size(double required_mm, double contraction_pct, std::ostream& out, std::ostream& err) {
    return guarded(err, [&] {
        const double length = core::size_for_displacement(required_mm, contraction_pct / 100.0);
        out << fixed(length, 2) << '\n';
        return static_cast<int>(kSuccess);
    });
}

int cmd_train(const CommonOptions& options, int cycles, std::ostream& out, std::ostream& err) {
    return guarded(err, [&] {
        if (cycles < 0) throw InputError("train: cycle count must be >= 0");
        const auto cfg = require_config(options, "train");
        const auto spec = read_string_spec(cfg);
        const auto load = read_load(cfg);
        if (spec.material == core::Material::Compliant) {
            out << "training not required: compliant strings form uniform coils without training\n";
            return static_cast<int>(kSuccess);
        }
        training::TrainingState state = read_training(cfg);
        if (!cfg.has("training", "trained_load_g")) state.trained_load_g = load.mass_g;
        const double shortening = cfg.number("training", "shortening_pct").value_or(
                                      training::kDefaultShorteningFraction * 100.0) / 100.0;

        out << fmt::format("stage thresholds: {}, {}, {} cycles\n", state.thresholds[0],
                           state.thresholds[1], state.thresholds[2]);
        out << fmt::format("cycle {}: {}\n", state.cycles_done, training::to_string(state.stage));
        for (int i = 0; i < cycles; ++i) {
            const auto before = state.stage;
            state = training::advance_cycle(state);
            if (state.stage != before) {
                out << fmt::format("cycle {}: {}\n", state.cycles_done, training::to_string(state.stage));
            }
        }
        out << fmt::format("final stage: {} after {} cycles\n", training::to_string(state.stage),
                           state.cycles_done);
        const auto operating = training::operating_spec(spec, state, shortening);
        out << fmt::format("operating length: {} mm\n", fixed(operating.initial_length_mm, 2));
        out << fmt::format("uniform coiling available at {} g: {}\n", fixed(load.mass_g, 0),
                           training::coiling_available(spec, state, load) ? "yes" : "no");
        return static_cast<int>(kSuccess);
    });
}

int cmd_bicep(const CommonOptions& options, std::ostream& out, std::ostream& err) {
    return guarded(err, [&] {
        const auto cfg = require_config(options, "bicep");
        if (!cfg.has_section("bicep")) throw InputError(fmt::format("{}: missing [bicep] section", cfg.source()));
        bicep::BicepGeometry geom;
        geom.payload_g = cfg.number("bicep", "payload_g").value_or(geom.payload_g);
        geom.forearm_length_mm = cfg.number("bicep", "forearm_length_mm").value_or(geom.forearm_length_mm);

        Sinks sinks(output_path(options, cfg), out, err);
        auto& report = sinks.report();
        if (cfg.has("bicep", "a_mm")) {
            geom.a_mm = cfg.require_number("bicep", "a_mm");
            geom.b_mm = cfg.require_number("bicep", "b_mm");
            geom.gamma_deg = cfg.require_number("bicep", "gamma_deg");
            geom.validate();
        } else {
            const auto lengths = cfg.numbers("bicep", "pair_lengths_mm");
            const auto angles = cfg.numbers("bicep", "pair_angles_deg");
            if (!lengths || !angles || lengths->size() != 3 || angles->size() != 3) {
                throw InputError(fmt::format(
                    "{}: [bicep] needs a_mm/b_mm/gamma_deg or three pair_lengths_mm and pair_angles_deg",
                    cfg.source()));
            }
            std::array<bicep::AnglePair, 3> pairs{};
            for (std::size_t i = 0; i < 3; ++i) pairs[i] = {(*lengths)[i], (*angles)[i]};
            const auto fit = bicep::fit_bicep(pairs, geom);
            geom = fit.geometry;
            report << fmt::format("fitted geometry: a = {:.4f} mm, b = {:.4f} mm, gamma = {:.4f} deg\n",
                                  geom.a_mm, geom.b_mm, geom.gamma_deg);
            for (std::size_t i = 0; i < 3; ++i) {
                report << fmt::format("  length {:>8.2f} mm  observed {:>8.2f} deg  error {:+.3f} deg\n",
                                      pairs[i].length_mm, pairs[i].angle_deg, fit.errors_deg[i]);
            }
            report << fmt::format("residual {:.4f} deg^2, max error {:.3f} deg\n", fit.residual_deg2,
                                  fit.max_abs_error_deg);
            if (!fit.consistent) {
                report << fmt::format("INCONSISTENT: best geometry misses a pair by more than {} deg\n",
                                      bicep::kFitToleranceDeg);
            }
        }

        const auto spec = read_string_spec(cfg);
        const auto load = read_load(cfg);
        bool converged = true;
        const auto params = resolve_model(cfg, spec, load, options, report, &converged);
        const auto theta_max = cfg.number("bicep", "theta_max_rev")
                                   .value_or(cfg.require_number("calibration", "theta_max_rev"));
        const auto samples = cfg.integer("bicep", "samples").value_or(181);
        if (samples < 2) throw InputError(fmt::format("{}: [bicep] samples must be >= 2", cfg.source()));
        const auto points = bicep::sweep(geom, spec, params, load, theta_max, static_cast<std::size_t>(samples));
        csv::write_row(sinks.data(), {"theta_rev", "angle_deg", "tension_N"});
        for (const auto& p : points) {
            csv::write_row(sinks.data(), {fixed(p.theta_rev), fixed(p.angle_deg), fixed(p.tension_N)});
        }
        return static_cast<int>(converged ? kSuccess : kNonConvergence);
    });
}

int cmd_sense(const CommonOptions& options, const std::string& log_path, std::ostream& out,
              std::ostream& err) {
    return guarded(err, [&] {
        const auto cfg = require_config(options, "sense");
        const auto params = read_sensing(cfg);
        const auto log = read_experiment_log(log_path, true);
        const auto strain = sensing::estimate_strain(params, log.resistance_ohm, log.time_s);
        Sinks sinks(output_path(options, cfg), out, err);
        csv::write_row(sinks.data(), {"time_s", "resistance_ohm", "strain_est_pct"});
        for (std::size_t k = 0; k < strain.size(); ++k) {
            csv::write_row(sinks.data(), {fixed(log.time_s[k]), fixed(log.resistance_ohm[k]), fixed(strain[k])});
        }
        return static_cast<int>(kSuccess);
    });
}

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
    CLI::App app{"Two-phase twisted string actuator modeling toolkit", "tsa"};
    app.require_subcommand(1);

    CommonOptions common;
    std::string config_path;
    std::uint64_t seed = 0;
    std::string out_path;
    auto add_common = [&](CLI::App* sub, bool with_out) {
        sub->add_option("--config", config_path, "Run configuration file");
        sub->add_option("--seed", seed, "Seed for calibration start points (default 0)");
        if (with_out) sub->add_option("--out", out_path, "Output file (default stdout)");
    };

    std::string observations;
    auto* calibrate = app.add_subcommand("calibrate", "Fit two-phase parameters to endpoint observations");
    calibrate->add_option("observations", observations, "Observation CSV")->required();
    add_common(calibrate, true);

    std::string profile;
    auto* simulate = app.add_subcommand("simulate", "Simulate length, strain, speed and torque over a profile");
    simulate->add_option("profile", profile, "Motor-angle log CSV (time_s, theta_rev)");
    add_common(simulate, true);

    double required_mm = 0.0;
    double contraction_pct = 0.0;
    auto* size = app.add_subcommand("size", "Untwisted length for a displacement at a contraction");
    size->add_option("required_mm", required_mm, "Required displacement (mm)")->required();
    size->add_option("contraction_pct", contraction_pct, "Achievable contraction (%)")->required();

    int cycles = 0;
    auto* train = app.add_subcommand("train", "Run the training stage machine");
    train->add_option("cycles", cycles, "Training cycles to run")->required();
    add_common(train, false);

    auto* bicep_cmd = app.add_subcommand("bicep", "Fit the bicep geometry and sweep bending angle");
    add_common(bicep_cmd, true);

    std::string resistance_log;
    auto* sense = app.add_subcommand("sense", "Estimate strain from a resistance log");
    sense->add_option("log", resistance_log, "Resistance log CSV (time_s, theta_rev, resistance_ohm)")->required();
    add_common(sense, true);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        // Help requests print usage and succeed; everything else is bad input.
        return app.exit(e, out, err) == 0 ? static_cast<int>(kSuccess) : static_cast<int>(kInputError);
    }

    auto was_given = [](CLI::App* sub, const char* name) { return sub->count(name) > 0; };
    for (CLI::App* sub : app.get_subcommands()) {
        if (sub == size) continue;
        if (was_given(sub, "--config")) common.config = config_path;
        if (was_given(sub, "--seed")) common.seed = seed;
        if (sub->get_option_no_throw("--out") && was_given(sub, "--out")) common.out = out_path;
    }

    if (calibrate->parsed()) return cmd_calibrate(common, observations, out, err);
    if (simulate->parsed()) {
        return cmd_simulate(common, simulate->count("profile") ? std::optional(profile) : std::nullopt, out, err);
    }
    if (size->parsed()) return cmd_size(required_mm, contraction_pct, out, err);
    if (train->parsed()) return cmd_train(common, cycles, out, err);
    if (bicep_cmd->parsed()) return cmd_bicep(common, out, err);
    if (sense->parsed()) return cmd_sense(common, resistance_log, out, err);
    return kInputError;
}

}  // namespace tsa::cli
