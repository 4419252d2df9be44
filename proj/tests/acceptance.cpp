// Acceptance run: one PASS/FAIL line per criterion, exit status 1 if any fail.
#include <algorithm>
#include <chrono>
#include <cmath>
#include <functional>
#include <iostream>
#include <limits>
#include <numbers>
#include <sstream>
#include <string>
#include <vector>

#include <fmt/format.h>

#include "tsa/bicep.hpp"
#include "tsa/calibration.hpp"
#include "tsa/cli.hpp"
#include "tsa/csv.hpp"
#include "tsa/hysteresis.hpp"
#include "tsa/sensing.hpp"
#include "tsa/simulation.hpp"
#include "tsa/training.hpp"

namespace {

using namespace tsa;

const std::string kData = TSA_DATA_DIR;

struct Verdict {
    bool pass = true;
    std::string detail;

    void check(bool ok, const std::string& what) {
        if (!ok) {
            pass = false;
            detail += (detail.empty() ? "" : "; ") + what;
        }
    }
};

struct FittedRow {
    std::string label;
    core::StringSpec spec;
    core::LoadCase load;
    core::TwoPhaseParams params;
    double theta_max_rev = 0.0;
    double contraction_regular_pct = 0.0;
    double contraction_total_pct = 0.0;
};

// Runs the calibrate command on an observation file and reads back both
// the fitted parameters and the string descriptions they belong to.
std::vector<FittedRow> calibrate_file(const std::string& observations, std::string* raw = nullptr,
                                      unsigned threads = 1) {
    std::ostringstream out;
    std::ostringstream err;
    cli::CommonOptions opts;
    int code = 0;
    if (threads != 1) {
        const auto obs = cli::read_observations(observations);
        calibration::FitOptions fit;
        fit.threads = threads;
        cli::write_fitted_params(out, cli::calibrate_all(obs, fit));
    } else {
        code = cli::cmd_calibrate(opts, observations, out, err);
    }
    if (code != 0) throw std::runtime_error(fmt::format("calibrate exit {}: {}", code, err.str()));
    if (raw) *raw = out.str();

    const auto obs = cli::read_observations(observations);
    const auto t = csv::Table::parse(out.str(), "fitted");
    std::vector<FittedRow> rows;
    for (std::size_t i = 0; i < t.rows().size(); ++i) {
        const auto& r = t.rows()[i];
        FittedRow f;
        f.label = *t.text(r, "label");
        f.spec = obs[i].endpoints.spec;
        f.load = obs[i].endpoints.load;
        f.theta_max_rev = obs[i].endpoints.theta_max_rev;
        f.params.r_eff_mm = t.require_number(r, "r_eff_mm");
        f.params.theta_star_rad = core::rev_to_rad(t.require_number(r, "theta_star_rev"));
        f.params.coil_diameter_mm = t.require_number(r, "coil_diameter_mm");
        f.params.coil_pitch_mm = t.require_number(r, "coil_pitch_mm");
        f.params.eta = t.require_number(r, "eta");
        f.params.compliance_mm_per_N = t.require_number(r, "compliance_mm_per_N");
        f.contraction_regular_pct = t.require_number(r, "contraction_regular_pct");
        f.contraction_total_pct = t.require_number(r, "contraction_total_pct");
        rows.push_back(f);
    }
    return rows;
}

Verdict table1_contractions() {
    Verdict v;
    const auto rows = calibrate_file(kData + "/table1.csv");
    const double regular[] = {28.90, 29.08, 28.53};
    const double total[] = {68.22, 70.94, 70.63};
    v.check(rows.size() == 3, "expected three fitted rows");
    double worst = 0.0;
    for (std::size_t i = 0; i < std::min<std::size_t>(3, rows.size()); ++i) {
        const auto& r = rows[i];
        const double dr = r.contraction_regular_pct - regular[i];
        const double dt = r.contraction_total_pct - total[i];
        v.check(std::abs(dr) <= 0.5, fmt::format("{} regular off by {:+.3f} pp", r.label, dr));
        v.check(std::abs(dt) <= 0.5, fmt::format("{} total off by {:+.3f} pp", r.label, dt));
        worst = std::max({worst, std::abs(dr), std::abs(dt)});
    }
    if (v.pass) v.detail = fmt::format("max |diff| {:.2e} pp over 6 targets", worst);
    return v;
}

// Largest speed and torque reached in each phase over a dense angle grid.
struct PhaseMaxima {
    double speed[2] = {0.0, 0.0};
    double torque[2] = {0.0, 0.0};
};

PhaseMaxima phase_maxima(const FittedRow& r, double motor_speed_rad_s) {
    PhaseMaxima m;
    const double theta_max = core::rev_to_rad(r.theta_max_rev);
    const int n = 2000;
    for (int k = 1; k <= n; ++k) {
        const double theta = theta_max * k / n;
        const bool over = theta > r.params.theta_star_rad;
        const auto side = over ? core::Side::Right : core::Side::Left;
        m.speed[over] = std::max(m.speed[over],
                                 core::linear_speed(r.spec, r.params, r.load, theta, motor_speed_rad_s, side));
        m.torque[over] = std::max(m.torque[over], core::required_torque(r.spec, r.params, r.load, theta, side));
    }
    return m;
}

Verdict rate_ordering() {
    Verdict v;
    const auto rows = calibrate_file(kData + "/table1.csv");
    int checked = 0;
    for (const auto& r : rows) {
        for (double rev_s : {0.05, 0.5, 1.0, 3.0, 10.0}) {
            const auto m = phase_maxima(r, core::rev_to_rad(rev_s));
            v.check(m.speed[1] > m.speed[0], fmt::format("{} speed at {} rev/s", r.label, rev_s));
            v.check(m.torque[1] > m.torque[0], fmt::format("{} torque", r.label));
            ++checked;
        }
    }
    if (v.pass) v.detail = fmt::format("{} spec/speed combinations", checked);
    return v;
}

Verdict compliant_endpoints() {
    Verdict v;
    const auto rows = calibrate_file(kData + "/compliant_6ply.csv");
    if (rows.size() != 1) {
        v.check(false, "expected one fitted row");
        return v;
    }
    const auto& r = rows.front();
    const double ref = core::length(r.spec, r.params, r.load, 0.0);
    const double s1 = core::strain(core::length(r.spec, r.params, r.load, r.params.theta_star_rad), ref);
    const double s2 =
        core::strain(core::length(r.spec, r.params, r.load, core::rev_to_rad(r.theta_max_rev)), ref);
    v.check(std::abs(s1 + 11.25) <= 0.5, fmt::format("regular-phase strain {:.3f}%", s1));
    v.check(std::abs(s2 + 58.14) <= 0.5, fmt::format("total strain {:.3f}%", s2));
    if (v.pass) v.detail = fmt::format("strain {:.3f}% / {:.3f}%", s1, s2);
    return v;
}

Verdict sizing() {
    Verdict v;
    for (auto [pct, expected] : {std::pair{70.0, "14.29\n"}, std::pair{30.0, "33.33\n"}}) {
        std::ostringstream out;
        std::ostringstream err;
        const int code = cli::cmd_size(10.0, pct, out, err);
        v.check(code == 0 && out.str() == expected,
                fmt::format("size(10, {}) printed '{}'", pct, out.str()));
    }
    if (v.pass) v.detail = "14.29 mm and 33.33 mm";
    return v;
}

constexpr std::array<bicep::AnglePair, 3> kBicepPairs{{{215.0, 13.1}, {135.0, 73.4}, {68.0, 147.1}}};

// Independent least squares over (a, b) with gamma eliminated in closed
// form: a dense grid plus a fine scan of the edge where the shortest
// string folds flat (b - a = 68 mm).
double dense_scan_residual() {
    auto residual = [](double a, double b) {
        std::array<double, 3> psi{};
        double mean = 0.0;
        for (std::size_t i = 0; i < 3; ++i) {
            const double l = kBicepPairs[i].length_mm;
            if (l < std::abs(a - b) || l > a + b) return std::numeric_limits<double>::infinity();
            psi[i] = std::acos(std::clamp((a * a + b * b - l * l) / (2 * a * b), -1.0, 1.0)) * 180.0 /
                     std::numbers::pi;
            mean += (kBicepPairs[i].angle_deg + psi[i]) / 3.0;
        }
        double sum = 0.0;
        for (std::size_t i = 0; i < 3; ++i) sum += std::pow(mean - psi[i] - kBicepPairs[i].angle_deg, 2);
        return sum;
    };
    double best = std::numeric_limits<double>::infinity();
    for (double a = 0.5; a <= 400.0; a += 0.5) {
        for (double b = a; b <= 400.0; b += 0.5) best = std::min(best, residual(a, b));
    }
    for (double a = 0.01; a <= 330.0; a += 0.01) best = std::min(best, residual(a, a + 68.0));
    return best;
}

Verdict bicep_fit() {
    Verdict v;
    const auto fit = bicep::fit_bicep(kBicepPairs);
    const auto grid = bicep::bicep_grid_oracle(kBicepPairs);
    v.check(fit.residual_deg2 <= grid.residual_deg2 + 1e-9,
            fmt::format("fit residual {:.4f} worse than 3-D grid {:.4f}", fit.residual_deg2, grid.residual_deg2));
    if (fit.consistent) {
        for (std::size_t i = 0; i < 3; ++i) {
            v.check(std::abs(fit.errors_deg[i]) <= bicep::kFitToleranceDeg,
                    fmt::format("pair {} off by {:+.3f} deg", i, fit.errors_deg[i]));
        }
        if (v.pass) v.detail = fmt::format("max error {:.3f} deg", fit.max_abs_error_deg);
        return v;
    }
    // Fallback: the linkage cannot meet the tolerance, so the reported best
    // residual is what gets verified.
    const double scan = dense_scan_residual();
    v.check(fit.max_abs_error_deg > bicep::kFitToleranceDeg, "inconsistent flag without a large error");
    v.check(fit.residual_deg2 <= scan + 1e-9 && fit.residual_deg2 >= scan - 1e-3,
            fmt::format("fit residual {:.6f} vs dense scan {:.6f}", fit.residual_deg2, scan));
    if (v.pass) {
        v.detail = fmt::format(
            "fallback: inconsistent, best residual {:.4f} deg^2 (scan {:.4f}, 3-D grid {:.4f}), "
            "errors {:+.2f}/{:+.2f}/{:+.2f} deg",
            fit.residual_deg2, scan, grid.residual_deg2, fit.errors_deg[0], fit.errors_deg[1],
            fit.errors_deg[2]);
    }
    return v;
}

std::vector<double> ramps(std::vector<double> peaks, int n) {
    std::vector<double> v{0.0};
    for (double p : peaks) {
        const double from = v.back();
        for (int k = 1; k <= n; ++k) v.push_back(from + (p - from) * k / n);
    }
    return v;
}

Verdict property_suite() {
    Verdict v;
    const core::StringSpec spec{1.3, 214.3, core::Material::Stiff, 1, {}, {}};
    const core::TwoPhaseParams params{0.9, core::rev_to_rad(26.0), 3.1, 2.6, 0.3, 0.0};
    const core::LoadCase load{2900.0};

    // Continuity at the phase boundary.
    const double ts = params.theta_star_rad;
    const double lr = core::length_regular(spec, params, load, ts);
    const double lo = core::length_overtwist(spec, params, load, ts);
    v.check(std::abs(lr - lo) <= 1e-9 * std::abs(lr), "phase continuity");

    // Analytic vs central-difference transmission ratio.
    for (double rev : {1.0, 10.0, 20.0, 25.5, 27.0, 30.0}) {
        const double th = core::rev_to_rad(rev);
        const double h = 1e-6;
        const double fd = (core::length(spec, params, load, th + h) - core::length(spec, params, load, th - h)) / (2 * h);
        const double an = core::transmission_ratio(spec, params, load, th);
        v.check(std::abs(fd - an) <= 1e-6 * std::abs(an), fmt::format("transmission ratio at {} rev", rev));
    }

    // PI loop closure, rate independence, wiping-out and identification.
    const hysteresis::PIModel pi({0.0, 0.5, 1.0, 1.5, 2.0, 2.5}, {0.6, 0.3, 0.0, 0.25, 0.1, 0.05});
    std::vector<double> tri;
    for (int p = 0; p < 3; ++p) {
        for (int k = 0; k < 100; ++k) tri.push_back(k <= 50 ? 0.12 * k : 0.12 * (100 - k));
    }
    const auto tri_out = pi.apply(tri);
    for (int k = 0; k < 100; ++k) {
        if (std::abs(tri_out[200 + k] - tri_out[100 + k]) > 1e-12) {
            v.check(false, "PI loop closure");
            break;
        }
    }
    const auto rich = ramps({10, 2, 8, 3, 6, 1, 9, 4, 7, 0.5, 5, 0}, 25);
    std::vector<double> slow;
    for (double x : rich) slow.insert(slow.end(), 3, x);
    const auto fast_out = pi.apply(rich);
    const auto slow_out = pi.apply(slow);
    for (std::size_t k = 0; k < rich.size(); ++k) {
        if (fast_out[k] != slow_out[3 * k + 2]) {
            v.check(false, "PI rate independence");
            break;
        }
    }
    auto nested = pi;
    auto direct = pi;
    for (double x : ramps({10, 3, 7, 4, 6, 12}, 40)) nested.step(x);
    for (double x : ramps({12}, 120)) direct.step(x);
    const auto sn = nested.states();
    const auto sd = direct.states();
    for (std::size_t i = 0; i < sn.size(); ++i) v.check(std::abs(sn[i] - sd[i]) <= 1e-12, "PI wiping-out");
    const auto id = hysteresis::pi_identify(rich, fast_out, pi.thresholds());
    for (std::size_t i = 0; i < pi.weights().size(); ++i) {
        v.check(std::abs(id.model.weights()[i] - pi.weights()[i]) <= 1e-6, fmt::format("PI weight {}", i));
    }

    // Sensing round trip with creep on a compliant profile.
    const core::StringSpec cs{1.05, 150.0, core::Material::Compliant, 6, 2.1, 3.6};
    const core::TwoPhaseParams cp{0.525, core::rev_to_rad(21.0), 3.0, 2.1, 0.5, 0.7};
    simulation::ProfileSpec ps;
    ps.peak_rev = 30.0;
    ps.period_s = 30.0;
    ps.cycles = 4;
    ps.samples_per_cycle = 150;
    const auto prof = simulation::generate_profile(ps);
    const auto sim = simulation::simulate({cs, cp, core::LoadCase{200.0}, {}, {}, {}}, prof);
    std::vector<double> strain, time, cycles;
    for (std::size_t k = 0; k < sim.size(); ++k) {
        strain.push_back(sim[k].strain_pct);
        time.push_back(sim[k].time_s);
        cycles.push_back(prof[k].cycle);
    }
    sensing::ResistanceParams rp;
    rp.creep_rate_ohm_per_cycle = 0.02;
    rp.creep_saturation_ohm = 0.3;
    const auto est = sensing::estimate_strain(rp, sensing::resistance_forward(rp, strain, time, cycles), time);
    double ss = 0.0;
    for (std::size_t k = 0; k < est.size(); ++k) ss += std::pow(est[k] - strain[k], 2);
    const double rms = std::sqrt(ss / est.size());
    v.check(rms < 2.0, fmt::format("sensing round-trip RMS {:.3f}%", rms));

    // Calibration determinism: byte-identical output across runs and thread counts.
    std::string a, b, c;
    (void)calibrate_file(kData + "/table1.csv", &a, 1);
    (void)calibrate_file(kData + "/table1.csv", &b, 4);
    (void)calibrate_file(kData + "/table1.csv", &c, 4);
    v.check(a == b && b == c, "calibration output differs across runs or threads");

    // Training state machine with the default thresholds.
    const std::pair<int, training::Stage> labels[] = {{0, training::Stage::Perpendicular},
                                                      {6, training::Stage::Mixed},
                                                      {11, training::Stage::InlineUneven},
                                                      {50, training::Stage::Uniform}};
    for (auto [n, stage] : labels) v.check(training::stage_of(n) == stage, fmt::format("stage at {} cycles", n));
    training::TrainingState st;
    for (int i = 0; i < 120; ++i) {
        const auto next = training::advance_cycle(st);
        v.check(static_cast<int>(next.stage) >= static_cast<int>(st.stage), "training regressed");
        if (st.stage == training::Stage::Uniform) v.check(next.stage == training::Stage::Uniform, "Uniform left");
        st = next;
    }
    if (v.pass) v.detail = fmt::format("all invariants hold (sensing RMS {:.3f}%)", rms);
    return v;
}

Verdict creep_saturation() {
    Verdict v;
    cli::CommonOptions opts;
    opts.config = kData + "/lifetime_13mm.ini";
    std::ostringstream out;
    std::ostringstream err;
    const int code = cli::cmd_simulate(opts, std::nullopt, out, err);
    v.check(code == 0, fmt::format("simulate exit {}: {}", code, err.str()));
    if (!v.pass) return v;
    // Matches [lifetime] and [profile] in the configuration.
    const double saturation = 6.0;
    const double horizon_s = 120 * 60.0;
    const double l0 = 214.3;
    const auto t = csv::Table::parse(out.str(), "simulate");
    double worst_late = std::numeric_limits<double>::infinity();
    double highest = 0.0;
    for (const auto& r : t.rows()) {
        if (t.require_number(r, "theta_rev") != 0.0) continue;
        const double drift = l0 - t.require_number(r, "length_mm");
        highest = std::max(highest, drift);
        if (t.require_number(r, "time_s") >= horizon_s) worst_late = std::min(worst_late, drift);
    }
    v.check(highest <= saturation + 1e-6, fmt::format("baseline overshoots: {:.6f} mm", highest));
    v.check(worst_late >= 0.99 * saturation - 1e-6, fmt::format("only {:.4f} mm after horizon", worst_late));
    if (v.pass) {
        v.detail = fmt::format("{:.2f}% of asymptote at horizon, peak {:.4f} of {} mm",
                               100.0 * worst_late / saturation, highest, saturation);
    }
    return v;
}

}  // namespace

int main() {
    struct Criterion {
        int id;
        const char* name;
        double budget_s;
        std::function<Verdict()> run;
    };
    const std::vector<Criterion> criteria = {
        {1, "stiff-string contraction reproduction", 10.0, table1_contractions},
        {2, "overtwist speed and torque exceed regular phase", 1.0, rate_ordering},
        {3, "compliant 6-ply endpoints", 5.0, compliant_endpoints},
        {4, "sizing arithmetic", 1.0, sizing},
        {5, "bicep geometry fit", 10.0, bicep_fit},
        {6, "property suite", 30.0, property_suite},
        {7, "lifetime creep saturation", 1.0, creep_saturation},
    };
    int failures = 0;
    for (const auto& c : criteria) {
        const auto start = std::chrono::steady_clock::now();
        Verdict v;
        try {
            v = c.run();
        } catch (const std::exception& e) {
            v.pass = false;
            v.detail = fmt::format("exception: {}", e.what());
        }
        const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        if (seconds > c.budget_s) {
            v.pass = false;
            v.detail += fmt::format("; over time budget of {} s", c.budget_s);
        }
        failures += !v.pass;
        std::cout << fmt::format("{} criterion {}: {} ({:.3f} s) {}\n", v.pass ? "PASS" : "FAIL", c.id,
                                 c.name, seconds, v.detail);
    }
    return failures == 0 ? 0 : 1;
}
