#include <algorithm>
#include <cmath>
#include <numeric>
#include <vector>

#include <gtest/gtest.h>

#include "tsa/core_model.hpp"
#include "tsa/creep.hpp"
#include "tsa/sensing.hpp"

namespace {

using namespace tsa;
using namespace tsa::sensing;

struct Series {
    std::vector<double> time;
    std::vector<double> strain;
    std::vector<double> cycles;
};

// Triangle strain cycles between 0 and `trough` percent.
Series strain_cycles(double trough, int cycles, int per_cycle = 200, double period = 20.0) {
    Series s;
    for (int k = 0; k <= cycles * per_cycle; ++k) {
        const double phase = static_cast<double>(k) / per_cycle;
        const double f = phase - std::floor(phase);
        s.time.push_back(phase * period);
        s.cycles.push_back(phase);  // fractional, as generated profiles count cycles
        s.strain.push_back(trough * (f <= 0.5 ? 2.0 * f : 2.0 * (1.0 - f)));
    }
    return s;
}

double rms(const std::vector<double>& a, const std::vector<double>& b) {
    double sum = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) sum += (a[i] - b[i]) * (a[i] - b[i]);
    return std::sqrt(sum / static_cast<double>(a.size()));
}

double max_abs_diff(const std::vector<double>& a, const std::vector<double>& b) {
    double m = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
    return m;
}

ResistanceParams no_dynamics() {
    ResistanceParams p;
    p.transient_gain_ohm_per_pct = 0.0;
    p.creep_rate_ohm_per_cycle = 0.0;
    return p;
}

TEST(ResistanceForward, StaticMapWithoutDynamics) {
    const ResistanceParams p = no_dynamics();
    const std::vector<double> strain(10, -20.0);
    std::vector<double> time(10);
    std::iota(time.begin(), time.end(), 0.0);
    const std::vector<double> cycles(10, 0.0);
    for (double r : resistance_forward(p, strain, time, cycles)) {
        EXPECT_DOUBLE_EQ(r, p.r0_ohm + p.sensitivity_ohm_per_pct * -20.0);
    }
}

TEST(ResistanceForward, StepTransientDecaysExponentially) {
    ResistanceParams p;
    p.transient_gain_ohm_per_pct = 0.3;
    p.tau_transient_s = 1.5;
    std::vector<double> time{-0.1};
    std::vector<double> strain{0.0};
    for (int k = 0; k <= 60; ++k) {
        time.push_back(0.1 * k);
        strain.push_back(1.0);
    }
    const auto tr = transient_component(p, strain, time);
    for (std::size_t k = 1; k < time.size(); ++k) {
        EXPECT_NEAR(tr[k], 0.3 * std::exp(-time[k] / 1.5), 1e-12);
    }
}

TEST(ResistanceForward, RejectsMismatchedOrNonMonotoneSeries) {
    const ResistanceParams p;
    const std::vector<double> v{0.0, 1.0, 2.0};
    EXPECT_THROW((void)resistance_forward(p, v, std::vector<double>{0.0, 1.0}, v), std::invalid_argument);
    EXPECT_THROW((void)resistance_forward(p, v, std::vector<double>{0.0, 1.0, 1.0}, v),
                 std::invalid_argument);
}

TEST(ResistanceForward, CreepDriftsUpwardTowardSaturation) {
    ResistanceParams p = no_dynamics();
    p.creep_rate_ohm_per_cycle = 0.02;
    p.creep_saturation_ohm = 0.5;
    const auto s = strain_cycles(0.0, 400, 4);
    const auto r = resistance_forward(p, s.strain, s.time, s.cycles);
    EXPECT_TRUE(std::is_sorted(r.begin(), r.end()));
    EXPECT_GT(r.back() - p.r0_ohm, 0.999 * 0.5);
    EXPECT_LE(r.back() - p.r0_ohm, 0.5);
}

TEST(ResistanceForward, AffineMonotoneInStrainAtFixedState) {
    const ResistanceParams p;
    const std::vector<double> time{0.0, 1.0};
    const std::vector<double> cycles{0.0, 0.0};
    std::vector<double> r1;
    for (int i = 0; i <= 20; ++i) {
        r1.push_back(resistance_forward(p, std::vector<double>{0.0, -5.0 * i}, time, cycles)[1]);
    }
    // Negative sensitivity: R grows as strain becomes more negative, in equal steps.
    for (std::size_t i = 1; i < r1.size(); ++i) {
        EXPECT_GT(r1[i], r1[i - 1]);
        EXPECT_NEAR(r1[i] - r1[i - 1], r1[1] - r1[0], 1e-12);
    }
}

TEST(SaturatingCreep, MonotoneAndBounded) {
    const SaturatingCreep c{0.05, 2.0};
    double previous = 0.0;
    for (int k = 0; k <= 2000; ++k) {
        const double v = c(k);
        ASSERT_GE(v, previous);
        ASSERT_LE(v, 2.0);
        previous = v;
    }
    const SaturatingCreep linear{0.05};
    EXPECT_DOUBLE_EQ(linear(100.0), 5.0);
}

TEST(SaturatingCreep, ReachingHitsFractionAtHorizon) {
    const auto c = SaturatingCreep::reaching(1.5, 720.0);
    EXPECT_NEAR(c(720.0), 0.99 * 1.5, 1e-12);
    EXPECT_NEAR(c.cycles_to_fraction(0.99), 720.0, 1e-9);
}

TEST(Transient, DecayBoundAfterLastStep) {
    ResistanceParams p;
    p.transient_gain_ohm_per_pct = -0.2;
    p.tau_transient_s = 3.0;
    auto s = strain_cycles(-30.0, 1, 50, 10.0);
    for (int k = 1; k <= 100; ++k) {
        s.time.push_back(10.0 + 0.2 * k);
        s.strain.push_back(0.0);
    }
    const auto tr = transient_component(p, s.strain, s.time);
    const std::size_t last = 50;  // end of the triangle; strain is constant afterwards
    for (std::size_t k = last; k < tr.size(); ++k) {
        const double bound = std::abs(tr[last]) * std::exp(-(s.time[k] - s.time[last]) / 3.0);
        ASSERT_LE(std::abs(tr[k]), bound * (1.0 + 1e-12) + 1e-15);
    }
}

TEST(DetrendCreep, CreepFreeInputUnchanged) {
    const ResistanceParams p = no_dynamics();
    const auto s = strain_cycles(-40.0, 5);
    const auto r = resistance_forward(p, s.strain, s.time, s.cycles);
    const auto d = detrend_creep(r, s.time);
    EXPECT_LT(max_abs_diff(d.series, r), 1e-9);
}

TEST(DetrendCreep, RemovesKnownSaturatingCreep) {
    ResistanceParams p = no_dynamics();
    p.creep_rate_ohm_per_cycle = 0.08;
    p.creep_saturation_ohm = 0.6;
    const auto s = strain_cycles(-40.0, 12);
    const auto with_creep = resistance_forward(p, s.strain, s.time, s.cycles);
    ResistanceParams clean = p;
    clean.creep_rate_ohm_per_cycle = 0.0;
    const auto reference = resistance_forward(clean, s.strain, s.time, s.cycles);

    const auto d = detrend_creep(with_creep, s.time);
    EXPECT_NE(d.kind, BaselineKind::None);
    const auto [lo, hi] = std::minmax_element(reference.begin(), reference.end());
    EXPECT_LT(rms(d.series, reference), 0.01 * (*hi - *lo));
}

TEST(DetrendCreep, LinearDriftLeavesZeroMeanResidual) {
    std::vector<double> t(50);
    std::vector<double> r(50);
    for (int k = 0; k < 50; ++k) {
        t[k] = 0.5 * k;
        r[k] = 3.0 + 0.07 * t[k];
    }
    const auto d = detrend_creep(r, t);
    EXPECT_EQ(d.kind, BaselineKind::Linear);
    double mean = 0.0;
    for (double v : d.series) mean += (v - 3.0) / 50.0;
    EXPECT_NEAR(mean, 0.0, 1e-9);
    for (double v : d.series) EXPECT_NEAR(v, 3.0, 1e-9);
}

TEST(DetrendCreep, NeedsThreeSamples) {
    const std::vector<double> two{1.0, 2.0};
    EXPECT_THROW((void)detrend_creep(two, two), std::invalid_argument);
}

TEST(EstimateStrain, NoiselessRoundTrip) {
    const ResistanceParams p;
    const auto s = strain_cycles(-50.0, 4);
    const auto r = resistance_forward(p, s.strain, s.time, s.cycles);
    const auto est = estimate_strain(p, r, s.time);
    EXPECT_LT(max_abs_diff(est, s.strain), 2.0);
    EXPECT_LT(rms(est, s.strain), 2.0);
}

TEST(EstimateStrain, RoundTripWithCreep) {
    ResistanceParams p;
    p.creep_rate_ohm_per_cycle = 0.05;
    p.creep_saturation_ohm = 0.4;
    const auto s = strain_cycles(-50.0, 10);
    const auto r = resistance_forward(p, s.strain, s.time, s.cycles);
    EXPECT_LT(rms(estimate_strain(p, r, s.time), s.strain), 2.0);
}

TEST(EstimateStrain, ConstantBaseResistanceMeansZeroStrain) {
    const ResistanceParams p;
    std::vector<double> t(30);
    std::iota(t.begin(), t.end(), 0.0);
    const std::vector<double> r(30, p.r0_ohm);
    for (double v : estimate_strain(p, r, t)) EXPECT_NEAR(v, 0.0, 1e-12);
}

TEST(EstimateStrain, RejectsNonInvertibleMaps) {
    ResistanceParams p;
    const std::vector<double> t{0.0, 1.0, 2.0};
    p.sensitivity_ohm_per_pct = 0.0;
    EXPECT_THROW((void)estimate_strain(p, t, t), std::domain_error);
    p.sensitivity_ohm_per_pct = -0.05;
    p.transient_gain_ohm_per_pct = 0.05;
    EXPECT_THROW((void)estimate_strain(p, t, t), std::domain_error);
}

// Compliant 6-ply string: -11.25% at the end of the regular phase and
// -58.14% at 30 rev. Parameters are solved in closed form here.
TEST(EstimateStrain, TracksCompliantPhaseTransition) {
    core::StringSpec spec{1.05, 150.0, core::Material::Compliant, 6, 2.1, 3.6};
    const double l1 = 150.0 * (1.0 - 0.1125);
    const double r_eff = 1.2;
    const double theta_star = std::sqrt(150.0 * 150.0 - l1 * l1) / r_eff;
    const double theta_max = core::rev_to_rad(30.0);
    const double coils = (theta_max - theta_star) / core::kTwoPi;
    const double per_coil = (l1 - 150.0 * (1.0 - 0.5814)) / coils;
    const double pitch = 2.1;  // close-packed: the regular bundle diameter
    const double diameter = std::sqrt(std::pow(per_coil + pitch, 2) - pitch * pitch) / std::numbers::pi;
    const core::TwoPhaseParams params{r_eff, theta_star, diameter, pitch, 0.5, 0.0};
    const core::LoadCase load{200.0};

    std::vector<double> time;
    std::vector<double> strain;
    std::vector<double> cycles;
    const int n = 400;
    for (int c = 0; c < 3; ++c) {
        for (int k = 0; k < n; ++k) {
            const double f = static_cast<double>(k) / n;
            const double theta = theta_max * (f <= 0.5 ? 2.0 * f : 2.0 * (1.0 - f));
            time.push_back(30.0 * (c + f));
            cycles.push_back(c);
            strain.push_back(core::strain(core::length(spec, params, load, theta), 150.0));
        }
    }
    EXPECT_NEAR(core::strain(core::length(spec, params, load, theta_star), 150.0), -11.25, 1e-9);
    EXPECT_NEAR(*std::min_element(strain.begin(), strain.end()), -58.14, 1e-6);

    ResistanceParams p;
    p.creep_rate_ohm_per_cycle = 0.02;
    p.creep_saturation_ohm = 0.1;
    const auto r = resistance_forward(p, strain, time, cycles);
    const auto est = estimate_strain(p, r, time);
    EXPECT_NEAR(*std::min_element(est.begin(), est.end()), -58.14, 2.0);
    EXPECT_NEAR(*std::max_element(est.begin(), est.end()), 0.0, 2.0);
    // The estimate crosses the regular-phase level on every loading ramp.
    int crossings = 0;
    for (std::size_t k = 1; k < est.size(); ++k) {
        if (est[k - 1] > -11.25 && est[k] <= -11.25) ++crossings;
    }
    EXPECT_EQ(crossings, 3);
}

TEST(FitResistanceBaseline, RecoversAffineMap) {
    const ResistanceParams truth = no_dynamics();
    std::vector<double> s;
    std::vector<double> r;
    for (int i = 0; i < 20; ++i) {
        s.push_back(-3.0 * i);
        r.push_back(truth.r0_ohm + truth.sensitivity_ohm_per_pct * s.back());
    }
    const auto fit = fit_resistance_baseline(ResistanceParams{}, s, r);
    EXPECT_NEAR(fit.r0_ohm, truth.r0_ohm, 1e-12);
    EXPECT_NEAR(fit.sensitivity_ohm_per_pct, truth.sensitivity_ohm_per_pct, 1e-12);
}

}  // namespace
