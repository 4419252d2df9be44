#include "tsa/sensing.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include <fmt/format.h>

namespace tsa::sensing {

namespace {

void check_series(std::size_t n, std::span<const double> time_s) {
    if (time_s.size() != n) {
        throw std::invalid_argument(
            fmt::format("series length mismatch: {} values vs {} time stamps", n, time_s.size()));
    }
    for (std::size_t k = 1; k < time_s.size(); ++k) {
        if (!(time_s[k] > time_s[k - 1])) {
            throw std::invalid_argument(
                fmt::format("time must be strictly increasing (sample {})", k));
        }
    }
}

struct LineFit {
    double intercept = 0.0;
    double slope = 0.0;
    double sse = 0.0;
};

LineFit fit_line(std::span<const double> x, std::span<const double> y) {
    const auto n = static_cast<double>(x.size());
    double mx = 0.0;
    double my = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        mx += x[i];
        my += y[i];
    }
    mx /= n;
    my /= n;
    double sxx = 0.0;
    double sxy = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        sxx += (x[i] - mx) * (x[i] - mx);
        sxy += (x[i] - mx) * (y[i] - my);
    }
    LineFit fit;
    fit.slope = sxx > 0.0 ? sxy / sxx : 0.0;
    fit.intercept = my - fit.slope * mx;
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double e = y[i] - fit.intercept - fit.slope * x[i];
        fit.sse += e * e;
    }
    return fit;
}

// c + A * (1 - exp(-(t - t0) / T)), linear in (c, A) for a fixed T.
struct ExpFit {
    double level = 0.0;
    double amplitude = 0.0;
    double time_constant = 1.0;
    double sse = std::numeric_limits<double>::infinity();
};

ExpFit fit_exp_fixed(std::span<const double> t, std::span<const double> y, double t0, double tc) {
    std::vector<double> basis(t.size());
    for (std::size_t i = 0; i < t.size(); ++i) basis[i] = -std::expm1(-(t[i] - t0) / tc);
    const LineFit line = fit_line(basis, y);
    return ExpFit{line.intercept, line.slope, tc, line.sse};
}

ExpFit fit_exp(std::span<const double> t, std::span<const double> y, double t0) {
    const double span = t.back() - t0;
    const double lo = std::log(span * 1e-3);
    const double hi = std::log(span * 1e2);
    constexpr int kGrid = 80;
    ExpFit best;
    int best_i = 0;
    for (int i = 0; i <= kGrid; ++i) {
        const double lt = lo + (hi - lo) * i / kGrid;
        const ExpFit f = fit_exp_fixed(t, y, t0, std::exp(lt));
        if (f.sse < best.sse) {
            best = f;
            best_i = i;
        }
    }
    // Golden-section refinement in log time constant around the best node.
    double a = lo + (hi - lo) * std::max(0, best_i - 1) / kGrid;
    double b = lo + (hi - lo) * std::min(kGrid, best_i + 1) / kGrid;
    const double g = (std::sqrt(5.0) - 1.0) / 2.0;
    double c = b - g * (b - a);
    double d = a + g * (b - a);
    ExpFit fc = fit_exp_fixed(t, y, t0, std::exp(c));
    ExpFit fd = fit_exp_fixed(t, y, t0, std::exp(d));
    for (int it = 0; it < 100 && (b - a) > 1e-12; ++it) {
        if (fc.sse < fd.sse) {
            b = d;
            d = c;
            fd = fc;
            c = b - g * (b - a);
            fc = fit_exp_fixed(t, y, t0, std::exp(c));
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + g * (b - a);
            fd = fit_exp_fixed(t, y, t0, std::exp(d));
        }
    }
    for (const ExpFit& f : {fc, fd}) {
        if (f.sse < best.sse) best = f;
    }
    return best;
}

// One anchor per excursion below the mid-range. A series without
// repeated excursions has no cycle structure and every sample anchors.
std::vector<std::size_t> cycle_minima(std::span<const double> r) {
    const auto [lo_it, hi_it] = std::minmax_element(r.begin(), r.end());
    const double mid = 0.5 * (*lo_it + *hi_it);
    std::vector<std::size_t> anchors;
    std::size_t k = 0;
    while (k < r.size()) {
        if (r[k] >= mid) {
            ++k;
            continue;
        }
        std::size_t best = k;
        while (k < r.size() && r[k] < mid) {
            if (r[k] < r[best]) best = k;
            ++k;
        }
        anchors.push_back(best);
    }
    if (anchors.size() < 2) {
        anchors.resize(r.size());
        for (std::size_t i = 0; i < r.size(); ++i) anchors[i] = i;
    }
    return anchors;
}

}  // namespace

void ResistanceParams::validate() const {
    if (!(tau_transient_s > 0.0)) {
        throw std::invalid_argument("transient time constant must be positive");
    }
    if (sensitivity_ohm_per_pct == 0.0 || !std::isfinite(sensitivity_ohm_per_pct)) {
        throw std::invalid_argument("resistance sensitivity must be finite and non-zero");
    }
    if (!(creep_saturation_ohm >= 0.0)) {
        throw std::invalid_argument("creep saturation must be non-negative");
    }
}

std::vector<double> transient_component(const ResistanceParams& params,
                                        std::span<const double> strain_pct,
                                        std::span<const double> time_s) {
    params.validate();
    check_series(strain_pct.size(), time_s);
    std::vector<double> out(strain_pct.size(), 0.0);
    for (std::size_t k = 1; k < strain_pct.size(); ++k) {
        const double decay = std::exp(-(time_s[k] - time_s[k - 1]) / params.tau_transient_s);
        out[k] = out[k - 1] * decay +
                 params.transient_gain_ohm_per_pct * (strain_pct[k] - strain_pct[k - 1]);
    }
    return out;
}

std::vector<double> resistance_forward(const ResistanceParams& params,
                                       std::span<const double> strain_pct,
                                       std::span<const double> time_s,
                                       std::span<const double> cycles) {
    params.validate();
    check_series(strain_pct.size(), time_s);
    if (cycles.size() != strain_pct.size()) {
        throw std::invalid_argument("cycle index series length mismatch");
    }
    const std::vector<double> transient = transient_component(params, strain_pct, time_s);
    const SaturatingCreep creep = params.creep();
    std::vector<double> out(strain_pct.size());
    for (std::size_t k = 0; k < out.size(); ++k) {
        out[k] = params.r0_ohm + params.sensitivity_ohm_per_pct * strain_pct[k] + transient[k] +
                 creep(cycles[k]);
    }
    return out;
}

Detrended detrend_creep(std::span<const double> resistance, std::span<const double> time_s) {
    check_series(resistance.size(), time_s);
    if (resistance.size() < 3) {
        throw std::invalid_argument("detrending needs at least 3 samples");
    }
    Detrended out;
    out.series.assign(resistance.begin(), resistance.end());
    out.baseline.assign(resistance.size(), 0.0);
    out.anchors = cycle_minima(resistance);

    std::vector<double> at;
    std::vector<double> ar;
    for (std::size_t i : out.anchors) {
        at.push_back(time_s[i]);
        ar.push_back(resistance[i]);
    }
    const auto [lo_it, hi_it] = std::minmax_element(ar.begin(), ar.end());
    const double scale = std::max(1.0, std::abs(*hi_it));
    if (*hi_it - *lo_it <= 1e-12 * scale) {
        return out;
    }

    const double t0 = time_s.front();
    const LineFit line = fit_line(at, ar);
    out.kind = BaselineKind::Linear;
    auto baseline = [&](double t) { return line.slope * (t - t0); };
    ExpFit exp_fit;
    if (at.size() >= 4) {
        exp_fit = fit_exp(at, ar, t0);
        if (exp_fit.sse < line.sse * (1.0 - 1e-6)) out.kind = BaselineKind::SaturatingExponential;
    }
    for (std::size_t k = 0; k < resistance.size(); ++k) {
        const double b = out.kind == BaselineKind::Linear
                             ? baseline(time_s[k])
                             : exp_fit.amplitude *
                                   -std::expm1(-(time_s[k] - t0) / exp_fit.time_constant);
        out.baseline[k] = b;
        out.series[k] = resistance[k] - b;
    }
    return out;
}

std::vector<double> estimate_strain(const ResistanceParams& params,
                                    std::span<const double> resistance,
                                    std::span<const double> time_s) {
    const double s = params.sensitivity_ohm_per_pct;
    const double g = params.transient_gain_ohm_per_pct;
    const double scale = std::max({std::abs(s), std::abs(g), 1e-300});
    if (!std::isfinite(s) || std::abs(s) <= 1e-12 * std::max(1.0, std::abs(params.r0_ohm))) {
        throw std::domain_error("resistance map is not invertible: sensitivity is ~0");
    }
    if (std::abs(s + g) <= 1e-12 * scale) {
        throw std::domain_error("transient inverse is singular: sensitivity + gain is ~0");
    }
    params.validate();
    check_series(resistance.size(), time_s);
    if (resistance.empty()) return {};

    // The transient is inverted first so that the rest-state minima used
    // as detrending anchors are free of transient residue.
    std::vector<double> strain(resistance.size());
    strain[0] = (resistance[0] - params.r0_ohm) / s;
    double transient = 0.0;
    for (std::size_t k = 1; k < resistance.size(); ++k) {
        const double decay = std::exp(-(time_s[k] - time_s[k - 1]) / params.tau_transient_s);
        const double carried = transient * decay;
        strain[k] = (resistance[k] - params.r0_ohm - carried + g * strain[k - 1]) / (s + g);
        transient = carried + g * (strain[k] - strain[k - 1]);
    }
    if (strain.size() < 3) return strain;

    std::vector<double> static_r(strain.size());
    for (std::size_t k = 0; k < strain.size(); ++k) static_r[k] = params.r0_ohm + s * strain[k];
    const Detrended d = detrend_creep(static_r, time_s);
    if (d.kind == BaselineKind::None) return strain;
    for (std::size_t k = 0; k < strain.size(); ++k) strain[k] = (d.series[k] - params.r0_ohm) / s;
    return strain;
}

ResistanceParams fit_resistance_baseline(const ResistanceParams& base,
                                         std::span<const double> strain_pct,
                                         std::span<const double> resistance) {
    if (strain_pct.size() != resistance.size() || strain_pct.size() < 2) {
        throw std::invalid_argument("baseline fit needs at least two paired samples");
    }
    const LineFit line = fit_line(strain_pct, resistance);
    ResistanceParams out = base;
    out.r0_ohm = line.intercept;
    out.sensitivity_ohm_per_pct = line.slope;
    out.validate();
    return out;
}

}  // namespace tsa::sensing
