#include "tsa/calibration.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <limits>
#include <random>
#include <stdexcept>
#include <thread>

#include <fmt/format.h>

#include "tsa/errors.hpp"
#include "tsa/nelder_mead.hpp"

namespace tsa::calibration {

namespace {

double relative_sq(double predicted, double target) {
    const double e = (predicted - target) / target;
    return e * e;
}

bool lexicographically_less(const std::array<double, kParamCount>& a,
                            const std::array<double, kParamCount>& b) {
    return std::lexicographical_compare(a.begin(), a.end(), b.begin(), b.end());
}

// Runs `work(i)` for i in [0, n) on up to `threads` workers. Each index is
// written to its own slot by the caller, so scheduling cannot change results.
template <typename Work>
void parallel_for(std::size_t n, unsigned threads, Work work) {
    threads = std::max(1u, std::min<unsigned>(threads, static_cast<unsigned>(std::max<std::size_t>(n, 1))));
    if (threads == 1) {
        for (std::size_t i = 0; i < n; ++i) work(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::vector<std::jthread> pool;
    pool.reserve(threads);
    for (unsigned t = 0; t < threads; ++t) {
        pool.emplace_back([&] {
            for (std::size_t i = next++; i < n; i = next++) work(i);
        });
    }
}

// How far infeasible parameters are from the feasible set, relative to the
// loaded length. Zero when the geometry admits theta_max.
double infeasibility(const core::TwoPhaseParams& p, const ObservedEndpoints& obs) {
    const double l_eff = obs.spec.initial_length_mm + p.compliance_mm_per_N * obs.load.force_N();
    const double wound = p.theta_star_rad * p.r_eff_mm;
    double v = std::max(0.0, wound - obs.spec.initial_length_mm) / l_eff;
    if (v > 0.0) return v + 1.0;
    const double l1 = std::sqrt(std::max(0.0, (l_eff - wound) * (l_eff + wound)));
    const double coils =
        std::max(0.0, core::rev_to_rad(obs.theta_max_rev) - p.theta_star_rad) / core::kTwoPi;
    v += std::max(0.0, coils * p.coil_arc_length() - l1) / l_eff;
    return v;
}

// Objective seen by the simplex: the residual where it is defined, and a
// penalty that grows with the constraint violation elsewhere so that starts
// in the infeasible region still have a downhill direction.
double guided_residual(const core::TwoPhaseParams& p, const ObservedEndpoints& obs) {
    const double r = residual(p, obs);
    if (r < kInfeasiblePenalty) return r;
    return kInfeasiblePenalty * (1.0 + infeasibility(p, obs));
}

}  // namespace

void ObservedEndpoints::validate() const {
    spec.validate();
    if (!(load.mass_g >= 0.0)) throw std::invalid_argument("load mass must be non-negative");
    if (!(theta_max_rev > 0.0)) throw std::invalid_argument("maximum motor angle must be positive");
    if (!(0.0 < contraction_regular_pct && contraction_regular_pct < contraction_total_pct &&
          contraction_total_pct < 100.0)) {
        throw std::invalid_argument(fmt::format(
            "contractions must satisfy 0 < regular < total < 100 (got {} and {})",
            contraction_regular_pct, contraction_total_pct));
    }
    for (const auto& v : {max_speed_regular_mm_s, max_speed_overtwist_mm_s, max_torque_regular_Nm,
                          max_torque_overtwist_Nm, motor_speed_rev_s}) {
        if (v && !(*v > 0.0)) throw std::invalid_argument("optional targets must be positive");
    }
}

Predictions predict(const core::TwoPhaseParams& params, const ObservedEndpoints& obs) {
    core::validate(obs.spec, params);
    const double theta_max = core::rev_to_rad(obs.theta_max_rev);
    const double reference = core::length(obs.spec, params, obs.load, 0.0);
    const double theta_end = std::min(params.theta_star_rad, theta_max);
    const double l_regular = core::length(obs.spec, params, obs.load, theta_end);
    const double l_total = core::length(obs.spec, params, obs.load, theta_max);

    Predictions p;
    p.contraction_regular_pct = (reference - l_regular) / reference * 100.0;
    p.contraction_total_pct = (reference - l_total) / reference * 100.0;
    p.slope_regular_mm_per_rad = std::abs(core::transmission_ratio(
        obs.spec, params, obs.load, theta_end, core::Side::Left));
    p.slope_overtwist_mm_per_rad =
        theta_max > params.theta_star_rad ? params.coil_contraction() / core::kTwoPi : 0.0;
    const double force = obs.load.force_N();
    p.torque_regular_Nm = force * p.slope_regular_mm_per_rad * 1e-3 / params.eta;
    p.torque_overtwist_Nm = force * p.slope_overtwist_mm_per_rad * 1e-3 / params.eta;
    if (obs.motor_speed_rev_s) {
        const double omega = core::rev_to_rad(*obs.motor_speed_rev_s);
        p.speed_regular_mm_s = p.slope_regular_mm_per_rad * omega;
        p.speed_overtwist_mm_s = p.slope_overtwist_mm_per_rad * omega;
    }
    return p;
}

double residual(const core::TwoPhaseParams& params, const ObservedEndpoints& obs) {
    Predictions p;
    try {
        p = predict(params, obs);
    } catch (const std::invalid_argument&) {
        return kInfeasiblePenalty;
    } catch (const ModelDomainError&) {
        return kInfeasiblePenalty;
    }
    double r = kContractionWeight * relative_sq(p.contraction_regular_pct, obs.contraction_regular_pct) +
               kContractionWeight * relative_sq(p.contraction_total_pct, obs.contraction_total_pct);
    if (obs.max_torque_regular_Nm) {
        r += kRateWeight * relative_sq(p.torque_regular_Nm, *obs.max_torque_regular_Nm);
    }
    if (obs.max_torque_overtwist_Nm) {
        r += kRateWeight * relative_sq(p.torque_overtwist_Nm, *obs.max_torque_overtwist_Nm);
    }
    if (p.speed_regular_mm_s && obs.max_speed_regular_mm_s) {
        r += kRateWeight * relative_sq(*p.speed_regular_mm_s, *obs.max_speed_regular_mm_s);
    }
    if (p.speed_overtwist_mm_s && obs.max_speed_overtwist_mm_s) {
        r += kRateWeight * relative_sq(*p.speed_overtwist_mm_s, *obs.max_speed_overtwist_mm_s);
    }
    return std::isfinite(r) ? r : kInfeasiblePenalty;
}

std::array<double, kParamCount> to_array(const core::TwoPhaseParams& p) {
    return {p.r_eff_mm, p.theta_star_rad, p.coil_diameter_mm, p.coil_pitch_mm, p.eta,
            p.compliance_mm_per_N};
}

core::TwoPhaseParams from_array(const std::array<double, kParamCount>& v) {
    return core::TwoPhaseParams{v[0], v[1], v[2], v[3], v[4], v[5]};
}

ParamBounds ParamBounds::defaults_for(const ObservedEndpoints& obs) {
    const double d = obs.spec.diameter_mm;
    const double bundle = core::bundle_diameter(obs.spec, core::Phase::Regular);
    const double theta_max = core::rev_to_rad(obs.theta_max_rev);
    const double compliance_hi = obs.spec.material == core::Material::Compliant ? 2.0 : 0.0;
    return ParamBounds{{{
        {0.5 * d, 2.0 * d},
        {0.02 * theta_max, theta_max},
        {0.5 * bundle, 6.0 * bundle},
        {0.5 * bundle, 2.0 * bundle},
        {0.01, 1.0},
        {0.0, compliance_hi},
    }}};
}

ParamBounds ParamBounds::point(const core::TwoPhaseParams& params) {
    ParamBounds b;
    const auto v = to_array(params);
    for (std::size_t i = 0; i < kParamCount; ++i) b.box[i] = {v[i], v[i]};
    return b;
}

FitResult fit_two_phase(const ObservedEndpoints& obs, const ParamBounds& bounds,
                        const FitOptions& options) {
    obs.validate();
    std::vector<std::size_t> free;
    for (std::size_t i = 0; i < kParamCount; ++i) {
        const Interval& iv = bounds.box[i];
        if (!(iv.lo <= iv.hi)) {
            throw std::invalid_argument(fmt::format("bound {} is empty ({} > {})", i, iv.lo, iv.hi));
        }
        if (iv.hi > iv.lo) free.push_back(i);
    }

    std::array<double, kParamCount> fixed{};
    for (std::size_t i = 0; i < kParamCount; ++i) fixed[i] = bounds.box[i].lo;
    auto decode = [&](std::span<const double> u) {
        std::array<double, kParamCount> v = fixed;
        for (std::size_t k = 0; k < free.size(); ++k) {
            const Interval& iv = bounds.box[free[k]];
            v[free[k]] = iv.lo + std::clamp(u[k], 0.0, 1.0) * (iv.hi - iv.lo);
        }
        return v;
    };
    auto encode = [&](const core::TwoPhaseParams& p) {
        const auto v = to_array(p);
        std::vector<double> u(free.size());
        for (std::size_t k = 0; k < free.size(); ++k) {
            const Interval& iv = bounds.box[free[k]];
            u[k] = std::clamp((v[free[k]] - iv.lo) / (iv.hi - iv.lo), 0.0, 1.0);
        }
        return u;
    };

    if (free.empty()) {
        const auto p = from_array(fixed);
        return FitResult{p, residual(p, obs), 0, true};
    }

    // All start points are drawn up front so they do not depend on scheduling.
    std::vector<std::vector<double>> starts;
    for (const auto& p : options.extra_starts) starts.push_back(encode(p));
    starts.emplace_back(free.size(), 0.5);
    std::mt19937_64 rng(options.seed);
    std::uniform_real_distribution<double> unit(0.05, 0.95);
    for (int s = 1; s < options.starts; ++s) {
        std::vector<double> u(free.size());
        for (double& x : u) x = unit(rng);
        starts.push_back(std::move(u));
    }

    const Objective objective = [&](std::span<const double> u) {
        return guided_residual(from_array(decode(u)), obs);
    };
    NelderMeadOptions nm;
    nm.max_iterations = options.max_iterations;
    nm.lower.assign(free.size(), 0.0);
    nm.upper.assign(free.size(), 1.0);
    nm.f_tolerance = 1e-18;
    nm.x_tolerance = 1e-11;

    std::vector<FitResult> runs(starts.size());
    parallel_for(starts.size(), options.threads, [&](std::size_t i) {
        NelderMeadOptions local = nm;
        NelderMeadResult best = nelder_mead(objective, starts[i], local);
        int iterations = best.iterations;
        bool converged = best.converged;
        for (int round = 0; round < options.polish_rounds; ++round) {
            local.initial_step = 0.05;
            NelderMeadResult again = nelder_mead(objective, best.x, local);
            iterations += again.iterations;
            const bool improved = again.value < best.value;
            if (improved) {
                best = again;
            }
            converged = again.converged;
            if (!improved) break;
        }
        const auto params = from_array(decode(best.x));
        const double r = residual(params, obs);
        runs[i] = FitResult{params, r, iterations, converged && r < kInfeasiblePenalty};
    });

    FitResult out = runs.front();
    int total_iterations = 0;
    for (const FitResult& r : runs) {
        total_iterations += r.iterations;
        if (r.residual < out.residual ||
            (r.residual == out.residual &&
             lexicographically_less(to_array(r.params), to_array(out.params)))) {
            out = r;
        }
    }
    out.iterations = total_iterations;
    return out;
}

double GridAxis::at(std::size_t i) const {
    if (count <= 1) return lo;
    return lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(count - 1);
}

std::size_t GridSpec::total_points() const {
    std::size_t total = 1;
    for (const GridAxis& a : axes) {
        if (a.count == 0) return 0;
        if (total > std::numeric_limits<std::size_t>::max() / a.count) {
            return std::numeric_limits<std::size_t>::max();
        }
        total *= a.count;
    }
    return total;
}

GridSpec GridSpec::over(const ParamBounds& bounds, std::size_t count) {
    GridSpec g;
    for (std::size_t i = 0; i < kParamCount; ++i) {
        const Interval& iv = bounds.box[i];
        g.axes[i] = GridAxis{iv.lo, iv.hi, iv.hi > iv.lo ? count : 1};
    }
    return g;
}

GridResult grid_oracle(const ObservedEndpoints& obs, const GridSpec& grid, std::size_t cap,
                       unsigned threads) {
    const std::size_t total = grid.total_points();
    if (total == 0) throw std::invalid_argument("grid has an empty axis");
    if (total > cap) {
        throw std::invalid_argument(
            fmt::format("grid of {} points exceeds the cap of {}", total, cap));
    }
    for (const GridAxis& a : grid.axes) {
        if (!(a.lo <= a.hi)) throw std::invalid_argument("grid axes must be ascending");
    }

    auto params_at = [&](std::size_t index) {
        std::array<double, kParamCount> v{};
        for (std::size_t k = kParamCount; k-- > 0;) {
            const std::size_t c = grid.axes[k].count;
            v[k] = grid.axes[k].at(index % c);
            index /= c;
        }
        return v;
    };

    // Linear index order is lexicographic parameter order, so the smallest
    // index among equal residuals is the lexicographic tie-break.
    struct Best {
        double residual = std::numeric_limits<double>::infinity();
        std::size_t index = 0;
    };
    const std::size_t chunks = std::min<std::size_t>(total, 256);
    std::vector<Best> partial(chunks);
    parallel_for(chunks, threads, [&](std::size_t c) {
        const std::size_t begin = total * c / chunks;
        const std::size_t end = total * (c + 1) / chunks;
        Best best{std::numeric_limits<double>::infinity(), begin};
        for (std::size_t i = begin; i < end; ++i) {
            const double r = residual(from_array(params_at(i)), obs);
            if (r < best.residual) best = Best{r, i};
        }
        partial[c] = best;
    });
    Best best = partial.front();
    for (const Best& b : partial) {
        if (b.residual < best.residual || (b.residual == best.residual && b.index < best.index)) {
            best = b;
        }
    }
    return GridResult{from_array(params_at(best.index)), best.residual, total};
}

}  // namespace tsa::calibration
