#include "tsa/nelder_mead.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace tsa {

namespace {

void project(std::vector<double>& x, const NelderMeadOptions& o) {
    if (o.lower.empty()) return;
    for (std::size_t i = 0; i < x.size(); ++i) x[i] = std::clamp(x[i], o.lower[i], o.upper[i]);
}

}  // namespace

NelderMeadResult nelder_mead(const Objective& f, std::vector<double> start,
                             const NelderMeadOptions& options) {
    const std::size_t n = start.size();
    if (!options.lower.empty() && (options.lower.size() != n || options.upper.size() != n)) {
        throw std::invalid_argument("Nelder-Mead bounds do not match the dimension");
    }
    project(start, options);
    NelderMeadResult result;
    if (n == 0) {
        result.x = start;
        result.value = f(start);
        result.converged = true;
        return result;
    }

    std::vector<std::vector<double>> simplex(n + 1, start);
    for (std::size_t i = 0; i < n; ++i) {
        double step = options.initial_step;
        if (!options.lower.empty() && start[i] + step > options.upper[i]) step = -step;
        simplex[i + 1][i] += step;
        project(simplex[i + 1], options);
    }
    std::vector<double> values(n + 1);
    for (std::size_t i = 0; i <= n; ++i) values[i] = f(simplex[i]);

    std::vector<std::size_t> order(n + 1);
    std::vector<double> centroid(n);
    std::vector<double> trial(n);
    auto make_point = [&](double coeff, const std::vector<double>& worst) {
        for (std::size_t j = 0; j < n; ++j) trial[j] = centroid[j] + coeff * (worst[j] - centroid[j]);
        project(trial, options);
        return f(trial);
    };

    while (true) {
        std::iota(order.begin(), order.end(), 0);
        // Stable ordering keeps runs reproducible when values tie.
        std::stable_sort(order.begin(), order.end(),
                         [&](std::size_t a, std::size_t b) { return values[a] < values[b]; });
        const std::size_t best = order.front();
        const std::size_t worst = order.back();
        const std::size_t second = order[n - 1];

        double diameter = 0.0;
        for (std::size_t i = 0; i <= n; ++i) {
            for (std::size_t j = 0; j < n; ++j) {
                diameter = std::max(diameter, std::abs(simplex[i][j] - simplex[best][j]));
            }
        }
        if (values[worst] - values[best] <= options.f_tolerance && diameter <= options.x_tolerance) {
            result.converged = true;
            break;
        }
        if (diameter <= options.x_tolerance * 1e-3) {
            result.converged = true;
            break;
        }
        if (result.iterations >= options.max_iterations) break;
        ++result.iterations;

        std::fill(centroid.begin(), centroid.end(), 0.0);
        for (std::size_t i = 0; i < n; ++i) {
            for (std::size_t j = 0; j < n; ++j) centroid[j] += simplex[order[i]][j];
        }
        for (double& c : centroid) c /= static_cast<double>(n);

        const double fr = make_point(-1.0, simplex[worst]);
        const std::vector<double> reflected = trial;
        if (fr < values[best]) {
            const double fe = make_point(-2.0, simplex[worst]);
            if (fe < fr) {
                simplex[worst] = trial;
                values[worst] = fe;
            } else {
                simplex[worst] = reflected;
                values[worst] = fr;
            }
            continue;
        }
        if (fr < values[second]) {
            simplex[worst] = reflected;
            values[worst] = fr;
            continue;
        }
        const bool outside = fr < values[worst];
        const double fc = make_point(outside ? -0.5 : 0.5, simplex[worst]);
        if (fc < (outside ? fr : values[worst])) {
            simplex[worst] = trial;
            values[worst] = fc;
            continue;
        }
        for (std::size_t i = 0; i <= n; ++i) {
            if (i == best) continue;
            for (std::size_t j = 0; j < n; ++j) {
                simplex[i][j] = simplex[best][j] + 0.5 * (simplex[i][j] - simplex[best][j]);
            }
            project(simplex[i], options);
            values[i] = f(simplex[i]);
        }
    }

    std::size_t best = 0;
    for (std::size_t i = 1; i <= n; ++i) {
        if (values[i] < values[best]) best = i;
    }
    result.x = simplex[best];
    result.value = values[best];
    return result;
}

}  // namespace tsa
