#pragma once

#include <functional>
#include <span>
#include <vector>

namespace tsa {

struct NelderMeadOptions {
    int max_iterations = 2000;
    double initial_step = 0.1;
    double f_tolerance = 1e-15;  ///< absolute spread of simplex values
    double x_tolerance = 1e-10;  ///< simplex diameter
    /// Box for projection; empty means unbounded.
    std::vector<double> lower;
    std::vector<double> upper;
};

struct NelderMeadResult {
    std::vector<double> x;
    double value = 0.0;
    int iterations = 0;
    bool converged = false;
};

using Objective = std::function<double(std::span<const double>)>;

/// Derivative-free simplex descent. Trial points are projected onto the
/// box, so every evaluated point is feasible with respect to the bounds.
NelderMeadResult nelder_mead(const Objective& f, std::vector<double> start,
                             const NelderMeadOptions& options = {});

}  // namespace tsa
