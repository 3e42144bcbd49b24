#pragma once

// Shared fixtures for the test suites: the canonical verification instance
// (periodic box of length 20, centered Gaussian target) and small helpers.

#include "qmaxwell/constraint.hpp"
#include "qmaxwell/entropy.hpp"
#include "qmaxwell/grid.hpp"
#include "qmaxwell/profiles.hpp"
#include "qmaxwell/solve.hpp"

#include <Eigen/Dense>
#include <random>

namespace qmax::testing {

inline ConstraintProfile gaussian_profile(const GridPtr& grid) {
    ProfileParams params;
    params.center = grid->length() / 2.0;
    params.width = grid->length() / 10.0;
    return ConstraintProfile::from_density(grid, profile_density(*grid, ProfileFamily::gaussian, params));
}

inline Problem gaussian_problem(int n, double length = 20.0) {
    GridPtr grid = make_grid(n, length, Boundary::periodic);
    return Problem{grid, gaussian_profile(grid), EntropySpec{}};
}

inline Problem uniform_problem(int n, double length = 16.0) {
    GridPtr grid = make_grid(n, length, Boundary::periodic);
    ConstraintProfile target = ConstraintProfile::from_density(
        grid, profile_density(*grid, ProfileFamily::uniform, ProfileParams{}));
    return Problem{grid, target, EntropySpec{}};
}

/// Random symmetric PSD kernel with unit trace.
inline Eigen::MatrixXd random_psd_kernel(const Grid& grid, std::mt19937_64& rng) {
    std::normal_distribution<double> normal(0.0, 1.0);
    const int n = grid.num_points();
    Eigen::MatrixXd w(n, n);
    for (int i = 0; i < n; ++i) {
        for (int j = 0; j < n; ++j) w(i, j) = normal(rng);
    }
    Eigen::MatrixXd x = w * w.transpose();
    x /= x.trace();
    return x / grid.spacing();
}

} // namespace qmax::testing
