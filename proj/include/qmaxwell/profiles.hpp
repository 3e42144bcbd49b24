#pragma once

#include "qmaxwell/grid.hpp"

#include <Eigen/Dense>

namespace qmax {

enum class ProfileFamily { gaussian, double_gaussian, bump, uniform };

/// Analytic parameters; only the fields used by the chosen family matter.
struct ProfileParams {
    double center{0.0};
    double width{1.0};
    double center2{0.0};
    double width2{1.0};
    double weight2{0.5};
};

/// Un-normalized density samples of the chosen family on the grid nodes.
/// On periodic grids distances wrap around, so the profile stays smooth
/// across the seam. Flooring and mass normalization happen in
/// ConstraintProfile::from_density.
Eigen::VectorXd profile_density(const Grid& grid, ProfileFamily family,
                                const ProfileParams& params);

} // namespace qmax
