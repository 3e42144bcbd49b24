#pragma once

#include "qmaxwell/density_matrix.hpp"
#include "qmaxwell/grid.hpp"

#include <Eigen/Dense>
#include <random>

namespace qmax {

/// Low-frequency random field: the first 8 harmonics of the domain with
/// standard normal coefficients, normalized to unit h-norm.
Eigen::VectorXd random_smooth_field(const Grid& grid, std::mt19937_64& rng);

/// White-noise node field, normalized to unit h-norm.
Eigen::VectorXd random_unit_field(const Grid& grid, std::mt19937_64& rng);

/// Random full-rank PSD state with unit trace (Wishart kernel).
DensityMatrix random_psd_state(const GridPtr& grid, std::mt19937_64& rng);

} // namespace qmax
