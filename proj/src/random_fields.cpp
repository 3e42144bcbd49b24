#include "qmaxwell/random_fields.hpp"

#include <cmath>
#include <numbers>

namespace qmax {

Eigen::VectorXd random_smooth_field(const Grid& grid, std::mt19937_64& rng) {
    std::normal_distribution<double> normal(0.0, 1.0);
    const int n = grid.num_points();
    const int harmonics = 8;
    Eigen::VectorXd out = Eigen::VectorXd::Constant(n, normal(rng));
    for (int k = 1; k <= harmonics; ++k) {
        const double a = normal(rng);
        const double b = normal(rng);
        const double freq = 2.0 * std::numbers::pi * k / grid.length();
        for (int i = 0; i < n; ++i) {
            const double x = grid.nodes()[i];
            out[i] += a * std::cos(freq * x) + b * std::sin(freq * x);
        }
    }
    return out / std::sqrt(grid.inner(out, out));
}

Eigen::VectorXd random_unit_field(const Grid& grid, std::mt19937_64& rng) {
    std::normal_distribution<double> normal(0.0, 1.0);
    Eigen::VectorXd out(grid.num_points());
    for (int i = 0; i < out.size(); ++i) out[i] = normal(rng);
    return out / std::sqrt(grid.inner(out, out));
}

DensityMatrix random_psd_state(const GridPtr& grid, std::mt19937_64& rng) {
    std::normal_distribution<double> normal(0.0, 1.0);
    const int n = grid->num_points();
    Eigen::MatrixXd w(n, n);
    for (int i = 0; i < n; ++i) {
        for (int j = 0; j < n; ++j) w(i, j) = normal(rng);
    }
    Eigen::MatrixXd x = w * w.transpose();
    x /= x.trace();
    return DensityMatrix::from_kernel(x / grid->spacing(), grid);
}

} // namespace qmax
