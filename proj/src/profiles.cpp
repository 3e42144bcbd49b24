#include "qmaxwell/profiles.hpp"

#include "qmaxwell/errors.hpp"

#include <cmath>
#include <numbers>

namespace qmax {

namespace {

double folded_distance(const Grid& grid, double x, double center) {
    if (grid.boundary() == Boundary::periodic) {
        return std::remainder(x - center, grid.length());
    }
    return x - center;
}

double gaussian(double d, double width) { return std::exp(-0.5 * d * d / (width * width)); }

double cos_bump(double d, double width) {
    if (std::abs(d) >= width) return 0.0;
    const double c = std::cos(0.5 * std::numbers::pi * d / width);
    return c * c * c * c;
}

} // namespace

Eigen::VectorXd profile_density(const Grid& grid, ProfileFamily family,
                                const ProfileParams& params) {
    if (family != ProfileFamily::uniform && !(params.width > 0.0)) {
        throw config_error("profile: width must be positive");
    }
    const int n = grid.num_points();
    Eigen::VectorXd out(n);
    for (int i = 0; i < n; ++i) {
        const double x = grid.nodes()[i];
        switch (family) {
        case ProfileFamily::gaussian:
            out[i] = gaussian(folded_distance(grid, x, params.center), params.width);
            break;
        case ProfileFamily::double_gaussian:
            if (!(params.width2 > 0.0)) {
                throw config_error("profile: width2 must be positive");
            }
            out[i] = gaussian(folded_distance(grid, x, params.center), params.width) +
                     params.weight2 * gaussian(folded_distance(grid, x, params.center2), params.width2);
            break;
        case ProfileFamily::bump:
            out[i] = cos_bump(folded_distance(grid, x, params.center), params.width);
            break;
        case ProfileFamily::uniform:
            out[i] = 1.0;
            break;
        }
    }
    return out;
}

} // namespace qmax
