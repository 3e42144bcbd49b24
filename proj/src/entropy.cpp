#include "qmaxwell/entropy.hpp"

#include "qmaxwell/errors.hpp"

#include <cmath>
#include <numbers>
#include <string>

namespace qmax {

namespace {
constexpr double kEntropyFloor = 1e-300;
constexpr double kDomainTol = 1e-12;
} // namespace

void EntropySpec::validate() const {
    if (!(temperature > 0.0)) {
        throw config_error("entropy: temperature must be positive");
    }
    if (eta < 0.0 || eta > 0.5) {
        throw config_error("entropy: eta must lie in [0, 0.5]");
    }
    if (kind == EntropyKind::fermi_dirac && eta > 0.0) {
        throw config_error("entropy: eta regularization is defined for the Boltzmann entropy only");
    }
}

EntropySpec EntropySpec::with_eta(double new_eta) const {
    EntropySpec s = *this;
    s.eta = new_eta;
    s.validate();
    return s;
}

double entropy_value(double x, const EntropySpec& spec) {
    if (spec.kind == EntropyKind::boltzmann) {
        if (x < -kDomainTol) {
            throw config_error("entropy: Boltzmann entropy requires x >= 0, got " + std::to_string(x));
        }
        x = std::max(x, 0.0);
        if (spec.eta > 0.0) {
            const double e = spec.eta;
            return (x + e) * std::log(x + e) - x - e * std::log(e);
        }
        if (x < kEntropyFloor) return 0.0;
        return x * std::log(x) - x;
    }
    // Fermi-Dirac
    if (x < -kDomainTol || x > 1.0 + kDomainTol) {
        throw config_error("entropy: Fermi-Dirac entropy requires x in [0,1], got " + std::to_string(x));
    }
    x = std::min(std::max(x, 0.0), 1.0);
    double v = 0.0;
    if (x >= kEntropyFloor) v += x * std::log(x);
    if (1.0 - x >= kEntropyFloor) v += (1.0 - x) * std::log(1.0 - x);
    return v;
}

double entropy_derivative(double x, const EntropySpec& spec) {
    if (spec.kind == EntropyKind::boltzmann) {
        return std::log(x + spec.eta);
    }
    return std::log(x) - std::log(1.0 - x);
}

double entropy_sum(const Eigen::VectorXd& eigenvalues, const EntropySpec& spec) {
    double s = 0.0;
    for (Eigen::Index p = 0; p < eigenvalues.size(); ++p) {
        const double x = eigenvalues[p];
        if (x < kEntropyFloor && spec.eta == 0.0 && spec.kind == EntropyKind::boltzmann) continue;
        s += entropy_value(x, spec);
    }
    return s;
}

FreeEnergy free_energy(const DensityMatrix& rho, const EntropySpec& spec) {
    spec.validate();
    if (spec.kind == EntropyKind::fermi_dirac &&
        rho.num_modes() > 0 && rho.eigenvalues().maxCoeff() > 1.0 + kDomainTol) {
        throw config_error("free_energy: spectrum outside the Fermi-Dirac domain [0,1]");
    }
    FreeEnergy f;
    f.energy = kinetic_energy(rho);
    f.entropy = entropy_sum(rho.eigenvalues(), spec);
    f.value = f.energy + spec.temperature * f.entropy;
    return f;
}

double log_sobolev_gap(const DensityMatrix& rho) {
    const double tr = rho.trace();
    if (!(tr > 0.0)) {
        throw numerical_error("log_sobolev_gap: state has nonpositive trace");
    }
    const double e = kinetic_energy(rho);
    if (!(e > 0.0)) {
        throw numerical_error("log_sobolev_gap: zero kinetic energy, log undefined");
    }

    double spectral = 0.0;
    for (Eigen::Index p = 0; p < rho.num_modes(); ++p) {
        const double x = rho.eigenvalues()[p];
        if (x >= kEntropyFloor) spectral += x * std::log(x);
    }

    const Grid& grid = *rho.grid();
    Eigen::VectorXd n = moments(rho).n;
    Eigen::VectorXd nlogn(n.size());
    for (Eigen::Index i = 0; i < n.size(); ++i) {
        nlogn[i] = (n[i] >= kEntropyFloor) ? n[i] * std::log(n[i]) : 0.0;
    }

    const double d = 1.0;
    const double rhs = spectral +
                       0.5 * d * std::log(std::numbers::e / (2.0 * std::numbers::pi * d) * e / tr) * tr;
    return rhs - grid.integrate(nlogn);
}

EntropyBounds entropy_bounds(const DensityMatrix& rho) {
    const double e = kinetic_energy(rho);
    if (!(e > 0.0)) {
        throw numerical_error("entropy_bounds: zero kinetic energy");
    }
    double spectral = 0.0;
    for (Eigen::Index p = 0; p < rho.num_modes(); ++p) {
        const double x = rho.eigenvalues()[p];
        if (x >= kEntropyFloor) spectral += x * std::log(x);
    }
    const Grid& grid = *rho.grid();
    Eigen::VectorXd n = moments(rho).n;
    Eigen::VectorXd nlogn(n.size());
    for (Eigen::Index i = 0; i < n.size(); ++i) {
        nlogn[i] = (n[i] >= kEntropyFloor) ? n[i] * std::log(n[i]) : 0.0;
    }
    const double d = 1.0;
    EntropyBounds b;
    b.neg_entropy = -spectral;
    b.upper_bound = 0.5 * d * std::log(std::numbers::e * e / (2.0 * std::numbers::pi * d)) -
                    grid.integrate(nlogn);
    return b;
}

} // namespace qmax
