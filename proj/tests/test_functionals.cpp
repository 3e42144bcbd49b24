#include "qmaxwell/entropy.hpp"

#include "qmaxwell/errors.hpp"
#include "support.hpp"

#include <doctest.h>

#include <cmath>
#include <random>

using namespace qmax;
using namespace qmax::testing;

TEST_CASE("entropy_value: Boltzmann and regularized values") {
    EntropySpec boltzmann{};
    CHECK(entropy_value(1.0, boltzmann) == doctest::Approx(-1.0).epsilon(1e-15));
    CHECK(entropy_value(0.0, boltzmann) == 0.0);

    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> xdist(0.0, 1.0);
    std::uniform_real_distribution<double> edist(1e-6, 0.5);
    for (int trial = 0; trial < 1000; ++trial) {
        const double x = xdist(rng);
        const EntropySpec reg = boltzmann.with_eta(edist(rng));
        CHECK(entropy_value(0.0, reg) == doctest::Approx(0.0).epsilon(1e-15));
        CHECK(entropy_value(x, reg) >= entropy_value(x, boltzmann) - 1e-14);
    }

    CHECK_THROWS_AS(entropy_value(-0.1, boltzmann), config_error);
}

TEST_CASE("entropy_value: Fermi-Dirac domain and symmetry") {
    EntropySpec fd{EntropyKind::fermi_dirac, 1.0, 0.0};
    CHECK(entropy_value(0.0, fd) == 0.0);
    CHECK(entropy_value(1.0, fd) == 0.0);
    CHECK(entropy_value(0.5, fd) == doctest::Approx(std::log(0.5)).epsilon(1e-14));
    CHECK_THROWS_AS(entropy_value(1.2, fd), config_error);
    CHECK_THROWS_AS(EntropySpec(EntropyKind::fermi_dirac, 1.0, 0.1).validate(), config_error);
    CHECK_THROWS_AS(EntropySpec(EntropyKind::boltzmann, 1.0, 0.7).validate(), config_error);
    CHECK_THROWS_AS(EntropySpec(EntropyKind::boltzmann, -1.0, 0.0).validate(), config_error);
}

TEST_CASE("free_energy: zero operator and the rank-one admissible state") {
    GridPtr g = make_grid(24, 20.0, Boundary::periodic);
    const ConstraintProfile target = gaussian_profile(g);

    const DensityMatrix zero = DensityMatrix::from_spectral(
        g, Eigen::VectorXd::Zero(1),
        target.sqrt_n() / std::sqrt(g->inner(target.sqrt_n(), target.sqrt_n())));
    const FreeEnergy f0 = free_energy(zero, EntropySpec{});
    CHECK(f0.energy == 0.0);
    CHECK(f0.entropy == 0.0);
    CHECK(f0.value == 0.0);

    const DensityMatrix sigma =
        spectral_decompose(target.sqrt_n() * target.sqrt_n().transpose(), g);
    const FreeEnergy f = free_energy(sigma, EntropySpec{});
    const double grad_energy = g->inner(target.grad_sqrt_n(), target.grad_sqrt_n());
    CHECK(f.energy == doctest::Approx(grad_energy).epsilon(1e-12));
    CHECK(f.entropy == doctest::Approx(-1.0).epsilon(1e-12));
    CHECK(f.value == doctest::Approx(grad_energy - 1.0).epsilon(1e-12));
}

TEST_CASE("kinetic energy is linear in the state") {
    std::mt19937_64 rng(11);
    GridPtr g = make_grid(14, 3.0, Boundary::periodic);
    const Eigen::MatrixXd k1 = random_psd_kernel(*g, rng);
    const Eigen::MatrixXd k2 = random_psd_kernel(*g, rng);
    const double a = 0.3, b = 1.7;
    const double lhs = kinetic_energy(spectral_decompose(a * k1 + b * k2, g));
    const double rhs = a * kinetic_energy(spectral_decompose(k1, g)) +
                       b * kinetic_energy(spectral_decompose(k2, g));
    CHECK(lhs == doctest::Approx(rhs).epsilon(1e-10));
}

TEST_CASE("F_eta dominates F and the gap h(eta) decreases along eta = 2^-j") {
    std::mt19937_64 rng(17);
    GridPtr g = make_grid(20, 5.0, Boundary::periodic);
    const DensityMatrix rho = spectral_decompose(random_psd_kernel(*g, rng), g);
    const EntropySpec base{};
    const FreeEnergy f = free_energy(rho, base);

    double previous_gap = std::numeric_limits<double>::infinity();
    for (int j = 2; j <= 20; ++j) {
        const EntropySpec reg = base.with_eta(std::ldexp(1.0, -j));
        const FreeEnergy freg = free_energy(rho, reg);
        CHECK(freg.value >= f.value - 1e-13);
        const double gap = freg.entropy - f.entropy;
        CHECK(gap >= -1e-14);
        CHECK(gap <= previous_gap + 1e-14);
        previous_gap = gap;
    }
}

TEST_CASE("fermi_dirac free energy rejects spectra above one") {
    GridPtr g = make_grid(6, 2.0, Boundary::periodic);
    Eigen::VectorXd values(1);
    values << 1.5;
    Eigen::MatrixXd vec(6, 1);
    vec.setConstant(1.0 / std::sqrt(2.0)); // h = 1/3, norm = 1
    const DensityMatrix rho = DensityMatrix::from_spectral(g, values, vec);
    CHECK_THROWS_AS(free_energy(rho, EntropySpec{EntropyKind::fermi_dirac, 1.0, 0.0}),
                    config_error);
}

TEST_CASE("log-Sobolev gap: basis-flip invariance and degenerate input") {
    std::mt19937_64 rng(29);
    GridPtr g = make_grid(18, 6.0, Boundary::periodic);
    const DensityMatrix rho = spectral_decompose(random_psd_kernel(*g, rng), g);
    const double gap = log_sobolev_gap(rho);

    Eigen::MatrixXd flipped = rho.eigenvectors();
    for (int p = 0; p < flipped.cols(); p += 2) flipped.col(p) *= -1.0;
    const DensityMatrix rho_flipped =
        DensityMatrix::from_spectral(g, rho.eigenvalues(), flipped);
    CHECK(log_sobolev_gap(rho_flipped) == doctest::Approx(gap).epsilon(1e-12));

    const DensityMatrix constant_state = DensityMatrix::from_spectral(
        g, Eigen::VectorXd::Ones(1),
        Eigen::MatrixXd::Constant(18, 1, 1.0 / std::sqrt(6.0)));
    CHECK_THROWS_AS(log_sobolev_gap(constant_state), numerical_error); // zero kinetic energy
}
