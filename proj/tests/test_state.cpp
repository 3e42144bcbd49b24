#include "qmaxwell/density_matrix.hpp"

#include "qmaxwell/errors.hpp"
#include "support.hpp"

#include <doctest.h>

#include <cmath>
#include <random>

using namespace qmax;
using namespace qmax::testing;

TEST_CASE("spectral_decompose: identity kernel at N=2") {
    GridPtr g = make_grid(2, 1.0, Boundary::periodic);
    const DensityMatrix rho = spectral_decompose(Eigen::MatrixXd::Identity(2, 2), g);
    CHECK(rho.eigenvalues()[0] == doctest::Approx(0.5).epsilon(1e-14));
    CHECK(rho.eigenvalues()[1] == doctest::Approx(0.5).epsilon(1e-14));
    CHECK(rho.trace() == doctest::Approx(1.0).epsilon(1e-14));
}

TEST_CASE("spectral_decompose: rank-one state on sqrt(n)") {
    GridPtr g = make_grid(24, 20.0, Boundary::periodic);
    const ConstraintProfile target = gaussian_profile(g);
    const Eigen::MatrixXd kernel = target.sqrt_n() * target.sqrt_n().transpose();
    const DensityMatrix sigma = spectral_decompose(kernel, g);
    CHECK(sigma.eigenvalues()[0] == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(sigma.eigenvalues().tail(23).cwiseAbs().maxCoeff() < 1e-12);
    // n[sigma] = n exactly
    CHECK((moments(sigma).n - target.n()).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("spectral_decompose: validation") {
    GridPtr g = make_grid(4, 1.0, Boundary::periodic);
    Eigen::MatrixXd asym = Eigen::MatrixXd::Zero(4, 4);
    asym(0, 1) = 1.0; // not symmetric
    CHECK_THROWS_AS(spectral_decompose(asym, g), numerical_error);

    Eigen::MatrixXd indefinite = Eigen::MatrixXd::Identity(4, 4);
    indefinite(3, 3) = -1.0;
    CHECK_THROWS_AS(spectral_decompose(indefinite, g), numerical_error);
}

TEST_CASE("kernel round trip") {
    std::mt19937_64 rng(21);
    GridPtr g = make_grid(12, 2.0, Boundary::periodic);
    const Eigen::MatrixXd kernel = random_psd_kernel(*g, rng);
    const DensityMatrix rho = spectral_decompose(kernel, g);
    CHECK((assemble_kernel(rho) - kernel).cwiseAbs().maxCoeff() < 1e-10);
    CHECK((rho.kernel() - kernel).cwiseAbs().maxCoeff() < 1e-10);

    // all-zero spectrum and single-pair assembly
    const Eigen::MatrixXd zero = assemble_kernel(
        DensityMatrix::from_spectral(g, Eigen::VectorXd::Zero(12), rho.eigenvectors()));
    CHECK(zero.cwiseAbs().maxCoeff() == 0.0);

    Eigen::VectorXd one_value = Eigen::VectorXd::Zero(12);
    one_value[0] = 1.0;
    const Eigen::MatrixXd rank1 = assemble_kernel(
        DensityMatrix::from_spectral(g, one_value, rho.eigenvectors()));
    const Eigen::VectorXd phi0 = rho.eigenvectors().col(0);
    CHECK((rank1 - phi0 * phi0.transpose()).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("moments: consistency with traces on random states") {
    std::mt19937_64 rng(42);
    GridPtr g = make_grid(16, 4.0, Boundary::periodic);
    for (int trial = 0; trial < 50; ++trial) {
        const Eigen::MatrixXd kernel = random_psd_kernel(*g, rng);
        const DensityMatrix rho = spectral_decompose(kernel, g);
        const Moments m = moments(rho);

        CHECK(g->integrate(m.n) == doctest::Approx(rho.trace()).epsilon(1e-10));
        CHECK(g->integrate(m.k) == doctest::Approx(kinetic_energy(rho)).epsilon(1e-10));

        // Tr(L rho) as an independent route to the kinetic energy
        const double tr_lrho =
            (g->laplacian().matrix.cwiseProduct(g->spacing() * rho.kernel())).sum();
        CHECK(g->integrate(m.k) == doctest::Approx(tr_lrho).epsilon(1e-10));

        double spectral_entropy = 0.0;
        for (int p = 0; p < rho.num_modes(); ++p) {
            const double x = rho.eigenvalues()[p];
            if (x > 0.0) spectral_entropy += x * std::log(x);
        }
        CHECK(g->integrate(m.s_loc) == doctest::Approx(spectral_entropy).epsilon(1e-10));

        CHECK(m.n.minCoeff() >= 0.0);
        CHECK(m.k.minCoeff() >= 0.0);
        // all eigenvalues <= 1 here (unit trace), so the entropy density is <= 0
        CHECK(m.s_loc.maxCoeff() <= 1e-15);
    }
}

TEST_CASE("moments on a dirichlet grid keep the trace identities") {
    std::mt19937_64 rng(5);
    GridPtr g = make_grid(10, 3.0, Boundary::dirichlet);
    const Eigen::MatrixXd kernel = random_psd_kernel(*g, rng);
    const DensityMatrix rho = spectral_decompose(kernel, g);
    const Moments m = moments(rho);
    CHECK(g->integrate(m.n) == doctest::Approx(rho.trace()).epsilon(1e-10));
    CHECK(g->integrate(m.k) == doctest::Approx(kinetic_energy(rho)).epsilon(1e-10));
}

TEST_CASE("orthonormality is validated in from_spectral") {
    GridPtr g = make_grid(6, 1.0, Boundary::periodic);
    Eigen::MatrixXd bad = Eigen::MatrixXd::Identity(6, 6); // not h-orthonormal (h != 1)
    CHECK_THROWS_AS(
        DensityMatrix::from_spectral(g, Eigen::VectorXd::Ones(6), bad), numerical_error);
}
