#include <doctest.h>

#include <cmath>

#include "wml/profile.hpp"
#include "wml/spectral.hpp"

using namespace wml;

namespace {

struct Shared {
    SpectralOptions opt;
    std::shared_ptr<const SpectralMeasure> rho;
    std::unique_ptr<DistortedFourier> F;
    Shared() {
        rho = std::make_shared<SpectralMeasure>(connection_and_measure(opt.xi_grid(), opt));
        F = std::make_unique<DistortedFourier>(opt, rho);
    }
};

const Shared& shared() {
    static const Shared s;
    return s;
}

double test_function(double R) { return std::pow(R, 1.5) * std::exp(-R * R); }

} // namespace

TEST_CASE("regular eigenfunction at xi = 0 is the zero-energy resonance") {
    const Eigen::VectorXd grid = log_grid(1e-2, 1e2, 100);
    const auto e = regular_eigenfunction(0.0, grid, {});
    for (Eigen::Index i = 0; i < grid.size(); ++i)
        CHECK(e.values(i).real() == doctest::Approx(FundamentalPair::phi(grid(i))).epsilon(1e-6));
}

TEST_CASE("regular eigenfunction behaves like R^{3/2} at the origin") {
    Eigen::VectorXd grid(2);
    grid << 1e-3, 1.0;
    for (double xi : {0.01, 1.0, 100.0}) {
        const auto e = regular_eigenfunction(xi, grid, {});
        CHECK(e.values(0).real() / std::pow(1e-3, 1.5) == doctest::Approx(1).epsilon(1e-4));
    }
}

TEST_CASE("Wronskian of the Frobenius pair is one") {
    const Eigen::VectorXd grid = uniform_grid(0.05, 20, 60);
    for (double xi : {1e-3, 0.5, 30.0, 1e3}) {
        const auto phi = regular_eigenfunction(xi, grid, {});
        const auto theta = secondary_eigenfunction(xi, grid, {});
        for (Eigen::Index i = 0; i < grid.size(); ++i)
            CHECK(std::abs(wronskian(theta.values(i), theta.derivs(i), phi.values(i), phi.derivs(i)) - 1.0) < 1e-6);
    }
}

TEST_CASE("eigenfunctions solve the spectral equation") {
    CHECK(eigen_residual(regular_eigenfunction(2.0, uniform_grid(0.1, 10, 2000), {})) < 1e-6);
}

TEST_CASE("Weyl solution initialization and Wronskian") {
    SpectralOptions opt;
    for (double xi : {0.04, 1.0, 25.0}) {
        const double far = opt.weyl_far * std::max(1.0, 1 / std::sqrt(xi));
        const double modulus = std::abs(weyl_asymptotic(xi, far)[0]) * std::pow(xi, 0.25);
        CHECK(std::abs(modulus - 1) < 1 / (far * std::sqrt(xi)));

        const Eigen::VectorXd grid = uniform_grid(0.2, 8, 30);
        const auto psi = weyl_solution(xi, grid, opt);
        const cplx w0 = wronskian(psi.values(0), psi.derivs(0), std::conj(psi.values(0)), std::conj(psi.derivs(0)));
        CHECK(std::abs(w0.real()) < 1e-6 * std::abs(w0));
        for (Eigen::Index i = 1; i < grid.size(); ++i) {
            const cplx w = wronskian(psi.values(i), psi.derivs(i), std::conj(psi.values(i)), std::conj(psi.derivs(i)));
            CHECK(std::abs(w - w0) < 1e-6 * std::abs(w0));
        }
    }
}

TEST_CASE("Weyl solution converges in the launch radius") {
    SpectralOptions a, b;
    b.weyl_far = 2 * a.weyl_far;
    Eigen::VectorXd grid(2);
    grid << 1.0, 2.0;
    const cplx pa = weyl_solution(4.0, grid, a).values(0), pb = weyl_solution(4.0, grid, b).values(0);
    CHECK(std::abs(pa - pb) < 1e-4 * std::abs(pb));
}

TEST_CASE("connection coefficient reconstructs the regular solution") {
    SpectralOptions opt;
    for (double xi : {0.01, 1.0, 100.0}) {
        const cplx a = connection_coefficient(xi, opt);
        const Eigen::VectorXd grid = Eigen::Vector3d(0.3, 1.7, 3.1);
        const auto psi = weyl_solution(xi, grid, opt);
        const auto phi = regular_eigenfunction(xi, grid, opt);
        for (Eigen::Index i = 0; i < grid.size(); ++i) {
            const double rec = 2 * (a * psi.values(i)).real();
            CHECK(std::abs(rec - phi.values(i).real()) < 1e-4 * phi.values.cwiseAbs().maxCoeff());
        }
    }
}

TEST_CASE("connection coefficient and measure asymptotics") {
    const auto& t = shared().rho->tables();
    double lo = INFINITY, hi = 0;
    for (Eigen::Index i = 0; i < t.xi.size(); ++i) {
        if (t.xi(i) < 1e3) continue;
        const double q = std::abs(t.a(i)) * std::sqrt(t.xi(i));
        lo = std::min(lo, q);
        hi = std::max(hi, q);
    }
    CHECK(hi / lo < 1.5);
    CHECK(t.hi_slope == doctest::Approx(1).epsilon(0.05));
    for (Eigen::Index i = 0; i < t.xi.size(); ++i)
        CHECK(t.rho(i) == doctest::Approx(1 / (4 * std::acos(-1.0) * std::norm(t.a(i)))).epsilon(1e-12));
}

TEST_CASE("measure interpolation and small-xi model") {
    const auto& rho = *shared().rho;
    const auto& t = rho.tables();
    CHECK(rho(t.xi(100)) == doctest::Approx(t.rho(100)).epsilon(1e-10));
    const double x = t.xi(0) / 10, L = std::log(x);
    CHECK(rho(x) == doctest::Approx(1 / (4 * std::acos(-1.0) * x * (t.low_P * L * L + t.low_Q * L + t.low_S))).epsilon(1e-10));
    CHECK(rho.low_mass(t.xi(0)) > rho.low_mass(x));
    CHECK(rho.low_mass(x) > 0);
}

TEST_CASE("forward transform is linear") {
    const auto& F = *shared().F;
    auto g = [](double R) { return std::pow(R, 1.5) * std::exp(-(R - 2) * (R - 2)); };
    const auto a = F.forward(test_function), b = F.forward(g);
    const auto c = F.forward([&](double R) { return test_function(R) + g(R); });
    CHECK((c.values - a.values - b.values).cwiseAbs().maxCoeff() < 1e-12 * c.values.cwiseAbs().maxCoeff());
}

TEST_CASE("Plancherel and round trip") {
    const auto& F = *shared().F;
    const auto c = F.forward(test_function);
    const double ratio = F.spectral_norm2(c) / F.radial_norm2(test_function);
    CHECK(ratio > 0.98);
    CHECK(ratio < 1.02);
    const Eigen::VectorXd grid = uniform_grid(0.05, 8, 160);
    const auto back = F.inverse(c, grid);
    const Eigen::VectorXd exact = grid.unaryExpr(&test_function);
    CHECK((back.values - exact).norm() / exact.norm() < 1e-2);
}

TEST_CASE("a single frequency bin inverts to its eigenfunction") {
    const auto& F = *shared().F;
    SpectralCoefficients x;
    x.xi = F.xi();
    x.values = Eigen::VectorXd::Zero(x.xi.size());
    const Eigen::Index j = 300;
    x.values(j) = 1;
    const Eigen::VectorXd grid = uniform_grid(0.1, 6, 40);
    const auto f = F.inverse(x, grid);
    const auto phi = regular_eigenfunction(x.xi(j), grid, F.options());
    const double scale = F.xi_weights()(j) * F.measure()(x.xi(j));
    for (Eigen::Index i = 0; i < grid.size(); ++i)
        CHECK(f.values(i) == doctest::Approx(scale * phi.values(i).real()).epsilon(1e-8).scale(1e-12));
}
