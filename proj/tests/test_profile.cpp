#include <doctest.h>

#include <cmath>
#include <map>

#include "wml/approx_solution.hpp"
#include "wml/profile.hpp"

using namespace wml;

namespace {

const FirstCorrection& v1_for(double nu) {
    static std::map<double, FirstCorrection> cache;
    auto it = cache.find(nu);
    if (it == cache.end()) {
        Tolerances tol;
        it = cache.emplace(nu, first_correction(nu, log_grid(tol.r_min, tol.r_max, tol.r_points), tol)).first;
    }
    return it->second;
}

double spread(const std::vector<double>& v) {
    double lo = INFINITY, hi = 0;
    for (double x : v) {
        lo = std::min(lo, std::abs(x));
        hi = std::max(hi, std::abs(x));
    }
    return hi / lo;
}

} // namespace

TEST_CASE("fundamental pair solves the linearized equation with Wronskian 2") {
    for (double R : log_grid(1e-2, 1e2, 40)) {
        CHECK(FundamentalPair::wronskian(R) == doctest::Approx(2).epsilon(1e-12));
        const double h = 1e-3 * R, h2 = 2e-4 * R;
        for (auto f : {&FundamentalPair::phi<double>, &FundamentalPair::theta<double>}) {
            const double d2 = (f(R + h2) - 2 * f(R) + f(R - h2)) / (h2 * h2);
            const double scale = std::abs(d2) + std::abs(linearized_potential(R) * f(R));
            CHECK(std::abs(-d2 + linearized_potential(R) * f(R)) < 1e-5 * scale);
        }
        CHECK(FundamentalPair::dphi(R) ==
              doctest::Approx((FundamentalPair::phi(R + h) - FundamentalPair::phi(R - h)) / (2 * h)).epsilon(1e-5));
        CHECK(FundamentalPair::dtheta(R) ==
              doctest::Approx((FundamentalPair::theta(R + h) - FundamentalPair::theta(R - h)) / (2 * h)).epsilon(1e-5));
    }
}

TEST_CASE("v1 vanishes to third order at the origin") {
    for (double nu : {0.25, 1.0}) {
        const auto& v1 = v1_for(nu);
        CHECK(v1.profile.vanishing_order == 3);
        std::vector<double> q;
        for (Eigen::Index i = 0; i < v1.profile.grid.size() && v1.profile.grid(i) <= 1e-2; ++i)
            q.push_back(v1.profile.values(i) / std::pow(v1.profile.grid(i), 3));
        CHECK(spread(q) < 1.01);
    }
}

TEST_CASE("v1 grows like d1 R log R + d2 R") {
    for (double nu : {0.25, 0.5, 1.0}) {
        const auto& v1 = v1_for(nu);
        CHECK(v1.d1 != 0);
        CHECK(v1.fit_residual < 0.02);
    }
}

TEST_CASE("v1 at R = 1 matches the brute-force Simpson value") {
    // composite Simpson with 1e6 panels on both variation-of-constants integrals
    const double frozen = 0.4415748624659585;
    const auto& v1 = v1_for(0.5);
    CHECK(first_correction_at(v1, 1.0) == doctest::Approx(frozen).epsilon(1e-9));
    CHECK(v1.value(1.0) == doctest::Approx(frozen).epsilon(1e-6));
}

TEST_CASE("v1 satisfies its defining equation") {
    const auto& v1 = v1_for(0.5);
    const double h = 0.05;
    for (double R : {0.05, 0.7, 3.0, 40.0}) {
        const double s = std::log(R);
        double g[5];
        for (int k = -2; k <= 2; ++k) g[k + 2] = first_correction_at(v1, std::exp(s + k * h));
        const double gss = (-g[0] + 16 * g[1] - 30 * g[2] + 16 * g[3] - g[4]) / (12 * h * h);
        CHECK((gss - cos_2q(R) * g[2]) / (R * R) == doctest::Approx(e0_scaled(R, 0.5)).epsilon(1e-4));
    }
}

TEST_CASE("v1 extension rules agree with the stored grid") {
    const auto& v1 = v1_for(1.0);
    const double R = 1e-3 / 2;
    CHECK(v1.value(R) == doctest::Approx(v1.profile.values(0) * std::pow(R / v1.profile.grid(0), 3)).epsilon(1e-3));
    const auto jet = v1.jet(2.0);
    CHECK(jet[0] == doctest::Approx(v1.value(2.0)));
    CHECK(jet[1] == doctest::Approx(v1.derivative(2.0)));
}

TEST_CASE("first error envelope and vanishing order") {
    for (double nu : {0.25, 1.0}) {
        const auto e1 = first_error_expansion(v1_for(nu));
        std::vector<double> near, far;
        for (Eigen::Index i = 0; i < e1.profile.grid.size(); ++i) {
            const double R = e1.profile.grid(i), h = e1.profile.values(i);
            if (R <= 1e-2) near.push_back(h / (R * R * R));
            if (R >= 1e2) far.push_back(h / (R * std::log(R)));
        }
        CHECK(spread(near) < 1.5);
        CHECK(spread(far) < 2);
    }
}

TEST_CASE("first error coefficients are stable under grid refinement") {
    Tolerances fine;
    fine.r_points *= 2;
    for (double nu : {0.5}) {
        const auto a = first_error_expansion(v1_for(nu));
        const auto b = first_error_expansion(first_correction(nu, log_grid(fine.r_min, fine.r_max, fine.r_points), fine));
        for (int k = 0; k < 4; ++k) CHECK(a.c(k) == doctest::Approx(b.c(k)).epsilon(0.01));
    }
}

TEST_CASE("order 0 evaluator is the ground state") {
    BlowupParams p;
    p.nu = 0.7;
    const auto a = assemble(p, 0);
    for (double r : {0.0, 0.01, 0.2, 0.45}) CHECK(a(0.5, r) == ground_state(p.lambda(0.5) * r));
}

TEST_CASE("first correction improves the residual at the predicted rate") {
    for (double nu : {0.25, 1.0}) {
        BlowupParams p;
        p.nu = nu;
        const auto a0 = assemble(p, 0), a1 = assemble(p, 1);
        auto ratio = [&](double t) {
            const double r = 1 / p.lambda(t);
            return std::abs(a1.residual(t, r)) / std::abs(a0.residual(t, r));
        };
        CHECK(ratio(0.1) < 1);
        const double measured = ratio(0.05) / ratio(0.1), expected = std::pow(2.0, -2 * nu);
        CHECK(measured / expected > 0.5);
        CHECK(measured / expected < 2);
    }
}

TEST_CASE("exact jet residual agrees with the finite-difference residual") {
    BlowupParams p;
    p.nu = 0.5;
    const auto a = assemble(p, 2);
    const double t = 0.3, r = 0.4 * t, h = 1e-4 * t;
    auto field = [&](double tt) {
        WaveField f;
        f.t = tt;
        f.r = Eigen::Vector3d(r - h, r, r + h);
        f.u = f.r.unaryExpr([&](double x) { return a(tt, x); });
        f.ut = Eigen::VectorXd::Zero(3);
        return f;
    };
    const auto fd = pde_residual(field(t - h), field(t), field(t + h));
    CHECK(fd.values(0) == doctest::Approx(a.residual(t, r)).epsilon(1e-3));
}

TEST_CASE("second correction vanishes at the axis and has the stated envelopes") {
    BlowupParams p;
    p.nu = 1;
    const auto a1 = assemble(p, 1), a2 = assemble(p, 2);
    const double t = 0.01, lam = p.lambda(t);
    CHECK(a2(t, 0.0) == 0.0);
    std::vector<double> near, far;
    for (double R : log_grid(1e-3, 1e-2, 5)) near.push_back((a2(t, R / lam) - a1(t, R / lam)) / (R * R * R));
    for (double R : log_grid(10, 90, 5))
        far.push_back((a2(t, R / lam) - a1(t, R / lam)) / (R * R * R * std::log(R)));
    CHECK(spread(near) < 1.1);
    CHECK(spread(far) < 4);
}

TEST_CASE("approximate solution minus Q has the R log(1+R^2) shape") {
    BlowupParams p;
    p.nu = 1;
    const auto a = assemble(p, 2);
    const double t = 0.005, lam = p.lambda(t), tl = t * lam;
    const int n = 40;
    Eigen::MatrixXd A(n, 2);
    Eigen::VectorXd y(n);
    for (int i = 0; i < n; ++i) {
        const double R = 10 * std::pow(10.0, 0.95 * i / (n - 1));
        A(i, 0) = R * std::log1p(R * R);
        A(i, 1) = R;
        y(i) = (a(t, R / lam) - ground_state(R)) * tl * tl;
    }
    CHECK(least_squares(A, y).relative_residual < 0.01);
}

TEST_CASE("order 2 is restricted to the inner cone") {
    BlowupParams p;
    p.nu = 0.5;
    const auto a = assemble(p, 2);
    CHECK(a.max_radius(0.4) == doctest::Approx(0.4 * (1 - Tolerances{}.delta_edge)));
    CHECK(std::isinf(assemble(p, 1).max_radius(0.4)));
}
