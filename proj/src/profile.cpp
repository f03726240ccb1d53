#include "wml/profile.hpp"

#include <algorithm>

namespace wml {

namespace {

const char* kModule = "profile_builder";

} // namespace

FirstCorrection first_correction(double nu, const Eigen::VectorXd& grid, const Tolerances& tol) {
    require(nu > 0, "first_correction: nu must be positive");
    const Eigen::Index n = grid.size();
    require(n >= 16 && grid(0) > 0, "first_correction: need a positive grid with >= 16 points");
    for (Eigen::Index i = 1; i < n; ++i) require(grid(i) > grid(i - 1), "first_correction: grid must increase");

    using FP = FundamentalPair;
    auto f = [nu](double R) { return e0_scaled(R, nu); };
    auto integrand_phi = [&](double R) { return FP::phi(R) * std::sqrt(R) * f(R); };
    // theta sqrt(R) = (-1 + 4R^2 log R + R^4)/(1+R^2): bounded at R = 0
    auto integrand_theta = [&](double R) {
        if (R == 0) return 0.0;
        const double R2 = R * R;
        return (-1 + 4 * R2 * std::log(R) + R2 * R2) / (1 + R2) * f(R);
    };

    FirstCorrection out;
    out.nu = nu;
    out.int_phi.resize(n);
    out.int_theta.resize(n);
    double Ip = integrate_adaptive(integrand_phi, 0.0, grid(0), tol.quad_abs * 1e-6, tol.quad_rel, kModule);
    double It = integrate_adaptive(integrand_theta, 0.0, grid(0), tol.quad_abs * 1e-6, tol.quad_rel, kModule);
    out.int_phi(0) = Ip;
    out.int_theta(0) = It;
    for (Eigen::Index i = 1; i < n; ++i) {
        Ip += integrate_adaptive(integrand_phi, grid(i - 1), grid(i), tol.quad_abs, tol.quad_rel, kModule);
        It += integrate_adaptive(integrand_theta, grid(i - 1), grid(i), tol.quad_abs, tol.quad_rel, kModule);
        out.int_phi(i) = Ip;
        out.int_theta(i) = It;
    }

    out.profile.grid = grid;
    out.profile.values.resize(n);
    out.slope.resize(n);
    out.curvature.resize(n);
    out.profile.vanishing_order = 3;
    out.profile.log_growth = {1, 1};
    for (Eigen::Index i = 0; i < n; ++i) {
        const double R = grid(i), sr = std::sqrt(R);
        const double th = FP::theta(R) / sr, ph = FP::phi(R) / sr;
        // d/dR [R^{-1/2} theta] and d/dR [R^{-1/2} phi]
        const double dth = FP::dtheta(R) / sr - 0.5 * FP::theta(R) / (R * sr);
        const double dph = FP::dphi(R) / sr - 0.5 * FP::phi(R) / (R * sr);
        const double g = 0.5 * (th * out.int_phi(i) - ph * out.int_theta(i));
        const double dg = 0.5 * (dth * out.int_phi(i) - dph * out.int_theta(i));
        out.profile.values(i) = g;
        out.slope(i) = dg;
        // tilde-L g = f  =>  g'' = f - g'/R + cos(2Q) g / R^2
        out.curvature(i) = f(R) - dg / R + cos_2q(R) * g / (R * R);
    }

    // large-R form on the last decade
    const double hi = grid(n - 1), lo = hi / 10;
    std::vector<Eigen::Index> idx;
    for (Eigen::Index i = 0; i < n; ++i)
        if (grid(i) >= lo) idx.push_back(i);
    require(idx.size() >= 4, "first_correction: grid too coarse on its last decade");
    Eigen::MatrixXd A(idx.size(), 2);
    Eigen::VectorXd y(idx.size());
    for (std::size_t k = 0; k < idx.size(); ++k) {
        const double R = grid(idx[k]);
        A(k, 0) = R * std::log(R);
        A(k, 1) = R;
        y(k) = out.profile.values(idx[k]);
    }
    const auto fit = least_squares(A, y);
    out.d1 = fit.coeffs(0);
    out.d2 = fit.coeffs(1);
    out.fit_residual = fit.relative_residual;

    const Eigen::VectorXd s = grid.array().log();
    const Eigen::VectorXd Rg = grid.cwiseProduct(out.slope);
    // d(R g')/ds = R g' + R^2 g''
    const double end_lo = Rg(0) + grid(0) * grid(0) * out.curvature(0);
    const double end_hi = Rg(n - 1) + grid(n - 1) * grid(n - 1) * out.curvature(n - 1);
    out.spline = CubicSpline(s, out.profile.values, Rg(0), Rg(n - 1));
    out.slope_spline = CubicSpline(s, Rg, end_lo, end_hi);
    return out;
}

double FirstCorrection::value(double R) const {
    if (R <= 0) return 0.0;
    const double lo = profile.grid(0), hi = profile.grid(profile.grid.size() - 1);
    if (R < lo) return profile.values(0) * std::pow(R / lo, 3);
    if (R > hi) return d1 * R * std::log(R) + d2 * R;
    return spline(std::log(R));
}

double FirstCorrection::derivative(double R) const {
    if (R <= 0) return 0.0;
    const double lo = profile.grid(0), hi = profile.grid(profile.grid.size() - 1);
    if (R < lo) return 3 * profile.values(0) * R * R / (lo * lo * lo);
    if (R > hi) return d1 * (std::log(R) + 1) + d2;
    return slope_spline(std::log(R)) / R;
}

std::array<double, 3> FirstCorrection::jet(double R) const {
    const double g = value(R), dg = derivative(R);
    if (R <= 0) return {0.0, 0.0, 0.0};
    const double lo = profile.grid(0), hi = profile.grid(profile.grid.size() - 1);
    double d2g;
    if (R < lo)
        d2g = 6 * profile.values(0) * R / (lo * lo * lo);
    else if (R > hi)
        d2g = d1 / R;
    else
        d2g = e0_scaled(R, nu) - dg / R + cos_2q(R) * g / (R * R);
    return {g, dg, d2g};
}

double first_correction_at(const FirstCorrection& v1, double R, double quad_rel) {
    require(R > 0, "first_correction_at: R must be positive");
    using FP = FundamentalPair;
    const double nu = v1.nu;
    auto f = [nu](double x) { return e0_scaled(x, nu); };
    auto ip = [&](double x) { return FP::phi(x) * std::sqrt(x) * f(x); };
    auto it = [&](double x) {
        const double x2 = x * x;
        return x == 0 ? 0.0 : (-1 + 4 * x2 * std::log(x) + x2 * x2) / (1 + x2) * f(x);
    };
    const auto& grid = v1.profile.grid;
    const double* p = std::upper_bound(grid.data(), grid.data() + grid.size(), R);
    double from = 0, Ip = 0, It = 0;
    if (p != grid.data()) {
        const Eigen::Index i = p - grid.data() - 1;
        from = grid(i);
        Ip = v1.int_phi(i);
        It = v1.int_theta(i);
    }
    if (R > from) {
        const double abs_tol = quad_rel * (std::abs(Ip) + std::abs(It)) + 1e-300;
        Ip += integrate_adaptive(ip, from, R, abs_tol, quad_rel, kModule);
        It += integrate_adaptive(it, from, R, abs_tol, quad_rel, kModule);
    }
    const double sr = std::sqrt(R);
    return 0.5 * (FP::theta(R) / sr * Ip - FP::phi(R) / sr * It);
}

Eigen::VectorXd apply_tilde_L_logfd(const Eigen::VectorXd& grid, const Eigen::VectorXd& values) {
    const Eigen::Index n = grid.size();
    require(n >= 3 && values.size() == n, "apply_tilde_L_logfd: bad sizes");
    const double h = std::log(grid(1) / grid(0));
    for (Eigen::Index i = 2; i < n; ++i)
        require(std::abs(std::log(grid(i) / grid(i - 1)) - h) <= 1e-6 * h,
                "apply_tilde_L_logfd: grid must be geometric");
    // tilde-L g = (g_ss - cos(2Q) g) / R^2 with s = log R
    Eigen::VectorXd out(n - 2);
    for (Eigen::Index i = 1; i + 1 < n; ++i) {
        const double gss = (values(i + 1) - 2 * values(i) + values(i - 1)) / (h * h);
        const double R = grid(i);
        out(i - 1) = (gss - cos_2q(R) * values(i)) / (R * R);
    }
    return out;
}

namespace {

// t^2 dtt v_1 * (t lambda)^2 for v_1 = t^{2 nu} g(lambda(t) r):
// (2nu - 1 - (1+nu) D)(2nu - (1+nu) D) g with D = R d/dR.
double time_term(double nu, double g, double dg, double d2g, double R) {
    const double p = 2 * nu, q = 1 + nu;
    const double Dg = R * dg;
    const double D2g = R * dg + R * R * d2g;
    return p * (p - 1) * g - q * (2 * p - 1) * Dg + q * q * D2g;
}

} // namespace

FirstError first_error_expansion(const FirstCorrection& v1) {
    const auto& grid = v1.profile.grid;
    const Eigen::Index n = grid.size();
    const double decades = std::log10(grid(n - 1) / grid(0));
    require(decades > 0, "first_error_expansion: degenerate grid");
    if (n / decades < 40)
        throw NumericalError(kModule, "first_error_expansion: grid too coarse (" +
                                          std::to_string(n / decades) + " points per decade, need 40)");
    RadialProfile h;
    h.grid = grid;
    h.values.resize(n);
    h.vanishing_order = 3;
    h.log_growth = {1, 1};
    for (Eigen::Index i = 0; i < n; ++i) {
        const double R = grid(i);
        const double g = v1.profile.values(i), dg = v1.slope(i), d2g = v1.curvature(i);
        // (t lambda)^2 (1 - cos 2v_1) -> 2 g^2 / (t lambda)^2 at leading order
        h.values(i) = time_term(v1.nu, g, dg, d2g, R) - sin_2q(R) / (R * R) * g * g;
    }
    return fit_first_error(h, grid(n - 1) / 10, grid(n - 1));
}

FirstError fit_first_error(const RadialProfile& h, double lo, double hi) {
    std::vector<Eigen::Index> idx;
    for (Eigen::Index i = 0; i < h.grid.size(); ++i)
        if (h.grid(i) >= lo && h.grid(i) <= hi) idx.push_back(i);
    require(idx.size() >= 8, "fit_first_error: fewer than 8 samples in the fit window");
    Eigen::MatrixXd A(idx.size(), 4);
    Eigen::VectorXd y(idx.size());
    for (std::size_t k = 0; k < idx.size(); ++k) {
        const double R = h.grid(idx[k]), L = std::log(R);
        A.row(k) << R * L, R, L, 1.0;
        y(k) = h.values(idx[k]);
    }
    const auto fit = least_squares(A, y);
    FirstError out;
    out.profile = h;
    out.c = fit.coeffs;
    out.fit_residual = fit.relative_residual;
    out.fit_lo = lo;
    out.fit_hi = hi;
    return out;
}

double first_error_full(const FirstCorrection& v1, double t, double R) {
    require(t > 0 && R >= 0, "first_error_full: need t > 0, R >= 0");
    if (R == 0) return 0.0;
    const double nu = v1.nu;
    const double tl2 = std::pow(t, -2 * nu); // (t lambda)^2
    const auto [g, dg, d2g] = v1.jet(R);
    const double v = g / tl2;
    const double timepart = time_term(nu, g, dg, d2g, R) / tl2;
    const double nonlin = -sin_2q(R) / (2 * R * R) * tl2 * (1 - std::cos(2 * v)) -
                          cos_2q(R) / (2 * R * R) * tl2 * (2 * v - std::sin(2 * v));
    return timepart + nonlin;
}

} // namespace wml
