#include "wml/spectral.hpp"

#include <algorithm>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <numeric>

namespace wml {

namespace {

const char* kModule = "spectral_toolkit";

// q_j: coefficients of xi + 8/(1+R^2)^2 in powers of R^2
double q_coeff(double xi, int j) { return j == 0 ? 8 + xi : 8.0 * (j % 2 ? -1 : 1) * (j + 1); }

std::vector<double> regular_coeffs(double xi, int terms) {
    std::vector<double> a(terms, 0.0);
    a[0] = 1;
    for (int k = 1; k < terms; ++k) {
        double s = 0;
        for (int j = 0; j < k; ++j) s += q_coeff(xi, j) * a[k - 1 - j];
        a[k] = -s / (4.0 * k * (k + 1));
    }
    return a;
}

using State2 = std::array<double, 2>;
using State4 = std::array<double, 4>;

auto real_rhs(double xi) {
    return [xi](const State2& s, double R) { return State2{s[1], (spectral_potential(R) - xi) * s[0]}; };
}

auto complex_rhs(double xi) {
    return [xi](const State4& s, double R) {
        const double w = spectral_potential(R) - xi;
        return State4{s[1], w * s[0], s[3], w * s[2]};
    };
}

double weyl_launch(double xi, const SpectralOptions& opt) { return opt.weyl_far * std::max(1.0, 1 / std::sqrt(xi)); }

void check_grid(const Eigen::VectorXd& grid, const char* what) {
    require(grid.size() >= 1 && grid(0) > 0, std::string(what) + ": grid must be positive");
    for (Eigen::Index i = 1; i < grid.size(); ++i)
        require(grid(i) > grid(i - 1), std::string(what) + ": grid must be increasing");
}

// Integrates a real 2-state solution from R0 upward through the grid points above R0.
template <class Series>
void march_real(double xi, const Eigen::VectorXd& grid, const SpectralOptions& opt, Series&& series,
                Eigen::VectorXcd& values, Eigen::VectorXcd& derivs) {
    const Eigen::Index n = grid.size();
    values.resize(n);
    derivs.resize(n);
    std::vector<double> stops;
    Eigen::Index first = 0;
    for (Eigen::Index i = 0; i < n; ++i) {
        if (grid(i) <= opt.r0) {
            const auto s = series(grid(i));
            values(i) = s[0];
            derivs(i) = s[1];
            first = i + 1;
        } else {
            stops.push_back(grid(i));
        }
    }
    if (stops.empty()) return;
    const auto start = series(opt.r0);
    integrate_through<2>(
        real_rhs(xi), State2{start[0], start[1]}, opt.r0, std::span<const double>(stops),
        [&](std::size_t i, double, const State2& s) {
            values(first + i) = s[0];
            derivs(first + i) = s[1];
        },
        opt.ode, kModule);
}

} // namespace

SpectralOptions SpectralOptions::from(const Tolerances& tol) {
    SpectralOptions o;
    o.r0 = tol.spectral_r0;
    o.series_terms = tol.frobenius_order;
    o.weyl_far = tol.weyl_far;
    o.match_radius = tol.match_radius;
    o.xi_min = tol.xi_min;
    o.xi_max = tol.xi_max;
    o.xi_points = tol.xi_points;
    o.transform_r_max = tol.transform_r_max;
    o.panel = tol.transform_panel;
    o.ode.rel = tol.ode_rel;
    o.ode.abs = tol.ode_abs;
    return o;
}

std::array<double, 2> regular_series(double xi, double R, int terms) {
    const auto a = regular_coeffs(xi, terms);
    const double R2 = R * R, base = R * std::sqrt(R);
    double v = 0, d = 0, p = 1;
    for (int k = 0; k < terms; ++k) {
        v += a[k] * p;
        d += a[k] * (1.5 + 2 * k) * p;
        p *= R2;
    }
    return {base * v, std::sqrt(R) * d};
}

std::array<double, 2> secondary_series(double xi, double R, int terms) {
    const auto a = regular_coeffs(xi, terms);
    const double kappa = -(8 + xi) / 4;
    std::vector<double> b(terms, 0.0);
    b[0] = 0.5;
    if (terms > 1) b[1] = -0.5;
    for (int k = 2; k < terms; ++k) {
        double s = 0;
        for (int j = 0; j < k; ++j) s += q_coeff(xi, j) * b[k - 1 - j];
        b[k] = (-s - kappa * (4.0 * k - 2) * a[k - 1]) / (4.0 * k * (k - 1));
    }
    const double R2 = R * R, sr = std::sqrt(R);
    double v = 0, d = 0, p = 1;
    for (int k = 0; k < terms; ++k) {
        v += b[k] * p;
        d += b[k] * (2 * k - 0.5) * p;
        p *= R2;
    }
    const auto ph = regular_series(xi, R, terms);
    const double L = std::log(R);
    return {v / sr + kappa * ph[0] * L, d / (R * sr) + kappa * (ph[1] * L + ph[0] / R)};
}

std::array<cplx, 2> weyl_asymptotic(double xi, double R) {
    require(xi > 0 && R > 0, "weyl_asymptotic: need xi > 0, R > 0");
    const double k = std::sqrt(xi);
    const cplx ik(0, k);
    auto v = [](int m) -> double {
        if (m == 2) return 0.75;
        if (m >= 4 && m % 2 == 0) {
            const int l = (m - 4) / 2;
            return -8.0 * (l % 2 ? -1 : 1) * (l + 1);
        }
        return 0.0;
    };
    std::vector<cplx> w{1.0};
    cplx sigma = 1.0, dsigma = 0.0;
    double prev = 1.0;
    for (int n = 1; n <= 40; ++n) {
        cplx s = (n - 1.0) * n * w[n - 1];
        for (int m = 2; m <= n + 1; ++m) s -= v(m) * w[n + 1 - m];
        w.push_back(s / (2.0 * ik * static_cast<double>(n)));
        const cplx term = w[n] * std::pow(R, -n);
        const double mag = std::abs(term);
        if (n > 2 && mag > prev) break; // asymptotic series starts to diverge
        sigma += term;
        dsigma += -static_cast<double>(n) * term / R;
        prev = mag;
        if (mag < 1e-18) break;
    }
    const cplx e = std::exp(ik * R) * std::pow(xi, -0.25);
    return {e * sigma, e * (ik * sigma + dsigma)};
}

Eigenfunction regular_eigenfunction(double xi, const Eigen::VectorXd& grid, const SpectralOptions& opt) {
    require(xi >= 0, "regular_eigenfunction: xi must be nonnegative");
    check_grid(grid, "regular_eigenfunction");
    Eigenfunction ef;
    ef.xi = xi;
    ef.kind = EigenKind::regular;
    ef.grid = grid;
    march_real(xi, grid, opt, [&](double R) { return regular_series(xi, R, opt.series_terms); }, ef.values,
               ef.derivs);
    return ef;
}

Eigenfunction secondary_eigenfunction(double xi, const Eigen::VectorXd& grid, const SpectralOptions& opt) {
    require(xi >= 0, "secondary_eigenfunction: xi must be nonnegative");
    check_grid(grid, "secondary_eigenfunction");
    Eigenfunction ef;
    ef.xi = xi;
    ef.kind = EigenKind::secondary;
    ef.grid = grid;
    march_real(xi, grid, opt, [&](double R) { return secondary_series(xi, R, opt.series_terms); }, ef.values,
               ef.derivs);
    return ef;
}

Eigenfunction weyl_solution(double xi, const Eigen::VectorXd& grid, const SpectralOptions& opt) {
    require(xi > 0, "weyl_solution: xi must be positive");
    check_grid(grid, "weyl_solution");
    Eigenfunction ef;
    ef.xi = xi;
    ef.kind = EigenKind::weyl_plus;
    ef.grid = grid;
    const Eigen::Index n = grid.size();
    double far = weyl_launch(xi, opt);
    if (grid(n - 1) > far) {
        far = grid(n - 1);
        ef.extended = true;
    }
    const auto init = weyl_asymptotic(xi, far);
    ef.values.resize(n);
    ef.derivs.resize(n);
    std::vector<double> stops(n);
    for (Eigen::Index i = 0; i < n; ++i) stops[i] = grid(n - 1 - i);
    integrate_through<4>(
        complex_rhs(xi), State4{init[0].real(), init[1].real(), init[0].imag(), init[1].imag()}, far,
        std::span<const double>(stops),
        [&](std::size_t i, double, const State4& s) {
            ef.values(n - 1 - i) = cplx(s[0], s[2]);
            ef.derivs(n - 1 - i) = cplx(s[1], s[3]);
        },
        opt.ode, kModule);
    return ef;
}

double eigen_residual(const Eigenfunction& ef) {
    const Eigen::Index n = ef.grid.size();
    require(n >= 3, "eigen_residual: need at least 3 nodes");
    double worst = 0, scale = 0;
    for (int part = 0; part < 2; ++part) {
        Eigen::VectorXd f(n), df(n), d2f(n);
        for (Eigen::Index i = 0; i < n; ++i) {
            f(i) = part ? ef.values(i).imag() : ef.values(i).real();
            df(i) = part ? ef.derivs(i).imag() : ef.derivs(i).real();
            d2f(i) = (spectral_potential(ef.grid(i)) - ef.xi) * f(i);
        }
        QuinticHermite h(ef.grid, f, df, d2f);
        for (Eigen::Index i = 0; i + 1 < n; ++i) {
            const double R = 0.5 * (ef.grid(i) + ef.grid(i + 1));
            const auto [v, d, dd] = h.eval(R);
            (void)d;
            const double target = (spectral_potential(R) - ef.xi) * v;
            worst = std::max(worst, std::abs(dd - target));
            scale = std::max(scale, std::abs(target));
        }
    }
    return scale > 0 ? worst / scale : worst;
}

cplx connection_coefficient(double xi, const SpectralOptions& opt, double r_match) {
    require(xi > 0, "connection_coefficient: xi must be positive");
    const double Rm = r_match > 0 ? r_match : opt.match_radius * std::max(1.0, 1 / std::sqrt(xi));
    const auto s0 = regular_series(xi, opt.r0, opt.series_terms);
    const auto ph = integrate_to<2>(real_rhs(xi), State2{s0[0], s0[1]}, opt.r0, Rm, opt.ode, kModule);
    const double far = std::max(weyl_launch(xi, opt), Rm);
    const auto init = weyl_asymptotic(xi, far);
    const auto ps = integrate_to<4>(complex_rhs(xi),
                                    State4{init[0].real(), init[1].real(), init[0].imag(), init[1].imag()},
                                    far, Rm, opt.ode, kModule);
    const cplx psi(ps[0], ps[2]), dpsi(ps[1], ps[3]);
    const cplx Wpp = wronskian(psi, dpsi, std::conj(psi), std::conj(dpsi));
    if (std::abs(Wpp) < 1e-3)
        throw NumericalError(kModule, "W(psi+, conj psi+) = " + std::to_string(std::abs(Wpp)) + " at xi=" +
                                          std::to_string(xi) + ": Weyl solution lost");
    return wronskian(ph[0], ph[1], std::conj(psi), std::conj(dpsi)) / Wpp;
}

SpectralTables connection_and_measure(const Eigen::VectorXd& xi, const SpectralOptions& opt) {
    const Eigen::Index n = xi.size();
    require(n >= 20, "connection_and_measure: need at least 20 frequencies");
    for (Eigen::Index i = 0; i < n; ++i) require(xi(i) > 0 && (i == 0 || xi(i) > xi(i - 1)),
                                                 "connection_and_measure: xi grid must be positive increasing");
    SpectralTables t;
    t.xi = xi;
    t.a.resize(n);
    t.rho.resize(n);
    t.r_match.resize(n);

    std::uint64_t key = fnv1a(xi.data(), sizeof(double) * n);
    const double knobs[] = {opt.r0, double(opt.series_terms), opt.weyl_far, opt.match_radius, opt.ode.rel,
                            opt.ode.abs};
    key = fnv1a(knobs, sizeof(knobs), key);
    Eigen::MatrixXd cached;
    if (load_cached_matrix("connection", key, cached) && cached.rows() == n && cached.cols() == 2) {
        for (Eigen::Index i = 0; i < n; ++i) t.a(i) = cplx(cached(i, 0), cached(i, 1));
    } else {
        parallel_for(static_cast<int>(n), [&](int i) { t.a(i) = connection_coefficient(xi(i), opt); });
        Eigen::MatrixXd m(n, 2);
        m.col(0) = t.a.real();
        m.col(1) = t.a.imag();
        store_cached_matrix("connection", key, m);
    }
    for (Eigen::Index i = 0; i < n; ++i) {
        const double mag = std::abs(t.a(i));
        if (!(mag > 0) || !std::isfinite(mag))
            throw NumericalError(kModule, "a(xi) vanishes or is not finite at xi=" + std::to_string(xi(i)));
        t.rho(i) = 1 / (4 * std::numbers::pi * mag * mag);
        t.r_match(i) = opt.match_radius * std::max(1.0, 1 / std::sqrt(xi(i)));
    }

    std::vector<Eigen::Index> lo, hi;
    for (Eigen::Index i = 0; i < n; ++i) {
        if (xi(i) <= 10 * xi(0)) lo.push_back(i);
        if (xi(i) >= xi(n - 1) / 10) hi.push_back(i);
    }
    require(lo.size() >= 3 && hi.size() >= 3, "connection_and_measure: xi grid too sparse on its end decades");
    Eigen::MatrixXd A(lo.size(), 3);
    Eigen::VectorXd y(lo.size());
    for (std::size_t k = 0; k < lo.size(); ++k) {
        const double L = std::log(xi(lo[k]));
        A.row(k) << L * L, L, 1.0;
        y(k) = std::norm(t.a(lo[k])) / xi(lo[k]);
    }
    const auto lf = least_squares(A, y);
    t.low_P = lf.coeffs(0);
    t.low_Q = lf.coeffs(1);
    t.low_S = lf.coeffs(2);
    Eigen::VectorXd xh(hi.size()), yh(hi.size());
    for (std::size_t k = 0; k < hi.size(); ++k) {
        xh(k) = std::log(xi(hi[k]));
        yh(k) = std::log(t.rho(hi[k]));
    }
    const auto hf = fit_line(xh, yh);
    t.hi_slope = hf.slope;
    t.hi_intercept = hf.intercept;
    return t;
}

SpectralMeasure::SpectralMeasure(const SpectralTables& tables) : tables_(tables) {
    const Eigen::Index n = tables.xi.size();
    require(n >= 4 && tables.rho.size() == n, "SpectralMeasure: inconsistent tables");
    Eigen::VectorXd x = tables.xi.array().log(), y = tables.rho.array().log();
    const double s0 = (y(1) - y(0)) / (x(1) - x(0));
    const double s1 = (y(n - 1) - y(n - 2)) / (x(n - 1) - x(n - 2));
    log_rho_ = CubicSpline(x, y, s0, s1);
}

double SpectralMeasure::operator()(double xi) const {
    require(xi > 0, "SpectralMeasure: xi must be positive");
    const double lx = std::log(xi);
    if (lx < log_rho_.lo()) {
        const double q = (tables_.low_P * lx + tables_.low_Q) * lx + tables_.low_S;
        return 1 / (4 * std::numbers::pi * xi * q);
    }
    if (lx > log_rho_.hi()) return std::exp(tables_.hi_intercept + tables_.hi_slope * lx);
    return std::exp(log_rho_(lx));
}

double SpectralMeasure::low_mass(double xi) const {
    // int_{-inf}^{L} dL' / (4 pi (P L'^2 + Q L' + S))
    const double P = tables_.low_P, Q = tables_.low_Q, S = tables_.low_S, L = std::log(xi);
    const double D = 4 * P * S - Q * Q;
    if (!(P > 0) || !(D > 0) || !(2 * P * L + Q < 0))
        throw NumericalError(kModule, "small-xi fit of |a|^2/xi is not a positive quadratic in log xi (P=" +
                                          std::to_string(P) + ", D=" + std::to_string(D) + ")");
    const double sd = std::sqrt(D);
    const double I = 2 / sd * (std::atan((2 * P * L + Q) / sd) + std::numbers::pi / 2);
    return I / (4 * std::numbers::pi);
}

double SpectralCoefficients::norm(double alpha, const SpectralMeasure& rho) const {
    const Eigen::Index n = xi.size();
    require(n >= 3 && values.size() == n, "SpectralCoefficients::norm: size mismatch");
    const double h = std::log(xi(n - 1) / xi(0)) / (n - 1);
    const Eigen::VectorXd w = simpson_weights(static_cast<int>(n), h);
    double s = 0;
    for (Eigen::Index i = 0; i < n; ++i) {
        const double br = std::pow(1 + xi(i) * xi(i), alpha); // <xi>^{2 alpha}
        s += w(i) * xi(i) * values(i) * values(i) * br * rho(xi(i));
    }
    return std::sqrt(s);
}

// ------------------------------------------------------------------ cache

namespace {

std::filesystem::path cache_path(const std::string& name, std::uint64_t key) {
    const char* dir = std::getenv("WMLAB_CACHE_DIR");
    if (!dir || !*dir) return {};
    char buf[32];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(key));
    return std::filesystem::path(dir) / (name + "-" + buf + ".bin");
}

} // namespace

bool load_cached_matrix(const std::string& name, std::uint64_t key, Eigen::MatrixXd& out) {
    const auto p = cache_path(name, key);
    if (p.empty()) return false;
    std::ifstream in(p, std::ios::binary);
    if (!in) return false;
    std::uint64_t k = 0;
    std::int64_t rows = 0, cols = 0;
    in.read(reinterpret_cast<char*>(&k), sizeof k);
    in.read(reinterpret_cast<char*>(&rows), sizeof rows);
    in.read(reinterpret_cast<char*>(&cols), sizeof cols);
    if (!in || k != key || rows <= 0 || cols <= 0) return false;
    out.resize(rows, cols);
    in.read(reinterpret_cast<char*>(out.data()), sizeof(double) * rows * cols);
    return static_cast<bool>(in);
}

void store_cached_matrix(const std::string& name, std::uint64_t key, const Eigen::MatrixXd& m) {
    const auto p = cache_path(name, key);
    if (p.empty()) return;
    std::error_code ec;
    std::filesystem::create_directories(p.parent_path(), ec);
    const auto tmp = p.string() + ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary);
        if (!out) return;
        const std::int64_t rows = m.rows(), cols = m.cols();
        out.write(reinterpret_cast<const char*>(&key), sizeof key);
        out.write(reinterpret_cast<const char*>(&rows), sizeof rows);
        out.write(reinterpret_cast<const char*>(&cols), sizeof cols);
        out.write(reinterpret_cast<const char*>(m.data()), sizeof(double) * rows * cols);
    }
    std::filesystem::rename(tmp, p, ec);
}

// -------------------------------------------------------------- transform

Eigen::MatrixXd regular_table(const Eigen::VectorXd& xi, const Eigen::VectorXd& R, const SpectralOptions& opt) {
    std::uint64_t key = fnv1a(xi.data(), sizeof(double) * xi.size());
    key = fnv1a(R.data(), sizeof(double) * R.size(), key);
    const double knobs[] = {opt.r0, double(opt.series_terms), opt.ode.rel, opt.ode.abs};
    key = fnv1a(knobs, sizeof(knobs), key);
    Eigen::MatrixXd table;
    if (load_cached_matrix("phi", key, table) && table.rows() == xi.size() && table.cols() == R.size())
        return table;

    // solve on the sorted grid, then scatter back
    std::vector<Eigen::Index> order(R.size());
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](auto i, auto j) { return R(i) < R(j); });
    Eigen::VectorXd sorted(R.size());
    for (std::size_t k = 0; k < order.size(); ++k) sorted(k) = R(order[k]);
    for (Eigen::Index k = 1; k < sorted.size(); ++k)
        require(sorted(k) > sorted(k - 1), "regular_table: duplicate radii");
    table.resize(xi.size(), R.size());
    parallel_for(static_cast<int>(xi.size()), [&](int i) {
        const auto ef = regular_eigenfunction(xi(i), sorted, opt);
        for (std::size_t k = 0; k < order.size(); ++k) table(i, order[k]) = ef.values(k).real();
    });
    store_cached_matrix("phi", key, table);
    return table;
}

DistortedFourier::DistortedFourier(const SpectralOptions& opt, std::shared_ptr<const SpectralMeasure> rho)
    : opt_(opt), rho_(std::move(rho)) {
    require(rho_ != nullptr, "DistortedFourier: spectral measure required");
    require(opt.transform_r_max > 0 && opt.panel > 0, "DistortedFourier: bad radial quadrature");
    const int panels = std::max(1, static_cast<int>(std::lround(opt.transform_r_max / opt.panel)));
    nodes_ = composite_gauss(0.0, opt.transform_r_max, panels, opt.gauss_order);
    xi_ = rho_->tables().xi;
    const Eigen::Index n = xi_.size();
    const double h = std::log(xi_(n - 1) / xi_(0)) / (n - 1);
    xi_w_ = simpson_weights(static_cast<int>(n), h).cwiseProduct(xi_);
    phi_ = regular_table(xi_, nodes_.nodes, opt_);
}

SpectralCoefficients DistortedFourier::forward(const std::function<double(double)>& f) const {
    const Eigen::Index m = nodes_.nodes.size();
    Eigen::VectorXd fw(m);
    double peak = 0;
    for (Eigen::Index j = 0; j < m; ++j) {
        const double v = f(nodes_.nodes(j));
        require(std::isfinite(v), "forward_transform: non-finite input");
        fw(j) = v * nodes_.weights(j);
        peak = std::max(peak, std::abs(v));
    }
    const double edge = std::abs(f(opt_.transform_r_max));
    if (peak > 0 && edge > 1e-8 * peak)
        throw NumericalError(kModule, "forward_transform: input does not decay by R=" +
                                          std::to_string(opt_.transform_r_max) + " (|f|=" + std::to_string(edge) +
                                          ")");
    SpectralCoefficients c;
    c.xi = xi_;
    c.values = phi_ * fw;
    return c;
}

SpectralCoefficients DistortedFourier::forward(const RadialProfile& f) const {
    f.validate();
    const Eigen::Index n = f.grid.size();
    const Eigen::VectorXd& x = f.grid;
    const Eigen::VectorXd& y = f.values;
    const double s0 = (y(1) - y(0)) / (x(1) - x(0)), s1 = (y(n - 1) - y(n - 2)) / (x(n - 1) - x(n - 2));
    const CubicSpline sp(x, y, s0, s1);
    const double lo = x(0), hi = x(n - 1), y0 = y(0);
    const int m = std::max(1, f.vanishing_order);
    return forward([&](double R) {
        if (R > hi) return 0.0;
        if (R < lo) return y0 * std::pow(R / lo, m);
        return sp(R);
    });
}

RadialProfile DistortedFourier::inverse(const SpectralCoefficients& x, const Eigen::VectorXd& grid) const {
    require(x.values.size() == xi_.size() && (x.xi - xi_).cwiseAbs().maxCoeff() == 0,
            "inverse_transform: coefficients live on a different xi grid");
    const Eigen::MatrixXd table = regular_table(xi_, grid, opt_);
    Eigen::VectorXd wx(xi_.size());
    for (Eigen::Index i = 0; i < xi_.size(); ++i) wx(i) = xi_w_(i) * x.values(i) * (*rho_)(xi_(i));
    RadialProfile out;
    out.grid = grid;
    out.values = table.transpose() * wx;
    out.values += table.row(0).transpose() * (x.values(0) * rho_->low_mass(xi_(0)));
    out.vanishing_order = 1;
    return out;
}

double DistortedFourier::spectral_norm2(const SpectralCoefficients& x) const {
    double s = 0;
    for (Eigen::Index i = 0; i < xi_.size(); ++i) s += xi_w_(i) * x.values(i) * x.values(i) * (*rho_)(xi_(i));
    return s + x.values(0) * x.values(0) * rho_->low_mass(xi_(0));
}

double DistortedFourier::radial_norm2(const std::function<double(double)>& f) const {
    double s = 0;
    for (Eigen::Index j = 0; j < nodes_.nodes.size(); ++j) {
        const double v = f(nodes_.nodes(j));
        s += nodes_.weights(j) * v * v;
    }
    return s;
}

} // namespace wml
