#pragma once

#include <Eigen/Dense>

#include <boost/numeric/odeint/stepper/controlled_runge_kutta.hpp>
#include <boost/numeric/odeint/stepper/runge_kutta_fehlberg78.hpp>

#include <array>
#include <cmath>
#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "wml/errors.hpp"

namespace wml {

// ---------------------------------------------------------------- grids

/// n points geometrically spaced on [lo, hi].
Eigen::VectorXd log_grid(double lo, double hi, int n);
/// n points uniformly spaced on [lo, hi].
Eigen::VectorXd uniform_grid(double lo, double hi, int n);

/// Composite Simpson weights for samples of a uniformly spaced variable.
/// An even number of intervals is not required: a 3/8 panel closes odd counts.
Eigen::VectorXd simpson_weights(int n, double h);

struct QuadratureRule {
    Eigen::VectorXd nodes;
    Eigen::VectorXd weights;
};

/// n-point Gauss-Legendre rule on [-1, 1] (Golub-Welsch).
QuadratureRule gauss_legendre(int n);
/// Composite Gauss-Legendre over [lo, hi] split into `panels` equal panels.
QuadratureRule composite_gauss(double lo, double hi, int panels, int order = 8);

// --------------------------------------------------------- interpolation

/// Cubic spline with prescribed end slopes.
class CubicSpline {
public:
    CubicSpline() = default;
    CubicSpline(Eigen::VectorXd x, Eigen::VectorXd y, double slope_lo, double slope_hi);

    double operator()(double x) const;
    double derivative(double x) const;
    double lo() const { return x_(0); }
    double hi() const { return x_(x_.size() - 1); }
    bool empty() const { return x_.size() == 0; }

private:
    Eigen::Index interval(double x) const;
    Eigen::VectorXd x_, y_, m_; // m_ = second derivatives at knots
};

/// Piecewise quintic Hermite interpolant from values, first and second
/// derivatives at the knots.
class QuinticHermite {
public:
    QuinticHermite() = default;
    QuinticHermite(Eigen::VectorXd x, Eigen::VectorXd y, Eigen::VectorXd dy, Eigen::VectorXd d2y);

    /// Value, first and second derivative at x (clamped to the knot range).
    std::array<double, 3> eval(double x) const;
    double lo() const { return x_(0); }
    double hi() const { return x_(x_.size() - 1); }
    bool empty() const { return x_.size() == 0; }

private:
    Eigen::VectorXd x_, y_, dy_, d2y_;
};

/// Linear interpolation on a monotone table, clamped at the ends.
double interp_linear(std::span<const double> x, std::span<const double> y, double at);

// ------------------------------------------------------------ fitting

struct LeastSquaresFit {
    Eigen::VectorXd coeffs;
    double residual_rms = 0.0;     // rms of (data - model)
    double relative_residual = 0.0; // ||data - model|| / ||data||
};

/// Solve min ||A c - y|| with column-pivoting QR; columns are rescaled first.
LeastSquaresFit least_squares(const Eigen::MatrixXd& A, const Eigen::VectorXd& y);

struct LineFit {
    double slope = 0.0;
    double intercept = 0.0;
    double residual_rms = 0.0;
};
LineFit fit_line(const Eigen::VectorXd& x, const Eigen::VectorXd& y);

// ---------------------------------------------------------- quadrature

/// Adaptive Gauss-Kronrod (21-point) on [a, b]. Throws NumericalError naming
/// the interval when max(abs, rel*|I|) cannot be met.
double integrate_adaptive(const std::function<double(double)>& f, double a, double b,
                          double abs_tol, double rel_tol, const std::string& module);

// --------------------------------------------------------------- ODEs

struct OdeOptions {
    double rel = 1e-12;
    double abs = 1e-20;
    double first_step = 0.0; // 0 -> 1e-3 of the span
    long max_steps = 50'000'000;
};

/// Integrates dx/dt = rhs(x, t) from t0 through each entry of `stops`
/// (monotone in the integration direction), calling observe(i, t, x) on
/// arrival. Step-size collapse raises NumericalError with the reached t.
template <std::size_t N, class Rhs, class Observer>
std::array<double, N> integrate_through(Rhs&& rhs, std::array<double, N> x, double t0,
                                        std::span<const double> stops, Observer&& observe,
                                        const OdeOptions& opt, const std::string& module) {
    namespace odeint = boost::numeric::odeint;
    using State = std::array<double, N>;
    using Stepper = odeint::runge_kutta_fehlberg78<State>;
    using Checker = odeint::default_error_checker<double, odeint::array_algebra,
                                                  odeint::default_operations>;
    odeint::controlled_runge_kutta<Stepper> stepper{Checker(opt.abs, opt.rel)};
    auto system = [&rhs](const State& s, State& ds, double t) { ds = rhs(s, t); };

    double t = t0;
    if (stops.empty()) return x;
    const double span = std::abs(stops.back() - t0);
    const double dir = stops.back() >= t0 ? 1.0 : -1.0;
    double dt = dir * (opt.first_step > 0 ? opt.first_step : std::max(span, 1e-300) * 1e-3);
    long steps = 0;
    for (std::size_t i = 0; i < stops.size(); ++i) {
        const double target = stops[i];
        if ((target - t) * dir < 0)
            throw ContractViolation(module + ": integration stops are not monotone");
        while (t != target) {
            const double remaining = target - t;
            bool clipped = false;
            double saved = dt;
            if (std::abs(dt) >= std::abs(remaining)) {
                dt = remaining;
                clipped = true;
            }
            const auto res = stepper.try_step(system, x, t, dt);
            if (res == odeint::success) {
                if (clipped) {
                    t = target; // absorb round-off
                    dt = std::abs(saved) > std::abs(dt) ? saved : dt;
                }
                if (!std::isfinite(x[0])) throw NumericalError(module, "non-finite state at t=" + num(t));
            } else if (std::abs(dt) < 1e-14 * std::max(1.0, std::abs(t))) {
                throw NumericalError(module, "step size collapse at t=" + num(t));
            }
            if (++steps > opt.max_steps)
                throw NumericalError(module, "step budget exhausted at t=" + num(t));
        }
        observe(i, t, static_cast<const State&>(x));
    }
    return x;
}

/// Convenience: integrate to a single endpoint.
template <std::size_t N, class Rhs>
std::array<double, N> integrate_to(Rhs&& rhs, std::array<double, N> x, double t0, double t1,
                                   const OdeOptions& opt, const std::string& module) {
    const double stop[1] = {t1};
    return integrate_through<N>(std::forward<Rhs>(rhs), x, t0, std::span<const double>(stop, 1),
                                [](std::size_t, double, const std::array<double, N>&) {}, opt, module);
}

// ------------------------------------------------------------ threads

/// Runs fn(i) for i in [0, n) on the available hardware threads. The first
/// exception thrown by any worker is rethrown on the caller.
void parallel_for(int n, const std::function<void(int)>& fn);

/// FNV-1a over raw bytes, used for cache keys and input hashes.
std::uint64_t fnv1a(const void* data, std::size_t bytes, std::uint64_t seed = 14695981039346656037ULL);

} // namespace wml
