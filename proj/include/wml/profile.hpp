#pragma once

#include <Eigen/Dense>

#include "wml/core_model.hpp"
#include "wml/numerics.hpp"
#include "wml/tolerances.hpp"

namespace wml {

/// Closed-form fundamental system of the conjugated linearized operator
///   -L = d^2/dR^2 - 3/(4R^2) + 8/(1+R^2)^2,
/// normalized so that phi theta' - phi' theta = 2.
struct FundamentalPair {
    static constexpr double wronskian_value = 2.0;

    template <class Scalar>
    static Scalar phi(Scalar R) {
        using std::sqrt;
        return R * sqrt(R) / (Scalar(1) + R * R);
    }
    template <class Scalar>
    static Scalar dphi(Scalar R) {
        using std::sqrt;
        const Scalar s = Scalar(1) + R * R;
        return sqrt(R) * (Scalar(1.5) * s - Scalar(2) * R * R) / (s * s);
    }
    template <class Scalar>
    static Scalar theta(Scalar R) {
        using std::log;
        using std::sqrt;
        const Scalar R2 = R * R;
        return (Scalar(-1) + Scalar(4) * R2 * log(R) + R2 * R2) / (sqrt(R) * (Scalar(1) + R2));
    }
    template <class Scalar>
    static Scalar dtheta(Scalar R) {
        using std::log;
        using std::sqrt;
        const Scalar R2 = R * R, lr = log(R), sr = sqrt(R);
        const Scalar N = Scalar(-1) + Scalar(4) * R2 * lr + R2 * R2;
        const Scalar dN = Scalar(8) * R * lr + Scalar(4) * R + Scalar(4) * R2 * R;
        const Scalar D = sr * (Scalar(1) + R2);
        const Scalar dD = (Scalar(1) + R2) / (Scalar(2) * sr) + Scalar(2) * R * sr;
        return (dN * D - N * dD) / (D * D);
    }
    /// phi theta' - phi' theta evaluated from the closed forms.
    template <class Scalar>
    static Scalar wronskian(Scalar R) {
        return phi(R) * dtheta(R) - dphi(R) * theta(R);
    }
};

/// Potential of -L: 3/(4R^2) - 8/(1+R^2)^2 (so that L f = -f'' + V f).
inline double linearized_potential(double R) {
    const double s = 1 + R * R;
    return 0.75 / (R * R) - 8.0 / (s * s);
}

/// (t lambda)^2 v_1 as a function of R, together with the exact slope and
/// curvature obtained from the variation-of-constants integrals.
struct FirstCorrection {
    double nu = 0;
    RadialProfile profile;     // g(R) = (t lambda)^2 v_1, vanishing order 3, envelope R log R
    Eigen::VectorXd slope;     // g'(R)
    Eigen::VectorXd curvature; // g''(R)
    Eigen::VectorXd int_phi;   // int_0^R phi sqrt(R') f dR'
    Eigen::VectorXd int_theta; // int_0^R theta sqrt(R') f dR'
    double d1 = 0, d2 = 0;     // g ~ d1 R log R + d2 R on the last decade
    double fit_residual = 0;   // relative residual of that fit

    /// g(R) for any R >= 0: spline in log R on the grid, R^3 below it and the
    /// fitted d1 R log R + d2 R form above it.
    double value(double R) const;
    /// g'(R) with the same extension rules.
    double derivative(double R) const;
    /// R g'(R) and R^2 g''(R) are needed by the time-derivative terms.
    std::array<double, 3> jet(double R) const; // {g, g', g''}

    CubicSpline spline; // g against log R
    CubicSpline slope_spline; // R g'(R) against log R
};

/// Variation-of-constants solution of (t lambda)^2 tilde-L v_1 = t^2 e_0.
FirstCorrection first_correction(double nu, const Eigen::VectorXd& grid, const Tolerances& tol = {});

/// g(R) = (t lambda)^2 v_1 at an arbitrary R, completing the stored
/// cumulative integrals by adaptive quadrature from the nearest grid point.
double first_correction_at(const FirstCorrection& v1, double R, double quad_rel = 1e-13);

/// Action of tilde-L = d^2/dR^2 + (1/R) d/dR - cos(2Q)/R^2 on samples taken on a
/// geometric grid, by centred differences in log R. Endpoints are dropped.
Eigen::VectorXd apply_tilde_L_logfd(const Eigen::VectorXd& grid, const Eigen::VectorXd& values);

/// Leading coefficient h(R) of t^2 e_1 = h(R) / (t lambda)^2 + O((t lambda)^{-4}),
/// and the large-R coefficients c1..c4 of h ~ c1 R log R + c2 R + c3 log R + c4.
struct FirstError {
    RadialProfile profile;
    Eigen::Vector4d c = Eigen::Vector4d::Zero();
    double fit_residual = 0;
    double fit_lo = 0, fit_hi = 0;
};

FirstError first_error_expansion(const FirstCorrection& v1);

/// Exact t^2 e_1(t, R) after the first correction, nonlinear terms included.
double first_error_full(const FirstCorrection& v1, double t, double R);

/// Four-term fit c1 R log R + c2 R + c3 log R + c4 on [lo, hi].
FirstError fit_first_error(const RadialProfile& h, double lo, double hi);

} // namespace wml
