#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <numbers>
#include <utility>

#include "wml/errors.hpp"

namespace wml {

/// Blow-up exponent and the scales derived from it. Blow-up happens at t = 0
/// with concentration scale lambda(t) = t^{-1-nu}; tau = t^{-nu} / nu is the
/// renormalized time.
struct BlowupParams {
    double nu = 0.5;
    double t_ref = 1.0;
    double cone_radius_factor = 1.0;

    void validate() const {
        require(std::isfinite(nu) && nu > 0, "BlowupParams: nu must be positive");
        require(std::isfinite(t_ref) && t_ref > 0, "BlowupParams: t_ref must be positive");
        require(cone_radius_factor > 0 && cone_radius_factor <= 1,
                "BlowupParams: cone_radius_factor must lie in (0, 1]");
    }

    double lambda(double t) const { return std::pow(t, -1.0 - nu); }
    /// d lambda / dt divided by lambda.
    double log_lambda_rate(double t) const { return -(1.0 + nu) / t; }
    /// t * lambda(t) = t^{-nu}.
    double t_lambda(double t) const { return std::pow(t, -nu); }
    double tau(double t) const { return std::pow(t, -nu) / nu; }
    double t_of_tau(double tau) const { return std::pow(nu * tau, -1.0 / nu); }
    double lambda_of_tau(double tau) const { return std::pow(nu * tau, (1.0 + nu) / nu); }
};

/// A real function of R = lambda(t) r sampled on a strictly increasing grid.
struct RadialProfile {
    Eigen::VectorXd grid;
    Eigen::VectorXd values;
    int vanishing_order = 0;
    std::pair<int, int> log_growth{0, 0}; // R^k (log R)^l envelope at infinity

    void validate() const;
    /// max |values / R^m| over grid points in [lo, hi].
    double vanishing_ratio_max(double lo, double hi) const;
    /// max |values / (R^k (log R)^l)| over grid points in [lo, hi].
    double envelope_ratio_max(double lo, double hi) const;
};

/// Coordinates of a point (t, r) in the self-similar description.
struct SelfSimilarContext {
    double t = 0, r = 0, a = 0, R = 0, b1 = 0, b2 = 0;
};
SelfSimilarContext make_context(const BlowupParams& p, double t, double r);

/// Radial field (u, u_t) on a uniform cell-centred grid r_i = (i + 1/2) dr.
struct WaveField {
    double t = 0.0;
    Eigen::VectorXd r;
    Eigen::VectorXd u;
    Eigen::VectorXd ut;

    Eigen::Index size() const { return r.size(); }
    double dr() const { return r.size() > 1 ? r(1) - r(0) : 0.0; }
    void validate() const;
};

/// Cell-centred grid with n cells of width r_max / n.
Eigen::VectorXd cell_centred_grid(double r_max, int n);

// ------------------------------------------------------------ closed forms

template <class Scalar>
Scalar ground_state(Scalar R) {
    using std::atan;
    return Scalar(2) * atan(R);
}

/// dQ/dR.
template <class Scalar>
Scalar ground_state_slope(Scalar R) {
    return Scalar(2) / (Scalar(1) + R * R);
}

/// t^2 e_0 as a function of R alone.
template <class Scalar>
Scalar e0_scaled(Scalar R, double nu) {
    const Scalar s = Scalar(1) + R * R;
    return (nu + 1) * (nu + 1) * Scalar(4) * R / (s * s) - nu * (nu + 1) * Scalar(2) * R / s;
}

/// Error of the bare ground-state ansatz Q(lambda(t) r) as a function of (t, R).
inline double e0_closed_form(double t, double R, double nu) {
    require(t > 0 && R >= 0, "e0_closed_form: need t > 0, R >= 0");
    return e0_scaled(R, nu) / (t * t);
}

/// cos(2 Q(R)) = (1 - 6R^2 + R^4) / (1 + R^2)^2.
template <class Scalar>
Scalar cos_2q(Scalar R) {
    const Scalar R2 = R * R, s = Scalar(1) + R2;
    return (Scalar(1) - Scalar(6) * R2 + R2 * R2) / (s * s);
}

/// sin(2 Q(R)) = 4R(1 - R^2) / (1 + R^2)^2.
template <class Scalar>
Scalar sin_2q(Scalar R) {
    const Scalar R2 = R * R, s = Scalar(1) + R2;
    return Scalar(4) * R * (Scalar(1) - R2) / (s * s);
}

// ------------------------------------------------------------ operations

/// Second-order centred evaluation of
///   e = u_tt - u_rr - u_r / r + sin(2u) / (2 r^2)
/// at interior points of three equally spaced time slices. The returned
/// profile's grid holds the interior r values.
RadialProfile pde_residual(const WaveField& prev, const WaveField& cur, const WaveField& next);

/// int_0^{r_max} [u_t^2 + u_r^2 + sin^2(u) / r^2] r dr by composite
/// quadrature; the segment [0, r_0] uses the odd extension of u.
double reduced_energy(const WaveField& field);
/// Same integrand restricted to r <= r_cut.
double reduced_energy(const WaveField& field, double r_cut);

} // namespace wml
