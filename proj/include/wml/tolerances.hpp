#pragma once

namespace wml {

// Every tolerance and numerical knob in one place. Defaults reproduce the
// documented configuration (docs/config_reference.md).
struct Tolerances {
    // ODE integration (Fehlberg 7(8) controlled stepper)
    double ode_rel = 1e-12;
    double ode_abs = 1e-20;

    // adaptive Gauss-Kronrod quadrature
    double quad_abs = 1e-10;
    double quad_rel = 1e-8;

    // profile construction
    double r_min = 1e-3;
    double r_max = 1e3;
    int r_points = 2048;
    int frobenius_order = 8;       // series terms beyond the leading power
    double a_switch = 0.05;        // Frobenius -> integrator hand-off in a
    double delta_edge = 1e-3;      // solutions live on [0, 1 - delta_edge]
    int a_nodes = 600;             // stored nodes of a self-similar solution

    // spectral
    double xi_min = 1e-4;
    double xi_max = 1e4;
    int xi_points = 512;
    double spectral_r0 = 1e-3;     // Frobenius launch radius for phi, theta
    double transform_r_max = 12.0;
    double transform_panel = 0.05; // Gauss-Legendre panel width in R
    double weyl_far = 50.0;        // R_far = weyl_far * max(1, xi^{-1/2})
    double match_radius = 5.0;     // R_match = match_radius * max(1, xi^{-1/2})

    // parametrix
    double tail_rel = 1e-6;        // allowed tail / int |integrand| for apply_U
    double zeroth_tail_rel = 0.05; // same, for the zeroth iterate near tau_max

    // simulator
    double blend_fraction = 0.05;  // blend width as a fraction of t0
    double underresolved = 0.05;   // stop once lambda * dr exceeds this
};

} // namespace wml
