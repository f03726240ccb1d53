#include "wml/core_model.hpp"

#include <algorithm>
#include <limits>

namespace wml {

void RadialProfile::validate() const {
    require(grid.size() >= 2 && values.size() == grid.size(), "RadialProfile: grid/value size mismatch");
    require(grid(0) > 0, "RadialProfile: first grid point must be positive");
    for (Eigen::Index i = 1; i < grid.size(); ++i)
        require(grid(i) > grid(i - 1), "RadialProfile: grid must be strictly increasing");
    require(vanishing_order >= 0, "RadialProfile: negative vanishing order");
    require(values.allFinite(), "RadialProfile: non-finite values");
}

double RadialProfile::vanishing_ratio_max(double lo, double hi) const {
    double m = 0;
    for (Eigen::Index i = 0; i < grid.size(); ++i)
        if (grid(i) >= lo && grid(i) <= hi)
            m = std::max(m, std::abs(values(i)) / std::pow(grid(i), vanishing_order));
    return m;
}

double RadialProfile::envelope_ratio_max(double lo, double hi) const {
    double m = 0;
    const auto [k, l] = log_growth;
    for (Eigen::Index i = 0; i < grid.size(); ++i)
        if (grid(i) >= lo && grid(i) <= hi) {
            const double env = std::pow(grid(i), k) * std::pow(std::abs(std::log(grid(i))), l);
            m = std::max(m, std::abs(values(i)) / env);
        }
    return m;
}

SelfSimilarContext make_context(const BlowupParams& p, double t, double r) {
    require(t > 0 && r >= 0, "make_context: need t > 0, r >= 0");
    SelfSimilarContext c;
    c.t = t;
    c.r = r;
    c.a = r / t;
    c.R = p.lambda(t) * r;
    const double tl = p.t_lambda(t);
    const double lg = std::log1p(c.R * c.R);
    c.b1 = lg * lg / (tl * tl);
    c.b2 = 1.0 / (tl * tl);
    return c;
}

void WaveField::validate() const {
    require(r.size() >= 3 && u.size() == r.size() && ut.size() == r.size(), "WaveField: size mismatch");
    require(u.allFinite() && ut.allFinite(), "WaveField: NaN or infinite samples");
    require(r(0) > 0, "WaveField: grid must start at r > 0");
}

Eigen::VectorXd cell_centred_grid(double r_max, int n) {
    require(r_max > 0 && n >= 3, "cell_centred_grid: need r_max > 0 and n >= 3");
    const double dr = r_max / n;
    return (Eigen::VectorXd::LinSpaced(n, 0, n - 1).array() + 0.5) * dr;
}

RadialProfile pde_residual(const WaveField& prev, const WaveField& cur, const WaveField& next) {
    prev.validate();
    cur.validate();
    next.validate();
    const Eigen::Index n = cur.size();
    require(prev.size() == n && next.size() == n, "pde_residual: mismatched grids");
    require((prev.r - cur.r).cwiseAbs().maxCoeff() == 0 && (next.r - cur.r).cwiseAbs().maxCoeff() == 0,
            "pde_residual: mismatched grids");
    const double dt1 = cur.t - prev.t, dt2 = next.t - cur.t;
    require(dt1 > 0 && std::abs(dt1 - dt2) <= 1e-9 * dt1, "pde_residual: slices must be equally spaced in t");
    const double dr = cur.r(1) - cur.r(0);
    require(dr > 0, "pde_residual: grid must increase");
    for (Eigen::Index i = 2; i < n; ++i)
        require(std::abs(cur.r(i) - cur.r(i - 1) - dr) <= 1e-9 * dr, "pde_residual: grid must be uniform");

    RadialProfile out;
    out.grid = cur.r.segment(1, n - 2);
    out.values.resize(n - 2);
    const double dt = dt1;
    for (Eigen::Index i = 1; i + 1 < n; ++i) {
        const double r = cur.r(i);
        const double utt = (next.u(i) - 2 * cur.u(i) + prev.u(i)) / (dt * dt);
        const double urr = (cur.u(i + 1) - 2 * cur.u(i) + cur.u(i - 1)) / (dr * dr);
        const double ur = (cur.u(i + 1) - cur.u(i - 1)) / (2 * dr);
        out.values(i - 1) = utt - urr - ur / r + std::sin(2 * cur.u(i)) / (2 * r * r);
    }
    out.vanishing_order = 1;
    return out;
}

namespace {

double sinc(double x) { return std::abs(x) < 1e-8 ? 1.0 - x * x / 6 : std::sin(x) / x; }

} // namespace

double reduced_energy(const WaveField& field, double r_cut) {
    field.validate();
    const auto& r = field.r;
    const auto& u = field.u;
    const auto& ut = field.ut;
    const Eigen::Index n = field.size();
    for (Eigen::Index i = 1; i < n; ++i) require(r(i) > r(i - 1), "reduced_energy: grid must increase");
    if (r_cut <= 0) return 0.0;

    // node part: (u_t^2 + sin^2 u / r^2) r, trapezoid; gradient part on intervals
    auto node = [&](Eigen::Index i) {
        const double s = std::sin(u(i)) / r(i);
        return (ut(i) * ut(i) + s * s) * r(i);
    };
    double e = 0.0;
    {
        // [0, r_0]: u ~ c r, u_t ~ d r on the odd extension
        const double r0 = std::min(r(0), r_cut);
        const double slope = u(0) / r(0); // one-sided u / r
        const double s = slope * sinc(u(0));
        const double d = ut(0) / r(0);
        e += 0.5 * r0 * r0 * (slope * slope + s * s) + 0.25 * d * d * r0 * r0 * r0 * r0;
    }
    for (Eigen::Index i = 0; i + 1 < n; ++i) {
        const double a = r(i), b = r(i + 1);
        if (a >= r_cut) break;
        const double h = b - a;
        const double grad = (u(i + 1) - u(i)) / h;
        const double mid = 0.5 * (a + b);
        if (b <= r_cut) {
            e += 0.5 * h * (node(i) + node(i + 1)) + grad * grad * mid * h;
        } else {
            const double part = r_cut - a;
            const double w = part / h;
            const double fb = node(i) * (1 - w) + node(i + 1) * w;
            e += 0.5 * part * (node(i) + fb) + grad * grad * 0.5 * (a + r_cut) * part;
        }
    }
    return e;
}

double reduced_energy(const WaveField& field) {
    return reduced_energy(field, std::numeric_limits<double>::infinity());
}

} // namespace wml
