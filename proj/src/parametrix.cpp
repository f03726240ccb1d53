#include "wml/parametrix.hpp"

#include <algorithm>
#include <map>
#include <random>

namespace wml {

namespace {

const char* kModule = "parametrix_engine";

using State2 = std::array<double, 2>;

auto oscillator(double nu, double eta) {
    return [nu, eta](const State2& s, double tau) {
        const double l = lambda_of_tau(nu, tau);
        return State2{s[1], -eta / (l * l) * s[0]};
    };
}

} // namespace

std::array<double, 2> symbol_S_jet(double nu, double tau, double sigma, double xi, const ParametrixOptions& opt) {
    require(nu > 0 && tau > 0 && xi >= 0, "symbol_S: need nu > 0, tau > 0, xi >= 0");
    if (tau > sigma) throw ContractViolation("symbol_S: tau > sigma (only the retarded direction is defined)");
    if (xi == 0) return {sigma - tau, -1.0};
    if (tau == sigma) return {0.0, -1.0};
    return integrate_to<2>(oscillator(nu, xi), State2{0.0, -1.0}, sigma, tau, opt.ode, kModule);
}

double symbol_S(double nu, double tau, double sigma, double xi, const ParametrixOptions& opt) {
    return symbol_S_jet(nu, tau, sigma, xi, opt)[0];
}

Eigen::VectorXd symbol_S_row(double nu, double tau, const Eigen::VectorXd& sigma, double xi,
                             const ParametrixOptions& opt) {
    const Eigen::Index n = sigma.size();
    Eigen::VectorXd out(n);
    if (n == 0) return out;
    require(sigma(0) >= tau, "symbol_S_row: sigma must not precede tau");
    for (Eigen::Index i = 1; i < n; ++i) require(sigma(i) > sigma(i - 1), "symbol_S_row: sigma must increase");
    if (xi == 0) return sigma.array() - tau;
    std::vector<double> stops;
    Eigen::Index first = 0;
    for (Eigen::Index i = 0; i < n; ++i) {
        if (sigma(i) == tau) {
            out(i) = 0;
            first = i + 1;
        } else {
            stops.push_back(sigma(i));
        }
    }
    if (stops.empty()) return out;
    integrate_through<2>(
        oscillator(nu, xi), State2{0.0, 1.0}, tau, std::span<const double>(stops),
        [&](std::size_t i, double, const State2& s) { out(first + i) = s[0]; }, opt.ode, kModule);
    return out;
}

std::vector<BoundSample> latin_hypercube(int n, std::uint64_t seed, double tau_lo, double tau_hi, double ratio_hi,
                                         double xi_lo, double xi_hi) {
    require(n >= 2 && tau_lo > 0 && tau_hi > tau_lo && ratio_hi > 1 && xi_lo > 0 && xi_hi > xi_lo,
            "latin_hypercube: bad ranges");
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    std::array<std::vector<double>, 3> strata;
    for (auto& s : strata) {
        s.resize(n);
        for (int i = 0; i < n; ++i) s[i] = (i + u(rng)) / n;
        std::shuffle(s.begin(), s.end(), rng);
    }
    auto lerp_log = [](double lo, double hi, double w) { return lo * std::pow(hi / lo, w); };
    std::vector<BoundSample> out(n);
    for (int i = 0; i < n; ++i) {
        const double tau = lerp_log(tau_lo, tau_hi, strata[0][i]);
        out[i] = {tau, tau * lerp_log(1.0, ratio_hi, strata[1][i]), lerp_log(xi_lo, xi_hi, strata[2][i])};
    }
    return out;
}

namespace {

// C from binned maxima of y against x, then the largest ratio with that C.
std::pair<double, double> fit_bound(const std::vector<double>& x, const std::vector<double>& y) {
    const int bins = 10;
    const double lo = *std::min_element(x.begin(), x.end()), hi = *std::max_element(x.begin(), x.end());
    std::vector<double> best(bins, -std::numeric_limits<double>::infinity()), mid(bins);
    for (std::size_t i = 0; i < x.size(); ++i) {
        int b = hi > lo ? static_cast<int>((x[i] - lo) / (hi - lo) * bins) : 0;
        b = std::clamp(b, 0, bins - 1);
        best[b] = std::max(best[b], y[i]);
    }
    std::vector<double> bx, by;
    for (int b = 0; b < bins; ++b) {
        if (std::isfinite(best[b])) {
            bx.push_back(lo + (b + 0.5) * (hi - lo) / bins);
            by.push_back(best[b]);
        }
    }
    double C = 0;
    if (bx.size() >= 2) {
        const auto f = fit_line(Eigen::Map<Eigen::VectorXd>(bx.data(), bx.size()),
                                Eigen::Map<Eigen::VectorXd>(by.data(), by.size()));
        C = std::max(0.0, f.slope);
    }
    double m = 0;
    for (std::size_t i = 0; i < x.size(); ++i) m = std::max(m, std::exp(y[i] - C * x[i]));
    return {C, m};
}

} // namespace

BoundReport bound_check(double nu, const std::vector<BoundSample>& samples, const ParametrixOptions& opt) {
    require(samples.size() >= 4, "bound_check: need at least 4 samples");
    const std::size_t n = samples.size();
    std::vector<double> x(n), y(n);
    BoundReport rep;
    parallel_for(static_cast<int>(n), [&](int i) {
        const auto& s = samples[i];
        const double S = symbol_S(nu, s.tau, s.sigma, s.xi, opt);
        const double env = s.sigma / std::sqrt(1 + std::pow(s.tau, -2 / nu) * s.xi);
        x[i] = std::log(s.sigma / s.tau);
        y[i] = std::log(std::max(std::abs(S), 1e-300) / env);
    });
    for (const auto& s : samples)
        rep.dS_at_diagonal = std::max(rep.dS_at_diagonal, std::abs(symbol_S_jet(nu, s.sigma, s.sigma, s.xi, opt)[1] + 1));
    std::tie(rep.C, rep.ratio_max) = fit_bound(x, y);
    const std::vector<double> xh(x.begin(), x.begin() + n / 2), yh(y.begin(), y.begin() + n / 2);
    std::tie(rep.C_half, rep.ratio_max_half) = fit_bound(xh, yh);
    rep.stable = std::isfinite(rep.ratio_max) && rep.ratio_max > 0 &&
                 rep.ratio_max <= 2 * rep.ratio_max_half && rep.ratio_max_half <= 2 * rep.ratio_max &&
                 std::abs(rep.C - rep.C_half) <= 0.25;
    return rep;
}

// ------------------------------------------------------------ SourceSample

void SourceSample::validate() const {
    require(tau_grid.size() >= 2 && xi_grid.size() >= 2, "SourceSample: grids too small");
    for (Eigen::Index i = 1; i < tau_grid.size(); ++i)
        require(tau_grid(i) > tau_grid(i - 1) && tau_grid(0) > 0, "SourceSample: tau grid must increase");
    for (Eigen::Index i = 1; i < xi_grid.size(); ++i)
        require(xi_grid(i) > xi_grid(i - 1) && xi_grid(0) > 0, "SourceSample: xi grid must increase");
    if (!exact) {
        require(values.rows() == tau_grid.size() && values.cols() == xi_grid.size(), "SourceSample: shape mismatch");
        require(values.allFinite(), "SourceSample: non-finite values");
    }
}

double SourceSample::tau_max() const { return tau_grid(tau_grid.size() - 1); }

double SourceSample::operator()(double sigma, double xi) const {
    if (exact) return sigma > tau_max() ? 0.0 : exact(sigma, xi);
    const Eigen::Index nt = tau_grid.size(), nx = xi_grid.size();
    if (sigma > tau_max() || xi > xi_grid(nx - 1)) return 0.0;
    auto locate = [](const Eigen::VectorXd& g, double v, Eigen::Index& i, double& w) {
        const Eigen::Index n = g.size();
        if (v <= g(0)) {
            i = 0;
            w = 0;
            return;
        }
        const double* p = std::upper_bound(g.data(), g.data() + n, v);
        i = std::min<Eigen::Index>(p - g.data() - 1, n - 2);
        w = std::log(v / g(i)) / std::log(g(i + 1) / g(i));
        w = std::clamp(w, 0.0, 1.0);
    };
    Eigen::Index it, ix;
    double wt, wx;
    locate(tau_grid, sigma, it, wt);
    locate(xi_grid, xi, ix, wx);
    (void)nt;
    const double a = values(it, ix) * (1 - wx) + values(it, ix + 1) * wx;
    const double b = values(it + 1, ix) * (1 - wx) + values(it + 1, ix + 1) * wx;
    return a * (1 - wt) + b * wt;
}

double SourceSample::fitted_decay() const {
    const Eigen::Index nt = tau_grid.size();
    std::vector<double> x, y;
    for (Eigen::Index i = 0; i < nt; ++i) {
        if (tau_grid(i) < tau_max() / 10) continue;
        double m = 0;
        if (exact) {
            for (Eigen::Index j = 0; j < xi_grid.size(); ++j) m = std::max(m, std::abs(exact(tau_grid(i), xi_grid(j))));
        } else {
            m = values.row(i).cwiseAbs().maxCoeff();
        }
        if (m > 0) {
            x.push_back(std::log(tau_grid(i)));
            y.push_back(std::log(m));
        }
    }
    if (x.size() < 2) return 0.0;
    return -fit_line(Eigen::Map<Eigen::VectorXd>(x.data(), x.size()), Eigen::Map<Eigen::VectorXd>(y.data(), y.size()))
                .slope;
}

// ------------------------------------------------------------------ U

double duhamel(double nu, double tau, double eta, double tau_max, const std::function<double(double)>& k,
               const ParametrixOptions& opt, double* tail_out) {
    require(tau > 0 && tau_max >= tau && eta >= 0, "duhamel: need 0 < tau <= tau_max, eta >= 0");
    if (tail_out) *tail_out = 0;
    if (tau_max == tau) return 0.0;
    // panels uniform in log sigma; phase per unit log sigma is at most sqrt(eta) sigma / lambda(sigma)
    const double span = std::log(tau_max / tau);
    const double phase_rate = std::sqrt(eta) * tau / lambda_of_tau(nu, tau);
    const int panels = std::max(
        opt.min_panels, static_cast<int>(std::ceil(span * std::max(8.0, opt.nodes_per_radian * phase_rate))));
    const auto q = composite_gauss(std::log(tau), std::log(tau_max), panels, opt.gauss_order);
    const Eigen::VectorXd sigma = q.nodes.array().exp();
    const Eigen::VectorXd S = symbol_S_row(nu, tau, sigma, eta, opt);
    double x = 0, mass = 0;
    Eigen::VectorXd integrand(sigma.size());
    for (Eigen::Index i = 0; i < sigma.size(); ++i) {
        integrand(i) = S(i) * k(sigma(i));
        x += q.weights(i) * sigma(i) * integrand(i);
        mass += q.weights(i) * sigma(i) * std::abs(integrand(i));
    }

    // power-law tail from the last decade, skipped when the source is cut off
    bool live = false;
    for (int j = 0; j < opt.gauss_order; ++j) live = live || integrand((panels - 1) * opt.gauss_order + j) != 0;
    if (!live) return x;
    const double from = std::max(tau, std::min(tau_max / 10, std::sqrt(tau * tau_max)));
    std::vector<double> lx, ly;
    // the tail sign is trusted only where less than a quarter wave of phase remains
    auto settled = [&](double sg) { return std::sqrt(eta) * nu * sg / lambda_of_tau(nu, sg) <= M_PI / 2; };
    bool same_sign = settled(tau_max);
    int sign = 0;
    for (int p = 0; p < panels; ++p) {
        double m = 0, at = 0;
        for (int j = 0; j < opt.gauss_order; ++j) {
            const Eigen::Index i = p * opt.gauss_order + j;
            if (sigma(i) < from) continue;
            if (std::abs(integrand(i)) > m) {
                m = std::abs(integrand(i));
                at = sigma(i);
            }
            const int s = integrand(i) > 0 ? 1 : (integrand(i) < 0 ? -1 : 0);
            if (s != 0 && settled(sigma(i))) {
                if (sign != 0 && s != sign) same_sign = false;
                sign = s;
            }
        }
        if (m > 0) {
            lx.push_back(std::log(at));
            ly.push_back(std::log(m));
        }
    }
    if (lx.size() < 2) return x;
    const auto fit = fit_line(Eigen::Map<Eigen::VectorXd>(lx.data(), lx.size()),
                              Eigen::Map<Eigen::VectorXd>(ly.data(), ly.size()));
    const double p = -fit.slope;
    const double edge = std::exp(fit.intercept + fit.slope * std::log(tau_max));
    if (!(p > 1.0))
        throw NumericalError(kModule, "duhamel: integrand envelope decays like sigma^-" + num(p) +
                                          ", tail diverges; increase tau_max or the source decay N");
    const double tail = edge * tau_max / (p - 1);
    same_sign = same_sign && sign != 0;
    double uncertain = same_sign ? 0.1 * tail : tail;
    if (!same_sign && eta > 0 && p > (1 + nu) / nu) {
        // oscillatory tail: integration by parts against the phase rate at tau_max
        const double omega = std::sqrt(eta) / lambda_of_tau(nu, tau_max);
        uncertain = std::min(uncertain, 2 * edge / omega);
    }
    if (uncertain > opt.tail_rel * mass)
        throw NumericalError(kModule, "duhamel: tail estimate " + num(uncertain) + " exceeds " +
                                          num(opt.tail_rel) + " * int |integrand| = " + num(opt.tail_rel * mass) +
                                          " at tau=" + num(tau) + ", eta=" + num(eta) +
                                          "; increase tau_max or the source decay N");
    if (tail_out) *tail_out = tail;
    return same_sign ? x + sign * tail : x;
}

double apply_U(double nu, const SourceSample& f, double tau, double xi, const SpectralMeasure& rho,
               const ParametrixOptions& opt, double* tail_out) {
    require(xi > 0, "apply_U: xi must be positive");
    require(tau <= f.tau_max(), "apply_U: tau beyond the source grid");
    const double lt = lambda_of_tau(nu, tau);
    const double eta = lt * lt * xi;
    const double rho_xi = rho(xi);
    auto k = [&](double sigma) {
        const double ratio = lt / lambda_of_tau(nu, sigma);
        const double xs = ratio * ratio * xi;
        const double fv = f(sigma, xs);
        if (fv == 0) return 0.0;
        return ratio * std::sqrt(ratio) * std::sqrt(rho(xs) / rho_xi) * fv;
    };
    return duhamel(nu, tau, eta, f.tau_max(), k, opt, tail_out);
}

// -------------------------------------------------------- zeroth iterate

ZerothIterate zeroth_iterate(const ApproxSolution& approx, const Eigen::VectorXd& tau_grid,
                             const Eigen::VectorXd& tau_out, const Eigen::VectorXd& xi_out,
                             const SpectralMeasure& rho,
                             const SpectralOptions& sopt, const ParametrixOptions& opt, double residual_scale) {
    const double nu = approx.params.nu;
    const Eigen::Index ns = tau_grid.size();
    require(ns >= 4, "zeroth_iterate: need at least 4 source slices");
    for (Eigen::Index i = 1; i < ns; ++i) require(tau_grid(i) > tau_grid(i - 1), "zeroth_iterate: tau grid must increase");

    // radial cut per slice: r <= (1 - delta) t, or r <= t below order 2
    std::vector<double> t(ns), lam(ns), cut(ns);
    double rmax = 0;
    for (Eigen::Index i = 0; i < ns; ++i) {
        t[i] = std::pow(nu * tau_grid(i), -1 / nu);
        lam[i] = approx.params.lambda(t[i]);
        const double r = std::min(approx.max_radius(t[i]), t[i]);
        cut[i] = r * lam[i];
        rmax = std::max(rmax, cut[i]);
    }
    const double h = sopt.panel;
    const int panels = static_cast<int>(std::ceil(rmax / h));
    const auto unit = gauss_legendre(sopt.gauss_order);
    std::map<double, Eigen::Index> index;
    auto add = [&](double lo, double hi, std::vector<std::pair<double, double>>& out) {
        for (Eigen::Index j = 0; j < unit.nodes.size(); ++j) {
            const double R = 0.5 * (lo + hi) + 0.5 * (hi - lo) * unit.nodes(j);
            out.emplace_back(R, 0.5 * (hi - lo) * unit.weights(j));
            index.emplace(R, 0);
        }
    };
    std::vector<std::vector<std::pair<double, double>>> rules(ns);
    for (Eigen::Index i = 0; i < ns; ++i) {
        for (int p = 0; p < panels; ++p) {
            const double lo = p * h, hi = std::min((p + 1) * h, cut[i]);
            if (lo >= cut[i]) break;
            add(lo, hi, rules[i]);
        }
    }
    Eigen::VectorXd R(index.size());
    {
        Eigen::Index k = 0;
        for (auto& [r, idx] : index) {
            idx = k;
            R(k++) = r;
        }
    }
    const Eigen::VectorXd xi = rho.tables().xi;
    const Eigen::MatrixXd phi = regular_table(xi, R, sopt);

    ZerothIterate z;
    z.source.tau_grid = tau_grid;
    z.source.xi_grid = xi;
    z.source.values.resize(ns, xi.size());
    parallel_for(static_cast<int>(ns), [&](int i) {
        Eigen::VectorXd fw = Eigen::VectorXd::Zero(R.size());
        for (const auto& [r, w] : rules[i]) {
            const double e = approx.residual(t[i], r / lam[i]);
            fw(index.at(r)) += w * residual_scale * std::sqrt(r) * e / (lam[i] * lam[i]);
        }
        z.source.values.row(i) = (phi * fw).transpose();
    });
    z.source.decay_N = z.source.fitted_decay();

    z.x0.tau_grid = tau_out;
    z.x0.xi_grid = xi_out;
    z.x0.values.resize(tau_out.size(), xi_out.size());
    parallel_for(static_cast<int>(tau_out.size() * xi_out.size()), [&](int k) {
        const Eigen::Index a = k / xi_out.size(), b = k % xi_out.size();
        z.x0.values(a, b) = apply_U(nu, z.source, tau_out(a), xi_out(b), rho, opt);
    });
    z.x0.decay_N = z.x0.fitted_decay();

    z.alpha = 0.5 + nu / 2 - 0.01;
    z.norms.resize(tau_out.size());
    for (Eigen::Index a = 0; a < tau_out.size(); ++a) {
        SpectralCoefficients c{xi_out, z.x0.values.row(a).transpose()};
        z.norms(a) = c.norm(z.alpha, rho);
    }
    if (tau_out.size() >= 2) {
        const Eigen::VectorXd lx = tau_out.array().log(), ly = z.norms.array().max(1e-300).log();
        z.decay_fit = -fit_line(lx, ly).slope;
    }
    return z;
}

} // namespace wml
