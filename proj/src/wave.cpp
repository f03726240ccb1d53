#include "wml/wave.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <numbers>

namespace wml {

namespace {

const char* kModule = "wave_simulator";

// C-infinity step from 0 at x <= 0 to 1 at x >= 1.
double smooth_step(double x) {
    if (x <= 0) return 0.0;
    if (x >= 1) return 1.0;
    const double a = std::exp(-1 / x), b = std::exp(-1 / (1 - x));
    return a / (a + b);
}

} // namespace

WaveField init_from_profile(const ApproxSolution& approx, double t0, double r_max, double dr,
                            double blend_fraction) {
    require(t0 > 0 && dr > 0 && r_max >= 2 * t0, "init_from_profile: need t0 > 0, dr > 0, r_max >= 2 t0");
    require(blend_fraction > 0 && blend_fraction < 1, "init_from_profile: blend_fraction must lie in (0, 1)");
    if (blend_fraction * t0 < 8 * dr)
        throw NumericalError(kModule, "init_from_profile: blend region [" + num((1 - blend_fraction) * t0) + ", " +
                                          num(t0) + "] has fewer than 8 cells at dr=" + num(dr));
    const int n = static_cast<int>(std::llround(r_max / dr));
    WaveField f;
    f.t = t0;
    f.r = cell_centred_grid(n * dr, n);
    f.u.resize(n);
    f.ut.resize(n);
    const double lam = approx.params.lambda(t0);
    const double inner = (1 - blend_fraction) * t0;
    const double edge = std::min(t0, approx.max_radius(t0));
    for (int i = 0; i < n; ++i) {
        const double r = f.r(i);
        const double outer = ground_state(lam * r);
        if (r >= t0) {
            f.u(i) = outer;
            f.ut(i) = 0;
            continue;
        }
        const double w = 1 - smooth_step((r - inner) / (t0 - inner));
        if (w == 0 || r > edge) {
            f.u(i) = outer;
            f.ut(i) = 0;
            continue;
        }
        const FieldJet j = approx.jet(t0, r);
        f.u(i) = w * j.u + (1 - w) * outer;
        f.ut(i) = w * j.ut;
    }
    return f;
}

void WaveOperator::operator()(const WaveField& f, Eigen::VectorXd& du, Eigen::VectorXd& dut) const {
    const Eigen::Index n = f.size();
    const double h = f.dr();
    du.resize(n);
    dut.resize(n);
    const auto& r = f.r;
    const auto& u = f.u;
    for (Eigen::Index i = 0; i + 1 < n; ++i) {
        // (1/r)(r u_r)_r in flux form; the face at r = 0 carries no flux
        const double right = (r(i) + 0.5 * h) * (u(i + 1) - u(i));
        const double left = i == 0 ? 0.0 : (r(i) - 0.5 * h) * (u(i) - u(i - 1));
        du(i) = f.ut(i);
        dut(i) = (right - left) / (r(i) * h * h) - std::sin(2 * u(i)) / (2 * r(i) * r(i));
    }
    // outgoing toward decreasing t: w_t = w_r + w / (2 r) for w = u - Q(lambda_out r)
    const Eigen::Index b = n - 1;
    auto w = [&](Eigen::Index i) { return u(i) - ground_state(lambda_out * r(i)); };
    const double wr = (3 * w(b) - 4 * w(b - 1) + w(b - 2)) / (2 * h);
    du(b) = wr + w(b) / (2 * r(b));
    dut(b) = 0;
}

double extract_lambda(const WaveField& field) {
    const double half = std::numbers::pi / 2;
    const auto& u = field.u;
    const auto& r = field.r;
    if (u(0) >= half) return 1 / r(0);
    for (Eigen::Index i = 1; i < field.size(); ++i) {
        if (u(i) >= half) {
            const double w = (half - u(i - 1)) / (u(i) - u(i - 1));
            return 1 / (r(i - 1) + w * (r(i) - r(i - 1)));
        }
    }
    throw NumericalError(kModule, "extract_lambda: u never reaches pi/2 at t=" + num(field.t) +
                                      " (profile not concentrated)");
}

EvolveResult evolve(const WaveField& field, double t_end, const EvolveOptions& opt,
                    const std::vector<double>& snapshot_times,
                    const std::function<bool(const WaveField&)>& observe) {
    field.validate();
    require(opt.cfl > 0 && opt.cfl < 1, "evolve: cfl must lie in (0, 1)");
    require(t_end != field.t, "evolve: t_end equals the start time");
    const double dir = t_end < field.t ? -1.0 : 1.0;
    const double h = field.dr();
    const double dt_nominal = opt.cfl * h;
    const long nsteps = static_cast<long>(std::ceil(std::abs(t_end - field.t) / dt_nominal));
    const double dt = (t_end - field.t) / static_cast<double>(nsteps);
    WaveOperator op{opt.lambda_out > 0 ? opt.lambda_out : extract_lambda(field)};

    std::vector<double> pending = snapshot_times;
    std::sort(pending.begin(), pending.end(), [dir](double a, double b) { return dir * a < dir * b; });
    std::size_t next = 0;

    EvolveResult res;
    WaveField cur = field, stage = field;
    const Eigen::Index n = cur.size();
    Eigen::VectorXd k1u(n), k1v(n), k2u(n), k2v(n), k3u(n), k3v(n), k4u(n), k4v(n);
    auto take = [&](const WaveField& f) {
        while (next < pending.size() && dir * (pending[next] - f.t) <= 0.5 * std::abs(dt)) {
            res.snapshots.push_back(f);
            ++next;
        }
    };
    take(cur);
    for (long s = 0; s < nsteps; ++s) {
        op(cur, k1u, k1v);
        stage.u = cur.u + 0.5 * dt * k1u;
        stage.ut = cur.ut + 0.5 * dt * k1v;
        stage.t = cur.t + 0.5 * dt;
        op(stage, k2u, k2v);
        stage.u = cur.u + 0.5 * dt * k2u;
        stage.ut = cur.ut + 0.5 * dt * k2v;
        op(stage, k3u, k3v);
        stage.u = cur.u + dt * k3u;
        stage.ut = cur.ut + dt * k3v;
        stage.t = cur.t + dt;
        op(stage, k4u, k4v);
        cur.u += dt / 6 * (k1u + 2 * k2u + 2 * k3u + k4u);
        cur.ut += dt / 6 * (k1v + 2 * k2v + 2 * k3v + k4v);
        cur.t = field.t + static_cast<double>(s + 1) * dt;
        // the boundary cell carries the advected velocity
        cur.ut(n - 1) = k4u(n - 1);
        ++res.steps;
        if (!cur.u.allFinite() || !cur.ut.allFinite()) {
            res.truncated = true;
            res.reason = "non-finite";
            break;
        }
        double lam = 0;
        try {
            lam = extract_lambda(cur);
        } catch (const NumericalError&) {
            lam = 0;
        }
        if (lam * h > opt.underresolved) {
            res.truncated = true;
            res.reason = "under-resolved";
            take(cur);
            break;
        }
        take(cur);
        if (observe && !observe(cur)) {
            res.truncated = true;
            res.reason = "observer";
            break;
        }
    }
    res.last = std::move(cur);
    return res;
}

RateFit rate_fit(const RateSeries& series) {
    const std::size_t n = series.t.size();
    require(series.lambda.size() == n, "rate_fit: t and lambda differ in length");
    if (n < 8) throw NumericalError(kModule, "rate_fit: " + std::to_string(n) + " samples, need at least 8");
    const auto [lo, hi] = std::minmax_element(series.t.begin(), series.t.end());
    if (!(*lo > 0) || *hi < 4 * *lo)
        throw NumericalError(kModule, "rate_fit: samples span t in [" + num(*lo) + ", " + num(*hi) +
                                          "], need a factor of 4");
    Eigen::VectorXd x(n), y(n);
    for (std::size_t i = 0; i < n; ++i) {
        require(series.lambda[i] > 0, "rate_fit: lambda must be positive");
        x(i) = std::log(series.t[i]);
        y(i) = std::log(series.lambda[i]);
    }
    const auto f = fit_line(x, y);
    return {-f.slope, std::exp(f.intercept), f.residual_rms};
}

double local_error_energy(const WaveField& field, double lambda_est, double p, double cone_factor) {
    require(lambda_est > 0 && field.t > 0, "local_error_energy: need lambda_est > 0 and t > 0");
    WaveField eps = field;
    // d/dt Q(lambda(t) r) with lambda ~ t^{-p}: Q'(R) R (-p / t)
    for (Eigen::Index i = 0; i < field.size(); ++i) {
        const double R = lambda_est * field.r(i);
        eps.u(i) = field.u(i) - ground_state(R);
        eps.ut(i) = field.ut(i) + ground_state_slope(R) * R * p / field.t;
    }
    return reduced_energy(eps, cone_factor * field.t);
}

SimulationRun simulate(const ApproxSolution& approx, const SimulationOptions& opt) {
    const auto clock = std::chrono::steady_clock::now();
    require(opt.samples >= 8, "simulate: need at least 8 rate samples");
    require(opt.t_min >= 0 && opt.t_min < opt.t0, "simulate: t_min must lie in [0, t0)");
    const WaveField init = init_from_profile(approx, opt.t0, opt.r_max, opt.dr, opt.blend_fraction);
    const double E0 = reduced_energy(init);

    // rate samples log-spaced in t from t0 down to the smallest t the grid can resolve
    const double nu = approx.params.nu;
    const double t_floor = std::max(opt.t_min, 0.5 * std::pow(opt.underresolved / opt.dr, -1 / (1 + nu)));
    const Eigen::VectorXd ts = log_grid(t_floor, opt.t0, opt.samples);

    EvolveOptions eo;
    eo.cfl = opt.cfl;
    eo.underresolved = opt.underresolved;
    eo.lambda_out = approx.params.lambda(opt.t0);
    std::vector<double> times(ts.data(), ts.data() + ts.size());
    SimulationRun run;
    std::vector<double> extra = opt.snapshot_times;
    std::sort(extra.begin(), extra.end(), std::greater<>());
    std::size_t next = 0;
    const double half_step = 0.5 * opt.cfl * opt.dr;
    auto keep = [&](const WaveField& f) {
        while (next < extra.size() && f.t <= extra[next] + half_step) {
            if (extra[next] <= opt.t0 + half_step) run.snapshots.push_back(f);
            ++next;
        }
        return true;
    };
    keep(init);
    const EvolveResult res = evolve(init, t_floor, eo, times, keep);

    run.truncated = res.truncated;
    run.reason = res.reason;
    run.t_stop = res.last.t;
    run.steps = res.steps;
    std::vector<const WaveField*> fields;
    for (const auto& f : res.snapshots) {
        double lam = 0;
        try {
            lam = extract_lambda(f);
        } catch (const NumericalError&) {
            continue;
        }
        run.rate.push(f.t, lam);
        run.energy.push_back(reduced_energy(f));
        run.energy_drift = std::max(run.energy_drift, std::abs(run.energy.back() - E0) / E0);
        fields.push_back(&f);
    }
    try {
        run.rate.fit = rate_fit(run.rate);
    } catch (const NumericalError& e) {
        run.fit_error = e.what();
        run.rate.fit = {std::nan(""), std::nan(""), std::nan("")};
        run.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - clock).count();
        return run;
    }
    for (std::size_t i = 0; i < fields.size(); ++i) {
        const double t = run.rate.t[i], lam = run.rate.lambda[i];
        const double lg = std::log(t);
        run.eloc.push_back(local_error_energy(*fields[i], lam, run.rate.fit.p, approx.params.cone_radius_factor) *
                           t * lam / (lg * lg));
    }
    run.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - clock).count();
    return run;
}

} // namespace wml
