#include "wml/numerics.hpp"

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include <algorithm>
#include <atomic>
#include <exception>
#include <mutex>
#include <thread>

namespace wml {

Eigen::VectorXd log_grid(double lo, double hi, int n) {
    require(lo > 0 && hi > lo && n >= 2, "log_grid: need 0 < lo < hi and n >= 2");
    Eigen::VectorXd g(n);
    const double a = std::log(lo), b = std::log(hi);
    for (int i = 0; i < n; ++i) g(i) = std::exp(a + (b - a) * i / (n - 1));
    g(0) = lo;
    g(n - 1) = hi;
    return g;
}

Eigen::VectorXd uniform_grid(double lo, double hi, int n) {
    require(hi > lo && n >= 2, "uniform_grid: need lo < hi and n >= 2");
    return Eigen::VectorXd::LinSpaced(n, lo, hi);
}

Eigen::VectorXd simpson_weights(int n, double h) {
    require(n >= 2, "simpson_weights: need at least two samples");
    Eigen::VectorXd w = Eigen::VectorXd::Zero(n);
    const int intervals = n - 1;
    if (intervals == 1) {
        w << h / 2, h / 2;
        return w;
    }
    // Simpson 1/3 on an even prefix, 3/8 rule on the final three intervals if odd.
    int even = intervals % 2 == 0 ? intervals : intervals - 3;
    for (int i = 0; i < even; i += 2) {
        w(i) += h / 3;
        w(i + 1) += 4 * h / 3;
        w(i + 2) += h / 3;
    }
    if (even != intervals) {
        const int i = even;
        w(i) += 3 * h / 8;
        w(i + 1) += 9 * h / 8;
        w(i + 2) += 9 * h / 8;
        w(i + 3) += 3 * h / 8;
    }
    return w;
}

QuadratureRule gauss_legendre(int n) {
    require(n >= 1, "gauss_legendre: n >= 1");
    Eigen::MatrixXd J = Eigen::MatrixXd::Zero(n, n);
    for (int k = 1; k < n; ++k) {
        const double b = k / std::sqrt(4.0 * k * k - 1.0);
        J(k, k - 1) = b;
        J(k - 1, k) = b;
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(J);
    QuadratureRule rule;
    rule.nodes = es.eigenvalues();
    rule.weights = 2.0 * es.eigenvectors().row(0).transpose().array().square();
    return rule;
}

QuadratureRule composite_gauss(double lo, double hi, int panels, int order) {
    require(hi > lo && panels >= 1, "composite_gauss: bad interval");
    const QuadratureRule base = gauss_legendre(order);
    QuadratureRule rule;
    rule.nodes.resize(panels * order);
    rule.weights.resize(panels * order);
    const double h = (hi - lo) / panels;
    for (int p = 0; p < panels; ++p) {
        const double mid = lo + (p + 0.5) * h;
        for (int k = 0; k < order; ++k) {
            rule.nodes(p * order + k) = mid + 0.5 * h * base.nodes(k);
            rule.weights(p * order + k) = 0.5 * h * base.weights(k);
        }
    }
    return rule;
}

// ------------------------------------------------------------ splines

CubicSpline::CubicSpline(Eigen::VectorXd x, Eigen::VectorXd y, double slope_lo, double slope_hi)
    : x_(std::move(x)), y_(std::move(y)) {
    const Eigen::Index n = x_.size();
    require(n >= 2 && y_.size() == n, "CubicSpline: need matching x, y with >= 2 points");
    for (Eigen::Index i = 1; i < n; ++i) require(x_(i) > x_(i - 1), "CubicSpline: x must increase");
    // Tridiagonal system for the knot second derivatives (clamped ends).
    Eigen::VectorXd a(n), b(n), c(n), d(n);
    const double h0 = x_(1) - x_(0), hn = x_(n - 1) - x_(n - 2);
    b(0) = h0 / 3;
    c(0) = h0 / 6;
    a(0) = 0;
    d(0) = (y_(1) - y_(0)) / h0 - slope_lo;
    for (Eigen::Index i = 1; i + 1 < n; ++i) {
        const double hl = x_(i) - x_(i - 1), hr = x_(i + 1) - x_(i);
        a(i) = hl / 6;
        b(i) = (hl + hr) / 3;
        c(i) = hr / 6;
        d(i) = (y_(i + 1) - y_(i)) / hr - (y_(i) - y_(i - 1)) / hl;
    }
    a(n - 1) = hn / 6;
    b(n - 1) = hn / 3;
    c(n - 1) = 0;
    d(n - 1) = slope_hi - (y_(n - 1) - y_(n - 2)) / hn;
    for (Eigen::Index i = 1; i < n; ++i) {
        const double w = a(i) / b(i - 1);
        b(i) -= w * c(i - 1);
        d(i) -= w * d(i - 1);
    }
    m_.resize(n);
    m_(n - 1) = d(n - 1) / b(n - 1);
    for (Eigen::Index i = n - 2; i >= 0; --i) m_(i) = (d(i) - c(i) * m_(i + 1)) / b(i);
}

Eigen::Index CubicSpline::interval(double x) const {
    const auto* begin = x_.data();
    const auto* end = x_.data() + x_.size();
    Eigen::Index i = std::upper_bound(begin, end, x) - begin - 1;
    return std::clamp<Eigen::Index>(i, 0, x_.size() - 2);
}

double CubicSpline::operator()(double x) const {
    const Eigen::Index i = interval(x);
    const double h = x_(i + 1) - x_(i);
    const double A = (x_(i + 1) - x) / h, B = (x - x_(i)) / h;
    return A * y_(i) + B * y_(i + 1) + ((A * A * A - A) * m_(i) + (B * B * B - B) * m_(i + 1)) * h * h / 6;
}

double CubicSpline::derivative(double x) const {
    const Eigen::Index i = interval(x);
    const double h = x_(i + 1) - x_(i);
    const double A = (x_(i + 1) - x) / h, B = (x - x_(i)) / h;
    return (y_(i + 1) - y_(i)) / h + ((1 - 3 * A * A) * m_(i) + (3 * B * B - 1) * m_(i + 1)) * h / 6;
}

QuinticHermite::QuinticHermite(Eigen::VectorXd x, Eigen::VectorXd y, Eigen::VectorXd dy, Eigen::VectorXd d2y)
    : x_(std::move(x)), y_(std::move(y)), dy_(std::move(dy)), d2y_(std::move(d2y)) {
    const Eigen::Index n = x_.size();
    require(n >= 2 && y_.size() == n && dy_.size() == n && d2y_.size() == n,
            "QuinticHermite: inconsistent table sizes");
    for (Eigen::Index i = 1; i < n; ++i) require(x_(i) > x_(i - 1), "QuinticHermite: x must increase");
}

std::array<double, 3> QuinticHermite::eval(double x) const {
    const Eigen::Index n = x_.size();
    x = std::clamp(x, x_(0), x_(n - 1));
    Eigen::Index i = std::upper_bound(x_.data(), x_.data() + n, x) - x_.data() - 1;
    i = std::clamp<Eigen::Index>(i, 0, n - 2);
    const double h = x_(i + 1) - x_(i);
    const double t = (x - x_(i)) / h;
    const double t2 = t * t, t3 = t2 * t, t4 = t3 * t, t5 = t4 * t;
    // basis functions and their t-derivatives
    const double h0 = 1 - 10 * t3 + 15 * t4 - 6 * t5, h0d = -30 * t2 + 60 * t3 - 30 * t4,
                 h0dd = -60 * t + 180 * t2 - 120 * t3;
    const double h1 = t - 6 * t3 + 8 * t4 - 3 * t5, h1d = 1 - 18 * t2 + 32 * t3 - 15 * t4,
                 h1dd = -36 * t + 96 * t2 - 60 * t3;
    const double h2 = 0.5 * t2 - 1.5 * t3 + 1.5 * t4 - 0.5 * t5, h2d = t - 4.5 * t2 + 6 * t3 - 2.5 * t4,
                 h2dd = 1 - 9 * t + 18 * t2 - 10 * t3;
    const double h3 = 0.5 * t3 - t4 + 0.5 * t5, h3d = 1.5 * t2 - 4 * t3 + 2.5 * t4,
                 h3dd = 3 * t - 12 * t2 + 10 * t3;
    const double h4 = -4 * t3 + 7 * t4 - 3 * t5, h4d = -12 * t2 + 28 * t3 - 15 * t4,
                 h4dd = -24 * t + 84 * t2 - 60 * t3;
    const double h5 = 10 * t3 - 15 * t4 + 6 * t5, h5d = 30 * t2 - 60 * t3 + 30 * t4,
                 h5dd = 60 * t - 180 * t2 + 120 * t3;
    const double y0 = y_(i), y1 = y_(i + 1);
    const double d0 = dy_(i) * h, d1 = dy_(i + 1) * h;
    const double s0 = d2y_(i) * h * h, s1 = d2y_(i + 1) * h * h;
    const double v = h0 * y0 + h1 * d0 + h2 * s0 + h3 * s1 + h4 * d1 + h5 * y1;
    const double vd = h0d * y0 + h1d * d0 + h2d * s0 + h3d * s1 + h4d * d1 + h5d * y1;
    const double vdd = h0dd * y0 + h1dd * d0 + h2dd * s0 + h3dd * s1 + h4dd * d1 + h5dd * y1;
    return {v, vd / h, vdd / (h * h)};
}

double interp_linear(std::span<const double> x, std::span<const double> y, double at) {
    require(x.size() == y.size() && x.size() >= 2, "interp_linear: bad table");
    if (at <= x.front()) return y.front();
    if (at >= x.back()) return y.back();
    const std::size_t i = std::upper_bound(x.begin(), x.end(), at) - x.begin() - 1;
    const double w = (at - x[i]) / (x[i + 1] - x[i]);
    return (1 - w) * y[i] + w * y[i + 1];
}

// ------------------------------------------------------------ fitting

LeastSquaresFit least_squares(const Eigen::MatrixXd& A, const Eigen::VectorXd& y) {
    require(A.rows() == y.size() && A.rows() >= A.cols(), "least_squares: underdetermined system");
    Eigen::VectorXd scale = A.colwise().norm().transpose();
    for (Eigen::Index j = 0; j < scale.size(); ++j)
        if (scale(j) == 0) scale(j) = 1;
    const Eigen::MatrixXd As = A * scale.cwiseInverse().asDiagonal();
    Eigen::VectorXd c = As.colPivHouseholderQr().solve(y);
    LeastSquaresFit fit;
    fit.coeffs = c.cwiseQuotient(scale);
    const Eigen::VectorXd r = y - A * fit.coeffs;
    fit.residual_rms = std::sqrt(r.squaredNorm() / r.size());
    const double yn = y.norm();
    fit.relative_residual = yn > 0 ? r.norm() / yn : r.norm();
    return fit;
}

LineFit fit_line(const Eigen::VectorXd& x, const Eigen::VectorXd& y) {
    Eigen::MatrixXd A(x.size(), 2);
    A.col(0) = x;
    A.col(1).setOnes();
    const auto f = least_squares(A, y);
    return {f.coeffs(0), f.coeffs(1), f.residual_rms};
}

double integrate_adaptive(const std::function<double(double)>& f, double a, double b,
                          double abs_tol, double rel_tol, const std::string& module) {
    if (a == b) return 0.0;
    double err = 0.0, l1 = 0.0;
    // Boost compares unscaled local errors with scaled tolerances, so hand it [-1, 1]
    const double mid = 0.5 * (a + b), half = 0.5 * (b - a);
    auto g = [&](double x) { return half * f(mid + half * x); };
    const double value = boost::math::quadrature::gauss_kronrod<double, 21>::integrate(
        g, -1.0, 1.0, 20, rel_tol, &err, &l1);
    if (!std::isfinite(value) || err > std::max(abs_tol, rel_tol * std::abs(value)) * 10)
        throw NumericalError(module, "quadrature did not converge on [" + num(a) + ", " +
                                         num(b) + "], error estimate " + num(err));
    return value;
}

// ------------------------------------------------------------ threads

void parallel_for(int n, const std::function<void(int)>& fn) {
    const int workers = std::max(1u, std::thread::hardware_concurrency());
    if (workers == 1 || n < 2) {
        for (int i = 0; i < n; ++i) fn(i);
        return;
    }
    std::exception_ptr first;
    std::mutex mtx;
    std::atomic<int> next{0};
    {
        std::vector<std::jthread> pool;
        for (int w = 0; w < std::min(workers, n); ++w) {
            pool.emplace_back([&] {
                for (int i = next++; i < n; i = next++) {
                    try {
                        fn(i);
                    } catch (...) {
                        std::lock_guard lock(mtx);
                        if (!first) first = std::current_exception();
                    }
                }
            });
        }
    }
    if (first) std::rethrow_exception(first);
}

std::uint64_t fnv1a(const void* data, std::size_t bytes, std::uint64_t seed) {
    const auto* p = static_cast<const unsigned char*>(data);
    std::uint64_t h = seed;
    for (std::size_t i = 0; i < bytes; ++i) {
        h ^= p[i];
        h *= 1099511628211ULL;
    }
    return h;
}

} // namespace wml
