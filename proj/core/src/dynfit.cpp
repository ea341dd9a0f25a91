#include "slicer/dynfit.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numeric>

#include "slicer/errors.hpp"

namespace slicer {

void LossParams::validate() const {
    if (!(alpha >= 0.0) || !std::isfinite(alpha))
        throw ConfigError("loss: alpha must be finite and >= 0");
    if (!(beta >= 0.0) || !std::isfinite(beta))
        throw ConfigError("loss: beta must be finite and >= 0");
    if (!(n_unit > 0.0)) throw ConfigError("loss: n_unit must be > 0");
}

namespace {

// One RK4 substep of dy/dt = -(a y^2 + b y^3).
inline double rk4_step(double y, double a, double b, double h) {
    auto f = [a, b](double u) { return -(a * u * u + b * u * u * u); };
    const double k1 = f(y);
    const double k2 = f(y + 0.5 * h * k1);
    const double k3 = f(y + 0.5 * h * k2);
    const double k4 = f(y + h * k3);
    return y + h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
}

double advance(double y, double a, double b, double dt, int steps) {
    if (dt <= 0.0 || y <= 0.0) return std::max(y, 0.0);
    const double h = dt / steps;
    for (int i = 0; i < steps; ++i) {
        y = rk4_step(y, a, b, h);
        if (y < 0.0) { y = 0.0; break; }
    }
    return y;
}

} // namespace

double loss_survival(const LossParams& p, double n0, double t_s, int steps) {
    p.validate();
    if (n0 < 0.0) throw ConfigError("loss: n0 must be >= 0");
    const double y0 = n0 / p.n_unit;
    return advance(y0, p.alpha, p.beta, t_s, std::max(steps, 1)) * p.n_unit;
}

DecayCurve integrate_loss(const LossParams& p, double n0,
                          const std::vector<double>& t_grid, int min_steps) {
    p.validate();
    if (n0 < 0.0) throw ConfigError("integrate_loss: n0 must be >= 0");
    if (t_grid.empty()) throw ConfigError("integrate_loss: empty time grid");
    for (std::size_t i = 1; i < t_grid.size(); ++i)
        if (!(t_grid[i] > t_grid[i - 1]))
            throw ConfigError("integrate_loss: time grid must be strictly increasing");

    DecayCurve out;
    out.n0 = n0;
    out.t_s = t_grid;
    out.n.reserve(t_grid.size());

    const double span = t_grid.back() - t_grid.front();
    const double h_target = span > 0.0 ? span / min_steps : 1.0;
    double y = n0 / p.n_unit;
    double t = t_grid.front();
    out.n.push_back(y * p.n_unit);
    for (std::size_t i = 1; i < t_grid.size(); ++i) {
        const double dt = t_grid[i] - t;
        const int sub = std::max(1, static_cast<int>(std::ceil(dt / h_target)));
        y = advance(y, p.alpha, p.beta, dt, sub);
        t = t_grid[i];
        out.n.push_back(y * p.n_unit);
    }
    return out;
}

double half_life_s(const LossParams& p, double n0) {
    p.validate();
    if (!(n0 > 0.0)) throw ConfigError("half_life: n0 must be > 0");
    if (p.alpha + p.beta <= 0.0)
        throw ConfigError("half_life: no decay (alpha = beta = 0)");
    const double y0 = n0 / p.n_unit;
    const double target = 0.5 * y0;
    // initial scale from the instantaneous rate, then bracket by doubling
    const double rate0 = p.alpha * y0 * y0 + p.beta * y0 * y0 * y0;
    double t_hi = 0.5 * y0 / rate0;
    int guard = 0;
    while (advance(y0, p.alpha, p.beta, t_hi, 4000) > target) {
        t_hi *= 2.0;
        if (++guard > 200) throw NumericError("half_life: failed to bracket");
    }
    double t_lo = 0.0;
    for (int i = 0; i < 100; ++i) {
        const double tm = 0.5 * (t_lo + t_hi);
        if (advance(y0, p.alpha, p.beta, tm, 4000) > target) t_lo = tm;
        else t_hi = tm;
        if ((t_hi - t_lo) <= 1e-6 * t_hi) break;
    }
    return 0.5 * (t_lo + t_hi);
}

LossParams calibrate_to_halflife(double target_s, double n0, double ratio_alpha,
                                 double ratio_beta, double n_unit) {
    if (!(target_s > 0.0)) throw ConfigError("calibrate: target half-life must be > 0");
    if (ratio_alpha < 0.0 || ratio_beta < 0.0 || ratio_alpha + ratio_beta <= 0.0)
        throw ConfigError("calibrate: ratio must be non-negative and non-zero");
    LossParams base{ratio_alpha, ratio_beta, n_unit};
    const double t_base = half_life_s(base, n0);
    // dN/dt = -s (a N^2 + b N^3) rescales time by 1/s, so the exact common
    // factor is the half-life ratio.
    const double s = t_base / target_s;
    LossParams out{ratio_alpha * s, ratio_beta * s, n_unit};
    const double check = half_life_s(out, n0);
    if (std::abs(check - target_s) > 1e-3 * target_s)
        throw NumericError("calibrate: target half-life not reached");
    return out;
}

FitResult simplex_minimize(const std::function<double(const std::vector<double>&)>& objective,
                           const std::vector<double>& x0, const SimplexOptions& options) {
    const std::size_t n = x0.size();
    if (n == 0) throw ConfigError("simplex: empty start point");
    const double f0 = objective(x0);
    if (!std::isfinite(f0)) throw ConfigError("simplex: objective not finite at start");

    std::vector<std::vector<double>> pts(n + 1, x0);
    std::vector<double> fv(n + 1, f0);
    for (std::size_t i = 0; i < n; ++i) {
        double step;
        if (i < options.initial_steps.size() && options.initial_steps[i] != 0.0) {
            step = options.initial_steps[i];
        } else {
            step = options.initial_step * std::abs(x0[i]);
            if (step == 0.0) step = options.initial_step > 0 ? 0.00025 : -0.00025;
        }
        pts[i + 1][i] += step;
        fv[i + 1] = objective(pts[i + 1]);
    }

    std::vector<std::size_t> order(n + 1);
    int iter = 0;
    auto sort_simplex = [&] {
        std::iota(order.begin(), order.end(), std::size_t{0});
        std::stable_sort(order.begin(), order.end(),
                         [&](std::size_t a, std::size_t b) { return fv[a] < fv[b]; });
    };

    for (; iter < options.max_iterations; ++iter) {
        sort_simplex();
        const std::size_t best = order[0], worst = order[n], second = order[n - 1];

        double size = 0.0;
        for (std::size_t i = 0; i <= n; ++i)
            for (std::size_t j = 0; j < n; ++j)
                size = std::max(size, std::abs(pts[i][j] - pts[best][j]));
        const double spread = std::abs(fv[worst] - fv[best]);
        if (size <= options.xtol && spread <= options.ftol) {
            FitResult res{pts[best], fv[best], iter, true};
            return res;
        }

        std::vector<double> centroid(n, 0.0);
        for (std::size_t i = 0; i <= n; ++i) {
            if (i == worst) continue;
            for (std::size_t j = 0; j < n; ++j) centroid[j] += pts[i][j];
        }
        for (double& c : centroid) c /= static_cast<double>(n);

        auto blend = [&](double coef) {
            std::vector<double> x(n);
            for (std::size_t j = 0; j < n; ++j)
                x[j] = centroid[j] + coef * (pts[worst][j] - centroid[j]);
            return x;
        };

        const std::vector<double> xr = blend(-1.0);
        const double fr = objective(xr);
        if (fr < fv[best]) {
            const std::vector<double> xe = blend(-2.0);
            const double fe = objective(xe);
            if (fe < fr) { pts[worst] = xe; fv[worst] = fe; }
            else { pts[worst] = xr; fv[worst] = fr; }
        } else if (fr < fv[second]) {
            pts[worst] = xr; fv[worst] = fr;
        } else {
            const bool outside = fr < fv[worst];
            const std::vector<double> xc = blend(outside ? -0.5 : 0.5);
            const double fc = objective(xc);
            if (fc < std::min(fr, fv[worst])) {
                pts[worst] = xc; fv[worst] = fc;
            } else {
                for (std::size_t i = 0; i <= n; ++i) {
                    if (i == best) continue;
                    for (std::size_t j = 0; j < n; ++j)
                        pts[i][j] = pts[best][j] + 0.5 * (pts[i][j] - pts[best][j]);
                    fv[i] = objective(pts[i]);
                }
            }
        }
    }
    sort_simplex();
    return FitResult{pts[order[0]], fv[order[0]], iter, false};
}

FitResult fit_loss(const DecayCurve& curve) {
    if (curve.t_s.size() < 5)
        throw ConfigError("fit_loss: need at least 5 samples");
    const double n0 = curve.n.front();
    if (!(n0 > 0.0)) throw ConfigError("fit_loss: initial value must be > 0");

    auto model_residual = [&](double alpha, double beta) {
        LossParams p{alpha, beta, 1.0};
        const DecayCurve m = integrate_loss(p, n0, curve.t_s, 2000);
        double ss = 0.0;
        for (std::size_t i = 0; i < m.n.size(); ++i) {
            const double r = m.n[i] - curve.n[i];
            ss += r * r;
        }
        return ss;
    };

    // crude rate estimate from the first drop seeds both channels
    double slope = 0.0;
    for (std::size_t i = 1; i < curve.t_s.size(); ++i) {
        const double dt = curve.t_s[i] - curve.t_s[0];
        if (dt > 0.0) { slope = (curve.n[0] - curve.n[i]) / dt; break; }
    }
    const double rate = std::max(slope, 0.0) / std::max(n0 * n0, 1e-12);
    const std::vector<double> u0{std::sqrt(0.5 * rate), std::sqrt(0.5 * rate / std::max(n0, 1e-12))};

    SimplexOptions opt;
    opt.xtol = 1e-9;
    opt.ftol = 1e-16;
    opt.max_iterations = 2000;
    FitResult fit = simplex_minimize(
        [&](const std::vector<double>& u) { return model_residual(u[0] * u[0], u[1] * u[1]); },
        u0, opt);
    fit.params = {fit.params[0] * fit.params[0], fit.params[1] * fit.params[1]};
    return fit;
}

namespace {

struct FringeBasis {
    double c = 0.0, s = 0.0;  // cos/sin component sums vs {1, cos, sin} basis
};

// Linear LSQ of y = a0 + a1 cos(wx) + a2 sin(wx); returns {a0, a1, a2}.
std::array<double, 3> linear_harmonic_fit(const std::vector<std::pair<double, double>>& pts,
                                          double period) {
    const double w = 2.0 * 3.14159265358979323846 / period;
    double s_1 = 0, s_c = 0, s_s = 0, s_cc = 0, s_ss = 0, s_cs = 0;
    double s_y = 0, s_yc = 0, s_ys = 0;
    for (const auto& [x, y] : pts) {
        const double c = std::cos(w * x), s = std::sin(w * x);
        s_1 += 1.0; s_c += c; s_s += s;
        s_cc += c * c; s_ss += s * s; s_cs += c * s;
        s_y += y; s_yc += y * c; s_ys += y * s;
    }
    // 3x3 normal equations, solved by Cramer
    const double a[3][3] = {{s_1, s_c, s_s}, {s_c, s_cc, s_cs}, {s_s, s_cs, s_ss}};
    const double b[3] = {s_y, s_yc, s_ys};
    auto det3 = [](const double m[3][3]) {
        return m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1]) -
               m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0]) +
               m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0]);
    };
    const double d = det3(a);
    if (std::abs(d) < 1e-12) throw NumericError("fit_fringe: degenerate design matrix");
    std::array<double, 3> out{};
    for (int k = 0; k < 3; ++k) {
        double m[3][3];
        for (int i = 0; i < 3; ++i)
            for (int j = 0; j < 3; ++j) m[i][j] = (j == k) ? b[i] : a[i][j];
        out[k] = det3(m) / d;
    }
    return out;
}

void check_fringe_input(const std::vector<std::pair<double, double>>& scan, double period) {
    if (scan.size() < 8) throw ConfigError("fit_fringe: need at least 8 points");
    if (!(period > 0.0)) throw ConfigError("fit_fringe: period must be > 0");
    auto [lo, hi] = std::minmax_element(scan.begin(), scan.end(),
                                        [](const auto& a, const auto& b) { return a.first < b.first; });
    if (hi->first - lo->first < period)
        throw ConfigError("fit_fringe: points span less than one period");
}

} // namespace

FitResult fit_fringe(const std::vector<std::pair<double, double>>& scan, double period) {
    check_fringe_input(scan, period);
    const auto [a0, a1, a2] = linear_harmonic_fit(scan, period);
    const double amp = 2.0 * std::hypot(a1, a2);
    const double phase = period * std::atan2(a2, a1) / (2.0 * 3.14159265358979323846);
    const double offset = a0 - 0.5 * amp;
    double ss = 0.0;
    const double w = 2.0 * 3.14159265358979323846 / period;
    for (const auto& [x, y] : scan) {
        const double r = y - (a0 + a1 * std::cos(w * x) + a2 * std::sin(w * x));
        ss += r * r;
    }
    FitResult res;
    res.params = {amp, phase, offset};
    res.residual_ss = ss;
    res.iterations = 1;
    res.converged = true;
    return res;
}

FitResult fit_fringe_simultaneous(const std::vector<std::pair<double, double>>& chan_a,
                                  const std::vector<std::pair<double, double>>& chan_b,
                                  double period) {
    check_fringe_input(chan_a, period);
    check_fringe_input(chan_b, period);
    const FitResult fa = fit_fringe(chan_a, period);
    const FitResult fb = fit_fringe(chan_b, period);

    auto model_ss = [&](const std::vector<double>& p) {
        const double amp_a = p[0], amp_b = p[1], phase = p[2], offset = p[3];
        const double w = 2.0 * 3.14159265358979323846 / period;
        double ss = 0.0;
        for (const auto& [x, y] : chan_a) {
            const double r = y - (offset + 0.5 * amp_a * (1.0 + std::cos(w * (x - phase))));
            ss += r * r;
        }
        for (const auto& [x, y] : chan_b) {
            const double r = y - (offset + 0.5 * amp_b * (1.0 + std::cos(w * (x - phase))));
            ss += r * r;
        }
        return ss;
    };

    const std::vector<double> x0{fa.params[0], fb.params[0],
                                 0.5 * (fa.params[1] + fb.params[1]),
                                 0.5 * (fa.params[2] + fb.params[2])};
    SimplexOptions opt;
    opt.xtol = 1e-10;
    opt.ftol = 1e-18;
    opt.max_iterations = 3000;
    FitResult fit = simplex_minimize(model_ss, x0, opt);
    return fit;
}

} // namespace slicer
