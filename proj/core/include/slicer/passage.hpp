#pragma once

#include <cmath>
#include <cstdint>
#include <utility>
#include <vector>

namespace slicer {

// Hyperbolic-secant adiabatic sweep: delta(t) = dc + (d0/2) tanh(2t/tau),
// rabi(t) = W sech(2t/tau) for t in [-T/2, T/2], tau = tau_ratio * T.
// All frequencies are ordinary (kHz); the solver converts to angular.
struct HS1Params {
    double delta_center_khz = 0.0;
    double sweep_width_khz = 7.0;
    double rabi_khz = 6.1;
    double duration_ms = 1.0;
    double tau_ratio = 0.2;

    double tau_ms() const { return tau_ratio * duration_ms; }
    void validate() const;  // throws ConfigError
};

struct TransferResult {
    double p_transfer = 0.0;
    double adiabaticity_max = 0.0;
    double norm_error = 0.0;
    std::int64_t steps_used = 0;
};

// (detuning, rabi) at time t; rejects t outside the pulse window.
std::pair<double, double> waveform(const HS1Params& p, double t_ms);

// max over a uniform grid of |d'W - d W'| / (d^2 + W^2)^(3/2) in angular
// units, with d the detuning relative to the atom and analytic derivatives.
// Throws NonAdiabaticError for a zero-coupling pulse that crosses resonance.
double adiabaticity_max(const HS1Params& p, double atom_detuning_khz,
                        int samples = 2001);

// Two-level Schrodinger evolution with diagonal +-(delta-atom)/2 and
// off-diagonal rabi/2 (angular), starting in the lower level. Fixed-step
// fourth-order commutator-free Magnus integration: every step is an exact
// SU(2) rotation, so the norm is conserved to machine precision.
// step_ms <= 0 selects the default duration/4000.
TransferResult solve_transfer(const HS1Params& p, double atom_detuning_khz,
                              double step_ms = 0.0);

std::vector<std::pair<double, TransferResult>>
transfer_profile(const HS1Params& p, const std::vector<double>& detunings_khz,
                 double step_ms = 0.0);

// Generic driver for the same integrator; used for oracle cross-checks with
// non-HS1 sweeps. DetuningFn/RabiFn: double(double t_ms) in kHz.
template <typename DetuningFn, typename RabiFn>
TransferResult integrate_two_level(DetuningFn&& detuning, RabiFn&& rabi,
                                   double t0_ms, double t1_ms, double step_ms);

namespace detail {

inline void su2_rotate(double ax, double az, double& c0r, double& c0i,
                       double& c1r, double& c1i) {
    // applies exp(-i (ax sx + az sz)) to (c0, c1)
    const double r = std::sqrt(ax * ax + az * az);
    double cosr, sincr;
    if (r < 1e-12) {
        cosr = 1.0 - 0.5 * r * r;
        sincr = 1.0 - r * r / 6.0;
    } else {
        cosr = std::cos(r);
        sincr = std::sin(r) / r;
    }
    const double xr = ax * sincr, zr = az * sincr;
    const double n0r = cosr * c0r + zr * c0i + xr * c1i;
    const double n0i = cosr * c0i - zr * c0r - xr * c1r;
    const double n1r = cosr * c1r + xr * c0i - zr * c1i;
    const double n1i = cosr * c1i - xr * c0r + zr * c1r;
    c0r = n0r; c0i = n0i; c1r = n1r; c1i = n1i;
}

} // namespace detail

template <typename DetuningFn, typename RabiFn>
TransferResult integrate_two_level(DetuningFn&& detuning, RabiFn&& rabi,
                                   double t0_ms, double t1_ms, double step_ms) {
    constexpr double kTwoPi = 6.283185307179586476925286766559;
    // Gauss nodes and the CF4 mixing weights.
    constexpr double kNodeOffset = 0.28867513459481288225457439025098;  // sqrt(3)/6
    constexpr double kWPlus = 0.25 + kNodeOffset;
    constexpr double kWMinus = 0.25 - kNodeOffset;

    const double span = t1_ms - t0_ms;
    std::int64_t n = static_cast<std::int64_t>(std::ceil(span / step_ms));
    if (n < 1) n = 1;
    const double h = span / static_cast<double>(n);

    double c0r = 1.0, c0i = 0.0, c1r = 0.0, c1i = 0.0;
    double max_norm_err = 0.0;
    for (std::int64_t k = 0; k < n; ++k) {
        const double ta = t0_ms + (static_cast<double>(k) + 0.5 - kNodeOffset) * h;
        const double tb = t0_ms + (static_cast<double>(k) + 0.5 + kNodeOffset) * h;
        // H = (W sx - D sz)/2 in angular units; exp(-i h H_eff) per group.
        const double d1 = kTwoPi * detuning(ta), w1 = kTwoPi * rabi(ta);
        const double d2 = kTwoPi * detuning(tb), w2 = kTwoPi * rabi(tb);
        const double ax1 = 0.5 * h * (kWPlus * w1 + kWMinus * w2);
        const double az1 = -0.5 * h * (kWPlus * d1 + kWMinus * d2);
        const double ax2 = 0.5 * h * (kWMinus * w1 + kWPlus * w2);
        const double az2 = -0.5 * h * (kWMinus * d1 + kWPlus * d2);
        detail::su2_rotate(ax1, az1, c0r, c0i, c1r, c1i);
        detail::su2_rotate(ax2, az2, c0r, c0i, c1r, c1i);
        const double norm = c0r * c0r + c0i * c0i + c1r * c1r + c1i * c1i;
        const double err = std::abs(norm - 1.0);
        if (err > max_norm_err) max_norm_err = err;
    }
    TransferResult res;
    res.p_transfer = c1r * c1r + c1i * c1i;
    res.norm_error = max_norm_err;
    res.steps_used = n;
    return res;
}

} // namespace slicer
