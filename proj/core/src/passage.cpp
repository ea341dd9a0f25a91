#include "slicer/passage.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "slicer/errors.hpp"
#include "slicer/parallel.hpp"

namespace slicer {

namespace {
constexpr double kTwoPi = 6.283185307179586476925286766559;
}

void HS1Params::validate() const {
    if (!(sweep_width_khz > 0.0)) throw ConfigError("pulse: sweep width must be > 0");
    if (!(rabi_khz >= 0.0)) throw ConfigError("pulse: rabi frequency must be >= 0");
    if (!(duration_ms > 0.0)) throw ConfigError("pulse: duration must be > 0");
    if (!(tau_ratio > 0.0 && tau_ratio <= 1.0))
        throw ConfigError("pulse: tau ratio must be in (0, 1]");
    if (!std::isfinite(delta_center_khz)) throw ConfigError("pulse: non-finite center");
}

std::pair<double, double> waveform(const HS1Params& p, double t_ms) {
    p.validate();
    const double half = 0.5 * p.duration_ms;
    if (t_ms < -half || t_ms > half)
        throw ConfigError("waveform: time outside the pulse window");
    const double u = 2.0 * t_ms / p.tau_ms();
    return {p.delta_center_khz + 0.5 * p.sweep_width_khz * std::tanh(u),
            p.rabi_khz / std::cosh(u)};
}

double adiabaticity_max(const HS1Params& p, double atom_detuning_khz, int samples) {
    p.validate();
    if (samples < 100) throw ConfigError("adiabaticity_max: need >= 100 samples");
    const double tau = p.tau_ms();
    const double dc = p.delta_center_khz - atom_detuning_khz;
    const double half_sweep = 0.5 * p.sweep_width_khz;
    if (p.rabi_khz == 0.0) {
        // metric diverges if the sweep crosses the atomic resonance
        const double lo = dc - half_sweep, hi = dc + half_sweep;
        if (lo <= 0.0 && hi >= 0.0)
            throw NonAdiabaticError("adiabaticity_max: zero coupling with resonance crossing");
        return 0.0;
    }
    const double half = 0.5 * p.duration_ms;
    double max_metric = 0.0;
    for (int i = 0; i < samples; ++i) {
        const double t = -half + p.duration_ms * i / (samples - 1);
        const double u = 2.0 * t / tau;
        const double sech = 1.0 / std::cosh(u);
        const double tanh = std::tanh(u);
        const double d = dc + half_sweep * tanh;                       // kHz
        const double dd = (p.sweep_width_khz / tau) * sech * sech;     // kHz/ms
        const double w = p.rabi_khz * sech;
        const double dw = -(2.0 * p.rabi_khz / tau) * sech * tanh;
        const double num = std::abs(dd * w - d * dw);
        const double den = std::pow(d * d + w * w, 1.5);
        const double metric = num / den / kTwoPi;  // angular-unit metric
        if (metric > max_metric) max_metric = metric;
    }
    return max_metric;
}

TransferResult solve_transfer(const HS1Params& p, double atom_detuning_khz,
                              double step_ms) {
    p.validate();
    if (!std::isfinite(atom_detuning_khz))
        throw ConfigError("solve_transfer: non-finite detuning");
    if (step_ms <= 0.0) step_ms = p.duration_ms / 4000.0;
    if (step_ms > p.duration_ms / 1000.0)
        throw ConfigError("solve_transfer: step must be <= duration/1000");
    const double tau = p.tau_ms();
    const double dc = p.delta_center_khz - atom_detuning_khz;
    const double half_sweep = 0.5 * p.sweep_width_khz;
    const double half = 0.5 * p.duration_ms;
    TransferResult res = integrate_two_level(
        [&](double t) { return dc + half_sweep * std::tanh(2.0 * t / tau); },
        [&](double t) { return p.rabi_khz / std::cosh(2.0 * t / tau); },
        -half, half, step_ms);
    // diagnostic metric; +inf for the divergent zero-coupling case
    if (p.rabi_khz == 0.0 &&
        dc - half_sweep <= 0.0 && dc + half_sweep >= 0.0) {
        res.adiabaticity_max = std::numeric_limits<double>::infinity();
    } else {
        res.adiabaticity_max = adiabaticity_max(p, atom_detuning_khz);
    }
    return res;
}

std::vector<std::pair<double, TransferResult>>
transfer_profile(const HS1Params& p, const std::vector<double>& detunings_khz,
                 double step_ms) {
    std::vector<std::pair<double, TransferResult>> out(detunings_khz.size());
    parallel_for(detunings_khz.size(), [&](std::size_t i) {
        out[i] = {detunings_khz[i], solve_transfer(p, detunings_khz[i], step_ms)};
    });
    return out;
}

} // namespace slicer
