#include "slicer/protocol.hpp"

#include <algorithm>
#include <cmath>

#include "slicer/errors.hpp"
#include "slicer/parallel.hpp"

namespace slicer {

double& PopulationGrid::at(int layer, InternalState s) {
    return values[static_cast<std::size_t>(layer - geometry.lowest_index())][state_index(s)];
}

double PopulationGrid::at(int layer, InternalState s) const {
    return values[static_cast<std::size_t>(layer - geometry.lowest_index())][state_index(s)];
}

double PopulationGrid::layer_total(int layer) const {
    const auto& v = values[static_cast<std::size_t>(layer - geometry.lowest_index())];
    double sum = 0.0;
    for (double x : v) sum += x;
    return sum;
}

double PopulationGrid::total() const {
    double sum = 0.0;
    for (const auto& v : values)
        for (double x : v) sum += x;
    return sum;
}

double PopulationGrid::focus_g9() const {
    const int f = geometry.focus_index;
    return at(f, InternalState::G9m9) + at(f, InternalState::G9m7) +
           at(f, InternalState::G9m5);
}

double PopulationGrid::g7_total() const {
    double sum = 0.0;
    for (const auto& v : values)
        sum += v[state_index(InternalState::G7m7)] + v[state_index(InternalState::G7m5)];
    return sum;
}

PopulationGrid init_grid(const LatticeGeometry& geom, double spin_up_fraction) {
    geom.validate();
    if (!(spin_up_fraction >= 0.0 && spin_up_fraction <= 1.0))
        throw ConfigError("init_grid: spin fraction must be in [0, 1]");
    PopulationGrid grid;
    grid.geometry = geom;
    grid.spin_up_fraction = spin_up_fraction;
    grid.values.assign(static_cast<std::size_t>(geom.layer_count), {});
    for (int n = geom.lowest_index(); n <= geom.highest_index(); ++n) {
        const double share = envelope_share(geom, n);
        grid.at(n, InternalState::G9m9) = spin_up_fraction * share;
        grid.at(n, InternalState::G9m7) = (1.0 - spin_up_fraction) * share;
    }
    return grid;
}

void ProtocolConfig::validate() const {
    pulse_a.validate();
    pulse_b.validate();
    pulse_d.validate();
    pulse_e.validate();
    if (!(removal_survival >= 0.0 && removal_survival <= 0.01))
        throw ConfigError("protocol: removal survival must be in [0, 0.01]");
    if (!(removal_duration_ms >= 0.0))
        throw ConfigError("protocol: removal duration must be >= 0");
    if (!(repump_efficiency >= 0.0 && repump_efficiency <= 1.0))
        throw ConfigError("protocol: repump efficiency must be in [0, 1]");
    if (repetitions != 1 && repetitions != 2)
        throw ConfigError("protocol: repetitions must be 1 or 2");
    if (solver_steps < 1000)
        throw ConfigError("protocol: solver_steps must be >= 1000");
}

namespace {

std::pair<InternalState, InternalState> endpoints(TransitionId t) {
    switch (t) {
        case TransitionId::T1: return {InternalState::G9m9, InternalState::G7m7};
        case TransitionId::T2: return {InternalState::G9m7, InternalState::G7m5};
        case TransitionId::T3: return {InternalState::G7m7, InternalState::G9m5};
    }
    throw ConfigError("unknown transition");
}

// Atoms far outside the sweep are untouched; skip the solver there.
bool within_reach(const HS1Params& p, double atom_detuning) {
    const double margin = 0.5 * p.sweep_width_khz +
                          8.0 * std::max(p.rabi_khz, p.sweep_width_khz);
    return std::abs(atom_detuning - p.delta_center_khz) <= margin;
}

} // namespace

PopulationGrid apply_microwave(const PopulationGrid& grid, TransitionId t,
                               const HS1Params& pulse, const SystemContext& ctx,
                               double step_ms) {
    pulse.validate();
    PopulationGrid out = grid;
    const auto [sa, sb] = endpoints(t);
    const double shift = layer_shift_khz(ctx.zeeman, ctx.lattice, ctx.field, t);
    for (int n = grid.geometry.lowest_index(); n <= grid.geometry.highest_index(); ++n) {
        const double atom = n * shift;
        double& pa = out.at(n, sa);
        double& pb = out.at(n, sb);
        if (pa == 0.0 && pb == 0.0) continue;
        if (!within_reach(pulse, atom)) continue;
        const double p = solve_transfer(pulse, atom, step_ms).p_transfer;
        const double exchanged = p * (pa - pb);
        pa -= exchanged;
        pb += exchanged;
    }
    return out;
}

PopulationGrid apply_removal(const PopulationGrid& grid, double p_bg) {
    if (!(p_bg >= 0.0 && p_bg <= 0.01))
        throw ConfigError("apply_removal: survival fraction must be in [0, 0.01]");
    PopulationGrid out = grid;
    for (auto& v : out.values) {
        const double g9 = v[state_index(InternalState::G9m9)] +
                          v[state_index(InternalState::G9m7)] +
                          v[state_index(InternalState::G9m5)];
        v[state_index(InternalState::Background)] += p_bg * g9;
        v[state_index(InternalState::G9m9)] = 0.0;
        v[state_index(InternalState::G9m7)] = 0.0;
        v[state_index(InternalState::G9m5)] = 0.0;
    }
    return out;
}

PopulationGrid apply_repump(const PopulationGrid& grid, double efficiency) {
    if (!(efficiency >= 0.0 && efficiency <= 1.0))
        throw ConfigError("apply_repump: efficiency must be in [0, 1]");
    PopulationGrid out = grid;
    for (auto& v : out.values) {
        const double m7 = efficiency * v[state_index(InternalState::G7m7)];
        const double m5 = efficiency * v[state_index(InternalState::G7m5)];
        v[state_index(InternalState::G7m7)] -= m7;
        v[state_index(InternalState::G7m5)] -= m5;
        v[state_index(InternalState::G9m9)] += m7;
        v[state_index(InternalState::G9m7)] += m5;
    }
    return out;
}

PopulationGrid apply_loss_interval(const PopulationGrid& grid, double duration_ms,
                                   const LossModel& loss) {
    if (duration_ms < 0.0)
        throw ConfigError("apply_loss_interval: duration must be >= 0");
    if (!loss.enabled || duration_ms == 0.0) return grid;
    PopulationGrid out = grid;
    const double focus_share = envelope_share(grid.geometry, grid.geometry.focus_index);
    for (auto& v : out.values) {
        double& m7 = v[state_index(InternalState::G7m7)];
        double& m5 = v[state_index(InternalState::G7m5)];
        const double combined = m7 + m5;
        if (combined <= 0.0) continue;
        const LossParams& p = (m7 > 0.0 && m5 > 0.0) ? loss.mixture
                              : (m7 > 0.0)           ? loss.m7h
                                                     : loss.m5h;
        const double n = loss.density_scale * combined / focus_share;
        const double survival = loss_survival(p, n, duration_ms * 1e-3) / n;
        m7 *= survival;
        m5 *= survival;
    }
    return out;
}

namespace {

void reexpose_background(PopulationGrid& grid) {
    for (auto& v : grid.values) {
        double& bg = v[state_index(InternalState::Background)];
        v[state_index(InternalState::G9m9)] += grid.spin_up_fraction * bg;
        v[state_index(InternalState::G9m7)] += (1.0 - grid.spin_up_fraction) * bg;
        bg = 0.0;
    }
}

} // namespace

PopulationGrid run_protocol(const ProtocolConfig& config, const SystemContext& ctx,
                            PopulationGrid grid, SpinMode mode) {
    config.validate();
    const bool up = mode != SpinMode::down_only;
    const bool down = mode != SpinMode::up_only;
    auto step = [&](const HS1Params& pulse) {
        return pulse.duration_ms / config.solver_steps;
    };
    for (int rep = 0; rep < config.repetitions; ++rep) {
        // A: transfer pulse, transition 2. The exposure clock starts at the
        // completion of the first transfer pulse.
        if (down) grid = apply_microwave(grid, TransitionId::T2, config.pulse_a, ctx, step(config.pulse_a));
        // B: transfer pulse, transition 1
        if (up) {
            grid = apply_microwave(grid, TransitionId::T1, config.pulse_b, ctx, step(config.pulse_b));
            if (down) grid = apply_loss_interval(grid, config.pulse_b.duration_ms, config.loss);
        }
        // C: removal flash, instantaneous projection plus leakage
        grid = apply_removal(grid, config.removal_survival);
        grid = apply_loss_interval(grid, config.removal_duration_ms, config.loss);
        // D: return pulse, transition 1
        if (up) {
            grid = apply_microwave(grid, TransitionId::T1, config.pulse_d, ctx, step(config.pulse_d));
            grid = apply_loss_interval(grid, config.pulse_d.duration_ms, config.loss);
        }
        // E: return pulse, transition 2
        if (down) {
            grid = apply_microwave(grid, TransitionId::T2, config.pulse_e, ctx, step(config.pulse_e));
            grid = apply_loss_interval(grid, config.pulse_e.duration_ms, config.loss);
        }
        grid = apply_repump(grid, config.repump_efficiency);
        if (rep + 1 < config.repetitions) reexpose_background(grid);
    }
    return grid;
}

double fluorescence_signal(const PopulationGrid& grid, double background_weight) {
    double g9_all = 0.0, bg_all = 0.0;
    for (const auto& v : grid.values) {
        g9_all += v[state_index(InternalState::G9m9)] +
                  v[state_index(InternalState::G9m7)] +
                  v[state_index(InternalState::G9m5)];
        bg_all += v[state_index(InternalState::Background)];
    }
    const double focus = grid.focus_g9();
    return focus + background_weight * (bg_all + g9_all - focus);
}

std::vector<ScanPoint> simulate_layer_scan(const ProtocolConfig& config,
                                           const SystemContext& ctx, SpinMode mode,
                                           const std::vector<double>& delta1_khz,
                                           double spin_up_fraction) {
    const double focus_share = envelope_share(ctx.lattice, ctx.lattice.focus_index);
    std::vector<ScanPoint> out(delta1_khz.size());
    const PopulationGrid start = init_grid(ctx.lattice, spin_up_fraction);
    parallel_for(delta1_khz.size(), [&](std::size_t i) {
        const double d1 = delta1_khz[i];
        ProtocolConfig c = config;
        c.pulse_b.delta_center_khz = d1;
        c.pulse_d.delta_center_khz = d1;
        // the two addressing frequencies track each other at the fixed 3/4
        // ratio of the per-layer shifts
        c.pulse_a.delta_center_khz = 0.75 * d1;
        c.pulse_e.delta_center_khz = 0.75 * d1;
        ScanPoint pt;
        pt.delta1_khz = d1;
        auto signal_for = [&](SpinMode m) {
            const PopulationGrid g = run_protocol(c, ctx, start, m);
            return fluorescence_signal(g, c.background_weight) / focus_share +
                   c.background_level;
        };
        if (mode == SpinMode::up_only || mode == SpinMode::both)
            pt.signal_up = signal_for(SpinMode::up_only);
        if (mode == SpinMode::down_only || mode == SpinMode::both)
            pt.signal_down = signal_for(SpinMode::down_only);
        if (mode == SpinMode::both)
            pt.signal_both = signal_for(SpinMode::both);
        out[i] = pt;
    });
    return out;
}

std::vector<MatchPoint> simulate_layer_matching(const ProtocolConfig& config,
                                                const SystemContext& ctx,
                                                const std::vector<double>& delta2_khz) {
    config.validate();
    const double focus_share = envelope_share(ctx.lattice, ctx.lattice.focus_index);
    std::vector<MatchPoint> out(delta2_khz.size());
    const PopulationGrid start = init_grid(ctx.lattice, 1.0);  // spin-up sample
    parallel_for(delta2_khz.size(), [&](std::size_t i) {
        const double d2 = delta2_khz[i];
        PopulationGrid grid = start;
        HS1Params probe = config.pulse_e;  // transition-2 hardware drives T3
        probe.delta_center_khz = d2;
        const double step_b = config.pulse_b.duration_ms / config.solver_steps;
        const double step_probe = probe.duration_ms / config.solver_steps;
        for (int rep = 0; rep < config.repetitions; ++rep) {
            grid = apply_microwave(grid, TransitionId::T1, config.pulse_b, ctx, step_b);
            grid = apply_microwave(grid, TransitionId::T3, probe, ctx, step_probe);
            grid = apply_removal(grid, config.removal_survival);
            grid = apply_repump(grid, config.repump_efficiency);
            if (rep + 1 < config.repetitions) reexpose_background(grid);
        }
        out[i] = {d2, fluorescence_signal(grid, config.background_weight) / focus_share};
    });
    return out;
}

} // namespace slicer
