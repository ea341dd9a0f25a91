#pragma once

#include <array>
#include <vector>

#include "slicer/dynfit.hpp"
#include "slicer/field.hpp"
#include "slicer/passage.hpp"
#include "slicer/zeeman.hpp"

namespace slicer {

// Internal states tracked per lattice layer. Background holds removal-pulse
// survivors that decayed out of F=9/2 during the removal flash.
enum class InternalState { G9m9, G9m7, G9m5, G7m7, G7m5, Background };
constexpr int kStateCount = 6;

inline constexpr int state_index(InternalState s) { return static_cast<int>(s); }

struct PopulationGrid {
    LatticeGeometry geometry;
    double spin_up_fraction = 0.5;
    // values[layer - geometry.lowest_index()][state]
    std::vector<std::array<double, kStateCount>> values;

    double& at(int layer, InternalState s);
    double at(int layer, InternalState s) const;
    double layer_total(int layer) const;
    double total() const;
    double focus_g9() const;
    double g7_total() const;
};

PopulationGrid init_grid(const LatticeGeometry& geom, double spin_up_fraction);

// Per-state F=7/2 loss coefficients plus the mixture channel. density_scale
// maps a layer population (in units of the initial focus-layer population)
// onto the normalized N of the calibration data.
struct LossModel {
    LossParams m7h;      // only (7/2,-7/2) occupied
    LossParams m5h;      // only (7/2,-5/2) occupied
    LossParams mixture;  // both occupied
    bool enabled = true;
    double density_scale = 1.0;
};

struct SystemContext {
    FieldConfig field;
    ZeemanModel zeeman;
    LatticeGeometry lattice;
};

struct ProtocolConfig {
    HS1Params pulse_a;  // transition 2, transfer
    HS1Params pulse_b;  // transition 1, transfer
    HS1Params pulse_d;  // transition 1, return
    HS1Params pulse_e;  // transition 2, return
    double removal_survival = 0.003;  // fraction leaking to Background
    double removal_duration_ms = 0.5;
    double repump_efficiency = 1.0;
    int repetitions = 2;
    LossModel loss;
    double background_weight = 1.0;    // weight of out-of-focus signal
    double background_level = 0.032;   // additive scan offset, single-layer units
    int solver_steps = 4000;           // integration steps per pulse

    void validate() const;
};

enum class SpinMode { up_only, down_only, both };

// Pulse on transition t: exchanges the endpoint populations of every layer
// with probability solve_transfer(p, n * Delta_t).
PopulationGrid apply_microwave(const PopulationGrid& grid, TransitionId t,
                               const HS1Params& pulse, const SystemContext& ctx,
                               double step_ms = 0.0);

PopulationGrid apply_removal(const PopulationGrid& grid, double p_bg);
PopulationGrid apply_repump(const PopulationGrid& grid, double efficiency);

// Integrates the two/three-body rate model on the F=7/2 populations of each
// layer: single-state coefficients when one state is occupied, mixture
// coefficients on the combined population when both are (survivors split
// proportionally to the pre-loss shares).
PopulationGrid apply_loss_interval(const PopulationGrid& grid, double duration_ms,
                                   const LossModel& loss);

// Five-step sequence A-E (restricted by mode), with loss exposure accruing
// from the completion of the first transfer pulse to the completion of the
// final return pulse; removal counts 0.5 ms toward exposure only. Intra-pulse
// loss is applied post-pulse. Background survivors are repumped back to
// F=9/2 between repetitions, which is what makes the second pass suppress
// them quadratically.
PopulationGrid run_protocol(const ProtocolConfig& config, const SystemContext& ctx,
                            PopulationGrid grid, SpinMode mode = SpinMode::both);

// Focus-plane fluorescence proxy: focus-layer F=9/2 signal plus
// background_weight times everything else that still scatters light.
double fluorescence_signal(const PopulationGrid& grid, double background_weight = 1.0);

struct ScanPoint {
    double delta1_khz = 0.0;
    double signal_up = 0.0;
    double signal_down = 0.0;
    double signal_both = 0.0;
};

// Layer scan: protocol per scan point with pulse centers delta1 (transition 1)
// and delta2 = (3/4) delta1 (transition 2); signals are normalized to the
// initial focus-layer population and include the configured additive
// background level.
std::vector<ScanPoint> simulate_layer_scan(const ProtocolConfig& config,
                                           const SystemContext& ctx, SpinMode mode,
                                           const std::vector<double>& delta1_khz,
                                           double spin_up_fraction);

struct MatchPoint {
    double delta2_khz = 0.0;
    double signal = 0.0;
};

// Layer matching: spin-up sample, pulse B at the focus, then a pulse on the
// degenerate sigma- transition at the scanned detuning, then removal. The
// fluorescence dips where the two addressing frequencies meet the same layer.
std::vector<MatchPoint> simulate_layer_matching(const ProtocolConfig& config,
                                                const SystemContext& ctx,
                                                const std::vector<double>& delta2_khz);

} // namespace slicer
