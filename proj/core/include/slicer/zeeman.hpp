#pragma once

#include "slicer/field.hpp"

namespace slicer {

enum class ZeemanMode { linear_calibrated, breit_rabi };

struct BreitRabiConstants {
    double a_hfs_mhz = -285.7308;  // ground-state hyperfine coefficient
    double g_j = 2.00229421;
    double g_i = 0.000176490;      // nuclear g-factor, Bohr-magneton convention
    double nuclear_spin = 4.0;
};

struct ZeemanModel {
    ZeemanMode mode = ZeemanMode::linear_calibrated;
    // linear_calibrated: f_i(B) = f_i0 + kappa_i * (B - b0)
    double kappa1_khz_mg = 0.0;
    double kappa2_khz_mg = 0.0;
    double kappa3_khz_mg = 0.0;
    double f1_base_mhz = 0.0;
    double f2_base_mhz = 0.0;
    double b0_gauss = 11.60;
    BreitRabiConstants br{};

    void validate() const;
};

// Breit-Rabi energy of |F, mF> for J=1/2, in MHz at field b_gauss.
double breit_rabi_energy_mhz(const BreitRabiConstants& c, double f_twice,
                             double mf_twice, double b_gauss);

// Microwave transition frequency in MHz; rejects b_gauss <= 0.
double transition_frequency_mhz(const ZeemanModel& model, TransitionId t,
                                double b_gauss);

// d f / d|B| in kHz/mG (equal to MHz/G) at the given field.
double transition_slope_khz_mg(const ZeemanModel& model, TransitionId t,
                               double b_gauss);

// Per-layer detuning n * Delta_i with Delta_i = kappa_i * dz|B| * spacing,
// evaluated at the focus layer (origin). Positive Delta_i means the
// transition frequency grows along +z.
double layer_detuning_khz(const ZeemanModel& model, const LatticeGeometry& geom,
                          const FieldConfig& field, TransitionId t, int n);

double layer_shift_khz(const ZeemanModel& model, const LatticeGeometry& geom,
                       const FieldConfig& field, TransitionId t);

// Distance at which a pulse resonant with `pulse_on` at the focus becomes
// resonant with `resonant_with` in another layer: |f2-f1| / (kappa_res dz|B|).
double crosstalk_distance_um(const ZeemanModel& model, const FieldConfig& field,
                             TransitionId pulse_on, TransitionId resonant_with);

} // namespace slicer
