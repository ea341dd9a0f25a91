#include "slicer/zeeman.hpp"

#include <cmath>

#include "slicer/errors.hpp"

namespace slicer {

namespace {

constexpr double kMuBMhzG = 1.3996245;  // Bohr magneton / h

double br_root(double x, double mf, double i_spin) {
    const double arg = 1.0 + 4.0 * mf * x / (2.0 * i_spin + 1.0) + x * x;
    return std::sqrt(arg < 0.0 ? 0.0 : arg);
}

} // namespace

void ZeemanModel::validate() const {
    if (b0_gauss <= 0.0) throw ConfigError("zeeman: b0 must be > 0");
    if (mode == ZeemanMode::linear_calibrated) {
        if (kappa1_khz_mg <= 0.0 || kappa2_khz_mg <= 0.0)
            throw ConfigError("zeeman: linear coefficients must be > 0");
    } else {
        if (br.nuclear_spin <= 0.0) throw ConfigError("zeeman: nuclear spin must be > 0");
        if (br.a_hfs_mhz == 0.0) throw ConfigError("zeeman: hyperfine coefficient is zero");
    }
}

double breit_rabi_energy_mhz(const BreitRabiConstants& c, double f_twice,
                             double mf_twice, double b_gauss) {
    const double i_spin = c.nuclear_spin;
    const double mf = 0.5 * mf_twice;
    const double de = c.a_hfs_mhz * (i_spin + 0.5);  // hyperfine splitting, sign kept
    const double x = (c.g_j - c.g_i) * kMuBMhzG * b_gauss / de;
    const bool upper_f = f_twice > 2.0 * i_spin;  // F = I + 1/2 branch
    double root;
    if (upper_f && std::abs(mf_twice) == 2.0 * i_spin + 1.0) {
        // stretched states: the square root collapses to |1 +- x|
        root = std::abs(1.0 + (mf > 0 ? x : -x));
    } else {
        root = br_root(x, mf, i_spin);
    }
    const double common = -de / (2.0 * (2.0 * i_spin + 1.0)) + c.g_i * kMuBMhzG * mf * b_gauss;
    return common + (upper_f ? 0.5 : -0.5) * de * root;
}

namespace {

double br_transition_mhz(const BreitRabiConstants& c, TransitionId t, double b) {
    const TransitionLabels lab = transition_labels(t);
    const double e9 = breit_rabi_energy_mhz(c, 9.0, lab.f9_twice_mf, b);
    const double e7 = breit_rabi_energy_mhz(c, 7.0, lab.f7_twice_mf, b);
    return e7 - e9;  // F=7/2 sits above F=9/2 for the inverted hyperfine structure
}

} // namespace

double transition_frequency_mhz(const ZeemanModel& model, TransitionId t,
                                double b_gauss) {
    if (b_gauss <= 0.0)
        throw ConfigError("transition_frequency: field magnitude must be > 0");
    if (model.mode == ZeemanMode::breit_rabi)
        return br_transition_mhz(model.br, t, b_gauss);
    const double db_mg = 1000.0 * (b_gauss - model.b0_gauss);
    switch (t) {
        case TransitionId::T1:
            return model.f1_base_mhz + 1e-3 * model.kappa1_khz_mg * db_mg;
        case TransitionId::T2:
            return model.f2_base_mhz + 1e-3 * model.kappa2_khz_mg * db_mg;
        case TransitionId::T3:
            // degenerate with transition 2 at the reference field
            return model.f2_base_mhz + 1e-3 * model.kappa3_khz_mg * db_mg;
    }
    throw ConfigError("unknown transition");
}

double transition_slope_khz_mg(const ZeemanModel& model, TransitionId t,
                               double b_gauss) {
    if (model.mode == ZeemanMode::linear_calibrated) {
        switch (t) {
            case TransitionId::T1: return model.kappa1_khz_mg;
            case TransitionId::T2: return model.kappa2_khz_mg;
            case TransitionId::T3: return model.kappa3_khz_mg;
        }
    }
    const double h = 1e-3;  // gauss
    return (br_transition_mhz(model.br, t, b_gauss + h) -
            br_transition_mhz(model.br, t, b_gauss - h)) / (2.0 * h);
}

double layer_shift_khz(const ZeemanModel& model, const LatticeGeometry& geom,
                       const FieldConfig& field, TransitionId t) {
    const Vec3 origin{0.0, 0.0, 0.0};
    const double grad = field_gradient_z_mg_um(field, origin);
    const double b = field_magnitude_g(field, origin);
    return transition_slope_khz_mg(model, t, b) * grad * geom.spacing_um;
}

double layer_detuning_khz(const ZeemanModel& model, const LatticeGeometry& geom,
                          const FieldConfig& field, TransitionId t, int n) {
    if (std::abs(n) > geom.layer_count)
        throw ConfigError("layer_detuning: layer index outside register");
    if (n == 0) return 0.0;
    return n * layer_shift_khz(model, geom, field, t);
}

double crosstalk_distance_um(const ZeemanModel& model, const FieldConfig& field,
                             TransitionId pulse_on, TransitionId resonant_with) {
    if (pulse_on == resonant_with)
        throw ConfigError("crosstalk_distance: transitions must differ");
    if (pulse_on == TransitionId::T3 || resonant_with == TransitionId::T3)
        throw ConfigError("crosstalk_distance: defined for the sigma+ transitions");
    const Vec3 origin{0.0, 0.0, 0.0};
    const double b = field_magnitude_g(field, origin);
    const double grad = std::abs(field_gradient_z_mg_um(field, origin));
    if (grad <= 0.0) throw CalibrationError("crosstalk_distance: zero field gradient");
    const double df_khz = 1000.0 * std::abs(transition_frequency_mhz(model, TransitionId::T2, b) -
                                            transition_frequency_mhz(model, TransitionId::T1, b));
    const double kappa = transition_slope_khz_mg(model, resonant_with, b);
    return df_khz / (kappa * grad);
}

} // namespace slicer
