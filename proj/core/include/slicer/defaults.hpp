#pragma once

#include "slicer/dynfit.hpp"
#include "slicer/field.hpp"
#include "slicer/passage.hpp"
#include "slicer/protocol.hpp"
#include "slicer/specimg.hpp"
#include "slicer/zeeman.hpp"

namespace slicer::defaults {

// Calibration targets of the reference setup.
inline constexpr double kB0Gauss = 11.60;
inline constexpr double kGradientMgUm = 7.27;
inline constexpr double kLatticeSpacingUm = 0.532;
inline constexpr double kDelta1Khz = 9.68;   // per-layer shift, transition 1
inline constexpr double kDelta2Khz = 7.37;   // per-layer shift, transition 2
inline constexpr double kSplittingMhz = 7.0; // |f2 - f1| at B0
inline constexpr double kRabi1Khz = 6.1;
inline constexpr double kCoilDistanceUm = 4000.0;
inline constexpr double kRemovalSurvival = 0.003;

inline constexpr double kFieldPerLayerMg = kGradientMgUm * kLatticeSpacingUm;
inline constexpr double kKappa1KhzMg = kDelta1Khz / kFieldPerLayerMg;
inline constexpr double kKappa2KhzMg = kDelta2Khz / kFieldPerLayerMg;

// Quoted fit constants of the loss measurement, stored verbatim. Their unit
// normalization is ambiguous, so quantitative work goes through the
// half-life-calibrated presets below; these fix only the alpha:beta weighting.
struct QuotedLossConstants {
    double alpha;
    double alpha_err;
    double beta;
    double beta_err;
};
inline constexpr QuotedLossConstants kQuotedLossM7h{0.4e-3, 0.2e-3, 0.1, 0.2};
inline constexpr QuotedLossConstants kQuotedLossM5h{6e-4, 3e-4, 1.2e-3, 0.5e-3};
inline constexpr QuotedLossConstants kQuotedLossMixture{0.0, 2e-3, 2.9e-2, 0.4e-2};

inline constexpr double kHalfLifeM7hS = 2.0;
inline constexpr double kHalfLifeM5hS = 0.7;
inline constexpr double kHalfLifeMixtureS = 0.05;

FieldConfig field_config();             // bias plus quadrupole, hits B0 and dz|B|
FieldConfig field_pure_quadrupole();    // curvature-estimate variant
ZeemanModel zeeman_linear();
ZeemanModel zeeman_breit_rabi();
LatticeGeometry lattice();

HS1Params pulse_transition1();  // width 7.0 kHz, rabi 6.1 kHz, 1 ms
HS1Params pulse_transition2();  // width 5.25 kHz, rabi 5.4 kHz, 1 ms
HS1Params imaging_window();     // width 3.0 kHz

LossModel loss_model();
ProtocolConfig protocol_config();
SystemContext system_context();
ImagingConfig imaging_config();

double spin_fraction_preset(const std::string& name);  // balanced/scan/transfer

} // namespace slicer::defaults
