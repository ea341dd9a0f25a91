#pragma once

#include <array>
#include <cstddef>
#include <string>

namespace slicer {

using Vec3 = std::array<double, 3>;
using Vec2 = std::array<double, 2>;

// Lengths are in um, field magnitudes in mG internally and G at the API
// boundary, frequencies in kHz unless a name says otherwise.

enum class FieldMode { pure_quadrupole, bias_plus_quadrupole };

struct FieldConfig {
    Vec3 bias_g{0.0, 0.0, 0.0};        // uniform bias, gauss
    double quad_strength_mg_um = 0.0;  // B' of the linear quadrupole, mG/um
    Vec3 quad_center_um{0.0, 0.0, 0.0};
    Vec2 shim_g{0.0, 0.0};             // horizontal shim field, gauss
    FieldMode mode = FieldMode::bias_plus_quadrupole;

    void validate() const;  // throws ConfigError
};

// Ideal linear quadrupole B'*(-(x-xc)/2, -(y-yc)/2, z-zc) plus bias and shim.
// In pure_quadrupole mode the bias term is dropped; the shim always applies.
Vec3 field_at(const FieldConfig& config, const Vec3& r_um);          // gauss
double field_magnitude_g(const FieldConfig& config, const Vec3& r_um);
double field_magnitude_mg(const FieldConfig& config, const Vec3& r_um);

// Central-difference d|B|/dz, mG/um.
double field_gradient_z_mg_um(const FieldConfig& config, const Vec3& r_um,
                              double step_um = 0.01);

// Peak-to-peak |B| over the imaging plane z=0, sampled on a grid x grid mesh
// restricted to the inscribed disc of diameter fov_um (the field of view of
// the microscope is a disc; corner samples of the bounding square would
// overstate the spread seen by the atoms). Returns mG.
double transverse_inhomogeneity_mg(const FieldConfig& config, double fov_um,
                                   int grid);

enum class TransitionId { T1, T2, T3 };

struct TransitionLabels {
    // (2F, 2mF) of the F=9/2-manifold and F=7/2-manifold endpoints.
    int f9_twice_mf;
    int f7_twice_mf;
};

TransitionLabels transition_labels(TransitionId t);
std::string transition_name(TransitionId t);
TransitionId transition_from_name(const std::string& name);

enum class EnvelopeKind { uniform, gaussian };

struct LatticeGeometry {
    double spacing_um = 0.532;
    int layer_count = 50;
    int focus_index = 0;
    EnvelopeKind envelope = EnvelopeKind::uniform;
    double envelope_sigma_layers = 10.0;

    void validate() const;

    // Layer register: indices run from lowest_index() upward, focus included.
    int lowest_index() const { return focus_index - layer_count / 2; }
    int highest_index() const { return lowest_index() + layer_count - 1; }
};

// Fraction of the initial sample sitting in layer n (envelope-normalized).
double envelope_share(const LatticeGeometry& geom, int n);

} // namespace slicer
