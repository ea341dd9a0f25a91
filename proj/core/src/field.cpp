#include "slicer/field.hpp"

#include <cmath>

#include "slicer/errors.hpp"

namespace slicer {

void FieldConfig::validate() const {
    if (quad_strength_mg_um < 0.0)
        throw ConfigError("field: quad_strength must be >= 0");
    for (double b : bias_g)
        if (!std::isfinite(b)) throw ConfigError("field: non-finite bias");
    for (double c : quad_center_um)
        if (!std::isfinite(c)) throw ConfigError("field: non-finite quad_center");
}

Vec3 field_at(const FieldConfig& config, const Vec3& r_um) {
    const double bp = config.quad_strength_mg_um;  // mG/um
    const double dx = r_um[0] - config.quad_center_um[0];
    const double dy = r_um[1] - config.quad_center_um[1];
    const double dz = r_um[2] - config.quad_center_um[2];
    double bx_mg = -0.5 * bp * dx + 1000.0 * config.shim_g[0];
    double by_mg = -0.5 * bp * dy + 1000.0 * config.shim_g[1];
    double bz_mg = bp * dz;
    if (config.mode == FieldMode::bias_plus_quadrupole) {
        bx_mg += 1000.0 * config.bias_g[0];
        by_mg += 1000.0 * config.bias_g[1];
        bz_mg += 1000.0 * config.bias_g[2];
    }
    return {bx_mg / 1000.0, by_mg / 1000.0, bz_mg / 1000.0};
}

double field_magnitude_g(const FieldConfig& config, const Vec3& r_um) {
    const Vec3 b = field_at(config, r_um);
    return std::sqrt(b[0] * b[0] + b[1] * b[1] + b[2] * b[2]);
}

double field_magnitude_mg(const FieldConfig& config, const Vec3& r_um) {
    return 1000.0 * field_magnitude_g(config, r_um);
}

double field_gradient_z_mg_um(const FieldConfig& config, const Vec3& r_um,
                              double step_um) {
    Vec3 up = r_um, dn = r_um;
    up[2] += step_um;
    dn[2] -= step_um;
    return (field_magnitude_mg(config, up) - field_magnitude_mg(config, dn)) /
           (2.0 * step_um);
}

double transverse_inhomogeneity_mg(const FieldConfig& config, double fov_um,
                                   int grid) {
    if (grid < 2) throw ConfigError("inhomogeneity: grid must be >= 2");
    if (fov_um <= 0.0) throw ConfigError("inhomogeneity: fov must be > 0");
    const double radius = 0.5 * fov_um;
    const double r2max = radius * radius * (1.0 + 1e-12);
    double lo = 0.0, hi = 0.0;
    bool first = true;
    for (int i = 0; i < grid; ++i) {
        const double x = -radius + fov_um * i / (grid - 1);
        for (int j = 0; j < grid; ++j) {
            const double y = -radius + fov_um * j / (grid - 1);
            if (x * x + y * y > r2max) continue;
            const double m = field_magnitude_mg(config, {x, y, 0.0});
            if (first) { lo = hi = m; first = false; }
            else {
                if (m < lo) lo = m;
                if (m > hi) hi = m;
            }
        }
    }
    return hi - lo;
}

TransitionLabels transition_labels(TransitionId t) {
    switch (t) {
        case TransitionId::T1: return {-9, -7};  // (9/2,-9/2) <-> (7/2,-7/2)
        case TransitionId::T2: return {-7, -5};  // (9/2,-7/2) <-> (7/2,-5/2)
        case TransitionId::T3: return {-5, -7};  // (9/2,-5/2) <-> (7/2,-7/2)
    }
    throw ConfigError("unknown transition");
}

std::string transition_name(TransitionId t) {
    switch (t) {
        case TransitionId::T1: return "T1";
        case TransitionId::T2: return "T2";
        case TransitionId::T3: return "T3";
    }
    return "?";
}

TransitionId transition_from_name(const std::string& name) {
    if (name == "T1" || name == "t1" || name == "1") return TransitionId::T1;
    if (name == "T2" || name == "t2" || name == "2") return TransitionId::T2;
    if (name == "T3" || name == "t3" || name == "3") return TransitionId::T3;
    throw ConfigError("unknown transition name: " + name);
}

void LatticeGeometry::validate() const {
    if (spacing_um <= 0.0) throw ConfigError("lattice: spacing must be > 0");
    if (layer_count < 1) throw ConfigError("lattice: layer_count must be >= 1");
    if (envelope == EnvelopeKind::gaussian && envelope_sigma_layers <= 0.0)
        throw ConfigError("lattice: envelope sigma must be > 0");
}

double envelope_share(const LatticeGeometry& geom, int n) {
    if (n < geom.lowest_index() || n > geom.highest_index()) return 0.0;
    if (geom.envelope == EnvelopeKind::uniform)
        return 1.0 / geom.layer_count;
    const double s = geom.envelope_sigma_layers;
    double norm = 0.0;
    for (int k = geom.lowest_index(); k <= geom.highest_index(); ++k) {
        const double d = (k - geom.focus_index) / s;
        norm += std::exp(-0.5 * d * d);
    }
    const double d = (n - geom.focus_index) / s;
    return std::exp(-0.5 * d * d) / norm;
}

} // namespace slicer
