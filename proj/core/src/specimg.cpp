#include "slicer/specimg.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>

#include "slicer/dynfit.hpp"
#include "slicer/errors.hpp"

namespace slicer {

void ImagingConfig::validate() const {
    if (!(fov_um > 0.0)) throw ConfigError("imaging: fov must be > 0");
    if (pixels < 8) throw ConfigError("imaging: pixels must be >= 8");
    window.validate();
    if (!(threshold > 0.0 && threshold < 1.0))
        throw ConfigError("imaging: threshold must be in (0, 1)");
    if (noise_level < 0.0) throw ConfigError("imaging: noise level must be >= 0");
}

ImageGrid frequency_map(const FieldConfig& field, const ZeemanModel& model,
                        const ImagingConfig& img) {
    img.validate();
    field.validate();
    ImageGrid out;
    out.pixels = img.pixels;
    out.fov_um = img.fov_um;
    out.data.assign(static_cast<std::size_t>(img.pixels) * img.pixels, 0.0);
    const double b_center = field_magnitude_g(field, {0.0, 0.0, 0.0});
    const double f_center = transition_frequency_mhz(model, img.transition, b_center);
    for (int ix = 0; ix < img.pixels; ++ix) {
        const double x = out.pixel_coord_um(ix);
        for (int iy = 0; iy < img.pixels; ++iy) {
            const double y = out.pixel_coord_um(iy);
            const double b = field_magnitude_g(field, {x, y, 0.0});
            const double f = transition_frequency_mhz(model, img.transition, b);
            out.at(ix, iy) = 1000.0 * (f - f_center);  // kHz
        }
    }
    return out;
}

TransferWindow::TransferWindow(const HS1Params& window, double step_ms)
    : pulse_(window), step_ms_(step_ms) {
    pulse_.validate();
    pulse_.delta_center_khz = 0.0;  // probed relative to the window center
    // resolve the selection edge well below the 1e-3 interpolation budget
    dx_ = std::min(0.02, pulse_.sweep_width_khz / 60.0);
    ensure_range(-1.5 * pulse_.sweep_width_khz, 1.5 * pulse_.sweep_width_khz);
}

void TransferWindow::ensure_range(double lo, double hi) const {
    if (!values_.empty() && lo >= lo_ && hi <= hi_) return;
    if (!values_.empty()) {
        lo = std::min(lo, lo_);
        hi = std::max(hi, hi_);
    }
    // pad so small range growth does not force a rebuild
    const double pad = 0.25 * (hi - lo) + pulse_.sweep_width_khz;
    lo -= pad;
    hi += pad;
    const std::size_t n = static_cast<std::size_t>(std::ceil((hi - lo) / dx_)) + 2;
    values_.assign(n, 0.0);
    for (std::size_t i = 0; i < n; ++i)
        values_[i] = solve_transfer(pulse_, lo + static_cast<double>(i) * dx_,
                                    step_ms_).p_transfer;
    lo_ = lo;
    hi_ = lo + static_cast<double>(n - 1) * dx_;
}

double TransferWindow::probability(double detuning_khz) const {
    ensure_range(detuning_khz, detuning_khz);
    const double u = (detuning_khz - lo_) / dx_;
    const std::size_t i =
        std::min(static_cast<std::size_t>(std::max(u, 0.0)), values_.size() - 2);
    const double frac = u - static_cast<double>(i);
    return values_[i] + frac * (values_[i + 1] - values_[i]);
}

SpectralImage synthesize_image(const ImageGrid& freq_map, const TransferWindow& window,
                               double window_center_khz) {
    SpectralImage img;
    img.freq_khz = freq_map;
    img.fraction = freq_map;
    for (double& v : img.fraction.data)
        v = std::clamp(window.probability(v - window_center_khz), 0.0, 1.0);
    return img;
}

SpectralImage synthesize_image(const ImageGrid& freq_map, const HS1Params& window,
                               double window_center_khz) {
    TransferWindow cached(window);
    return synthesize_image(freq_map, cached, window_center_khz);
}

void apply_multiplicative_noise(SpectralImage& img, double level, std::uint64_t seed) {
    if (level <= 0.0) return;
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> gauss(0.0, level);
    for (double& v : img.fraction.data)
        v = std::clamp(v * (1.0 + gauss(rng)), 0.0, 1.0);
}

namespace {

struct NormalAxis {
    double nx = 1.0, ny = 0.0;
    double angle_deg = 0.0;
};

NormalAxis stripe_normal(const ImageGrid& g) {
    // structure tensor of the fraction image; the dominant eigenvector points
    // across the stripes
    double jxx = 0.0, jyy = 0.0, jxy = 0.0;
    for (int ix = 1; ix + 1 < g.pixels; ++ix) {
        for (int iy = 1; iy + 1 < g.pixels; ++iy) {
            const double gx = 0.5 * (g.at(ix + 1, iy) - g.at(ix - 1, iy));
            const double gy = 0.5 * (g.at(ix, iy + 1) - g.at(ix, iy - 1));
            jxx += gx * gx;
            jyy += gy * gy;
            jxy += gx * gy;
        }
    }
    NormalAxis axis;
    if (jxx + jyy <= 0.0) return axis;
    const double theta = 0.5 * std::atan2(2.0 * jxy, jxx - jyy);
    axis.nx = std::cos(theta);
    axis.ny = std::sin(theta);
    axis.angle_deg = std::fmod(theta * 180.0 / 3.14159265358979323846 + 180.0, 180.0);
    return axis;
}

} // namespace

StripeMetrics stripe_metrics(const SpectralImage& img, double threshold) {
    if (!(threshold > 0.0 && threshold < 1.0))
        throw ConfigError("stripe_metrics: threshold must be in (0, 1)");
    const ImageGrid& g = img.fraction;
    bool any = false;
    for (double v : g.data)
        if (v >= threshold) { any = true; break; }
    if (!any) throw NumericError("stripe_metrics: no pixel above threshold");

    const NormalAxis axis = stripe_normal(g);

    // occupancy profile along the normal; runs of equal occupancy are bands
    const int bins = std::max(32, g.pixels / 2);
    std::vector<double> selected(bins, 0.0), count(bins, 0.0);
    double lo = std::numeric_limits<double>::max();
    double hi = std::numeric_limits<double>::lowest();
    for (int ix = 0; ix < g.pixels; ++ix) {
        const double x = g.pixel_coord_um(ix);
        for (int iy = 0; iy < g.pixels; ++iy) {
            const double s = x * axis.nx + g.pixel_coord_um(iy) * axis.ny;
            lo = std::min(lo, s);
            hi = std::max(hi, s);
        }
    }
    const double width = std::max(hi - lo, 1e-9);
    for (int ix = 0; ix < g.pixels; ++ix) {
        const double x = g.pixel_coord_um(ix);
        for (int iy = 0; iy < g.pixels; ++iy) {
            const double s = x * axis.nx + g.pixel_coord_um(iy) * axis.ny;
            int b = static_cast<int>((s - lo) / width * bins);
            b = std::clamp(b, 0, bins - 1);
            if (g.at(ix, iy) >= threshold) selected[b] += 1.0;
            count[b] += 1.0;
        }
    }

    const double bin_um = width / bins;
    std::vector<double> centers;
    int run_start = -1;
    bool run_value = false;
    for (int b = 0; b < bins; ++b) {
        if (count[b] <= 0.0) continue;
        const bool v = selected[b] / count[b] >= 0.5;
        if (run_start < 0) {
            run_start = b;
            run_value = v;
        } else if (v != run_value) {
            centers.push_back(lo + (run_start + b) * 0.5 * bin_um);
            run_start = b;
            run_value = v;
        }
    }
    if (run_start >= 0) centers.push_back(lo + (run_start + bins) * 0.5 * bin_um);

    StripeMetrics m;
    m.count = static_cast<int>(centers.size());
    m.orientation_deg = axis.angle_deg;
    if (m.count >= 2) {
        double sum = 0.0;
        for (std::size_t i = 1; i < centers.size(); ++i)
            sum += centers[i] - centers[i - 1];
        m.spacing_um = sum / (centers.size() - 1);
    } else {
        m.spacing_um = std::numeric_limits<double>::infinity();
    }
    return m;
}

namespace {

struct Centroid {
    double dist_um = 0.0;
    double area_fraction = 0.0;
};

Centroid selected_centroid(const SpectralImage& img, double threshold) {
    const ImageGrid& g = img.fraction;
    double sx = 0.0, sy = 0.0;
    std::size_t n = 0;
    for (int ix = 0; ix < g.pixels; ++ix) {
        const double x = g.pixel_coord_um(ix);
        for (int iy = 0; iy < g.pixels; ++iy) {
            if (g.at(ix, iy) >= threshold) {
                sx += x;
                sy += g.pixel_coord_um(iy);
                ++n;
            }
        }
    }
    Centroid c;
    c.area_fraction = static_cast<double>(n) / static_cast<double>(g.data.size());
    if (n > 0) c.dist_um = std::hypot(sx / n, sy / n);
    return c;
}

} // namespace

CompensationResult compensate(const FieldConfig& true_field, const ZeemanModel& model,
                              const ImagingConfig& img) {
    img.validate();
    true_field.validate();
    const double fov = img.fov_um;
    const double bound_mg = 1000.0 * img.shim_bound_g;
    int evals = 0;

    auto image_at = [&](double sx_mg, double sy_mg, const TransferWindow& window) {
        FieldConfig f = true_field;
        f.shim_g[0] += sx_mg / 1000.0;
        f.shim_g[1] += sy_mg / 1000.0;
        ++evals;
        return synthesize_image(frequency_map(f, model, img), window, 0.0);
    };

    // Stage 1 drives the stripe spacing of the imaging window up until a
    // single band covers the field of view; the narrowed windows of stages
    // 2-3 then recenter the selected patch on the optical axis. All three
    // stages see image-derived observables only. Narrow sweeps keep the
    // drive at 0.7 of the width and stretch the duration so the passage
    // stays adiabatic with a near-square selection edge.
    struct Stage {
        double width_factor;
        bool centroid;
        double step_mg;
    };
    const Stage stages[] = {{1.0, false, 120.0},
                            {1.0 / 3.0, true, 40.0},
                            {0.35 / 3.0, true, 12.0}};

    Vec2 shim{0.0, 0.0};
    bool hit_cap = false;
    for (const Stage& st : stages) {
        HS1Params wp = img.window;
        if (st.width_factor != 1.0) {
            wp.sweep_width_khz = img.window.sweep_width_khz * st.width_factor;
            wp.rabi_khz = 0.7 * wp.sweep_width_khz;
            wp.duration_ms = 10.0 / wp.sweep_width_khz;
        }
        TransferWindow window(wp);
        auto cost = [&](const std::vector<double>& s) {
            double penalty = 0.0;
            for (double v : s)
                if (std::abs(v) > bound_mg) penalty += 10.0 * (std::abs(v) - bound_mg);
            if (penalty > 0.0) return 1e3 + penalty;
            const SpectralImage spectral = image_at(s[0], s[1], window);
            if (st.centroid) {
                const Centroid c = selected_centroid(spectral, img.threshold);
                // a sliver through the center pixel at huge gradient also has
                // a small centroid distance; the area guard rejects it
                if (c.area_fraction < 0.005)
                    return 2.0 * fov + (0.005 - c.area_fraction) * 100.0;
                // the shrinking selected area extends the capture range beyond
                // where the centroid distance alone rolls over
                return c.dist_um + 0.6 * fov * (1.0 - c.area_fraction);
            }
            try {
                const StripeMetrics m = stripe_metrics(spectral, img.threshold);
                return std::isinf(m.spacing_um) ? 0.0 : fov / m.spacing_um;
            } catch (const NumericError&) {
                return 2.0 * fov;  // nothing selected: far outside the window
            }
        };
        SimplexOptions opt;
        opt.xtol = st.centroid ? 0.25 : 2.0;  // mG
        opt.ftol = st.centroid ? 0.05 : 1e-3;
        opt.max_iterations = std::max(20, img.max_evals / 3);
        opt.initial_steps = {st.step_mg, st.step_mg};
        const FitResult fit = simplex_minimize(cost, {shim[0], shim[1]}, opt);
        shim = {fit.params[0], fit.params[1]};
        if (!fit.converged) hit_cap = true;
    }

    CompensationResult res;
    res.shim_g = {shim[0] / 1000.0, shim[1] / 1000.0};
    // a shim s cancels a center offset d when s = -B' d / 2
    const double bp = true_field.quad_strength_mg_um;
    res.displacement_estimate_um = {bp > 0.0 ? -2.0 * shim[0] / bp : 0.0,
                                    bp > 0.0 ? -2.0 * shim[1] / bp : 0.0};
    FieldConfig compensated = true_field;
    compensated.shim_g[0] += res.shim_g[0];
    compensated.shim_g[1] += res.shim_g[1];
    const double resid = transverse_inhomogeneity_mg(compensated, fov, 101);
    const double initial = transverse_inhomogeneity_mg(true_field, fov, 101);
    if (resid > initial) {
        // never hand back a setting worse than the starting point
        res.shim_g = {0.0, 0.0};
        res.displacement_estimate_um = {0.0, 0.0};
        res.residual_inhomogeneity_mg = initial;
    } else {
        res.residual_inhomogeneity_mg = resid;
    }
    res.iterations = evals;
    res.converged = !hit_cap;
    return res;
}

} // namespace slicer
