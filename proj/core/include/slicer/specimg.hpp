#pragma once

#include <cstdint>
#include <vector>

#include "slicer/field.hpp"
#include "slicer/passage.hpp"
#include "slicer/zeeman.hpp"

namespace slicer {

struct ImagingConfig {
    double fov_um = 50.0;
    int pixels = 128;
    HS1Params window{0.0, 3.0, 6.1, 1.0, 0.2};  // narrow selection sweep
    TransitionId transition = TransitionId::T1;
    double threshold = 0.5;
    double noise_level = 0.0;  // multiplicative, needs an explicit seed
    double shim_bound_g = 1.0;
    int max_evals = 600;

    void validate() const;
};

struct ImageGrid {
    int pixels = 0;
    double fov_um = 0.0;
    std::vector<double> data;  // row-major, data[ix * pixels + iy]

    double& at(int ix, int iy) { return data[static_cast<std::size_t>(ix) * pixels + iy]; }
    double at(int ix, int iy) const { return data[static_cast<std::size_t>(ix) * pixels + iy]; }
    double pixel_coord_um(int i) const {
        return ((i + 0.5) / pixels - 0.5) * fov_um;
    }
};

struct SpectralImage {
    ImageGrid fraction;  // selected fraction in [0,1]
    ImageGrid freq_khz;  // transition-frequency offset map
};

// Per-pixel transition frequency at z = 0, offset-subtracted at the FOV center.
ImageGrid frequency_map(const FieldConfig& field, const ZeemanModel& model,
                        const ImagingConfig& img);

// Cached transfer profile of the selection window, linearly interpolated
// (grid chosen for <= 1e-3 interpolation error).
class TransferWindow {
  public:
    TransferWindow(const HS1Params& window, double step_ms = 0.0);
    double probability(double detuning_khz) const;
    const HS1Params& pulse() const { return pulse_; }

  private:
    void ensure_range(double lo, double hi) const;
    HS1Params pulse_;
    double step_ms_;
    mutable double lo_ = 0.0, hi_ = 0.0, dx_ = 0.02;
    mutable std::vector<double> values_;
};

SpectralImage synthesize_image(const ImageGrid& freq_map, const TransferWindow& window,
                               double window_center_khz);
SpectralImage synthesize_image(const ImageGrid& freq_map, const HS1Params& window,
                               double window_center_khz);

void apply_multiplicative_noise(SpectralImage& img, double level, std::uint64_t seed);

// +inf sentinel when fewer than two bands exist.
struct StripeMetrics {
    double spacing_um = 0.0;
    double orientation_deg = 0.0;  // direction of the stripe normal, [0, 180)
    int count = 0;
};

// Thresholds the image and measures the alternating selected/deselected bands
// along the stripe normal (structure-tensor direction): band count, mean
// distance between adjacent band centers, and the normal's orientation.
StripeMetrics stripe_metrics(const SpectralImage& img, double threshold);

struct CompensationResult {
    Vec2 shim_g{0.0, 0.0};
    Vec2 displacement_estimate_um{0.0, 0.0};
    double residual_inhomogeneity_mg = 0.0;
    int iterations = 0;
    bool converged = false;
};

// Shim optimization against image-derived observables only: a wide-window
// stage drives the stripe spacing up (inverted objective) until a single band
// covers the field of view, then narrowed windows center the selected patch
// on the optical axis. The hidden field enters only the reported residual.
CompensationResult compensate(const FieldConfig& true_field, const ZeemanModel& model,
                              const ImagingConfig& img);

} // namespace slicer
