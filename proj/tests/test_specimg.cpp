#include <doctest.h>

#include <cmath>

#include "slicer/defaults.hpp"
#include "slicer/errors.hpp"
#include "slicer/specimg.hpp"

using namespace slicer;

namespace {

ImageGrid linear_ramp(double spread_khz, bool along_x, int pixels = 96,
                      double fov = 50.0) {
    ImageGrid g;
    g.pixels = pixels;
    g.fov_um = fov;
    g.data.assign(static_cast<std::size_t>(pixels) * pixels, 0.0);
    for (int ix = 0; ix < pixels; ++ix)
        for (int iy = 0; iy < pixels; ++iy) {
            const double u = along_x ? g.pixel_coord_um(ix) : g.pixel_coord_um(iy);
            g.at(ix, iy) = spread_khz * u / fov;
        }
    return g;
}

ImageGrid flat_map(double value_khz, int pixels = 64) {
    ImageGrid g;
    g.pixels = pixels;
    g.fov_um = 50.0;
    g.data.assign(static_cast<std::size_t>(pixels) * pixels, value_khz);
    return g;
}

} // namespace

TEST_CASE("frequency map") {
    const ZeemanModel z = defaults::zeeman_linear();
    ImagingConfig img = defaults::imaging_config();
    img.pixels = 64;

    SUBCASE("uniform bias gives a flat map") {
        FieldConfig f;
        f.mode = FieldMode::bias_plus_quadrupole;
        f.bias_g = {0, 0, 11.6};
        const ImageGrid m = frequency_map(f, z, img);
        for (double v : m.data) CHECK(std::abs(v) <= 1e-12);
    }

    SUBCASE("centered quadrupole curvature spread") {
        const ImageGrid m = frequency_map(defaults::field_pure_quadrupole(), z, img);
        double lo = 1e18, hi = -1e18;
        for (double v : m.data) {
            lo = std::min(lo, v);
            hi = std::max(hi, v);
        }
        // corner-to-center spread of the bowl, in kHz (square field of view)
        CHECK(hi - lo == doctest::Approx(2.5028 * 0.284).epsilon(0.05));
    }

    SUBCASE("displaced quadrupole spread") {
        FieldConfig f = defaults::field_pure_quadrupole();
        f.quad_center_um = {100.0, 0.0, 4000.0};
        const ImageGrid m = frequency_map(f, z, img);
        double lo = 1e18, hi = -1e18;
        for (double v : m.data) {
            lo = std::min(lo, v);
            hi = std::max(hi, v);
        }
        CHECK(hi - lo >= 5.0);
        CHECK(hi - lo <= 7.5);
    }
}

TEST_CASE("image synthesis") {
    const TransferWindow window(defaults::imaging_window());

    SUBCASE("flat map inside the window selects everything") {
        const SpectralImage img = synthesize_image(flat_map(0.0), window, 0.0);
        for (double v : img.fraction.data) CHECK(v >= 0.98);
    }

    SUBCASE("flat map far outside selects nothing") {
        const SpectralImage img = synthesize_image(flat_map(9.0), window, 0.0);
        for (double v : img.fraction.data) CHECK(v < 0.01);
    }

    SUBCASE("monotone in the window width on the selected region") {
        // windows with co-scaled drive, both deep in the adiabatic regime;
        // residual transfer ripple across the flat top is below 2e-4
        HS1Params narrow{0.0, 3.0, 2.1, 10.0 / 3.0, 0.2};
        HS1Params wide{0.0, 4.0, 2.8, 2.5, 0.2};
        const ImageGrid ramp = linear_ramp(6.0, true);
        const SpectralImage narrow_img = synthesize_image(ramp, narrow, 0.0);
        const SpectralImage wide_img = synthesize_image(ramp, wide, 0.0);
        for (std::size_t i = 0; i < ramp.data.size(); i += 97) {
            if (narrow_img.fraction.data[i] >= 0.9)
                CHECK(wide_img.fraction.data[i] >= narrow_img.fraction.data[i] - 2e-4);
        }
    }
}

TEST_CASE("stripe metrics") {
    const TransferWindow window(defaults::imaging_window());

    SUBCASE("uniform image is a single full band") {
        const SpectralImage img = synthesize_image(flat_map(0.0, 96), window, 0.0);
        const StripeMetrics m = stripe_metrics(img, 0.5);
        CHECK(m.count == 1);
        CHECK(std::isinf(m.spacing_um));
    }

    SUBCASE("empty image is an error") {
        const SpectralImage img = synthesize_image(flat_map(25.0, 96), window, 0.0);
        CHECK_THROWS_AS(stripe_metrics(img, 0.5), NumericError);
    }

    SUBCASE("ramp across three window widths") {
        const SpectralImage img = synthesize_image(linear_ramp(9.0, true), window, 0.0);
        const StripeMetrics m = stripe_metrics(img, 0.5);
        CHECK(m.count >= 2);
        CHECK(m.count <= 4);
        CHECK((m.orientation_deg <= 2.0 || m.orientation_deg >= 178.0));
    }

    SUBCASE("same ramp along y rotates the normal by ninety degrees") {
        const SpectralImage img = synthesize_image(linear_ramp(9.0, false), window, 0.0);
        const StripeMetrics m = stripe_metrics(img, 0.5);
        CHECK(m.orientation_deg == doctest::Approx(90.0).epsilon(2.0 / 90.0));
    }
}

TEST_CASE("noise knob") {
    const TransferWindow window(defaults::imaging_window());
    SpectralImage a = synthesize_image(flat_map(0.0), window, 0.0);
    SpectralImage b = a;
    apply_multiplicative_noise(a, 0.05, 42);
    apply_multiplicative_noise(b, 0.05, 42);
    CHECK(a.fraction.data == b.fraction.data);  // same seed, same bytes
    SpectralImage c = synthesize_image(flat_map(0.0), window, 0.0);
    apply_multiplicative_noise(c, 0.05, 43);
    CHECK(a.fraction.data != c.fraction.data);
    for (double v : a.fraction.data) {
        CHECK(v >= 0.0);
        CHECK(v <= 1.0);
    }
}

TEST_CASE("shim compensation") {
    const ZeemanModel z = defaults::zeeman_linear();
    ImagingConfig img = defaults::imaging_config();
    img.pixels = 96;

    SUBCASE("already centered stays near zero shims") {
        const FieldConfig f = defaults::field_pure_quadrupole();
        const CompensationResult res = compensate(f, z, img);
        CHECK(std::abs(res.shim_g[0]) <= 0.02);
        CHECK(std::abs(res.shim_g[1]) <= 0.02);
        CHECK(res.residual_inhomogeneity_mg == doctest::Approx(0.142).epsilon(0.05));
    }

    SUBCASE("hidden displacement along x") {
        FieldConfig f = defaults::field_pure_quadrupole();
        f.quad_center_um = {100.0, 0.0, 4000.0};
        const CompensationResult res = compensate(f, z, img);
        CHECK(res.residual_inhomogeneity_mg <= 1.2);
        CHECK(res.residual_inhomogeneity_mg <= 2.0 * 0.142);
        CHECK(std::abs(res.displacement_estimate_um[0] - 100.0) <= 10.0);
        CHECK(std::abs(res.displacement_estimate_um[1]) <= 10.0);
    }

    SUBCASE("hidden displacement in both directions") {
        FieldConfig f = defaults::field_pure_quadrupole();
        f.quad_center_um = {70.0, -40.0, 4000.0};
        const CompensationResult res = compensate(f, z, img);
        const double ex = res.displacement_estimate_um[0] - 70.0;
        const double ey = res.displacement_estimate_um[1] + 40.0;
        CHECK(std::hypot(ex, ey) <= 10.0);
        CHECK(res.residual_inhomogeneity_mg <= 2.0 * 0.142);
    }
}

TEST_CASE("rotating the stray rotates the stripes") {
    const ZeemanModel z = defaults::zeeman_linear();
    ImagingConfig img = defaults::imaging_config();
    img.pixels = 96;
    FieldConfig fx = defaults::field_pure_quadrupole();
    fx.quad_center_um = {140.0, 0.0, 4000.0};
    FieldConfig fy = defaults::field_pure_quadrupole();
    fy.quad_center_um = {0.0, 140.0, 4000.0};
    const TransferWindow window(img.window);
    const StripeMetrics mx =
        stripe_metrics(synthesize_image(frequency_map(fx, z, img), window, 0.0), 0.5);
    const StripeMetrics my =
        stripe_metrics(synthesize_image(frequency_map(fy, z, img), window, 0.0), 0.5);
    double diff = std::fmod(std::abs(mx.orientation_deg - my.orientation_deg), 180.0);
    diff = std::min(diff, 180.0 - diff);
    CHECK(diff == doctest::Approx(90.0).epsilon(2.0 / 90.0));
}

TEST_CASE("detection bound") {
    const ZeemanModel z = defaults::zeeman_linear();
    const double bound = defaults::imaging_window().sweep_width_khz / z.kappa1_khz_mg;
    CHECK(bound == doctest::Approx(1.199).epsilon(5e-4));
    CHECK(bound < 1.2);
}
