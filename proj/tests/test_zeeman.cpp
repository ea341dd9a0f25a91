#include <doctest.h>

#include <cmath>

#include "slicer/defaults.hpp"
#include "slicer/errors.hpp"
#include "slicer/zeeman.hpp"

using namespace slicer;

TEST_CASE("linear model at the reference field") {
    const ZeemanModel z = defaults::zeeman_linear();
    CHECK(transition_frequency_mhz(z, TransitionId::T1, z.b0_gauss) ==
          doctest::Approx(z.f1_base_mhz).epsilon(1e-12));
    CHECK(transition_frequency_mhz(z, TransitionId::T2, z.b0_gauss) -
              transition_frequency_mhz(z, TransitionId::T1, z.b0_gauss) ==
          doctest::Approx(7.0).epsilon(1e-12));
    CHECK_THROWS_AS(transition_frequency_mhz(z, TransitionId::T1, 0.0), ConfigError);
    CHECK_THROWS_AS(transition_frequency_mhz(z, TransitionId::T1, -2.0), ConfigError);
}

TEST_CASE("calibrated slopes") {
    const ZeemanModel z = defaults::zeeman_linear();
    CHECK(z.kappa1_khz_mg == doctest::Approx(2.5028).epsilon(2e-4));
    CHECK(z.kappa2_khz_mg == doctest::Approx(1.9055).epsilon(2e-4));
    CHECK(z.kappa2_khz_mg == z.kappa3_khz_mg);
    // degeneracy of transitions 2 and 3 across the operating range
    for (double b = 10.0; b <= 13.0; b += 0.25) {
        CHECK(transition_frequency_mhz(z, TransitionId::T2, b) ==
              doctest::Approx(transition_frequency_mhz(z, TransitionId::T3, b))
                  .epsilon(1e-12));
    }
}

TEST_CASE("Breit-Rabi mode") {
    const ZeemanModel br = defaults::zeeman_breit_rabi();
    const ZeemanModel lin = defaults::zeeman_linear();
    const double b0 = br.b0_gauss;

    SUBCASE("transition pair nearly degenerate at the reference field") {
        const double f2 = transition_frequency_mhz(br, TransitionId::T2, b0);
        const double f3 = transition_frequency_mhz(br, TransitionId::T3, b0);
        CHECK(std::abs(f2 - f3) / f2 < 1e-4);
    }

    SUBCASE("splitting magnitude near 7 MHz") {
        const double f1 = transition_frequency_mhz(br, TransitionId::T1, b0);
        const double f2 = transition_frequency_mhz(br, TransitionId::T2, b0);
        CHECK(std::abs(f2 - f1) == doctest::Approx(7.0).epsilon(0.02));
    }

    SUBCASE("slopes within two percent of the calibrated values") {
        CHECK(transition_slope_khz_mg(br, TransitionId::T1, b0) ==
              doctest::Approx(lin.kappa1_khz_mg).epsilon(0.02));
        CHECK(transition_slope_khz_mg(br, TransitionId::T2, b0) ==
              doctest::Approx(lin.kappa2_khz_mg).epsilon(0.02));
    }

    SUBCASE("monotonic over the operating range") {
        for (TransitionId t : {TransitionId::T1, TransitionId::T2, TransitionId::T3}) {
            double prev = transition_frequency_mhz(br, t, 10.0);
            for (double b = 10.1; b <= 13.0; b += 0.1) {
                const double f = transition_frequency_mhz(br, t, b);
                CHECK(f > prev);
                prev = f;
            }
        }
    }
}

TEST_CASE("per-layer detunings") {
    const SystemContext ctx = defaults::system_context();

    CHECK(layer_detuning_khz(ctx.zeeman, ctx.lattice, ctx.field, TransitionId::T1, 0) == 0.0);
    CHECK(layer_detuning_khz(ctx.zeeman, ctx.lattice, ctx.field, TransitionId::T1, 1) ==
          doctest::Approx(9.68).epsilon(1e-6));
    CHECK(layer_detuning_khz(ctx.zeeman, ctx.lattice, ctx.field, TransitionId::T2, -3) ==
          doctest::Approx(-22.11).epsilon(1e-6));
    CHECK_THROWS_AS(
        layer_detuning_khz(ctx.zeeman, ctx.lattice, ctx.field, TransitionId::T1, 51),
        ConfigError);

    SUBCASE("ratio of the two shifts is the calibrated-constant ratio") {
        for (int n : {-7, -1, 2, 20}) {
            const double d1 =
                layer_detuning_khz(ctx.zeeman, ctx.lattice, ctx.field, TransitionId::T1, n);
            const double d2 =
                layer_detuning_khz(ctx.zeeman, ctx.lattice, ctx.field, TransitionId::T2, n);
            CHECK(d1 / d2 == doctest::Approx(9.68 / 7.37).epsilon(1e-12));
        }
    }

    SUBCASE("Breit-Rabi per-layer shifts within two percent") {
        SystemContext br = ctx;
        br.zeeman = defaults::zeeman_breit_rabi();
        CHECK(layer_detuning_khz(br.zeeman, br.lattice, br.field, TransitionId::T1, 1) ==
              doctest::Approx(9.68).epsilon(0.02));
        CHECK(layer_detuning_khz(br.zeeman, br.lattice, br.field, TransitionId::T2, 1) ==
              doctest::Approx(7.37).epsilon(0.02));
    }
}

TEST_CASE("crosstalk distances") {
    const SystemContext ctx = defaults::system_context();
    const double d12 =
        crosstalk_distance_um(ctx.zeeman, ctx.field, TransitionId::T1, TransitionId::T2);
    const double d21 =
        crosstalk_distance_um(ctx.zeeman, ctx.field, TransitionId::T2, TransitionId::T1);
    CHECK(d12 == doctest::Approx(505.3).epsilon(1e-3));
    CHECK(d21 == doctest::Approx(384.7).epsilon(1e-3));
    CHECK(d12 > 50.0);
    CHECK(d21 > 50.0);
    CHECK_THROWS_AS(
        crosstalk_distance_um(ctx.zeeman, ctx.field, TransitionId::T1, TransitionId::T1),
        ConfigError);
}

TEST_CASE("numerical gradient matches the analytic preset value") {
    const FieldConfig f = defaults::field_config();
    const double grad = field_gradient_z_mg_um(f, {0, 0, 0}, 0.01);
    CHECK(std::abs(grad - 7.27) <= 1e-6 * 7.27);
}
