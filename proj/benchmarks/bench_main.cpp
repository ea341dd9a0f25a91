#include <benchmark/benchmark.h>

#include "slicer/defaults.hpp"
#include "slicer/dynfit.hpp"
#include "slicer/passage.hpp"
#include "slicer/protocol.hpp"
#include "slicer/specimg.hpp"

namespace {

void BM_SolveTransfer(benchmark::State& state) {
    const slicer::HS1Params pulse = slicer::defaults::pulse_transition1();
    for (auto _ : state) {
        auto res = slicer::solve_transfer(pulse, 0.0);
        benchmark::DoNotOptimize(res.p_transfer);
    }
}
BENCHMARK(BM_SolveTransfer);

void BM_TransferProfile(benchmark::State& state) {
    const slicer::HS1Params pulse = slicer::defaults::pulse_transition1();
    std::vector<double> grid;
    for (int i = 0; i < state.range(0); ++i)
        grid.push_back(-15.0 + 30.0 * i / (state.range(0) - 1));
    for (auto _ : state) {
        auto profile = slicer::transfer_profile(pulse, grid);
        benchmark::DoNotOptimize(profile.back().second.p_transfer);
    }
    state.SetComplexityN(state.range(0));
}
BENCHMARK(BM_TransferProfile)->Arg(31)->Arg(121)->Complexity(benchmark::oN);

void BM_IntegrateLoss(benchmark::State& state) {
    const slicer::LossParams p{0.0, 30.0, 1.0};
    std::vector<double> t;
    for (int i = 0; i <= 40; ++i) t.push_back(i * 0.005);
    for (auto _ : state) {
        auto curve = slicer::integrate_loss(p, 1.0, t);
        benchmark::DoNotOptimize(curve.n.back());
    }
}
BENCHMARK(BM_IntegrateLoss);

void BM_RunProtocol(benchmark::State& state) {
    const slicer::SystemContext ctx = slicer::defaults::system_context();
    slicer::ProtocolConfig cfg = slicer::defaults::protocol_config();
    cfg.repetitions = static_cast<int>(state.range(0));
    const slicer::PopulationGrid grid = slicer::init_grid(ctx.lattice, 0.5);
    for (auto _ : state) {
        auto out = slicer::run_protocol(cfg, ctx, grid);
        benchmark::DoNotOptimize(out.focus_g9());
    }
}
BENCHMARK(BM_RunProtocol)->Arg(1)->Arg(2);

void BM_SynthesizeImage(benchmark::State& state) {
    slicer::ImagingConfig img = slicer::defaults::imaging_config();
    img.pixels = static_cast<int>(state.range(0));
    const slicer::FieldConfig field = slicer::defaults::field_pure_quadrupole();
    const slicer::ZeemanModel zeeman = slicer::defaults::zeeman_linear();
    const slicer::ImageGrid freq = slicer::frequency_map(field, zeeman, img);
    const slicer::TransferWindow window(img.window);
    for (auto _ : state) {
        auto spectral = slicer::synthesize_image(freq, window, 0.0);
        benchmark::DoNotOptimize(spectral.fraction.data.back());
    }
}
BENCHMARK(BM_SynthesizeImage)->Arg(64)->Arg(128);

} // namespace

BENCHMARK_MAIN();
