#include <cstdio>
#include <exception>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "slicer/commands.hpp"
#include "slicer/errors.hpp"

namespace {

std::vector<double> parse_durations(const std::string& csv) {
    std::vector<double> out;
    std::string cur;
    for (char c : csv + ",") {
        if (c == ',') {
            if (!cur.empty()) {
                out.push_back(std::stod(cur));
                cur.clear();
            }
        } else {
            cur += c;
        }
    }
    return out;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"slicer: single-layer preparation simulator and fitting toolkit"};
    app.require_subcommand(1);
    app.fallthrough();  // --config/--out/--plot/--seed may follow the subcommand

    slicer::CommandOptions common;
    std::uint64_t seed_value = 0;
    bool seed_set = false;
    app.add_option("--config", common.config_path, "TOML-style config file")
        ->expected(1);
    app.add_option("--out", common.out_dir, "output directory (default from config)")
        ->expected(1);
    app.add_flag("--plot", common.plot, "emit SVG line plots next to each CSV");
    app.add_option("--seed", seed_value, "seed for the optional noise knob")
        ->each([&](const std::string&) { seed_set = true; });

    auto* profile = app.add_subcommand("profile", "spectral transfer profiles");
    slicer::ProfileOptions profile_opts;
    std::string durations = "1.0";
    profile->add_option("--transition", profile_opts.transition, "T1 or T2");
    profile->add_option("--durations", durations, "comma-separated pulse durations, ms");

    auto* scan = app.add_subcommand("scan", "layer-scan fringes");
    slicer::ScanOptions scan_opts;
    scan->add_option("--mode", scan_opts.mode, "up, down or both");
    scan->add_flag("--no-loss", scan_opts.no_loss, "disable collisional loss");
    scan->add_option("--spin-preset", scan_opts.spin_preset,
                     "balanced, scan or transfer");

    auto* match = app.add_subcommand("match", "layer-matching dip curve");

    auto* loss = app.add_subcommand("loss", "decay-curve synthesis and fitting");
    slicer::LossOptions loss_opts;
    double synth_alpha = 0.0, synth_beta = 0.0;
    bool has_alpha = false, has_beta = false;
    loss->add_option("--preset", loss_opts.preset, "m7h, m5h or mixture");
    loss->add_option("--input", loss_opts.input_csv, "decay curve CSV (t_s,n)");
    loss->add_option("--synth-alpha", synth_alpha, "synthesize with this alpha")
        ->each([&](const std::string&) { has_alpha = true; });
    loss->add_option("--synth-beta", synth_beta, "synthesize with this beta")
        ->each([&](const std::string&) { has_beta = true; });

    auto* fieldimg = app.add_subcommand("fieldimg", "spectral image of the field");
    slicer::FieldImgOptions fi_opts;
    double shim_x = 0.0, shim_y = 0.0;
    bool has_sx = false, has_sy = false;
    fieldimg->add_option("--shim-x", shim_x, "override shim x, gauss")
        ->each([&](const std::string&) { has_sx = true; });
    fieldimg->add_option("--shim-y", shim_y, "override shim y, gauss")
        ->each([&](const std::string&) { has_sy = true; });
    fieldimg->add_flag("--sweep", fi_opts.sweep, "emit an image series over shims");
    fieldimg->add_option("--sweep-axis", fi_opts.sweep_axis, "x or y");
    fieldimg->add_option("--sweep-min", fi_opts.sweep_min_g, "sweep start, gauss");
    fieldimg->add_option("--sweep-max", fi_opts.sweep_max_g, "sweep end, gauss");
    fieldimg->add_option("--sweep-count", fi_opts.sweep_count, "number of images");

    auto* compensate = app.add_subcommand("compensate", "shim optimization");
    auto* calibrate = app.add_subcommand("calibrate", "derived-constants table");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        if (e.get_exit_code() == 0) return app.exit(e);  // --help
        app.exit(e);
        return 2;
    }

    if (seed_set) common.seed = seed_value;
    try {
        if (profile->parsed()) {
            profile_opts.durations_ms = parse_durations(durations);
            slicer::cmd_profile(common, profile_opts);
        } else if (scan->parsed()) {
            slicer::cmd_scan(common, scan_opts);
        } else if (match->parsed()) {
            slicer::cmd_match(common);
        } else if (loss->parsed()) {
            if (has_alpha) loss_opts.synth_alpha = synth_alpha;
            if (has_beta) loss_opts.synth_beta = synth_beta;
            slicer::cmd_loss(common, loss_opts);
        } else if (fieldimg->parsed()) {
            if (has_sx) fi_opts.shim_x_g = shim_x;
            if (has_sy) fi_opts.shim_y_g = shim_y;
            slicer::cmd_fieldimg(common, fi_opts);
        } else if (compensate->parsed()) {
            slicer::cmd_compensate(common);
        } else if (calibrate->parsed()) {
            slicer::cmd_calibrate(common);
        }
    } catch (const slicer::CalibrationError& e) {
        std::fprintf(stderr, "calibration error: %s\n", e.what());
        return 5;
    } catch (const slicer::OptimizerCapError& e) {
        std::fprintf(stderr, "optimizer: %s\n", e.what());
        return 4;
    } catch (const slicer::NumericError& e) {
        std::fprintf(stderr, "numerical error: %s\n", e.what());
        return 3;
    } catch (const slicer::ConfigError& e) {
        std::fprintf(stderr, "config error: %s\n", e.what());
        return 2;
    } catch (const std::invalid_argument& e) {
        std::fprintf(stderr, "usage error: %s\n", e.what());
        return 2;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 3;
    }
    return 0;
}
