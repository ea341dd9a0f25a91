#include "slicer/commands.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "slicer/errors.hpp"
#include "slicer/io.hpp"

namespace slicer {

namespace {

struct RunSetup {
    RunConfig cfg;
    RunManifest manifest;
    std::string out_dir;
    bool plot = false;
    std::chrono::steady_clock::time_point t0;
};

std::string hash_hex(std::uint64_t h) {
    char buf[17];
    std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
    return std::string(buf);
}

RunSetup begin_run(const CommandOptions& opts, const std::string& subcommand) {
    RunSetup run;
    run.t0 = std::chrono::steady_clock::now();
    std::string config_bytes;
    if (!opts.config_path.empty()) {
        std::ifstream in(opts.config_path, std::ios::binary);
        if (!in) throw ConfigError("cannot open config file: " + opts.config_path);
        std::stringstream ss;
        ss << in.rdbuf();
        config_bytes = ss.str();
        run.cfg = run_config_from_text(config_bytes);
    } else {
        run.cfg = default_run_config();
    }
    run.out_dir = opts.out_dir.empty() ? run.cfg.out_dir : opts.out_dir;
    run.plot = opts.plot || run.cfg.plot;
    std::filesystem::create_directories(run.out_dir);
    run.manifest.subcommand = subcommand;
    run.manifest.config_hash = hash_hex(fnv1a_hash(config_bytes));
    return run;
}

void emit_csv(RunSetup& run, const std::string& name, const CsvTable& table) {
    write_csv(run.out_dir + "/" + name, table);
    run.manifest.outputs.push_back(name);
    if (run.plot && table.header.size() >= 2 && !table.rows.empty()) {
        const std::string svg = name.substr(0, name.rfind('.')) + ".svg";
        write_svg_plot(run.out_dir + "/" + svg, table);
        run.manifest.outputs.push_back(svg);
    }
}

void emit_text(RunSetup& run, const std::string& name, const std::string& text) {
    const std::string path = run.out_dir + "/" + name;
    std::ofstream out(path, std::ios::binary);
    if (!out) throw ConfigError("cannot open for writing: " + path);
    out << text;
    if (!out) throw ConfigError("write failed: " + path);
    run.manifest.outputs.push_back(name);
}

RunManifest finish_run(RunSetup& run) {
    run.manifest.wall_time_s =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - run.t0).count();
    write_manifest(run.out_dir, run.manifest);
    return run.manifest;
}

const HS1Params& pulse_for_transition(const RunConfig& cfg, TransitionId t) {
    return t == TransitionId::T1 ? cfg.protocol.pulse_b : cfg.protocol.pulse_a;
}

} // namespace

RunManifest cmd_profile(const CommandOptions& opts, const ProfileOptions& profile) {
    if (profile.durations_ms.empty())
        throw ConfigError("profile: duration list is empty");
    RunSetup run = begin_run(opts, "profile");
    const TransitionId t = transition_from_name(profile.transition);
    const std::vector<double> grid = run.cfg.profile_grid.values();
    for (double duration : profile.durations_ms) {
        if (!(duration > 0.0)) throw ConfigError("profile: duration must be > 0");
        HS1Params p = pulse_for_transition(run.cfg, t);
        p.duration_ms = duration;
        CsvTable table;
        table.header = {"detuning_khz", "p_transfer", "adiabaticity_max", "norm_error"};
        const double step = p.duration_ms / run.cfg.protocol.solver_steps;
        for (const auto& [d, res] : transfer_profile(p, grid, step))
            table.rows.push_back({d, res.p_transfer, res.adiabaticity_max, res.norm_error});
        char name[64];
        std::snprintf(name, sizeof(name), "profile_%s_%.2fms.csv",
                      transition_name(t).c_str(), duration);
        emit_csv(run, name, table);
    }
    return finish_run(run);
}

RunManifest cmd_scan(const CommandOptions& opts, const ScanOptions& scan) {
    RunSetup run = begin_run(opts, "scan");
    SpinMode mode;
    if (scan.mode == "up") mode = SpinMode::up_only;
    else if (scan.mode == "down") mode = SpinMode::down_only;
    else if (scan.mode == "both") mode = SpinMode::both;
    else throw ConfigError("scan: unknown mode '" + scan.mode + "'");

    ProtocolConfig pc = run.cfg.protocol;
    if (scan.no_loss) pc.loss.enabled = false;
    double spin_up = run.cfg.spin_up_fraction;
    if (!scan.spin_preset.empty())
        spin_up = defaults::spin_fraction_preset(scan.spin_preset);

    const double delta1 = layer_shift_khz(run.cfg.system.zeeman, run.cfg.system.lattice,
                                          run.cfg.system.field, TransitionId::T1);
    const std::vector<double> grid = run.cfg.scan_grid.values();
    const auto points = simulate_layer_scan(pc, run.cfg.system, mode, grid, spin_up);

    CsvTable table;
    table.header = {"delta1_khz", "delta1_over_Delta1", "signal_up", "signal_down",
                    "signal_both"};
    for (const ScanPoint& pt : points)
        table.rows.push_back({pt.delta1_khz, pt.delta1_khz / delta1, pt.signal_up,
                              pt.signal_down, pt.signal_both});
    emit_csv(run, "scan_" + scan.mode + ".csv", table);
    return finish_run(run);
}

RunManifest cmd_match(const CommandOptions& opts) {
    RunSetup run = begin_run(opts, "match");
    const double delta2 = layer_shift_khz(run.cfg.system.zeeman, run.cfg.system.lattice,
                                          run.cfg.system.field, TransitionId::T2);
    const ScanGrid& grid = run.cfg.match_grid;
    if (grid.max_khz - grid.min_khz < std::abs(delta2))
        run.manifest.warnings.push_back("match scan range is below one layer spacing");
    const auto points = simulate_layer_matching(run.cfg.protocol, run.cfg.system,
                                                grid.values());
    CsvTable table;
    table.header = {"delta2_khz", "signal", "layer_marker"};
    for (const MatchPoint& pt : points)
        table.rows.push_back({pt.delta2_khz, pt.signal, pt.delta2_khz / delta2});
    emit_csv(run, "match.csv", table);
    return finish_run(run);
}

namespace {

std::string fit_report(const std::string& label, const FitResult& fit,
                       double half_life, double n0) {
    std::ostringstream os;
    os << "dataset: " << label << '\n';
    os << "model: dN/dt = -alpha N^2 - beta N^3 (N normalized, N0 = "
       << format_double(n0) << ")\n";
    os << "alpha: " << format_double(fit.params[0]) << " 1/s\n";
    os << "beta: " << format_double(fit.params[1]) << " 1/s\n";
    os << "residual_ss: " << format_double(fit.residual_ss) << '\n';
    os << "iterations: " << fit.iterations << '\n';
    os << "converged: " << (fit.converged ? "yes" : "no") << '\n';
    os << "half_life_s: " << format_double(half_life) << '\n';
    return os.str();
}

} // namespace

RunManifest cmd_loss(const CommandOptions& opts, const LossOptions& loss) {
    RunSetup run = begin_run(opts, "loss");
    DecayCurve curve;
    std::string label;

    if (!loss.input_csv.empty()) {
        const CsvTable in = read_csv(loss.input_csv, 2);
        label = "input";
        for (const auto& row : in.rows) {
            curve.t_s.push_back(row[0]);
            curve.n.push_back(row[1]);
        }
        curve.n0 = curve.n.empty() ? 1.0 : curve.n.front();
    } else if (loss.synth_alpha || loss.synth_beta) {
        LossParams p{loss.synth_alpha.value_or(0.0), loss.synth_beta.value_or(0.0), 1.0};
        label = "synthetic";
        std::vector<double> t;
        for (int i = 0; i <= 40; ++i) t.push_back(i * 0.1);
        curve = integrate_loss(p, 1.0, t);
    } else {
        label = loss.preset;
        const LossModel& m = run.cfg.protocol.loss;
        const LossParams* p = nullptr;
        double t_half = 0.0;
        if (loss.preset == "m7h") { p = &m.m7h; t_half = run.cfg.halflife_m7h_s; }
        else if (loss.preset == "m5h") { p = &m.m5h; t_half = run.cfg.halflife_m5h_s; }
        else if (loss.preset == "mixture") { p = &m.mixture; t_half = run.cfg.halflife_mixture_s; }
        else throw ConfigError("loss: unknown preset '" + loss.preset + "'");
        std::vector<double> t;
        for (int i = 0; i <= 40; ++i) t.push_back(i * t_half * 0.1);
        curve = integrate_loss(*p, 1.0, t);
    }

    const FitResult fit = fit_loss(curve);
    const LossParams fitted{fit.params[0], fit.params[1], 1.0};
    const double t_half = half_life_s(fitted, curve.n.front());

    CsvTable table;
    table.header = {"t_s", "n"};
    for (std::size_t i = 0; i < curve.t_s.size(); ++i)
        table.rows.push_back({curve.t_s[i], curve.n[i]});
    emit_csv(run, "loss_" + label + ".csv", table);
    emit_text(run, "loss_" + label + "_fit.txt",
              fit_report(label, fit, t_half, curve.n.front()));
    return finish_run(run);
}

RunManifest cmd_fieldimg(const CommandOptions& opts, const FieldImgOptions& fi) {
    RunSetup run = begin_run(opts, "fieldimg");
    FieldConfig field = run.cfg.system.field;
    if (fi.shim_x_g) field.shim_g[0] = *fi.shim_x_g;
    if (fi.shim_y_g) field.shim_g[1] = *fi.shim_y_g;

    const TransferWindow window(run.cfg.imaging.window,
                                run.cfg.imaging.window.duration_ms /
                                    run.cfg.protocol.solver_steps);

    auto emit_image = [&](const FieldConfig& f, const std::string& stem) {
        const ImageGrid freq = frequency_map(f, run.cfg.system.zeeman, run.cfg.imaging);
        SpectralImage img = synthesize_image(freq, window, 0.0);
        if (run.cfg.imaging.noise_level > 0.0) {
            if (!opts.seed)
                throw ConfigError("fieldimg: noise_level > 0 requires --seed");
            apply_multiplicative_noise(img, run.cfg.imaging.noise_level, *opts.seed);
        }
        write_pgm16(run.out_dir + "/" + stem + ".pgm", img.fraction);
        run.manifest.outputs.push_back(stem + ".pgm");
        CsvTable table;
        table.header = {"x_um", "y_um", "fraction", "freq_khz"};
        for (int ix = 0; ix < img.fraction.pixels; ++ix)
            for (int iy = 0; iy < img.fraction.pixels; ++iy)
                table.rows.push_back({img.fraction.pixel_coord_um(ix),
                                      img.fraction.pixel_coord_um(iy),
                                      img.fraction.at(ix, iy), img.freq_khz.at(ix, iy)});
        write_csv(run.out_dir + "/" + stem + ".csv", table);
        run.manifest.outputs.push_back(stem + ".csv");
        return stripe_metrics(img, run.cfg.imaging.threshold);
    };

    if (fi.sweep) {
        if (fi.sweep_count < 2) throw ConfigError("fieldimg: sweep needs >= 2 values");
        CsvTable summary;
        summary.header = {"shim_gauss", "stripe_count", "spacing_um"};
        for (int i = 0; i < fi.sweep_count; ++i) {
            const double s = fi.sweep_min_g +
                             (fi.sweep_max_g - fi.sweep_min_g) * i / (fi.sweep_count - 1);
            FieldConfig f = field;
            if (fi.sweep_axis == "x") f.shim_g[0] = s;
            else if (fi.sweep_axis == "y") f.shim_g[1] = s;
            else throw ConfigError("fieldimg: sweep axis must be x or y");
            char stem[64];
            std::snprintf(stem, sizeof(stem), "fieldimg_sweep_%s_%02d",
                          fi.sweep_axis.c_str(), i);
            const StripeMetrics m = emit_image(f, stem);
            summary.rows.push_back({s, static_cast<double>(m.count), m.spacing_um});
        }
        emit_csv(run, "fieldimg_sweep_summary.csv", summary);
    } else {
        emit_image(field, "fieldimg");
    }
    return finish_run(run);
}

RunManifest cmd_compensate(const CommandOptions& opts) {
    RunSetup run = begin_run(opts, "compensate");
    const CompensationResult res =
        compensate(run.cfg.system.field, run.cfg.system.zeeman, run.cfg.imaging);

    std::ostringstream os;
    os << "shim_x_gauss: " << format_double(res.shim_g[0]) << '\n';
    os << "shim_y_gauss: " << format_double(res.shim_g[1]) << '\n';
    os << "displacement_estimate_x_um: " << format_double(res.displacement_estimate_um[0]) << '\n';
    os << "displacement_estimate_y_um: " << format_double(res.displacement_estimate_um[1]) << '\n';
    os << "residual_inhomogeneity_mg: " << format_double(res.residual_inhomogeneity_mg) << '\n';
    os << "iterations: " << res.iterations << '\n';
    os << "converged: " << (res.converged ? "yes" : "no") << '\n';
    emit_text(run, "compensate_report.txt", os.str());
    const RunManifest manifest = finish_run(run);
    if (!res.converged)
        throw OptimizerCapError("compensate: optimizer hit the evaluation cap; "
                                "best-so-far report written");
    return manifest;
}

RunManifest cmd_calibrate(const CommandOptions& opts) {
    RunSetup run = begin_run(opts, "calibrate");
    const SystemContext& sys = run.cfg.system;
    const Vec3 origin{0.0, 0.0, 0.0};

    const double b0 = field_magnitude_g(sys.field, origin);
    const double grad = field_gradient_z_mg_um(sys.field, origin);
    if (std::abs(b0 - defaults::kB0Gauss) > 1e-3 * defaults::kB0Gauss)
        throw CalibrationError("calibrate: |B| at the origin is off the reference value");
    if (std::abs(grad - defaults::kGradientMgUm) > 1e-3 * defaults::kGradientMgUm)
        throw CalibrationError("calibrate: dz|B| at the origin is off the reference value");

    const double kappa1 = transition_slope_khz_mg(sys.zeeman, TransitionId::T1, b0);
    const double kappa2 = transition_slope_khz_mg(sys.zeeman, TransitionId::T2, b0);
    const double kappa3 = transition_slope_khz_mg(sys.zeeman, TransitionId::T3, b0);
    if (std::abs(kappa2 - kappa3) > 0.02 * kappa2)
        throw CalibrationError("calibrate: transitions 2 and 3 are not degenerate");
    const double d1 = layer_shift_khz(sys.zeeman, sys.lattice, sys.field, TransitionId::T1);
    const double d2 = layer_shift_khz(sys.zeeman, sys.lattice, sys.field, TransitionId::T2);
    const double rabi2 = std::sqrt(7.0 / 9.0) * run.cfg.protocol.pulse_b.rabi_khz;
    const double x12 = crosstalk_distance_um(sys.zeeman, sys.field, TransitionId::T1,
                                             TransitionId::T2);
    const double x21 = crosstalk_distance_um(sys.zeeman, sys.field, TransitionId::T2,
                                             TransitionId::T1);
    const double bound = run.cfg.imaging.window.sweep_width_khz / kappa1;

    std::ostringstream os;
    os << "quantity,value,unit,definition\n";
    os << "b0," << format_double(b0) << ",G,|B(0)|\n";
    os << "dz_b," << format_double(grad) << ",mG/um,d|B|/dz at the focus\n";
    os << "kappa1," << format_double(kappa1) << ",kHz/mG,df1/dB\n";
    os << "kappa2," << format_double(kappa2) << ",kHz/mG,df2/dB\n";
    os << "kappa3," << format_double(kappa3) << ",kHz/mG,df3/dB\n";
    os << "delta1," << format_double(d1) << ",kHz,kappa1*dz_b*spacing\n";
    os << "delta2," << format_double(d2) << ",kHz,kappa2*dz_b*spacing\n";
    os << "rabi2," << format_double(rabi2) << ",kHz,sqrt(7/9)*rabi1\n";
    os << "crosstalk_pulse1," << format_double(x12) << ",um,|f2-f1|/(kappa2*dz_b)\n";
    os << "crosstalk_pulse2," << format_double(x21) << ",um,|f2-f1|/(kappa1*dz_b)\n";
    os << "detection_bound," << format_double(bound) << ",mG,width_imaging/kappa1\n";
    emit_text(run, "calibration.csv", os.str());
    return finish_run(run);
}

} // namespace slicer
