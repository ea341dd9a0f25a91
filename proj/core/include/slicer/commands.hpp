#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "slicer/config.hpp"
#include "slicer/manifest.hpp"

namespace slicer {

struct CommandOptions {
    std::string config_path;  // empty -> defaults
    std::string out_dir;      // empty -> the config's [output] directory
    bool plot = false;
    std::optional<std::uint64_t> seed;
};

struct ProfileOptions {
    std::string transition = "T1";
    std::vector<double> durations_ms{1.0};
};

struct ScanOptions {
    std::string mode = "both";  // up / down / both
    bool no_loss = false;
    std::string spin_preset;    // empty -> config value
};

struct LossOptions {
    std::string preset = "mixture";  // m7h / m5h / mixture
    std::string input_csv;           // overrides preset
    std::optional<double> synth_alpha;
    std::optional<double> synth_beta;
};

struct FieldImgOptions {
    std::optional<double> shim_x_g;
    std::optional<double> shim_y_g;
    bool sweep = false;
    std::string sweep_axis = "x";
    double sweep_min_g = 0.0;
    double sweep_max_g = 0.4;
    int sweep_count = 5;
};

// Each command writes its artifacts plus manifest.json under out_dir and
// returns the manifest.
RunManifest cmd_profile(const CommandOptions& opts, const ProfileOptions& profile);
RunManifest cmd_scan(const CommandOptions& opts, const ScanOptions& scan);
RunManifest cmd_match(const CommandOptions& opts);
RunManifest cmd_loss(const CommandOptions& opts, const LossOptions& loss);
RunManifest cmd_fieldimg(const CommandOptions& opts, const FieldImgOptions& img);
RunManifest cmd_compensate(const CommandOptions& opts);
RunManifest cmd_calibrate(const CommandOptions& opts);

} // namespace slicer
