#pragma once

#include <map>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "slicer/defaults.hpp"

namespace slicer {

// Minimal TOML-style config reader: [section] headers (dots allowed),
// key = value lines with numbers, booleans, quoted strings and flat numeric
// arrays. Unknown sections or keys are hard errors so unit mistakes cannot
// pass silently.
struct ConfigValue {
    std::variant<double, bool, std::string, std::vector<double>> v;

    double as_number(const std::string& key) const;
    int as_int(const std::string& key) const;
    bool as_bool(const std::string& key) const;
    std::string as_string(const std::string& key) const;
    std::vector<double> as_array(const std::string& key, std::size_t size) const;
};

using ConfigTable = std::map<std::string, std::map<std::string, ConfigValue>>;

ConfigTable parse_config_text(const std::string& text);

struct ScanGrid {
    double min_khz = 0.0;
    double max_khz = 0.0;
    int points = 0;
    std::vector<double> values() const;
};

struct RunConfig {
    SystemContext system;
    ProtocolConfig protocol;
    ImagingConfig imaging;
    double spin_up_fraction = 0.5;
    std::string spin_preset = "balanced";

    ScanGrid scan_grid{-12.5, 12.5, 126};
    ScanGrid match_grid{-5.0, 5.0, 101};
    ScanGrid profile_grid{-15.0, 15.0, 121};

    // loss calibration inputs
    double halflife_m7h_s = defaults::kHalfLifeM7hS;
    double halflife_m5h_s = defaults::kHalfLifeM5hS;
    double halflife_mixture_s = defaults::kHalfLifeMixtureS;

    bool plot = false;
    std::string out_dir = "out";
};

// Every default equals the calibrated reference preset; the file only
// overrides what it names.
RunConfig default_run_config();
RunConfig load_run_config(const std::string& path);
RunConfig run_config_from_text(const std::string& text);

} // namespace slicer
