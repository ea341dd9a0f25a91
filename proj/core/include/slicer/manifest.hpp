#pragma once

#include <string>
#include <vector>

namespace slicer {

inline constexpr const char* kToolkitVersion = "1.0.0";

struct RunManifest {
    std::string subcommand;
    std::string config_hash;
    std::string version = kToolkitVersion;
    std::vector<std::string> outputs;
    std::vector<std::string> warnings;
    double wall_time_s = 0.0;
};

// Written as manifest.json in the output directory. Every artifact the run
// produced is listed; wall_time_s is the only field that varies between
// identical runs.
void write_manifest(const std::string& out_dir, const RunManifest& manifest);

} // namespace slicer
