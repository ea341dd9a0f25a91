#include "slicer/manifest.hpp"

#include <fstream>

#include <json.hpp>

#include "slicer/errors.hpp"

namespace slicer {

void write_manifest(const std::string& out_dir, const RunManifest& manifest) {
    nlohmann::ordered_json j;
    j["subcommand"] = manifest.subcommand;
    j["config_hash"] = manifest.config_hash;
    j["version"] = manifest.version;
    j["outputs"] = manifest.outputs;
    j["warnings"] = manifest.warnings;
    j["wall_time_s"] = manifest.wall_time_s;
    const std::string path = out_dir + "/manifest.json";
    std::ofstream out(path, std::ios::binary);
    if (!out) throw ConfigError("cannot open for writing: " + path);
    out << j.dump(2) << '\n';
    if (!out) throw ConfigError("write failed: " + path);
}

} // namespace slicer
