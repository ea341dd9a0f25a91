#include "slicer/config.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <set>
#include <sstream>

#include "slicer/errors.hpp"

namespace slicer {

double ConfigValue::as_number(const std::string& key) const {
    if (const double* d = std::get_if<double>(&v)) return *d;
    throw ConfigError("config: key '" + key + "' must be a number");
}

int ConfigValue::as_int(const std::string& key) const {
    const double d = as_number(key);
    const int i = static_cast<int>(d);
    if (static_cast<double>(i) != d)
        throw ConfigError("config: key '" + key + "' must be an integer");
    return i;
}

bool ConfigValue::as_bool(const std::string& key) const {
    if (const bool* b = std::get_if<bool>(&v)) return *b;
    throw ConfigError("config: key '" + key + "' must be a boolean");
}

std::string ConfigValue::as_string(const std::string& key) const {
    if (const std::string* s = std::get_if<std::string>(&v)) return *s;
    throw ConfigError("config: key '" + key + "' must be a string");
}

std::vector<double> ConfigValue::as_array(const std::string& key, std::size_t size) const {
    if (const auto* a = std::get_if<std::vector<double>>(&v)) {
        if (a->size() != size)
            throw ConfigError("config: key '" + key + "' must have " +
                              std::to_string(size) + " elements");
        return *a;
    }
    throw ConfigError("config: key '" + key + "' must be an array");
}

namespace {

std::string trim(const std::string& s) {
    const auto a = s.find_first_not_of(" \t");
    if (a == std::string::npos) return "";
    const auto b = s.find_last_not_of(" \t");
    return s.substr(a, b - a + 1);
}

std::string strip_comment(const std::string& line) {
    bool in_string = false;
    for (std::size_t i = 0; i < line.size(); ++i) {
        if (line[i] == '"') in_string = !in_string;
        else if (line[i] == '#' && !in_string) return line.substr(0, i);
    }
    return line;
}

double parse_number(const std::string& tok, int line_no) {
    double v = 0.0;
    const char* first = tok.data();
    const char* last = tok.data() + tok.size();
    const auto res = std::from_chars(first, last, v);
    if (res.ec != std::errc{} || res.ptr != last)
        throw ConfigError("config: line " + std::to_string(line_no) +
                          ": malformed number '" + tok + "'");
    return v;
}

ConfigValue parse_value(const std::string& raw, int line_no) {
    const std::string tok = trim(raw);
    if (tok.empty())
        throw ConfigError("config: line " + std::to_string(line_no) + ": empty value");
    if (tok == "true") return ConfigValue{true};
    if (tok == "false") return ConfigValue{false};
    if (tok.front() == '"') {
        if (tok.size() < 2 || tok.back() != '"')
            throw ConfigError("config: line " + std::to_string(line_no) +
                              ": unterminated string");
        return ConfigValue{tok.substr(1, tok.size() - 2)};
    }
    if (tok.front() == '[') {
        if (tok.back() != ']')
            throw ConfigError("config: line " + std::to_string(line_no) +
                              ": unterminated array");
        std::vector<double> arr;
        std::stringstream ss(tok.substr(1, tok.size() - 2));
        std::string item;
        while (std::getline(ss, item, ',')) {
            item = trim(item);
            if (item.empty()) continue;
            arr.push_back(parse_number(item, line_no));
        }
        return ConfigValue{arr};
    }
    return ConfigValue{parse_number(tok, line_no)};
}

} // namespace

ConfigTable parse_config_text(const std::string& text) {
    ConfigTable table;
    std::istringstream in(text);
    std::string line;
    std::string section;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        line = trim(strip_comment(line));
        if (line.empty()) continue;
        if (line.front() == '[') {
            if (line.back() != ']')
                throw ConfigError("config: line " + std::to_string(line_no) +
                                  ": malformed section header");
            section = trim(line.substr(1, line.size() - 2));
            if (section.empty())
                throw ConfigError("config: line " + std::to_string(line_no) +
                                  ": empty section name");
            table.try_emplace(section);
            continue;
        }
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw ConfigError("config: line " + std::to_string(line_no) +
                              ": expected key = value");
        const std::string key = trim(line.substr(0, eq));
        if (key.empty())
            throw ConfigError("config: line " + std::to_string(line_no) + ": empty key");
        if (section.empty())
            throw ConfigError("config: line " + std::to_string(line_no) +
                              ": key outside any section");
        table[section][key] = parse_value(line.substr(eq + 1), line_no);
    }
    return table;
}

std::vector<double> ScanGrid::values() const {
    std::vector<double> out;
    out.reserve(static_cast<std::size_t>(std::max(points, 0)));
    if (points == 1) {
        out.push_back(min_khz);
        return out;
    }
    for (int i = 0; i < points; ++i)
        out.push_back(min_khz + (max_khz - min_khz) * i / (points - 1));
    return out;
}

RunConfig default_run_config() {
    RunConfig cfg;
    cfg.system = defaults::system_context();
    cfg.protocol = defaults::protocol_config();
    cfg.imaging = defaults::imaging_config();
    return cfg;
}

namespace {

class SectionReader {
  public:
    SectionReader(const ConfigTable& table, const std::string& section)
        : section_(section) {
        const auto it = table.find(section);
        if (it != table.end()) entries_ = &it->second;
    }

    template <typename F>
    void key(const std::string& name, F&& apply) {
        known_.insert(name);
        if (!entries_) return;
        const auto it = entries_->find(name);
        if (it != entries_->end()) apply(it->second);
    }

    void finish() const {
        if (!entries_) return;
        for (const auto& [name, value] : *entries_) {
            if (!known_.count(name))
                throw ConfigError("config: unknown key '" + name + "' in [" +
                                  section_ + "]");
        }
    }

  private:
    std::string section_;
    const std::map<std::string, ConfigValue>* entries_ = nullptr;
    std::set<std::string> known_;
};

void read_pulse(const ConfigTable& table, const std::string& section, HS1Params& p) {
    SectionReader r(table, section);
    r.key("center_khz", [&](const ConfigValue& v) { p.delta_center_khz = v.as_number("center_khz"); });
    r.key("width_khz", [&](const ConfigValue& v) { p.sweep_width_khz = v.as_number("width_khz"); });
    r.key("rabi_khz", [&](const ConfigValue& v) { p.rabi_khz = v.as_number("rabi_khz"); });
    r.key("duration_ms", [&](const ConfigValue& v) { p.duration_ms = v.as_number("duration_ms"); });
    r.key("tau_ratio", [&](const ConfigValue& v) { p.tau_ratio = v.as_number("tau_ratio"); });
    r.finish();
}

void read_grid(SectionReader& r, const std::string& prefix, ScanGrid& grid) {
    r.key(prefix + "_min_khz", [&](const ConfigValue& v) { grid.min_khz = v.as_number(prefix); });
    r.key(prefix + "_max_khz", [&](const ConfigValue& v) { grid.max_khz = v.as_number(prefix); });
    r.key(prefix + "_points", [&](const ConfigValue& v) {
        grid.points = v.as_int(prefix + "_points");
        if (grid.points < 2) throw ConfigError("config: " + prefix + "_points must be >= 2");
    });
}

} // namespace

RunConfig run_config_from_text(const std::string& text) {
    const ConfigTable table = parse_config_text(text);
    static const std::set<std::string> known_sections{
        "field", "zeeman", "lattice", "pulse.A", "pulse.B", "pulse.D",
        "pulse.E", "pulse.imaging", "protocol", "loss", "imaging", "output"};
    for (const auto& [name, _] : table)
        if (!known_sections.count(name))
            throw ConfigError("config: unknown section [" + name + "]");

    RunConfig cfg = default_run_config();

    {
        SectionReader r(table, "field");
        FieldConfig& f = cfg.system.field;
        r.key("mode", [&](const ConfigValue& v) {
            const std::string m = v.as_string("mode");
            if (m == "pure_quadrupole") f.mode = FieldMode::pure_quadrupole;
            else if (m == "bias_plus_quadrupole") f.mode = FieldMode::bias_plus_quadrupole;
            else throw ConfigError("config: unknown field mode '" + m + "'");
        });
        r.key("bias_gauss", [&](const ConfigValue& v) {
            const auto a = v.as_array("bias_gauss", 3);
            f.bias_g = {a[0], a[1], a[2]};
        });
        r.key("quad_strength_mg_um", [&](const ConfigValue& v) {
            f.quad_strength_mg_um = v.as_number("quad_strength_mg_um");
        });
        r.key("quad_center_um", [&](const ConfigValue& v) {
            const auto a = v.as_array("quad_center_um", 3);
            f.quad_center_um = {a[0], a[1], a[2]};
        });
        r.key("shim_gauss", [&](const ConfigValue& v) {
            const auto a = v.as_array("shim_gauss", 2);
            f.shim_g = {a[0], a[1]};
        });
        r.finish();
        f.validate();
    }
    {
        SectionReader r(table, "zeeman");
        ZeemanModel& z = cfg.system.zeeman;
        r.key("mode", [&](const ConfigValue& v) {
            const std::string m = v.as_string("mode");
            if (m == "linear_calibrated") z.mode = ZeemanMode::linear_calibrated;
            else if (m == "breit_rabi") z.mode = ZeemanMode::breit_rabi;
            else throw ConfigError("config: unknown zeeman mode '" + m + "'");
        });
        r.key("b0_gauss", [&](const ConfigValue& v) { z.b0_gauss = v.as_number("b0_gauss"); });
        r.key("kappa1_khz_mg", [&](const ConfigValue& v) { z.kappa1_khz_mg = v.as_number("kappa1_khz_mg"); });
        r.key("kappa2_khz_mg", [&](const ConfigValue& v) {
            z.kappa2_khz_mg = v.as_number("kappa2_khz_mg");
            z.kappa3_khz_mg = z.kappa2_khz_mg;
        });
        r.key("kappa3_khz_mg", [&](const ConfigValue& v) { z.kappa3_khz_mg = v.as_number("kappa3_khz_mg"); });
        r.key("f1_base_mhz", [&](const ConfigValue& v) { z.f1_base_mhz = v.as_number("f1_base_mhz"); });
        r.key("f2_base_mhz", [&](const ConfigValue& v) { z.f2_base_mhz = v.as_number("f2_base_mhz"); });
        r.key("a_hfs_mhz", [&](const ConfigValue& v) { z.br.a_hfs_mhz = v.as_number("a_hfs_mhz"); });
        r.key("g_j", [&](const ConfigValue& v) { z.br.g_j = v.as_number("g_j"); });
        r.key("g_i", [&](const ConfigValue& v) { z.br.g_i = v.as_number("g_i"); });
        r.key("nuclear_spin", [&](const ConfigValue& v) { z.br.nuclear_spin = v.as_number("nuclear_spin"); });
        r.finish();
        z.validate();
    }
    {
        SectionReader r(table, "lattice");
        LatticeGeometry& g = cfg.system.lattice;
        r.key("spacing_um", [&](const ConfigValue& v) { g.spacing_um = v.as_number("spacing_um"); });
        r.key("layer_count", [&](const ConfigValue& v) { g.layer_count = v.as_int("layer_count"); });
        r.key("focus_index", [&](const ConfigValue& v) { g.focus_index = v.as_int("focus_index"); });
        r.key("envelope", [&](const ConfigValue& v) {
            const std::string m = v.as_string("envelope");
            if (m == "uniform") g.envelope = EnvelopeKind::uniform;
            else if (m == "gaussian") g.envelope = EnvelopeKind::gaussian;
            else throw ConfigError("config: unknown envelope '" + m + "'");
        });
        r.key("envelope_sigma_layers", [&](const ConfigValue& v) {
            g.envelope_sigma_layers = v.as_number("envelope_sigma_layers");
        });
        r.finish();
        g.validate();
    }

    read_pulse(table, "pulse.A", cfg.protocol.pulse_a);
    read_pulse(table, "pulse.B", cfg.protocol.pulse_b);
    read_pulse(table, "pulse.D", cfg.protocol.pulse_d);
    read_pulse(table, "pulse.E", cfg.protocol.pulse_e);
    read_pulse(table, "pulse.imaging", cfg.imaging.window);

    {
        SectionReader r(table, "protocol");
        ProtocolConfig& p = cfg.protocol;
        r.key("removal_survival", [&](const ConfigValue& v) { p.removal_survival = v.as_number("removal_survival"); });
        r.key("removal_duration_ms", [&](const ConfigValue& v) { p.removal_duration_ms = v.as_number("removal_duration_ms"); });
        r.key("repump_efficiency", [&](const ConfigValue& v) { p.repump_efficiency = v.as_number("repump_efficiency"); });
        r.key("repetitions", [&](const ConfigValue& v) { p.repetitions = v.as_int("repetitions"); });
        r.key("background_weight", [&](const ConfigValue& v) { p.background_weight = v.as_number("background_weight"); });
        r.key("background_level", [&](const ConfigValue& v) { p.background_level = v.as_number("background_level"); });
        r.key("solver_steps", [&](const ConfigValue& v) {
            p.solver_steps = v.as_int("solver_steps");
        });
        r.key("spin_preset", [&](const ConfigValue& v) {
            cfg.spin_preset = v.as_string("spin_preset");
            cfg.spin_up_fraction = defaults::spin_fraction_preset(cfg.spin_preset);
        });
        r.key("spin_up_fraction", [&](const ConfigValue& v) {
            cfg.spin_up_fraction = v.as_number("spin_up_fraction");
            if (cfg.spin_up_fraction < 0.0 || cfg.spin_up_fraction > 1.0)
                throw ConfigError("config: spin_up_fraction must be in [0, 1]");
        });
        read_grid(r, "scan", cfg.scan_grid);
        read_grid(r, "match", cfg.match_grid);
        read_grid(r, "profile", cfg.profile_grid);
        r.finish();
    }
    {
        SectionReader r(table, "loss");
        LossModel& m = cfg.protocol.loss;
        r.key("enabled", [&](const ConfigValue& v) { m.enabled = v.as_bool("enabled"); });
        r.key("density_scale", [&](const ConfigValue& v) { m.density_scale = v.as_number("density_scale"); });
        double t7 = cfg.halflife_m7h_s, t5 = cfg.halflife_m5h_s, tm = cfg.halflife_mixture_s;
        double r7a = defaults::kQuotedLossM7h.alpha, r7b = defaults::kQuotedLossM7h.beta;
        double r5a = defaults::kQuotedLossM5h.alpha, r5b = defaults::kQuotedLossM5h.beta;
        double rma = defaults::kQuotedLossMixture.alpha, rmb = defaults::kQuotedLossMixture.beta;
        bool dirty = false;
        r.key("halflife_m7h_ms", [&](const ConfigValue& v) { t7 = 1e-3 * v.as_number("halflife_m7h_ms"); dirty = true; });
        r.key("halflife_m5h_ms", [&](const ConfigValue& v) { t5 = 1e-3 * v.as_number("halflife_m5h_ms"); dirty = true; });
        r.key("halflife_mixture_ms", [&](const ConfigValue& v) { tm = 1e-3 * v.as_number("halflife_mixture_ms"); dirty = true; });
        r.key("ratio_alpha_m7h", [&](const ConfigValue& v) { r7a = v.as_number("ratio_alpha_m7h"); dirty = true; });
        r.key("ratio_beta_m7h", [&](const ConfigValue& v) { r7b = v.as_number("ratio_beta_m7h"); dirty = true; });
        r.key("ratio_alpha_m5h", [&](const ConfigValue& v) { r5a = v.as_number("ratio_alpha_m5h"); dirty = true; });
        r.key("ratio_beta_m5h", [&](const ConfigValue& v) { r5b = v.as_number("ratio_beta_m5h"); dirty = true; });
        r.key("ratio_alpha_mixture", [&](const ConfigValue& v) { rma = v.as_number("ratio_alpha_mixture"); dirty = true; });
        r.key("ratio_beta_mixture", [&](const ConfigValue& v) { rmb = v.as_number("ratio_beta_mixture"); dirty = true; });
        r.finish();
        if (dirty) {
            m.m7h = calibrate_to_halflife(t7, 1.0, r7a, r7b);
            m.m5h = calibrate_to_halflife(t5, 1.0, r5a, r5b);
            m.mixture = calibrate_to_halflife(tm, 1.0, rma, rmb);
            cfg.halflife_m7h_s = t7;
            cfg.halflife_m5h_s = t5;
            cfg.halflife_mixture_s = tm;
        }
    }
    {
        SectionReader r(table, "imaging");
        ImagingConfig& img = cfg.imaging;
        r.key("fov_um", [&](const ConfigValue& v) { img.fov_um = v.as_number("fov_um"); });
        r.key("pixels", [&](const ConfigValue& v) { img.pixels = v.as_int("pixels"); });
        r.key("transition", [&](const ConfigValue& v) {
            img.transition = transition_from_name(v.as_string("transition"));
        });
        r.key("threshold", [&](const ConfigValue& v) { img.threshold = v.as_number("threshold"); });
        r.key("noise_level", [&](const ConfigValue& v) { img.noise_level = v.as_number("noise_level"); });
        r.key("shim_bound_gauss", [&](const ConfigValue& v) { img.shim_bound_g = v.as_number("shim_bound_gauss"); });
        r.key("max_evals", [&](const ConfigValue& v) { img.max_evals = v.as_int("max_evals"); });
        r.finish();
        img.validate();
    }
    {
        SectionReader r(table, "output");
        r.key("directory", [&](const ConfigValue& v) { cfg.out_dir = v.as_string("directory"); });
        r.key("plot", [&](const ConfigValue& v) { cfg.plot = v.as_bool("plot"); });
        r.finish();
    }

    cfg.protocol.validate();
    return cfg;
}

RunConfig load_run_config(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError("cannot open config file: " + path);
    std::stringstream ss;
    ss << in.rdbuf();
    return run_config_from_text(ss.str());
}

} // namespace slicer
