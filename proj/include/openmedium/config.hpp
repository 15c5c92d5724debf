#pragma once

#include <cstdint>
#include <cstdio>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace openmedium {

struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

enum class WorldKind : std::uint8_t { soup = 0, atoms = 1 };

struct BarrierRect {
    int x0 = 0, y0 = 0, x1 = 0, y1 = 0;
};

// Full experiment parameterization. Every key is overridable from the config
// file (one `key = value` per line, `#` comments); the defaults below are the
// documented defaults table (see docs/config-keys.md).
struct RunConfig {
    WorldKind world_kind = WorldKind::soup;
    std::uint64_t seed = 1;
    std::uint64_t steps = 0;

    // soup medium
    std::uint32_t soup_size = 60000;
    std::uint32_t slice_base = 16;
    double slice_pow = 0.0;
    double fill_threshold = 0.8;
    double fill_hysteresis = 0.02;
    double p_copy_flip = 0.0005;  // 1/2000 per write
    double p_cosmic = 1e-6;       // per cell per ring cycle
    std::uint32_t max_org_size = 1024;
    std::uint32_t search_limit = 1024;
    bool error_promotion = true;
    std::string soup_genome;  // path; empty = unseeded world

    // chem medium
    std::uint32_t grid_width = 256;
    std::uint32_t grid_height = 256;
    std::uint32_t max_state = 9;
    std::string rules_path;  // empty = no reactions
    double p_bond_break = 0.0;
    double p_state_reset = 0.0;
    bool motion_enabled = true;
    std::vector<BarrierRect> barriers;
    std::string chem_payload;  // empty = unseeded world
    std::int32_t chem_seed_x = -1;  // -1 = grid center
    std::int32_t chem_seed_y = -1;
    std::uint32_t chem_food = 0;       // free a/b atoms scattered at seed time
    std::uint32_t chem_food_caps = 0;  // free e atoms (cap material)

    // observatory
    std::uint32_t metrics_interval = 100;
    std::uint64_t stasis_window = 10000;       // W
    std::uint64_t stasis_persistence = 1000;   // w
    std::uint32_t stasis_min_abundance = 3;    // n_min
    double parasite_fraction = 0.5;
    std::uint32_t parasite_window = 256;
    bool observatory = true;

    // engine
    bool strict_audit = true;
    std::uint64_t checkpoint_interval = 0;  // 0 = auto (soup 6250, chem 1000)
    std::string out_dir = "out";

    std::uint64_t effective_checkpoint_interval() const {
        if (checkpoint_interval != 0) return checkpoint_interval;
        return world_kind == WorldKind::soup ? 6250 : 1000;
    }

    void validate() const;
};

namespace detail {

inline std::string trim(std::string_view s) {
    size_t a = s.find_first_not_of(" \t\r\n");
    if (a == std::string_view::npos) return {};
    size_t b = s.find_last_not_of(" \t\r\n");
    return std::string(s.substr(a, b - a + 1));
}

inline std::uint64_t parse_u64(const std::string& key, const std::string& v) {
    try {
        size_t pos = 0;
        if (!v.empty() && v[0] == '-')
            throw ConfigError(key + " must be non-negative");
        unsigned long long r = std::stoull(v, &pos);
        if (pos != v.size()) throw std::invalid_argument(v);
        return r;
    } catch (const ConfigError&) {
        throw;
    } catch (...) {
        throw ConfigError("invalid integer for " + key + ": '" + v + "'");
    }
}

inline double parse_f64(const std::string& key, const std::string& v) {
    try {
        size_t pos = 0;
        double r = std::stod(v, &pos);
        if (pos != v.size()) throw std::invalid_argument(v);
        return r;
    } catch (...) {
        throw ConfigError("invalid number for " + key + ": '" + v + "'");
    }
}

inline bool parse_bool(const std::string& key, const std::string& v) {
    if (v == "true" || v == "1" || v == "on") return true;
    if (v == "false" || v == "0" || v == "off") return false;
    throw ConfigError("invalid boolean for " + key + ": '" + v + "'");
}

inline std::string format_f64(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

}  // namespace detail

inline void RunConfig::validate() const {
    auto prob = [](double p, const char* name) {
        if (!(p >= 0.0 && p <= 1.0))
            throw ConfigError(std::string(name) + " out of range [0,1]");
    };
    prob(p_copy_flip, "p_copy_flip");
    prob(p_cosmic, "p_cosmic");
    prob(p_bond_break, "p_bond_break");
    prob(p_state_reset, "p_state_reset");
    prob(parasite_fraction, "parasite_fraction");
    if (!(fill_threshold > 0.0 && fill_threshold <= 1.0))
        throw ConfigError("fill_threshold out of range (0,1]");
    if (!(fill_hysteresis > 0.0 && fill_hysteresis < fill_threshold))
        throw ConfigError("fill_hysteresis must satisfy 0 < fill_hysteresis < fill_threshold");
    if (max_org_size < 1) throw ConfigError("max_org_size must be >= 1");
    if (soup_size < 2 * max_org_size)
        throw ConfigError("soup_size must be >= 2*max_org_size");
    if (grid_width < 8 || grid_height < 8)
        throw ConfigError("grid dimensions >= 8 required");
    if (grid_width > 65535 || grid_height > 65535)
        throw ConfigError("grid dimensions must fit in 16 bits");
    if (max_state < 1 || max_state > 9)
        throw ConfigError("max_state must be in [1,9]");
    if (metrics_interval < 1) throw ConfigError("metrics_interval must be >= 1");
    if (parasite_window < 1) throw ConfigError("parasite_window must be >= 1");
    if (search_limit < 1) throw ConfigError("search_limit must be >= 1");
    for (const auto& b : barriers) {
        if (b.x0 > b.x1 || b.y0 > b.y1)
            throw ConfigError("barrier rect must have x0<=x1 and y0<=y1");
        if (b.x0 < 0 || b.y0 < 0 || b.x1 >= int(grid_width) || b.y1 >= int(grid_height))
            throw ConfigError("barrier rect outside grid");
    }
}

// Applies one key/value assignment. Unknown keys are errors by contract.
inline void config_set(RunConfig& c, const std::string& key, const std::string& val) {
    using namespace detail;
    if (key == "world_kind") {
        if (val == "soup") c.world_kind = WorldKind::soup;
        else if (val == "atoms") c.world_kind = WorldKind::atoms;
        else throw ConfigError("world_kind must be 'soup' or 'atoms'");
    } else if (key == "seed") c.seed = parse_u64(key, val);
    else if (key == "steps") c.steps = parse_u64(key, val);
    else if (key == "soup_size") c.soup_size = std::uint32_t(parse_u64(key, val));
    else if (key == "slice_base") c.slice_base = std::uint32_t(parse_u64(key, val));
    else if (key == "slice_pow") c.slice_pow = parse_f64(key, val);
    else if (key == "fill_threshold") c.fill_threshold = parse_f64(key, val);
    else if (key == "fill_hysteresis") c.fill_hysteresis = parse_f64(key, val);
    else if (key == "p_copy_flip") c.p_copy_flip = parse_f64(key, val);
    else if (key == "p_cosmic") c.p_cosmic = parse_f64(key, val);
    else if (key == "max_org_size") c.max_org_size = std::uint32_t(parse_u64(key, val));
    else if (key == "search_limit") c.search_limit = std::uint32_t(parse_u64(key, val));
    else if (key == "error_promotion") c.error_promotion = parse_bool(key, val);
    else if (key == "soup_genome") c.soup_genome = val;
    else if (key == "grid_width") c.grid_width = std::uint32_t(parse_u64(key, val));
    else if (key == "grid_height") c.grid_height = std::uint32_t(parse_u64(key, val));
    else if (key == "max_state") c.max_state = std::uint32_t(parse_u64(key, val));
    else if (key == "rules_path") c.rules_path = val;
    else if (key == "p_bond_break") c.p_bond_break = parse_f64(key, val);
    else if (key == "p_state_reset") c.p_state_reset = parse_f64(key, val);
    else if (key == "motion_enabled") c.motion_enabled = parse_bool(key, val);
    else if (key == "barrier") {
        // value: rect x0 y0 x1 y1
        std::istringstream in(val);
        std::string tag;
        BarrierRect r;
        if (!(in >> tag >> r.x0 >> r.y0 >> r.x1 >> r.y1) || tag != "rect")
            throw ConfigError("barrier must be 'rect x0 y0 x1 y1'");
        std::string rest;
        if (in >> rest) throw ConfigError("barrier must be 'rect x0 y0 x1 y1'");
        c.barriers.push_back(r);
    } else if (key == "chem_payload") c.chem_payload = val;
    else if (key == "chem_seed_x") c.chem_seed_x = std::int32_t(parse_u64(key, val));
    else if (key == "chem_seed_y") c.chem_seed_y = std::int32_t(parse_u64(key, val));
    else if (key == "chem_food") c.chem_food = std::uint32_t(parse_u64(key, val));
    else if (key == "chem_food_caps") c.chem_food_caps = std::uint32_t(parse_u64(key, val));
    else if (key == "metrics_interval") c.metrics_interval = std::uint32_t(parse_u64(key, val));
    else if (key == "stasis_window") c.stasis_window = parse_u64(key, val);
    else if (key == "stasis_persistence") c.stasis_persistence = parse_u64(key, val);
    else if (key == "stasis_min_abundance") c.stasis_min_abundance = std::uint32_t(parse_u64(key, val));
    else if (key == "parasite_fraction") c.parasite_fraction = parse_f64(key, val);
    else if (key == "parasite_window") c.parasite_window = std::uint32_t(parse_u64(key, val));
    else if (key == "observatory") c.observatory = parse_bool(key, val);
    else if (key == "strict_audit") c.strict_audit = parse_bool(key, val);
    else if (key == "checkpoint_interval") c.checkpoint_interval = parse_u64(key, val);
    else if (key == "out_dir") c.out_dir = val;
    else throw ConfigError("unknown config key: '" + key + "'");
}

// Parses the full key/value grammar; omitted keys keep documented defaults.
inline RunConfig config_parse(std::string_view text) {
    RunConfig c;
    size_t pos = 0;
    int lineno = 0;
    while (pos <= text.size()) {
        size_t eol = text.find('\n', pos);
        std::string_view raw = text.substr(pos, eol == std::string_view::npos
                                                    ? std::string_view::npos
                                                    : eol - pos);
        pos = eol == std::string_view::npos ? text.size() + 1 : eol + 1;
        ++lineno;
        std::string line(raw);
        if (size_t h = line.find('#'); h != std::string::npos) line.resize(h);
        line = detail::trim(line);
        if (line.empty()) continue;
        size_t eq = line.find('=');
        if (eq == std::string::npos)
            throw ConfigError("line " + std::to_string(lineno) +
                              ": expected 'key = value'");
        std::string key = detail::trim(line.substr(0, eq));
        std::string val = detail::trim(line.substr(eq + 1));
        try {
            config_set(c, key, val);
        } catch (const ConfigError& e) {
            throw ConfigError("line " + std::to_string(lineno) + ": " + e.what());
        }
    }
    c.validate();
    return c;
}

// Canonical physics/observatory parameter text, embedded in checkpoints.
// Runtime directives (steps, out_dir, file paths, checkpoint cadence) are
// deliberately excluded so that interrupted and uninterrupted runs of the
// same world serialize identically; world content travels in the world
// section instead.
inline std::string config_canonical(const RunConfig& c) {
    using detail::format_f64;
    std::ostringstream o;
    o << "world_kind = " << (c.world_kind == WorldKind::soup ? "soup" : "atoms") << '\n';
    o << "seed = " << c.seed << '\n';
    o << "soup_size = " << c.soup_size << '\n';
    o << "slice_base = " << c.slice_base << '\n';
    o << "slice_pow = " << format_f64(c.slice_pow) << '\n';
    o << "fill_threshold = " << format_f64(c.fill_threshold) << '\n';
    o << "fill_hysteresis = " << format_f64(c.fill_hysteresis) << '\n';
    o << "p_copy_flip = " << format_f64(c.p_copy_flip) << '\n';
    o << "p_cosmic = " << format_f64(c.p_cosmic) << '\n';
    o << "max_org_size = " << c.max_org_size << '\n';
    o << "search_limit = " << c.search_limit << '\n';
    o << "error_promotion = " << (c.error_promotion ? "true" : "false") << '\n';
    o << "grid_width = " << c.grid_width << '\n';
    o << "grid_height = " << c.grid_height << '\n';
    o << "max_state = " << c.max_state << '\n';
    o << "p_bond_break = " << format_f64(c.p_bond_break) << '\n';
    o << "p_state_reset = " << format_f64(c.p_state_reset) << '\n';
    o << "motion_enabled = " << (c.motion_enabled ? "true" : "false") << '\n';
    for (const auto& b : c.barriers)
        o << "barrier = rect " << b.x0 << ' ' << b.y0 << ' ' << b.x1 << ' ' << b.y1 << '\n';
    o << "chem_payload = " << c.chem_payload << '\n';
    o << "chem_seed_x = " << c.chem_seed_x << '\n';
    o << "chem_seed_y = " << c.chem_seed_y << '\n';
    o << "chem_food = " << c.chem_food << '\n';
    o << "chem_food_caps = " << c.chem_food_caps << '\n';
    o << "metrics_interval = " << c.metrics_interval << '\n';
    o << "stasis_window = " << c.stasis_window << '\n';
    o << "stasis_persistence = " << c.stasis_persistence << '\n';
    o << "stasis_min_abundance = " << c.stasis_min_abundance << '\n';
    o << "parasite_fraction = " << format_f64(c.parasite_fraction) << '\n';
    o << "parasite_window = " << c.parasite_window << '\n';
    o << "observatory = " << (c.observatory ? "true" : "false") << '\n';
    o << "strict_audit = " << (c.strict_audit ? "true" : "false") << '\n';
    return o.str();
}

}  // namespace openmedium
