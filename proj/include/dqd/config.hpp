#ifndef DQD_CONFIG_HPP
#define DQD_CONFIG_HPP

// JSON ingestion of specs and run configurations.
//
// Spec object: {"left_levels": [...], "right_levels": [...], "wire_a": a, "wire_b": b,
//               "length": L, "u": u, "v": v, "w": w}
// "w" defaults to "v"; "right_levels" defaults to "left_levels". A spec may
// also be given as a preset name string such as "fig9".

#include <nlohmann/json.hpp>

#include <fstream>
#include <optional>
#include <string>
#include <vector>

#include "dqd/branchpoints.hpp"
#include "dqd/errors.hpp"
#include "dqd/model.hpp"
#include "dqd/presets.hpp"

namespace dqd {

using Json = nlohmann::json;

namespace detail {

template <class T>
T get_required(const Json& j, const char* key, const std::string& where) {
    if (!j.contains(key)) throw Error(ErrorCode::ConfigError, where + ": missing key '" + key + "'");
    try {
        return j.at(key).get<T>();
    } catch (const Json::exception& e) {
        throw Error(ErrorCode::ConfigError, where + ": bad value for '" + key + "': " + e.what());
    }
}

template <class T>
T get_or(const Json& j, const char* key, T fallback, const std::string& where) {
    if (!j.contains(key)) return fallback;
    return get_required<T>(j, key, where);
}

}  // namespace detail

inline DoubleDotSpec spec_from_json(const Json& j) {
    if (j.is_string()) {
        try {
            return preset_spec(j.get<std::string>());
        } catch (const Error& e) {
            throw Error(ErrorCode::ConfigError, e.what());
        }
    }
    if (!j.is_object()) throw Error(ErrorCode::ConfigError, "spec must be an object or a preset name");
    const std::string where = "spec";
    DoubleDotSpec s;
    s.left_levels = detail::get_required<std::vector<double>>(j, "left_levels", where);
    s.right_levels = detail::get_or<std::vector<double>>(j, "right_levels", s.left_levels, where);
    s.wire.offset = detail::get_required<double>(j, "wire_a", where);
    s.wire.slope = detail::get_or<double>(j, "wire_b", 0.0, where);
    s.length = detail::get_or<double>(j, "length", 0.0, where);
    s.u = detail::get_required<double>(j, "u", where);
    s.v = detail::get_or<double>(j, "v", 0.0, where);
    s.w = detail::get_or<double>(j, "w", s.v, where);
    try {
        s.validate();
    } catch (const Error& e) {
        throw Error(ErrorCode::ConfigError, e.what());
    }
    return s;
}

inline Json spec_to_json(const DoubleDotSpec& s) {
    return Json{{"left_levels", s.left_levels}, {"right_levels", s.right_levels}, {"wire_a", s.wire.offset},
                {"wire_b", s.wire.slope},       {"length", s.length},             {"u", s.u},
                {"v", s.v},                     {"w", s.w}};
}

inline Json read_json_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw Error(ErrorCode::ConfigError, "cannot open config '" + path + "'");
    try {
        return Json::parse(in);
    } catch (const Json::parse_error& e) {
        throw Error(ErrorCode::ConfigError, "invalid JSON in '" + path + "': " + e.what());
    }
}

inline Observable observable_from_string(const std::string& s) {
    if (s == "transmission") return Observable::Transmission;
    if (s == "eigenvalues") return Observable::Eigenvalues;
    if (s == "rigidity") return Observable::Rigidity;
    if (s == "fixed_points") return Observable::FixedPoints;
    if (s == "branch_points") return Observable::BranchPoints;
    throw Error(ErrorCode::ConfigError, "unknown observable '" + s + "'");
}

inline std::string to_string(Observable o) {
    switch (o) {
        case Observable::Transmission: return "transmission";
        case Observable::Eigenvalues: return "eigenvalues";
        case Observable::Rigidity: return "rigidity";
        case Observable::FixedPoints: return "fixed_points";
        case Observable::BranchPoints: return "branch_points";
    }
    return "unknown";
}

inline Axis axis_from_json(const Json& j, const std::string& where, std::size_t default_points) {
    if (!j.is_object()) throw Error(ErrorCode::ConfigError, where + " must be an object");
    Axis a;
    a.param = detail::get_required<std::string>(j, "param", where);
    a.min = detail::get_required<double>(j, "min", where);
    a.max = detail::get_required<double>(j, "max", where);
    const auto points = detail::get_or<long long>(j, "points", static_cast<long long>(default_points), where);
    if (points < 1) throw Error(ErrorCode::ConfigError, where + ": points must be positive");
    a.points = static_cast<std::size_t>(points);
    return a;
}

inline Json axis_to_json(const Axis& a) { return Json{{"param", a.param}, {"min", a.min}, {"max", a.max}, {"points", a.points}}; }

/// {"name", "spec", "energy", "axis1", "axis2"?, "observables", "output": {"dir", "formats", "amplitudes"}, "threads"}
inline SweepConfig sweep_config_from_json(const Json& j) {
    if (!j.is_object()) throw Error(ErrorCode::ConfigError, "config must be a JSON object");
    const std::string where = "config";
    SweepConfig c;
    c.name = detail::get_or<std::string>(j, "name", "sweep", where);
    if (!j.contains("spec")) throw Error(ErrorCode::ConfigError, "config: missing key 'spec'");
    c.spec = spec_from_json(j.at("spec"));
    c.energy = detail::get_or<double>(j, "energy", 0.0, where);
    const bool two_d = j.contains("axis2") && !j.at("axis2").is_null();
    const std::size_t default_points = two_d ? kDefaultPoints2D : kDefaultPoints1D;
    if (!j.contains("axis1")) throw Error(ErrorCode::ConfigError, "config: missing key 'axis1'");
    c.axis1 = axis_from_json(j.at("axis1"), "axis1", default_points);
    if (two_d) c.axis2 = axis_from_json(j.at("axis2"), "axis2", default_points);
    for (const auto& o : detail::get_or<std::vector<std::string>>(j, "observables", {"transmission"}, where))
        c.observables.push_back(observable_from_string(o));
    if (j.contains("output")) {
        const Json& out = j.at("output");
        c.output_dir = detail::get_or<std::string>(out, "dir", c.output_dir, "output");
        const auto formats = detail::get_or<std::vector<std::string>>(out, "formats", {"csv", "json"}, "output");
        c.write_csv = c.write_json = false;
        for (const auto& f : formats) {
            if (f == "csv")
                c.write_csv = true;
            else if (f == "json")
                c.write_json = true;
            else
                throw Error(ErrorCode::ConfigError, "output: unknown format '" + f + "'");
        }
        c.write_amplitudes = detail::get_or<bool>(out, "amplitudes", false, "output");
    }
    const auto threads = detail::get_or<long long>(j, "threads", 0, where);
    if (threads < 0) throw Error(ErrorCode::ConfigError, "config: threads must be non-negative");
    c.threads = static_cast<unsigned>(threads);
    return c;
}

inline Json sweep_config_to_json(const SweepConfig& c) {
    Json obs = Json::array();
    for (Observable o : c.observables) obs.push_back(to_string(o));
    Json formats = Json::array();
    if (c.write_csv) formats.push_back("csv");
    if (c.write_json) formats.push_back("json");
    Json j{{"name", c.name},
           {"spec", spec_to_json(c.spec)},
           {"energy", c.energy},
           {"axis1", axis_to_json(c.axis1)},
           {"observables", obs},
           {"output", {{"dir", c.output_dir}, {"formats", formats}, {"amplitudes", c.write_amplitudes}}}};
    if (c.axis2) j["axis2"] = axis_to_json(*c.axis2);
    return j;
}

/// Branch-point job. Without "params" the closed-form conditions are evaluated.
struct EpConfig {
    DoubleDotSpec spec;
    std::optional<EpSearchOptions> search;
    std::string output_dir;
};

/// {"spec", "energy", "params": [{"name", "min", "max"}, ...], "seed"?: [x1, x2], "pair"?: [k, l], "grid"?, "output"?: {"dir"}}
inline EpConfig ep_config_from_json(const Json& j) {
    if (!j.is_object()) throw Error(ErrorCode::ConfigError, "config must be a JSON object");
    const std::string where = "config";
    EpConfig c;
    if (!j.contains("spec")) throw Error(ErrorCode::ConfigError, "config: missing key 'spec'");
    c.spec = spec_from_json(j.at("spec"));
    if (j.contains("output")) c.output_dir = detail::get_or<std::string>(j.at("output"), "dir", "", "output");
    if (!j.contains("params")) return c;
    const Json& params = j.at("params");
    if (!params.is_array() || params.size() != 2) throw Error(ErrorCode::ConfigError, "params must list exactly two parameters");
    EpSearchOptions opt;
    for (std::size_t i = 0; i < 2; ++i) {
        const Json& p = params.at(i);
        opt.params[i].name = detail::get_required<std::string>(p, "name", "params");
        opt.params[i].lo = detail::get_required<double>(p, "min", "params");
        opt.params[i].hi = detail::get_required<double>(p, "max", "params");
        if (!detail::is_search_param(opt.params[i].name))
            throw Error(ErrorCode::ConfigError, "params: unknown parameter '" + opt.params[i].name + "'");
        if (!(opt.params[i].lo <= opt.params[i].hi)) throw Error(ErrorCode::ConfigError, "params: min above max");
    }
    if (opt.params[0].name == opt.params[1].name) throw Error(ErrorCode::ConfigError, "params must differ");
    opt.energy = detail::get_or<double>(j, "energy", 0.0, where);
    if (j.contains("seed")) {
        const auto seed = detail::get_required<std::vector<double>>(j, "seed", where);
        if (seed.size() != 2) throw Error(ErrorCode::ConfigError, "seed must have two entries");
        opt.seed = std::array<double, 2>{seed[0], seed[1]};
    }
    if (j.contains("pair")) {
        const auto pair = detail::get_required<std::vector<std::size_t>>(j, "pair", where);
        if (pair.size() != 2 || pair[0] == pair[1]) throw Error(ErrorCode::ConfigError, "pair must name two distinct labels");
        opt.pair_hint = std::make_pair(pair[0], pair[1]);
    }
    const auto grid = detail::get_or<long long>(j, "grid", static_cast<long long>(opt.grid), where);
    if (grid < 2) throw Error(ErrorCode::ConfigError, "grid must be at least 2");
    opt.grid = static_cast<std::size_t>(grid);
    c.search = opt;
    return c;
}

struct FixedPointConfig {
    DoubleDotSpec spec;
    std::vector<std::size_t> labels;  // empty: all states
    std::size_t grid = kFixedPointGrid;
    std::string output_dir;
};

/// {"spec", "labels"?: [...], "grid"?, "output"?: {"dir"}}
inline FixedPointConfig fixed_point_config_from_json(const Json& j) {
    if (!j.is_object()) throw Error(ErrorCode::ConfigError, "config must be a JSON object");
    const std::string where = "config";
    FixedPointConfig c;
    if (!j.contains("spec")) throw Error(ErrorCode::ConfigError, "config: missing key 'spec'");
    c.spec = spec_from_json(j.at("spec"));
    c.labels = detail::get_or<std::vector<std::size_t>>(j, "labels", {}, where);
    for (std::size_t l : c.labels)
        if (l >= c.spec.dimension()) throw Error(ErrorCode::ConfigError, "labels: state index out of range");
    const auto grid = detail::get_or<long long>(j, "grid", static_cast<long long>(c.grid), where);
    if (grid < 3) throw Error(ErrorCode::ConfigError, "grid must be at least 3");
    c.grid = static_cast<std::size_t>(grid);
    if (j.contains("output")) c.output_dir = detail::get_or<std::string>(j.at("output"), "dir", "", "output");
    return c;
}

}  // namespace dqd

#endif
