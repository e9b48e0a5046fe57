#ifndef DQD_EXPORT_HPP
#define DQD_EXPORT_HPP

// File output for sweeps and figure reproduction. Numbers are written with 12
// significant digits; the manifest timestamp is the only run-dependent field.
//
// Files for a sweep named N:
//   N_T.csv              axis1,[axis2,]T
//   N_t.json             [{axis1, [axis2,] E, re_t, im_t}]  (amplitudes)
//   N_eigenvalues.json   trajectories, one series per label
//   N_eigenvalues.csv    axis2?, param, label, re, im, rigidity, flag
//   N_fixed_points.json  fixed-point solutions per cell
//   N_branch_points.json branch points
//   N_errors.json        per-cell failures (only when there are any)

#include <chrono>
#include <cmath>
#include <cstdio>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "dqd/branchpoints.hpp"
#include "dqd/config.hpp"
#include "dqd/errors.hpp"
#include "dqd/presets.hpp"
#include "dqd/sweep.hpp"

namespace dqd {

inline constexpr const char* kVersion = "dqd 1.0.0";

/// "%.12g"; nan for missing values.
inline std::string format_number(double x) {
    if (std::isnan(x)) return "nan";
    if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.12g", x);
    return buf;
}

/// The double nearest to the 12-digit rendering, so JSON output carries at most 12 digits.
inline Json json_number(double x) {
    if (!std::isfinite(x)) return nullptr;
    return std::stod(format_number(x));
}

struct ExportedFile {
    std::string path;
    std::string kind;
};

namespace detail {

inline void write_text(const std::filesystem::path& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(ErrorCode::IoFailure, "cannot write '" + path.string() + "'");
    out << text;
    out.flush();
    if (!out) throw Error(ErrorCode::IoFailure, "write failed for '" + path.string() + "'");
}

inline void write_json(const std::filesystem::path& path, const Json& j) { write_text(path, j.dump(2) + "\n"); }

inline void ensure_dir(const std::filesystem::path& dir) {
    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
    if (ec) throw Error(ErrorCode::IoFailure, "cannot create '" + dir.string() + "': " + ec.message());
}

inline std::string utc_timestamp() {
    const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    std::tm tm{};
    gmtime_r(&now, &tm);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

inline std::string energy_header(const SweepConfig& c) {
    return c.axis1.param == "E" || (c.axis2 && c.axis2->param == "E") ? "" : "E";
}

}  // namespace detail

inline Json branch_point_to_json(const BranchPoint& bp) {
    Json params = Json::object();
    for (const auto& [k, v] : bp.critical_params) params[k] = json_number(v);
    return Json{{"kind", std::string(to_string(bp.kind))},
                {"params", params},
                {"E_c", json_number(bp.energy)},
                {"residual", json_number(bp.residual)},
                {"pair", {bp.coalesced_pair.first, bp.coalesced_pair.second}},
                {"fixed_point_coincides", bp.fixed_point_coincides},
                {"pair_rigidity", json_number(bp.pair_rigidity)},
                {"status", bp.status == SearchStatus::Converged ? "converged" : "no_convergence"}};
}

inline Json resonance_to_json(const ResonanceState& s) {
    return Json{{"label", s.index},
                {"E_k", json_number(s.position)},
                {"Gamma_k", json_number(s.width_signed)},
                {"decay_width", json_number(s.width_decay)},
                {"residual", json_number(s.residual)},
                {"at_branch_point", s.at_branch_point}};
}

inline Json cell_error_to_json(const CellError& e) {
    return Json{{"i", e.i}, {"j", e.j}, {"observable", e.observable}, {"code", std::string(to_string(e.code))}, {"message", e.message}};
}

/// Trajectory JSON: {"axis", "fixed", "series": [{"label", "points": [{param, re, im, rigidity, flag}]}]}.
inline Json trajectories_to_json(const SweepResult& r, std::size_t row) {
    const auto& tr = r.tracks.at(row);
    const auto& t = tr.trajectories;
    Json series = Json::array();
    for (std::size_t l = 0; l < t.labels(); ++l) {
        Json pts = Json::array();
        std::size_t step = 0;
        for (std::size_t i = 0; i < r.n1(); ++i) {
            Json p{{"param", json_number(r.axis1_values[i])}};
            if (step < tr.steps.size() && tr.steps[step] == i) {
                const auto z = t.values[l][step];
                p["re"] = json_number(z.real());
                p["im"] = json_number(z.imag());
                p["rigidity"] = json_number(t.rigidity[l][step]);
                p["flag"] = t.ambiguous[l][step] ? "ambiguous" : (t.rigidity[l][step] < kDefectiveThreshold ? "defective" : "ok");
                ++step;
            } else {
                p["re"] = nullptr;
                p["im"] = nullptr;
                p["rigidity"] = nullptr;
                p["flag"] = "error";
            }
            pts.push_back(std::move(p));
        }
        series.push_back(Json{{"label", l}, {"points", std::move(pts)}});
    }
    Json fixed = Json::object();
    if (r.config.axis2) fixed[r.config.axis2->param] = json_number(r.axis2_values[row]);
    if (detail::energy_header(r.config) == "E") fixed["E"] = json_number(r.config.energy);
    return Json{{"axis", r.config.axis1.param}, {"fixed", fixed}, {"series", std::move(series)}};
}

/// Writes the data files of a sweep into `dir`. Returns the list of files written.
inline std::vector<ExportedFile> export_result(const SweepResult& r, const std::filesystem::path& dir) {
    detail::ensure_dir(dir);
    const SweepConfig& c = r.config;
    std::vector<ExportedFile> files;
    auto emit_text = [&](const std::string& name, const std::string& kind, const std::string& text) {
        detail::write_text(dir / name, text);
        files.push_back({name, kind});
    };
    auto emit_json = [&](const std::string& name, const std::string& kind, const Json& j) {
        detail::write_json(dir / name, j);
        files.push_back({name, kind});
    };
    const bool two_d = c.axis2.has_value();

    if (!r.transmission.empty()) {
        if (c.write_csv) {
            std::ostringstream os;
            os << c.axis1.param;
            if (two_d) os << ',' << c.axis2->param;
            os << ",T\n";
            for (std::size_t i = 0; i < r.n1(); ++i)
                for (std::size_t j = 0; j < r.n2(); ++j) {
                    os << format_number(r.axis1_values[i]);
                    if (two_d) os << ',' << format_number(r.axis2_values[j]);
                    os << ',' << format_number(r.transmission[r.cell(i, j)]) << '\n';
                }
            emit_text(c.name + "_T.csv", "transmission_csv", os.str());
        }
        if (c.write_amplitudes) {
            Json rows = Json::array();
            for (std::size_t i = 0; i < r.n1(); ++i)
                for (std::size_t j = 0; j < r.n2(); ++j) {
                    const auto [spec, e] = cell_parameters(c, r.axis1_values[i], two_d ? std::optional<double>(r.axis2_values[j]) : std::nullopt);
                    (void)spec;
                    const auto t = r.amplitude[r.cell(i, j)];
                    Json row{{c.axis1.param, json_number(r.axis1_values[i])}};
                    if (two_d) row[c.axis2->param] = json_number(r.axis2_values[j]);
                    row["E"] = json_number(e);
                    row["re_t"] = json_number(t.real());
                    row["im_t"] = json_number(t.imag());
                    rows.push_back(std::move(row));
                }
            emit_json(c.name + "_t.json", "amplitude_json", rows);
        }
    }

    if (!r.tracks.empty()) {
        if (c.write_json) {
            Json out;
            if (two_d) {
                out = Json::array();
                for (std::size_t row = 0; row < r.tracks.size(); ++row) out.push_back(trajectories_to_json(r, row));
            } else {
                out = trajectories_to_json(r, 0);
            }
            emit_json(c.name + "_eigenvalues.json", "trajectories_json", out);
        }
        if (c.write_csv) {
            std::ostringstream os;
            if (two_d) os << c.axis2->param << ',';
            os << c.axis1.param << ",label,re,im,rigidity,flag\n";
            for (std::size_t row = 0; row < r.tracks.size(); ++row) {
                const Json tj = trajectories_to_json(r, row);
                for (const auto& s : tj["series"]) {
                    for (const auto& p : s["points"]) {
                        if (two_d) os << format_number(r.axis2_values[row]) << ',';
                        auto num = [](const Json& v) { return v.is_null() ? std::string("nan") : format_number(v.get<double>()); };
                        os << num(p["param"]) << ',' << s["label"].get<std::size_t>() << ',' << num(p["re"]) << ',' << num(p["im"])
                           << ',' << num(p["rigidity"]) << ',' << p["flag"].get<std::string>() << '\n';
                    }
                }
            }
            emit_text(c.name + "_eigenvalues.csv", "trajectories_csv", os.str());
        }
    }

    if (c.wants(Observable::FixedPoints)) {
        Json rows = Json::array();
        for (const auto& fp : r.fixed_points) {
            Json row = resonance_to_json(fp.state);
            row[c.axis1.param] = json_number(r.axis1_values[fp.i]);
            if (two_d) row[c.axis2->param] = json_number(r.axis2_values[fp.j]);
            rows.push_back(std::move(row));
        }
        emit_json(c.name + "_fixed_points.json", "fixed_points_json", rows);
    }

    if (c.wants(Observable::BranchPoints)) {
        Json rows = Json::array();
        for (const auto& bp : r.branch_points) rows.push_back(branch_point_to_json(bp));
        emit_json(c.name + "_branch_points.json", "branch_points_json", rows);
    }

    if (!r.errors.empty()) {
        Json rows = Json::array();
        for (const auto& e : r.errors) rows.push_back(cell_error_to_json(e));
        emit_json(c.name + "_errors.json", "errors_json", rows);
    }
    return files;
}

inline Json panel_manifest(const SweepResult& r, const std::vector<ExportedFile>& files) {
    Json fl = Json::array();
    for (const auto& f : files) fl.push_back(Json{{"path", f.path}, {"kind", f.kind}});
    Json config = sweep_config_to_json(r.config);
    config.erase("output");
    return Json{{"name", r.config.name},
                {"config", config},
                {"cells", r.n1() * r.n2()},
                {"failures", r.failure_count()},
                {"failed_cells", r.failed_cells},
                {"files", fl}};
}

inline Json make_manifest(const std::string& title, const std::string& caption, const Json& panels) {
    std::size_t failures = 0;
    for (const auto& p : panels) failures += p["failures"].get<std::size_t>();
    Json m{{"title", title}, {"version", kVersion}, {"created", detail::utc_timestamp()}, {"failures", failures}, {"panels", panels}};
    if (!caption.empty()) m["caption"] = caption;
    return m;
}

struct ExportSummary {
    std::vector<ExportedFile> files;  // data files plus the manifest
    std::size_t cells = 0;
    std::size_t failures = 0;      // recorded errors
    std::size_t failed_cells = 0;  // cells with at least one error
};

/// Runs and exports one sweep; writes <dir>/manifest.json.
inline ExportSummary run_and_export(const SweepConfig& config, const std::filesystem::path& dir) {
    const SweepResult r = run_sweep(config);
    ExportSummary s;
    s.files = export_result(r, dir);
    s.cells = r.n1() * r.n2();
    s.failures = r.failure_count();
    s.failed_cells = r.failed_cells;
    const Json manifest = make_manifest(config.name, "", Json::array({panel_manifest(r, s.files)}));
    detail::write_json(dir / "manifest.json", manifest);
    s.files.push_back({"manifest.json", "manifest"});
    return s;
}

/// Regenerates the data of a figure into `dir`, with a manifest listing the
/// parameters of every panel and the figure caption.
inline ExportSummary reproduce_figure(const std::string& id, const std::filesystem::path& dir, unsigned threads = 0) {
    FigurePreset preset = figure_preset(id);
    detail::ensure_dir(dir);
    ExportSummary s;
    Json panels = Json::array();
    for (SweepConfig& c : preset.panels) {
        c.threads = threads;
        c.output_dir = dir.string();
        const SweepResult r = run_sweep(c);
        const auto files = export_result(r, dir);
        s.files.insert(s.files.end(), files.begin(), files.end());
        s.cells += r.n1() * r.n2();
        s.failures += r.failure_count();
        s.failed_cells += r.failed_cells;
        panels.push_back(panel_manifest(r, files));
    }
    detail::write_json(dir / "manifest.json", make_manifest(id, preset.caption, panels));
    s.files.push_back({"manifest.json", "manifest"});
    return s;
}

}  // namespace dqd

#endif
