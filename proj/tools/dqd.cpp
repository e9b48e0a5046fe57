// dqd: parameter sweeps, figure data, branch points and fixed points.
//
//   dqd sweep --config f.json [--out dir] [--threads n] [--max-failure-fraction x]
//   dqd figure <id> --out <dir>
//   dqd find-ep --config f.json
//   dqd fixed-points --config f.json
//
// Exit codes: 0 success, 2 configuration error, 3 too many failed cells, 1 other failures.

#include <CLI11.hpp>

#include <cstdio>
#include <filesystem>
#include <iostream>
#include <string>

#include "dqd/dqd.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitFailure = 1;
constexpr int kExitConfig = 2;
constexpr int kExitCellFailures = 3;

int failure_exit(const dqd::ExportSummary& s, double max_fraction) {
    std::cerr << "cells: " << s.cells << ", failed cells: " << s.failed_cells << ", errors: " << s.failures << "\n";
    if (s.cells == 0) return s.failures > 0 && max_fraction < 1.0 ? kExitCellFailures : kExitOk;
    const double fraction = static_cast<double>(s.failed_cells) / static_cast<double>(s.cells);
    if (s.failed_cells == 0 && s.failures > 0 && max_fraction < 1.0) return kExitCellFailures;
    return fraction > max_fraction ? kExitCellFailures : kExitOk;
}

void emit(const dqd::Json& j, const std::string& out_dir, const std::string& file) {
    std::cout << j.dump(2) << "\n";
    if (out_dir.empty()) return;
    std::filesystem::create_directories(out_dir);
    dqd::detail::write_json(std::filesystem::path(out_dir) / file, j);
}

int cmd_sweep(const std::string& config_path, const std::string& out, unsigned threads, double max_fraction) {
    dqd::SweepConfig c = dqd::sweep_config_from_json(dqd::read_json_file(config_path));
    if (!out.empty()) c.output_dir = out;
    if (threads) c.threads = threads;
    dqd::validate(c);
    const auto summary = dqd::run_and_export(c, c.output_dir);
    for (const auto& f : summary.files) std::cout << (std::filesystem::path(c.output_dir) / f.path).string() << "\n";
    return failure_exit(summary, max_fraction);
}

int cmd_figure(const std::string& id, const std::string& out, unsigned threads, double max_fraction) {
    const auto summary = dqd::reproduce_figure(id, out, threads);
    for (const auto& f : summary.files) std::cout << (std::filesystem::path(out) / f.path).string() << "\n";
    return failure_exit(summary, max_fraction);
}

int cmd_find_ep(const std::string& config_path) {
    const dqd::EpConfig c = dqd::ep_config_from_json(dqd::read_json_file(config_path));
    dqd::Json rows = dqd::Json::array();
    if (c.search) {
        rows.push_back(dqd::branch_point_to_json(dqd::find_ep_numeric(c.spec, *c.search)));
    } else {
        if (!c.spec.is_symmetric_three_state())
            throw dqd::Error(dqd::ErrorCode::ConfigError, "closed-form search needs one identical level per dot and v == w; give \"params\"");
        auto attempt = [&](auto&& f) {
            try {
                f();
            } catch (const dqd::Error& e) {
                std::cerr << e.what() << "\n";
            }
        };
        attempt([&] { rows.push_back(dqd::branch_point_to_json(dqd::critical_coupling(c.spec))); });
        attempt([&] { rows.push_back(dqd::branch_point_to_json(dqd::critical_u_double_coincidence(c.spec))); });
        attempt([&] {
            for (const auto& bp : dqd::critical_lengths(c.spec)) rows.push_back(dqd::branch_point_to_json(bp));
        });
    }
    emit(rows, c.output_dir, "branch_points.json");
    return kExitOk;
}

int cmd_fixed_points(const std::string& config_path) {
    const dqd::FixedPointConfig c = dqd::fixed_point_config_from_json(dqd::read_json_file(config_path));
    std::vector<std::size_t> labels = c.labels;
    if (labels.empty())
        for (std::size_t l = 0; l < c.spec.dimension(); ++l) labels.push_back(l);
    dqd::Json rows = dqd::Json::array();
    for (std::size_t l : labels)
        for (const auto& st : dqd::solve_fixed_points(c.spec, l, c.grid)) rows.push_back(dqd::resonance_to_json(st));
    emit(rows, c.output_dir, "fixed_points.json");
    return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Transmission and branch points of double quantum dots"};
    app.require_subcommand(1);

    std::string config, out, figure_id;
    unsigned threads = 0;
    double max_fraction = 0.0;

    auto* sweep = app.add_subcommand("sweep", "run a parameter sweep from a JSON config");
    sweep->add_option("--config", config, "sweep config")->required();
    sweep->add_option("--out", out, "output directory (overrides the config)");
    sweep->add_option("--threads", threads, "worker threads, 0 for all cores");
    sweep->add_option("--max-failure-fraction", max_fraction, "tolerated fraction of failed cells")->check(CLI::Range(0.0, 1.0));

    auto* figure = app.add_subcommand("figure", "write the data of a figure preset");
    figure->add_option("id", figure_id, "fig1 ... fig14")->required();
    figure->add_option("--out", out, "output directory")->required();
    figure->add_option("--threads", threads, "worker threads, 0 for all cores");
    figure->add_option("--max-failure-fraction", max_fraction, "tolerated fraction of failed cells")->check(CLI::Range(0.0, 1.0));

    auto* find_ep = app.add_subcommand("find-ep", "locate branch points");
    find_ep->add_option("--config", config, "branch point config")->required();

    auto* fixed = app.add_subcommand("fixed-points", "solve the fixed-point equations");
    fixed->add_option("--config", config, "fixed point config")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? kExitOk : kExitConfig;
    }

    try {
        if (*sweep) return cmd_sweep(config, out, threads, max_fraction);
        if (*figure) return cmd_figure(figure_id, out, threads, max_fraction);
        if (*find_ep) return cmd_find_ep(config);
        if (*fixed) return cmd_fixed_points(config);
    } catch (const dqd::Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        const auto code = e.code();
        if (code == dqd::ErrorCode::ConfigError || code == dqd::ErrorCode::UnknownFigure || code == dqd::ErrorCode::InvalidSpec)
            return kExitConfig;
        return kExitFailure;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitFailure;
    }
    return kExitFailure;
}
