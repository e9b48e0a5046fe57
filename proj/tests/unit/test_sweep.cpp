#include <catch_amalgamated.hpp>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "dqd/dqd.hpp"
#include "oracles.hpp"

using Catch::Approx;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
    const fs::path p = fs::temp_directory_path() / ("dqd_test_" + name);
    fs::remove_all(p);
    return p;
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

std::vector<std::string> lines(const std::string& text) {
    std::vector<std::string> out;
    std::istringstream in(text);
    for (std::string l; std::getline(in, l);) out.push_back(l);
    return out;
}

dqd::SweepConfig base_config() {
    dqd::SweepConfig c;
    c.name = "t";
    c.spec = oracle::fig1(0.5);
    c.energy = 0.3;
    c.axis1 = {"v", 0.2, 1.2, 5};
    c.observables = {dqd::Observable::Transmission};
    return c;
}

}  // namespace

TEST_CASE("single-cell sweep equals direct calls", "[sweep]") {
    auto c = base_config();
    c.axis1 = {"v", 0.7, 0.7, 1};
    c.observables = {dqd::Observable::Transmission, dqd::Observable::Eigenvalues};
    const auto r = dqd::run_sweep(c);
    REQUIRE(r.n1() == 1);
    REQUIRE(r.n2() == 1);
    const auto s = oracle::fig1(0.7);
    CHECK(r.transmission[0] == dqd::transmission(s, 0.3).probability);
    const auto es = dqd::eigendecompose(dqd::build_effective_hamiltonian(s, dqd::channel_from_energy(0.3)));
    REQUIRE(r.eigensets[0].has_value());
    for (Eigen::Index k = 0; k < 3; ++k) CHECK(r.eigensets[0]->eigenvalues(k) == es.eigenvalues(k));
    CHECK(r.failure_count() == 0);
}

TEST_CASE("coupling axis drags w when v == w", "[sweep]") {
    auto c = base_config();
    const auto [s, e] = dqd::cell_parameters(c, 0.9, std::nullopt);
    CHECK(s.v == 0.9);
    CHECK(s.w == 0.9);
    CHECK(e == 0.3);
    c.axis2 = dqd::Axis{"w", 0.1, 1.0, 3};
    const auto [s2, e2] = dqd::cell_parameters(c, 0.9, 0.1);
    CHECK(s2.v == 0.9);
    CHECK(s2.w == 0.1);
}

TEST_CASE("energy axes are clipped to the open band", "[sweep]") {
    auto c = base_config();
    c.axis1 = {"E", -2.0, 2.0, 11};
    const auto r = dqd::run_sweep(c);
    CHECK(r.axis1_values.front() == Approx(-2.0 + 1e-6).epsilon(1e-15));
    CHECK(r.axis1_values.back() == Approx(2.0 - 1e-6).epsilon(1e-15));
    CHECK(r.failure_count() == 0);
}

TEST_CASE("2x2 sweep writes a header and four rows", "[sweep]") {
    auto c = base_config();
    c.axis1 = {"v", 0.2, 0.8, 2};
    c.axis2 = dqd::Axis{"E", -1.0, 1.0, 2};
    const auto dir = scratch("grid");
    const auto summary = dqd::run_and_export(c, dir);
    CHECK(summary.cells == 4);
    const auto rows = lines(slurp(dir / "t_T.csv"));
    REQUIRE(rows.size() == 5);
    CHECK(rows[0] == "v,E,T");
    CHECK(rows[1].rfind("0.2,-1,", 0) == 0);
    CHECK(rows[4].rfind("0.8,1,", 0) == 0);
    const double t = std::stod(rows[2].substr(rows[2].rfind(',') + 1));
    CHECK(t == Approx(dqd::transmission(oracle::fig1(0.2), 1.0).probability).epsilon(1e-11));
    CHECK(fs::exists(dir / "manifest.json"));
}

TEST_CASE("sweeps are deterministic across thread counts", "[sweep]") {
    auto c = base_config();
    c.axis1 = {"v", 0.0, 1.4, 40};
    c.axis2 = dqd::Axis{"E", -1.9, 1.9, 30};
    c.observables = {dqd::Observable::Transmission, dqd::Observable::Eigenvalues};
    c.write_amplitudes = true;
    c.threads = 1;
    const auto a = scratch("det_a"), b = scratch("det_b");
    dqd::run_and_export(c, a);
    c.threads = 4;
    dqd::run_and_export(c, b);
    for (const char* f : {"t_T.csv", "t_t.json", "t_eigenvalues.json", "t_eigenvalues.csv"}) {
        INFO(f);
        CHECK(slurp(a / f) == slurp(b / f));
    }
}

TEST_CASE("failing cells are recorded and other observables survive", "[sweep]") {
    auto c = base_config();
    c.energy = 2.5;
    c.observables = {dqd::Observable::Transmission, dqd::Observable::Eigenvalues, dqd::Observable::FixedPoints};
    const auto r = dqd::run_sweep(c);
    CHECK(r.failure_count() == 10);
    for (const auto& e : r.errors) {
        CHECK(e.code == dqd::ErrorCode::EnergyOutOfBand);
        CHECK(e.observable != "fixed_points");
    }
    for (double t : r.transmission) CHECK(std::isnan(t));
    CHECK(r.tracks.at(0).steps.empty());
    CHECK(r.fixed_points.size() >= 5);

    const auto dir = scratch("errors");
    const auto summary = dqd::run_and_export(c, dir);
    CHECK(summary.failures == 10);
    CHECK(summary.cells == 5);
    CHECK(summary.failed_cells == 5);
    CHECK(r.failed_cells == 5);
    const auto manifest = dqd::read_json_file((dir / "manifest.json").string());
    CHECK(manifest["failures"].get<std::size_t>() == 10);
    CHECK(dqd::read_json_file((dir / "t_errors.json").string()).size() == 10);
    const auto rows = lines(slurp(dir / "t_T.csv"));
    REQUIRE(rows.size() == 6);
    CHECK(rows[0] == "v,T");
    CHECK(rows[5] == "1.2,nan");
    const auto traj = dqd::read_json_file((dir / "t_eigenvalues.json").string());
    CHECK(traj["series"].empty());
}

TEST_CASE("configuration errors", "[sweep]") {
    auto bad_param = base_config();
    bad_param.axis1.param = "x";
    CHECK_THROWS_MATCHES(dqd::run_sweep(bad_param), dqd::Error,
                         Catch::Matchers::Predicate<dqd::Error>([](const dqd::Error& e) { return e.code() == dqd::ErrorCode::ConfigError; }));
    auto inverted = base_config();
    inverted.axis1 = {"v", 1.0, 0.5, 10};
    CHECK_THROWS_AS(dqd::run_sweep(inverted), dqd::Error);
    auto same = base_config();
    same.axis2 = dqd::Axis{"v", 0.0, 1.0, 3};
    CHECK_THROWS_AS(dqd::run_sweep(same), dqd::Error);
    auto negative = base_config();
    negative.axis1 = {"L", -1.0, 1.0, 3};
    CHECK_THROWS_AS(dqd::run_sweep(negative), dqd::Error);

    CHECK_THROWS_AS(dqd::sweep_config_from_json(dqd::Json::parse(R"({"spec": "fig1"})")), dqd::Error);
    CHECK_THROWS_AS(dqd::sweep_config_from_json(dqd::Json::parse(R"({"spec": "fig99", "axis1": {"param": "v", "min": 0, "max": 1}})")),
                    dqd::Error);
    CHECK_THROWS_AS(dqd::sweep_config_from_json(
                        dqd::Json::parse(R"({"spec": "fig1", "axis1": {"param": "v", "min": 0, "max": 1}, "observables": ["noise"]})")),
                    dqd::Error);
    CHECK_THROWS_AS(dqd::read_json_file("/nonexistent/config.json"), dqd::Error);
}

TEST_CASE("config defaults", "[sweep]") {
    const auto one = dqd::sweep_config_from_json(dqd::Json::parse(R"({"spec": "fig1", "axis1": {"param": "v", "min": 0, "max": 1}})"));
    CHECK(one.axis1.points == 200);
    CHECK(one.observables == std::vector<dqd::Observable>{dqd::Observable::Transmission});
    const auto two = dqd::sweep_config_from_json(dqd::Json::parse(
        R"({"spec": "fig1", "axis1": {"param": "v", "min": 0, "max": 1}, "axis2": {"param": "E", "min": -1, "max": 1}})"));
    CHECK(two.axis1.points == 150);
    CHECK(two.axis2->points == 150);
    const auto back = dqd::sweep_config_from_json(dqd::sweep_config_to_json(two));
    CHECK(back.spec == two.spec);
    CHECK(back.axis2->param == "E");
}

TEST_CASE("trajectory JSON round-trips at 12 digits", "[sweep]") {
    auto c = base_config();
    c.axis1 = {"v", 0.0, 1.4, 25};
    c.energy = 0.9847;
    c.observables = {dqd::Observable::Eigenvalues};
    const auto r = dqd::run_sweep(c);
    const auto j = dqd::Json::parse(dqd::trajectories_to_json(r, 0).dump());
    REQUIRE(j["series"].size() == 3);
    for (std::size_t l = 0; l < 3; ++l)
        for (std::size_t i = 0; i < r.n1(); ++i) {
            const auto& p = j["series"][l]["points"][i];
            const auto z = r.tracks[0].trajectories.values[l][i];
            CHECK(p["param"].get<double>() == Approx(r.axis1_values[i]).margin(1e-12));
            CHECK(p["re"].get<double>() == Approx(z.real()).epsilon(1e-11).margin(1e-12));
            CHECK(p["im"].get<double>() == Approx(z.imag()).epsilon(1e-11).margin(1e-12));
            CHECK(p["flag"].get<std::string>() != "error");
        }
    CHECK(j["fixed"]["E"].get<double>() == 0.9847);
}

TEST_CASE("number formatting", "[sweep]") {
    CHECK(dqd::format_number(0.1) == "0.1");
    CHECK(dqd::format_number(1.0 / 3.0) == "0.333333333333");
    CHECK(dqd::format_number(std::nan("")) == "nan");
    CHECK(dqd::json_number(std::nan("")).is_null());
    CHECK(dqd::json_number(2.0 / 3.0).get<double>() == 0.666666666667);
}

TEST_CASE("no observables gives a manifest only", "[sweep]") {
    auto c = base_config();
    c.observables.clear();
    const auto dir = scratch("empty");
    const auto summary = dqd::run_and_export(c, dir);
    REQUIRE(summary.files.size() == 1);
    CHECK(summary.files[0].path == "manifest.json");
    std::size_t n = 0;
    for ([[maybe_unused]] const auto& e : fs::directory_iterator(dir)) ++n;
    CHECK(n == 1);
}

TEST_CASE("fixed points and branch points through a sweep", "[sweep]") {
    auto c = base_config();
    c.axis1 = {"v", 0.5, 1.0, 3};
    c.observables = {dqd::Observable::FixedPoints, dqd::Observable::BranchPoints};
    const auto r = dqd::run_sweep(c);
    CHECK(r.failure_count() == 0);
    bool saw_decoupled = false;
    for (const auto& fp : r.fixed_points)
        if (fp.state.index == 1) {
            saw_decoupled = true;
            const double v = r.axis1_values[fp.i];
            CHECK(fp.state.position == Approx(1.0 / (1.0 - v * v / 2.0)).epsilon(1e-10));
        }
    CHECK(saw_decoupled);
    REQUIRE_FALSE(r.branch_points.empty());
    CHECK(r.branch_points[0].param("v") == Approx(std::pow(0.66, 0.25)).epsilon(1e-12));
}

TEST_CASE("figure presets", "[sweep]") {
    CHECK(dqd::figure_ids().size() == 14);
    for (const auto& id : dqd::figure_ids()) {
        const auto p = dqd::figure_preset(id);
        CHECK_FALSE(p.panels.empty());
        CHECK_FALSE(p.caption.empty());
        for (const auto& c : p.panels) CHECK_NOTHROW(dqd::validate(c));
    }
    const auto dir = scratch("fig3");
    const auto summary = dqd::reproduce_figure("fig3", dir, 2);
    CHECK(summary.failures == 0);
    const auto m = dqd::read_json_file((dir / "manifest.json").string());
    CHECK(m["title"] == "fig3");
    CHECK(m.contains("caption"));
    CHECK(m["version"] == dqd::kVersion);
    CHECK(m["panels"].size() >= 1);
    for (const auto& f : summary.files) CHECK(fs::exists(dir / f.path));
}
