/**
 * @file test_experiment.cpp
 * @brief Config parsing, validation, presets, hashing, and end-to-end sweep
 *        runs with caching and deterministic outputs.
 */
#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "ionsim/dense_solver.hpp"
#include "ionsim/experiment.hpp"
#include "ionsim/spin_model.hpp"

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <unistd.h>

using namespace ionsim;
using nlohmann::json;
namespace fs = std::filesystem;

namespace {

json small_config_json() {
    return json{
        {"model",
         {{"kind", "ising"},
          {"n", 8},
          {"variants", json::array({{{"label", "pl"}, {"source", "power_law"}}})},
          {"field_grid", {0.5, 1.0, 2.0}}}},
        {"solver", {{"method", "dense"}}},
        {"observables",
         {{"quantities", {"magnetization", "profile", "correlation", "entropy",
                          "neel", "fluct_x", "couplings"}}}},
        {"seed", 42},
    };
}

struct TempDir {
    fs::path path;
    explicit TempDir(const std::string& tag) {
        path = fs::temp_directory_path() /
               ("ionsim_test_" + tag + "_" + std::to_string(::getpid()));
        fs::remove_all(path);
        fs::create_directories(path);
    }
    ~TempDir() { fs::remove_all(path); }
};

std::string slurp(const fs::path& p) {
    std::ifstream in(p);
    REQUIRE(bool(in));
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

bool has_error_containing(const ValidationReport& r, const std::string& needle) {
    for (const std::string& e : r.errors())
        if (e.find(needle) != std::string::npos) return true;
    return false;
}

} // namespace

TEST_CASE("config json round trip preserves the sweep") {
    ExperimentConfig cfg = config_from_json(small_config_json());
    CHECK(cfg.model.kind == "ising");
    CHECK(cfg.model.n == 8);
    REQUIRE(cfg.model.variants.size() == 1);
    CHECK(cfg.model.variants[0].source == "power_law");
    CHECK(cfg.model.field_grid == std::vector<double>{0.5, 1.0, 2.0});
    CHECK(cfg.solver.method == "dense");
    CHECK(cfg.seed == 42);

    // Echo -> parse -> echo is a fixed point.
    json echo = config_to_json(cfg);
    ExperimentConfig cfg2 = config_from_json(echo);
    CHECK(config_to_json(cfg2) == echo);
    CHECK(config_hash(cfg2) == config_hash(cfg));
}

TEST_CASE("field_range expands inclusively and exclusively of overshoot") {
    json j = small_config_json();
    j["model"].erase("field_grid");
    j["model"]["field_range"] = {{"from", 0.5}, {"to", 1.0}, {"step", 0.1}};
    ExperimentConfig cfg = config_from_json(j);
    REQUIRE(cfg.model.field_grid.size() == 6);
    CHECK(cfg.model.field_grid.front() == doctest::Approx(0.5));
    CHECK(cfg.model.field_grid.back() == doctest::Approx(1.0));

    // Range and explicit grid are canonically identical.
    json j2 = small_config_json();
    j2["model"]["field_grid"] = cfg.model.field_grid;
    CHECK(config_hash(config_from_json(j2)) == config_hash(cfg));

    j["model"]["field_range"] = {{"from", 1.0}, {"to", 0.5}, {"step", 0.1}};
    CHECK_THROWS_AS(config_from_json(j), std::invalid_argument);
    j["model"]["field_range"] = {{"from", 0.5}, {"to", 1.0}, {"step", -0.1}};
    CHECK_THROWS_AS(config_from_json(j), std::invalid_argument);
}

TEST_CASE("unknown keys are rejected everywhere") {
    json j = small_config_json();
    j["extra"] = 1;
    CHECK_THROWS_WITH_AS(config_from_json(j), doctest::Contains("unknown key 'extra'"),
                         std::invalid_argument);

    j = small_config_json();
    j["model"]["typo"] = 1;
    CHECK_THROWS_AS(config_from_json(j), std::invalid_argument);

    j = small_config_json();
    j["model"]["variants"][0]["colour"] = "red";
    CHECK_THROWS_AS(config_from_json(j), std::invalid_argument);

    j = small_config_json();
    j["solver"]["m"] = 4; // the bond option is called max_bond
    CHECK_THROWS_AS(config_from_json(j), std::invalid_argument);

    // Grid and range together are ambiguous.
    j = small_config_json();
    j["model"]["field_range"] = {{"from", 0.1}, {"to", 0.2}, {"step", 0.1}};
    CHECK_THROWS_AS(config_from_json(j), std::invalid_argument);
}

TEST_CASE("validation flags the documented error and warning cases") {
    ExperimentConfig cfg = config_from_json(small_config_json());
    CHECK(validate_config(cfg).ok());

    SUBCASE("empty field grid is a config error") {
        cfg.model.field_grid.clear();
        ValidationReport r = validate_config(cfg);
        CHECK_FALSE(r.ok());
        CHECK(has_error_containing(r, "field grid is empty"));
    }
    SUBCASE("small bond dimension warns but stays valid") {
        cfg.solver.method = "dmrg";
        cfg.solver.max_bond = 4;
        ValidationReport r = validate_config(cfg);
        CHECK(r.ok());
        REQUIRE(r.warnings().size() >= 1);
        CHECK(r.warnings()[0] == "bond dimension below validated range");
    }
    SUBCASE("unknown quantity names the valid set") {
        cfg.observables.quantities.push_back("entanglement");
        ValidationReport r = validate_config(cfg);
        CHECK(has_error_containing(r, "unknown quantity 'entanglement'"));
        CHECK(has_error_containing(r, "magnetization"));
    }
    SUBCASE("spinwave requires an Ising power-law model") {
        cfg.observables.quantities = {"spinwave"};
        CHECK(validate_config(cfg).ok());
        cfg.model.kind = "xy";
        CHECK_FALSE(validate_config(cfg).ok());
    }
    SUBCASE("xy grids must be non-negative") {
        cfg.model.kind = "xy";
        cfg.model.field_grid = {0.5, -0.1};
        CHECK_FALSE(validate_config(cfg).ok());
    }
    SUBCASE("dense solver is capped at 16 ions") {
        cfg.model.n = 18;
        CHECK_FALSE(validate_config(cfg).ok());
        cfg.solver.method = "dmrg";
        CHECK(validate_config(cfg).ok());
    }
    SUBCASE("duplicate variant labels are rejected") {
        cfg.model.variants.push_back(cfg.model.variants[0]);
        ValidationReport r = validate_config(cfg);
        CHECK(has_error_containing(r, "duplicate variant label"));
    }
    SUBCASE("loose trap stiffness draws a warning") {
        cfg.model.variants[0].source = "trap";
        cfg.model.variants[0].beta_x = 0.2;
        ValidationReport r = validate_config(cfg);
        CHECK(r.ok());
        CHECK(r.warnings().size() == 1);
    }
}

TEST_CASE("presets all parse and validate") {
    std::vector<std::string> names = preset_names();
    CHECK(names.size() == 11);
    for (const std::string& name : names) {
        CAPTURE(name);
        ExperimentConfig cfg = preset_config(name);
        ValidationReport r = validate_config(cfg);
        for (const std::string& e : r.errors()) CAPTURE(e);
        CHECK(r.ok());
        CHECK_FALSE(cfg.model.field_grid.empty());
    }
    CHECK_THROWS_WITH_AS(preset_config("nope"), doctest::Contains("ising-magnetization"),
                         std::invalid_argument);
}

TEST_CASE("config hash tracks physics and ignores the output block") {
    ExperimentConfig a = config_from_json(small_config_json());
    ExperimentConfig b = a;
    b.output.directory = "/elsewhere";
    CHECK(config_hash(a) == config_hash(b));

    b = a;
    b.seed = 43;
    CHECK(config_hash(a) != config_hash(b));
    b = a;
    b.model.field_grid[0] += 1e-9;
    CHECK(config_hash(a) != config_hash(b));
    b = a;
    b.solver.max_iterations -= 1;
    CHECK(config_hash(a) != config_hash(b));

    CHECK(config_hash_hex(a).size() == 16);
}

TEST_CASE("dense sweep writes deterministic outputs and a faithful summary") {
    json j = small_config_json();
    TempDir dir_a("sweep_a"), dir_b("sweep_b");

    ExperimentConfig cfg = config_from_json(j);
    cfg.output.directory = dir_a.path.string();
    ExperimentResult res = run_experiment(cfg, 2);
    CHECK(res.failures == 0);
    CHECK_FALSE(res.partial);
    CHECK(exit_code_for(res) == 0);
    REQUIRE(res.points.size() == 3);

    // Energies agree with a direct dense solve.
    for (const PointResult& p : res.points) {
        SpinModel model = ising_power_law(8, 1.0, 3.0, p.field);
        GroundSolution gs = solve_ground_dense(model);
        CHECK(p.energy == doctest::Approx(gs.energy).epsilon(1e-9));
    }

    // Every advertised file exists and embeds hash + version.
    // energy + 7 quantities (correlation = 2 files) + summary.json
    CHECK(res.written_files.size() == 10);
    for (const std::string& f : res.written_files) {
        if (f.find(".csv") == std::string::npos) continue;
        std::string text = slurp(f);
        CHECK(text.find("# config_hash " + res.hash_hex) != std::string::npos);
        CHECK(text.find("# version 0.1.0") != std::string::npos);
        CHECK(text.find("# solver dense") != std::string::npos);
    }

    // Byte-identical rerun in a fresh directory.
    ExperimentConfig cfg_b = cfg;
    cfg_b.output.directory = dir_b.path.string();
    ExperimentResult res_b = run_experiment(cfg_b, 1);
    CHECK(res_b.hash_hex == res.hash_hex);
    for (const char* name :
         {"energy.csv", "magnetization.csv", "profile.csv", "correlation_zz.csv",
          "correlation_xx.csv", "entropy.csv", "neel.csv", "fluct_x.csv"}) {
        CAPTURE(name);
        CHECK(slurp(dir_a.path / name) == slurp(dir_b.path / name));
    }

    // Summary carries the config echo and per-variant analysis.
    json summary = json::parse(slurp(dir_a.path / "summary.json"));
    CHECK(summary["config_hash"] == res.hash_hex);
    CHECK(summary["points_failed"] == 0);
    CHECK(summary["config"]["model"]["n"] == 8);
    REQUIRE(summary["variants"].size() == 1);
}

TEST_CASE("cached points are reused when hash and version match") {
    json j = small_config_json();
    j["observables"]["quantities"] = {"magnetization"};
    TempDir dir("cache");
    ExperimentConfig cfg = config_from_json(j);
    cfg.output.directory = dir.path.string();

    ExperimentResult first = run_experiment(cfg, 1);
    CHECK(first.failures == 0);
    for (const PointResult& p : first.points) CHECK_FALSE(p.from_cache);

    // Tamper with one cached value; a rerun must trust the cache (same hash),
    // which makes the tampering visible in the CSV.
    fs::path cache0 = dir.path / "points" / "point_0.json";
    json c = json::parse(slurp(cache0));
    c["data"]["magnetization"] = 0.123456;
    {
        std::ofstream out(cache0);
        out << c.dump(2) << "\n";
    }
    ExperimentResult second = run_experiment(cfg, 1);
    for (const PointResult& p : second.points) CHECK(p.from_cache);
    CHECK(second.points[0].data["magnetization"].get<double>() == 0.123456);

    // A wrong version stamp invalidates just that cache file; the honest
    // recompute also repairs the tampered value.
    c["version"] = "0.0.9";
    {
        std::ofstream out(cache0);
        out << c.dump(2) << "\n";
    }
    ExperimentResult third = run_experiment(cfg, 1);
    CHECK_FALSE(third.points[0].from_cache);
    CHECK(third.points[1].from_cache); // untouched neighbors still count
    CHECK(third.points[0].data["magnetization"].get<double>() != 0.123456);

    // A different seed changes the hash, so every cache is recomputed.
    ExperimentConfig reseeded = cfg;
    reseeded.seed = 777;
    ExperimentResult fourth = run_experiment(reseeded, 1);
    for (const PointResult& p : fourth.points) CHECK_FALSE(p.from_cache);
}

TEST_CASE("a tight iteration cap produces honest partial results") {
    // At n = 8 the low-field points need ~29 Lanczos iterations while the
    // strong-field point converges in ~22, so a cap of 24 splits the grid.
    json j = small_config_json();
    j["observables"]["quantities"] = {"magnetization"};
    j["solver"]["max_iterations"] = 24;
    TempDir dir("partial");
    ExperimentConfig cfg = config_from_json(j);
    cfg.output.directory = dir.path.string();

    ExperimentResult res = run_experiment(cfg, 1);
    CHECK(res.partial);
    CHECK(res.failures == 2);
    CHECK(exit_code_for(res) == 3);
    CHECK(res.points[0].failed);
    CHECK_FALSE(res.points[2].failed);
    json summary = json::parse(slurp(dir.path / "summary.json"));
    CHECK(summary["partial"] == true);
    CHECK(summary["failures"].size() == 2);

    // Choking every point escalates to a full solver failure.
    json j2 = small_config_json();
    j2["observables"]["quantities"] = {"magnetization"};
    j2["solver"]["max_iterations"] = 16;
    TempDir dir2("allfail");
    ExperimentConfig cfg2 = config_from_json(j2);
    cfg2.output.directory = dir2.path.string();
    ExperimentResult res2 = run_experiment(cfg2, 1);
    CHECK(res2.all_failed);
    CHECK(exit_code_for(res2) == 2);

    // Invalid configs never reach the solver.
    cfg2.model.field_grid.clear();
    CHECK_THROWS_AS(run_experiment(cfg2, 1), std::invalid_argument);
}

TEST_CASE("xy sweeps report the saturation field") {
    json j = {
        {"model",
         {{"kind", "xy"},
          {"n", 8},
          {"variants", json::array({{{"label", "pl"}, {"source", "power_law"}}})},
          {"field_range", {{"from", 0.0}, {"to", 2.0}, {"step", 0.1}}}}},
        {"solver", {{"method", "dense"}}},
        {"observables", {{"quantities", {"magnetization"}}}},
    };
    TempDir dir("xy");
    ExperimentConfig cfg = config_from_json(j);
    cfg.output.directory = dir.path.string();
    ExperimentResult res = run_experiment(cfg, 2);
    CHECK(res.failures == 0);

    // m^z(b) is nondecreasing and saturates; the onset lands inside the grid.
    const auto& pts = res.points;
    for (size_t k = 1; k < pts.size(); ++k)
        CHECK(pts[k].data["magnetization"].get<double>() >=
              pts[k - 1].data["magnetization"].get<double>() - 1e-9);
    json summary = json::parse(slurp(dir.path / "summary.json"));
    double onset = summary["variants"][0]["saturation_field"].get<double>();
    CHECK(onset > 0.5);
    CHECK(onset <= 2.0);
}

TEST_CASE("trap variant couplings land near the power law") {
    json j = {
        {"model",
         {{"kind", "ising"},
          {"n", 10},
          {"variants", json::array({{{"label", "trap"}, {"source", "trap"},
                                     {"beta_x", 0.01}}})},
          {"field_grid", {1.0}}}},
        {"solver", {{"method", "dense"}}},
        {"observables", {{"quantities", {"magnetization", "couplings"}}}},
    };
    TempDir dir("trap");
    ExperimentConfig cfg = config_from_json(j);
    cfg.output.directory = dir.path.string();
    ExperimentResult res = run_experiment(cfg, 1);
    CHECK(res.failures == 0);

    // couplings.csv: central bond exactly 1 after normalization, and the
    // profile decays toward the edges like the stiff-limit 1/d^3 picture.
    std::string text = slurp(dir.path / "couplings.csv");
    std::istringstream lines(text);
    std::string line;
    std::vector<double> bonds(9, 0.0);
    while (std::getline(lines, line)) {
        if (line.empty() || line[0] == '#' || line.rfind("variant", 0) == 0) continue;
        int bond;
        double value;
        char label[16];
        REQUIRE(std::sscanf(line.c_str(), "%15[^,],%d,%lf", label, &bond, &value) == 3);
        bonds[bond] = value;
    }
    CHECK(bonds[4] == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(bonds[0] < bonds[4]); // wider edge spacings, weaker bonds
}

TEST_CASE("noise block lands in the summary for dense ising runs") {
    json j = small_config_json();
    j["observables"]["quantities"] = {"magnetization"};
    j["model"]["field_grid"] = {1.0};
    j["noise"] = {{"eta_x", 0.1}, {"eta_y", 0.1}, {"nbar", 0.5},
                  {"omega_x", 10.0}, {"omega_y", 11.0}, {"time", 2.0}};
    TempDir dir("noise");
    ExperimentConfig cfg = config_from_json(j);
    cfg.output.directory = dir.path.string();
    CHECK(validate_config(cfg).ok());

    ExperimentResult res = run_experiment(cfg, 1);
    const json& noise = res.summary["noise"];
    CHECK(noise["interference"]["resonant"] == false);
    REQUIRE(noise["fidelity_budgets"].size() == 1);
    const json& budget = noise["fidelity_budgets"][0];
    CHECK(budget["field"] == 1.0);
    CHECK(budget["total"].get<double>() > 0.0);
    CHECK(budget["suspicious_negative"] == false);

    // Hash covers the noise block: budgets are part of the computed record.
    ExperimentConfig quiet = cfg;
    quiet.noise.reset();
    CHECK(config_hash(quiet) != config_hash(cfg));
}

TEST_CASE("dmrg sweeps match dense results through the runner") {
    json j = {
        {"model",
         {{"kind", "ising"},
          {"n", 10},
          {"variants", json::array({{{"label", "pl"}, {"source", "power_law"}}})},
          {"field_grid", {0.8}}}},
        {"solver", {{"method", "dmrg"}, {"max_bond", 24}}},
        {"observables", {{"quantities", {"magnetization"}}}},
    };
    TempDir dir("dmrg");
    ExperimentConfig cfg = config_from_json(j);
    cfg.output.directory = dir.path.string();
    ExperimentResult res = run_experiment(cfg, 1);
    REQUIRE(res.failures == 0);
    CHECK(res.points[0].converged);

    SpinModel model = ising_power_law(10, 1.0, 3.0, 0.8);
    GroundSolution gs = solve_ground_dense(model);
    CHECK(res.points[0].energy == doctest::Approx(gs.energy).epsilon(1e-9));
    double mx = 0.0;
    for (int i = 0; i < 10; ++i) mx += dense_sigma_x(gs.state, i) / 10.0;
    CHECK(res.points[0].data["magnetization"].get<double>() ==
          doctest::Approx(mx).epsilon(1e-7));
}
