#include <catch2/catch.hpp>

#include <cstdlib>
#include <sys/wait.h>
#include <filesystem>
#include <fstream>
#include <random>

#include "cracklat/io.hpp"
#include "cracklat/verify.hpp"

using namespace cracklat;
namespace fs = std::filesystem;

namespace {

fs::path fresh_dir(const std::string& name) {
    const fs::path dir = fs::temp_directory_path() / ("cracklat_" + name);
    fs::remove_all(dir);
    fs::create_directories(dir);
    return dir;
}

int run_cli(const std::string& args) {
    const std::string cmd = std::string(CRACK_LATTICE_CLI) + " " + args + " > /dev/null 2>&1";
    const int status = std::system(cmd.c_str());
    return WEXITSTATUS(status);
}

}  // namespace

TEST_CASE("seventeen significant digits round-trip doubles exactly") {
    std::mt19937_64 rng(41);
    for (int n = 0; n < 1000; ++n) {
        const double v = (double(rng() >> 11) * 0x1p-53 - 0.5) * std::pow(10.0, int(rng() % 13) - 6);
        CHECK(std::strtod(format17(v).c_str(), nullptr) == v);
    }
}

TEST_CASE("greens field export and import round-trip") {
    const GreensField f = solve_crack_green({2, 1}, 16, 1e-10);
    const fs::path dir = fresh_dir("io_green");
    write_greens_csv(dir / "g.csv", f);

    const FieldCsv csv = read_field_csv(dir / "g.csv");
    CHECK(csv.meta.at("source") == "2,1");
    CHECK(csv.meta.at("radius") == "16");
    REQUIRE_FALSE(csv.rows.empty());
    for (const auto& [i, j, v] : csv.rows) CHECK(v == f.value({i, j}));
}

TEST_CASE("displacement export and import round-trip") {
    GreensCache cache;
    const Solution sol = equilibrate({{{{3, 2}, +1}}}, 0.02, 32, 1e-8, 50, EnergyModel{1.0}, &cache);
    const fs::path dir = fresh_dir("io_disp");
    write_displacement_csv(dir / "y.csv", sol.y);
    const DisplacementField back = read_displacement_csv(dir / "y.csv");
    CHECK(back.gauge == sol.y.gauge);
    sol.y.values.for_each([&](PrimalSite s, double v) { CHECK(back.value(s) == v); });
}

TEST_CASE("strain export and import round-trip") {
    const SuperposedField g = superpose({{{{2, 1}, +1}}}, 16, 1e-10);
    const StrainForm alpha = strain_field(g.field);
    const fs::path dir = fresh_dir("io_strain");
    write_strain_csv(dir / "alpha.csv", alpha);
    const StrainForm back = read_strain_csv(dir / "alpha.csv");
    REQUIRE(back.radius() == alpha.radius());
    std::size_t bonds = 0;
    alpha.for_each_present([&](const Bond& b, double a) {
        REQUIRE(back.value(b).has_value());
        CHECK(*back.value(b) == a);
        ++bonds;
    });
    CHECK(bonds > 100);
}

TEST_CASE("run config validation") {
    const fs::path dir = fresh_dir("io_cfg");
    write_text_file(dir / "bad_radius.json", R"({"radius": 16})");
    CHECK_THROWS_AS(parse_run_config(dir / "bad_radius.json").validate(), std::invalid_argument);

    write_text_file(dir / "far_core.json",
                    R"({"radius": 48, "cores": [{"x": 30, "y": 1, "b": 1}]})");
    CHECK_THROWS_AS(parse_run_config(dir / "far_core.json").validate(), std::invalid_argument);

    write_text_file(dir / "good.json",
                    R"({"lambda": 1.0, "K": 0.02, "radius": 48, "tol": 1e-10,
                        "cores": [{"x": 3, "y": 2, "b": 1}], "seed": 7})");
    const RunConfig cfg = parse_run_config(dir / "good.json");
    cfg.validate();
    CHECK(cfg.K == 0.02);
    CHECK(cfg.cores.cores.size() == 1);
    CHECK(cfg.seed == 7);

    write_text_file(dir / "broken.json", "{not json");
    CHECK_THROWS_AS(parse_run_config(dir / "broken.json"), std::invalid_argument);

    // the separation threshold is a runtime knob
    write_text_file(dir / "close_cores.json",
                    R"({"radius": 48, "min_separation": 3.0,
                        "cores": [{"x": 4, "y": 1, "b": 1}, {"x": 5, "y": 1, "b": -1}]})");
    CHECK_THROWS_AS(parse_run_config(dir / "close_cores.json").validate(), std::invalid_argument);
    write_text_file(dir / "split_cores.json",
                    R"({"radius": 48, "min_separation": 3.0,
                        "cores": [{"x": -5, "y": 1, "b": 1}, {"x": -5, "y": -1, "b": -1}]})");
    parse_run_config(dir / "split_cores.json").validate();  // crack-separated pair passes
}

TEST_CASE("cli green command writes a deterministic field") {
    const fs::path a = fresh_dir("cli_green_a");
    const fs::path b = fresh_dir("cli_green_b");
    REQUIRE(run_cli("green --source 3,2 --radius 48 --out " + a.string()) == 0);
    REQUIRE(run_cli("green --source 3,2 --radius 48 --out " + b.string()) == 0);
    REQUIRE(fs::exists(a / "G_3_2_r48.csv"));
    REQUIRE(fs::exists(a / "G_3_2_r48_decay.json"));
    CHECK(read_text_file(a / "G_3_2_r48.csv") == read_text_file(b / "G_3_2_r48.csv"));
    CHECK(read_text_file(a / "G_3_2_r48_decay.json") == read_text_file(b / "G_3_2_r48_decay.json"));
}

TEST_CASE("cli equilibrate, opening and dislocate pipeline") {
    const fs::path dir = fresh_dir("cli_pipe");
    write_text_file(dir / "config.json",
                    R"({"lambda": 1.0, "K": 0.02, "radius": 48, "tol": 1e-10,
                        "cores": [{"x": 3, "y": 2, "b": 1}], "seed": 3})");
    const std::string cfg = " --config " + (dir / "config.json").string();

    REQUIRE(run_cli("equilibrate" + cfg + " --out " + dir.string()) == 0);
    REQUIRE(fs::exists(dir / "solution_K0.02_r48.json"));
    REQUIRE(fs::exists(dir / "solution_K0.02_r48_y.csv"));

    REQUIRE(run_cli("opening --solution " + (dir / "solution_K0.02_r48.json").string() +
                    " --band 8,20 --out " + dir.string()) == 0);
    REQUIRE(fs::exists(dir / "opening.json"));
    const auto rep = ordered_json::parse(read_text_file(dir / "opening.json"));
    CHECK(rep.at("background_subtracted_fit").at("exponent").get<double>() ==
          Approx(0.5).margin(0.1));

    REQUIRE(run_cli("dislocate" + cfg + " --out " + dir.string()) == 0);
    REQUIRE(fs::exists(dir / "alpha_r48.csv"));
    REQUIRE(fs::exists(dir / "y_mu_r48.csv"));
    REQUIRE(fs::exists(dir / "dislocate_report_r48.json"));

    // a mixed-sign pair makes the raw opening negative in the band; the
    // background-subtracted fit must still come through
    write_text_file(dir / "mixed.json",
                    R"({"lambda": 1.0, "K": 0.02, "radius": 48, "tol": 1e-10,
                        "cores": [{"x": 3, "y": 2, "b": 1}, {"x": -5, "y": 1, "b": -1}]})");
    REQUIRE(run_cli("equilibrate --config " + (dir / "mixed.json").string() + " --out " +
                    dir.string()) == 0);
    REQUIRE(run_cli("opening --solution " + (dir / "solution_K0.02_r48.json").string() +
                    " --band 8,20 --out " + dir.string()) == 0);
    const auto mixed = ordered_json::parse(read_text_file(dir / "opening.json"));
    CHECK(mixed.at("background_subtracted_fit").contains("K_est"));
}

TEST_CASE("cli exit codes") {
    const fs::path dir = fresh_dir("cli_err");
    // invalid config: radius below the minimum
    CHECK(run_cli("green --source 3,2 --radius 8 --out " + dir.string()) == 1);
    // missing config file
    CHECK(run_cli("equilibrate --config /nonexistent.json --out " + dir.string()) == 1);
    // bifurcation: outside the small-K regime the tip bond enters the band
    write_text_file(dir / "big_k.json",
                    R"({"lambda": 1.0, "K": 0.45, "radius": 128,
                        "cores": [{"x": 3, "y": 2, "b": 1}]})");
    CHECK(run_cli("equilibrate --config " + (dir / "big_k.json").string() + " --out " +
                  dir.string()) == 4);
}

TEST_CASE("verification report is deterministic at a reduced radius") {
    VerifyOptions opts;
    opts.radius = 64;
    opts.seed = 11;
    opts.threads = 2;
    const VerifyReport r1 = run_verification(opts);
    const VerifyReport r2 = run_verification(opts);
    CHECK(r1.to_json().dump(2) == r2.to_json().dump(2));
}
