#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <json.hpp>
#include <sstream>

#include "causalnet/errors.hpp"
#include "causalnet/scenario.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

int run_cli(const std::string& args) {
    std::string cmd = std::string(CAUSALNET_CLI_PATH) + " " + args + " 2>/dev/null";
    int status = std::system(cmd.c_str());
    return WEXITSTATUS(status);
}

std::string scenario(const std::string& name) {
    return (fs::path(CAUSALNET_SCENARIO_DIR) / name).string();
}

fs::path fresh_dir(const std::string& tag) {
    fs::path p = fs::temp_directory_path() / ("causalnet_cli_" + tag);
    fs::remove_all(p);
    fs::create_directories(p);
    return p;
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p);
    REQUIRE(in.good());
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

}  // namespace

TEST_CASE("fair-coin scenario passes through the CLI") {
    auto out = fresh_dir("uniform");
    int code = run_cli("--scenario " + scenario("uniform_half.json") + " --out " +
                       out.string() + " check local-causality");
    CHECK(code == 0);
    json rep = json::parse(slurp(out / "report.json"));
    CHECK(rep["passed"] == true);
    CHECK(rep["failures"].empty());
    CHECK(rep["cases"].get<std::size_t>() > 0);
    CHECK(fs::exists(out / "defects.csv"));
}

TEST_CASE("acausal fixture fails with a nonempty defect list") {
    auto out = fresh_dir("acausal");
    int code = run_cli("--scenario " + scenario("acausal.json") + " --out " + out.string() +
                       " check local-causality");
    CHECK(code == 1);
    json rep = json::parse(slurp(out / "report.json"));
    CHECK(rep["passed"] == false);
    CHECK(!rep["failures"].empty());
    // every failure row carries the full quintuple
    const auto& f = rep["failures"][0];
    CHECK(f.contains("vA"));
    CHECK(f.contains("vB"));
    CHECK(f.contains("vC"));
    CHECK(f.contains("atom"));
    CHECK(f.contains("defect"));
}

TEST_CASE("identical scenario and seed give byte-identical reports") {
    auto out1 = fresh_dir("det1");
    auto out2 = fresh_dir("det2");
    std::string base = "--scenario " + scenario("uniform_half.json") + " --seed 99 ";
    CHECK(run_cli(base + "--max-cases 200 --out " + out1.string() + " check local-causality") == 0);
    CHECK(run_cli(base + "--max-cases 200 --out " + out2.string() + " check local-causality") == 0);
    CHECK(slurp(out1 / "report.json") == slurp(out2 / "report.json"));
    CHECK(slurp(out1 / "defects.csv") == slurp(out2 / "defects.csv"));
}

TEST_CASE("majority-rule simulation matches the golden marginals") {
    auto out = fresh_dir("majority");
    int code = run_cli("--scenario " + scenario("majority.json") + " --out " + out.string() +
                       " simulate");
    CHECK(code == 0);
    std::string got = slurp(out / "marginals.json");
    std::string want = slurp(fs::path(CAUSALNET_GOLDEN_DIR) / "majority_marginals.json");
    CHECK(got == want);
}

TEST_CASE("singlet fixture: CH violation surfaces as exit 1") {
    auto out = fresh_dir("singlet");
    int code = run_cli("--scenario " + scenario("singlet_ch.json") + " --out " + out.string() +
                       " check ch");
    CHECK(code == 1);
    json rep = json::parse(slurp(out / "report.json"));
    CHECK(rep["chOriginal"].get<double>() == doctest::Approx(0.2071067811865476).epsilon(1e-9));
    CHECK(rep["modifiedInBounds"] == true);
    CHECK(rep["originalInBounds"] == false);
    CHECK(rep["commuting"] == false);
    CHECK(rep["prop3Consistent"] == true);
}

TEST_CASE("axiom suite passes on the lattice window and the two-qubit net") {
    auto out = fresh_dir("axioms");
    int code = run_cli("--scenario " + scenario("axioms.json") + " --out " + out.string() +
                       " check axioms");
    CHECK(code == 0);
    json rep = json::parse(slurp(out / "report.json"));
    CHECK(rep["ising"]["isotony"] == true);
    CHECK(rep["ising"]["microcausality"] == true);
    CHECK(rep["ising"]["intersectionProperty"] == true);
    CHECK(rep["ising"]["halfShiftCovariance"] == true);
    CHECK(rep["ising"]["localPrimitiveCausality"] == false);  // informational
    CHECK(rep["quantum"]["haagDuality"] == true);
}

TEST_CASE("common cause scenario finds the shared-bit partition") {
    auto out = fresh_dir("cc");
    int code = run_cli("--scenario " + scenario("common_cause.json") + " --out " +
                       out.string() + " check common-cause");
    CHECK(code == 0);
    json rep = json::parse(slurp(out / "report.json"));
    REQUIRE(!rep["solutions"].empty());
    bool nontrivial = false;
    for (const auto& s : rep["solutions"])
        if (s["trivial"] == false) nontrivial = true;
    CHECK(nontrivial);
}

TEST_CASE("backward extension through the CLI") {
    auto out = fresh_dir("backward");
    CHECK(run_cli("--scenario " + scenario("backward.json") + " --out " + out.string() +
                  " extend-backward") == 0);
    json rep = json::parse(slurp(out / "backward.json"));
    CHECK(rep["ok"] == true);
    CHECK(rep["cells"].size() == 3);

    auto out2 = fresh_dir("backward_singular");
    CHECK(run_cli("--scenario " + scenario("backward_singular.json") + " --out " +
                  out2.string() + " extend-backward") == 1);
    json rep2 = json::parse(slurp(out2 / "backward.json"));
    CHECK(rep2["ok"] == false);
    std::string err = rep2["error"].get<std::string>();
    CHECK(err.find("pair context") != std::string::npos);  // failing cell identified
}

TEST_CASE("validation errors exit with code 2 and name the field") {
    auto dir = fresh_dir("badtable");
    fs::path bad = dir / "bad.json";
    std::ofstream(bad) << R"({
      "schemaVersion": 1,
      "name": "seven-entry-table",
      "lattice": {"baseTime2": 0, "window2": [-2, 2], "layers": 1},
      "table": {"+++": 0.5, "++-": 0.5, "+-+": 0.5, "+--": 0.5,
                "-++": 0.5, "-+-": 0.5, "--+": 0.5},
      "initial": {"kind": "uniform"}
    })";
    CHECK(run_cli("--scenario " + bad.string() + " --out " + dir.string() +
                  " check local-causality") == 2);

    // sampling without a seed is rejected
    fs::path noseed = dir / "noseed.json";
    std::ofstream(noseed) << R"({
      "schemaVersion": 1,
      "name": "sampling-without-seed",
      "maxCases": 10,
      "lattice": {"baseTime2": 0, "window2": [-2, 2], "layers": 1},
      "table": {"+++": 0.5, "++-": 0.5, "+-+": 0.5, "+--": 0.5,
                "-++": 0.5, "-+-": 0.5, "--+": 0.5, "---": 0.5},
      "initial": {"kind": "uniform"}
    })";
    CHECK(run_cli("--scenario " + noseed.string() + " --out " + dir.string() +
                  " check local-causality") == 2);
}

TEST_CASE("scenario parser round trip of the library API") {
    using causalnet::scenario::parse_scenario;
    auto sc = parse_scenario(slurp(scenario("random_seeded.json")));
    CHECK(sc.name == "random-table-width7");
    CHECK(sc.lattice.has_value());
    CHECK(sc.lattice->segment.i2min == -6);
    CHECK(sc.table.has_value());
    CHECK(sc.table->p[7] == doctest::Approx(0.83));  // "+++"
    CHECK_THROWS_AS(parse_scenario("{}"), causalnet::ValidationError);
}
