// Command-line front end: load a scenario, run a simulation or a check suite,
// write the report files. Exit codes: 0 pass, 1 check failure, 2 validation
// error, 3 internal error.

#include <CLI11.hpp>
#include <filesystem>
#include <iostream>

#include "causalnet/errors.hpp"
#include "causalnet/scenario.hpp"

namespace {

using causalnet::scenario::CommandResult;
using causalnet::scenario::Scenario;

int write_outputs(const CommandResult& result, const std::string& out_dir) {
    std::filesystem::create_directories(out_dir);
    for (const auto& [name, content] : result.files) {
        causalnet::scenario::write_file_atomic(
            (std::filesystem::path(out_dir) / name).string(), content);
    }
    std::cerr << result.summary << "\n";
    return result.exit_code;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"verification toolkit for causal lattice dynamics and finite operator nets"};
    app.require_subcommand(1);

    std::string scenario_path, out_dir = "reports";
    std::uint64_t seed = 0;
    bool seed_given = false;
    double tolerance = 0.0;
    bool tolerance_given = false;
    std::size_t max_cases = 0;
    bool max_cases_given = false;
    int threads = 0;

    app.add_option("--scenario", scenario_path, "scenario file (JSON)")->required();
    app.add_option("--out", out_dir, "report output directory");
    app.add_option("--seed", seed, "override the scenario seed")->each([&](const std::string&) {
        seed_given = true;
    });
    app.add_option("--tolerance", tolerance, "override the scenario tolerance")
        ->each([&](const std::string&) { tolerance_given = true; });
    app.add_option("--max-cases", max_cases, "override the quintuple sampling cap")
        ->each([&](const std::string&) { max_cases_given = true; });
    app.add_option("--threads", threads, "worker threads for the screening sweep");

    auto* sim = app.add_subcommand("simulate", "extend the initial state and dump marginals");
    std::string which;
    auto* chk = app.add_subcommand("check", "run a verification suite");
    chk->add_option("which", which,
                    "local-causality | ch | common-cause | no-signaling | axioms");
    auto* back = app.add_subcommand("extend-backward",
                                    "invert the dynamics one half-step into the past");

    CLI11_PARSE(app, argc, argv);

    try {
        Scenario sc = causalnet::scenario::load_scenario(scenario_path);
        if (seed_given) {
            sc.seed = seed;
            sc.seed_present = true;
        }
        if (tolerance_given) sc.tolerance = tolerance;
        if (max_cases_given) sc.max_cases = max_cases;
        if (threads > 0) sc.threads = threads;
        if (!sc.output_dir.empty() && out_dir == "reports") out_dir = sc.output_dir;

        if (sim->parsed()) return write_outputs(causalnet::scenario::cmd_simulate(sc), out_dir);
        if (back->parsed())
            return write_outputs(causalnet::scenario::cmd_extend_backward(sc), out_dir);
        if (chk->parsed()) {
            if (!which.empty())
                return write_outputs(causalnet::scenario::cmd_check(sc, which), out_dir);
            if (sc.check_names.empty())
                throw causalnet::ValidationError(
                    "checks: no check named on the command line or in the scenario");
            int worst = 0;
            for (const auto& name : sc.check_names) {
                CommandResult res = causalnet::scenario::cmd_check(sc, name);
                // suffix the files per check so one run can emit several reports
                CommandResult renamed;
                renamed.exit_code = res.exit_code;
                renamed.summary = res.summary;
                for (const auto& [fname, content] : res.files) {
                    auto dot = fname.rfind('.');
                    renamed.files[fname.substr(0, dot) + "-" + name + fname.substr(dot)] =
                        content;
                }
                worst = std::max(worst, write_outputs(renamed, out_dir));
            }
            return worst;
        }
        return 2;
    } catch (const causalnet::ValidationError& e) {
        std::cerr << "validation error: " << e.what() << "\n";
        return 2;
    } catch (const causalnet::PreconditionViolation& e) {
        std::cerr << "validation error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "internal error: " << e.what() << "\n";
        return 3;
    }
}
