#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "causalnet/checks.hpp"
#include "causalnet/dynamics.hpp"
#include "causalnet/events.hpp"
#include "causalnet/qnet.hpp"

namespace causalnet::scenario {

/// Parsed scenario file (UTF-8 JSON, schemaVersion 1). Sections are optional;
/// each command validates that the pieces it needs are present, reporting the
/// missing or malformed field by its path.
struct LatticeSpec {
    geometry::CauchySegment segment;
    int layers = 0;
};

struct InitialSpec {
    enum class Kind { Uniform, Biases, Explicit } kind = Kind::Uniform;
    std::vector<double> values;  // biases (one per cone) or explicit weights

    events::ClassicalState build(const geometry::Region& domain) const;
};

struct CommonCauseSpec {
    events::CylinderEvent a, b;
    checks::PastKind past = checks::PastKind::Weak;
    checks::CommonCauseOptions::Mode mode =
        checks::CommonCauseOptions::Mode::AbelianExhaustive;
    std::size_t max_region_size = 2;
};

struct AxiomsSpec {
    geometry::Region window;
    bool lpc_closure = false;
};

struct QuantumSpec {
    int dimension = 0;
    qnet::FiniteNet net;
    std::optional<qnet::DensityState> state;
    std::map<std::string, qnet::Projection> projections;
    std::optional<qnet::PartitionOfUnit> partition;
    std::vector<std::string> ch_names;  // A1, A2, B1, B2 keys into projections
    int no_signaling_trials = 0;
};

struct Scenario {
    int schema_version = 1;
    std::string name;
    std::uint64_t seed = 1;
    bool seed_present = false;
    double tolerance = 1e-9;
    std::size_t max_cases = 0;
    std::size_t max_event_support = 2;
    std::size_t max_screener_size = 4;
    bool acausal_fixture = false;
    int threads = 1;
    std::string output_dir;  // optional default for --out
    std::vector<std::string> check_names;

    std::optional<LatticeSpec> lattice;
    std::optional<dynamics::TransitionTable> table;
    InitialSpec initial;
    std::optional<CommonCauseSpec> common_cause;
    std::optional<AxiomsSpec> axioms;
    std::optional<QuantumSpec> quantum;

    checks::StochasticCheckOptions check_options() const;
};

Scenario load_scenario(const std::string& path);
Scenario parse_scenario(const std::string& json_text);

// temp-file-plus-rename so readers never observe partial reports
void write_file_atomic(const std::string& path, const std::string& content);

// --- command implementations (shared by the CLI binary and tests) ------------

struct CommandResult {
    int exit_code = 0;                             // 0 pass, 1 check failure
    std::map<std::string, std::string> files;      // filename -> content
    std::string summary;                           // one console line
};

CommandResult cmd_simulate(const Scenario& sc);
CommandResult cmd_check(const Scenario& sc, const std::string& which);
CommandResult cmd_extend_backward(const Scenario& sc);

}  // namespace causalnet::scenario
