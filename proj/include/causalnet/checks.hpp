#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "causalnet/dynamics.hpp"
#include "causalnet/events.hpp"
#include "causalnet/geometry.hpp"
#include "causalnet/qnet.hpp"

namespace causalnet::checks {

using dynamics::TransitionTable;
using events::ClassicalState;
using events::CylinderEvent;
using geometry::CauchySegment;
using geometry::Region;

/// One screening instance: events a, b on spacelike double cones, conditioned
/// on an atom of a shielding region.
struct Quintuple {
    Region vA, vB, vC;
    CylinderEvent a, b;
    std::uint32_t c_atom = 0;  // configuration mask on vC
};

struct Defect {
    std::size_t case_index = 0;
    Quintuple q;
    double p_ab_c = 0, p_a_c = 0, p_b_c = 0;
    double defect = 0;
};

struct CheckReport {
    std::string scenario;
    std::size_t cases = 0;
    std::size_t skipped_zero_probability = 0;
    double max_defect = 0.0;
    double tolerance = 1e-9;
    std::vector<Defect> failures;
    std::vector<Defect> sampled;  // per-quintuple rows retained for the CSV
    long long wall_clock_ms = 0;  // console diagnostics only, never serialized

    bool passed() const { return failures.empty(); }
};

// report serialization (wall clock deliberately omitted for byte determinism)
std::string report_to_json(const CheckReport& rep);
std::string defects_csv(const CheckReport& rep);

struct StochasticCheckOptions {
    int layers = 2;
    double tolerance = 1e-9;
    std::size_t max_cases = 0;          // 0 = exhaustive over the enumeration domain
    std::uint64_t seed = 1;             // subsampling seed when max_cases > 0
    std::size_t max_event_support = 2;  // cones per event double cone
    std::size_t max_screener_size = 4;  // cones per shielding candidate
    std::size_t max_csv_rows = 10000;   // per-quintuple rows kept in the report
    bool acausal_fixture = false;
    int threads = 1;
};

/// Enumeration domain for the screening sweep, fixed once per lattice: doubled
/// cones for A and B, ordered spacelike pairs (both orientations), and for
/// each pair the shielding candidates (contiguous surface pieces inside
/// J_-(V_A), which includes the pure causal shadow). Deterministic order:
/// regions lexicographic in their cone lists, surfaces bottom-up.
struct QuintupleGroup {
    Region vA, vB, vC;
    Region support_union;
};
std::vector<Region> enumerate_event_regions(const CauchySegment& seg, int layers,
                                            std::size_t max_support);
std::vector<Region> enumerate_screeners(const CauchySegment& seg, int layers, const Region& vA,
                                        const Region& vB, std::size_t max_size);
std::vector<QuintupleGroup> enumerate_groups(const CauchySegment& seg,
                                             const StochasticCheckOptions& opt);

/// The screening sweep of the stochastic model: every enumerable quintuple
/// under the extended state must satisfy p(AB|C) = p(A|C) p(B|C) within the
/// tolerance; the asymmetric form p(A|BC) = p(A|C) is checked whenever
/// p(BC) > 0. Zero-probability conditioning atoms are skipped and counted.
CheckReport verify_local_causality_stochastic(const CauchySegment& seg,
                                              const ClassicalState& initial,
                                              const TransitionTable& table,
                                              const StochasticCheckOptions& opt);
// same sweep against a precomputed group list (amortizes enumeration)
CheckReport run_local_causality(const CauchySegment& seg, const ClassicalState& initial,
                                const TransitionTable& table,
                                const std::vector<QuintupleGroup>& groups,
                                const StochasticCheckOptions& opt);

/// Recompute one reported quintuple in isolation; the failure list is complete
/// precisely when this reproduces the recorded defect.
Defect recheck_quintuple(const CauchySegment& seg, const ClassicalState& initial,
                         const TransitionTable& table, const Quintuple& q,
                         const StochasticCheckOptions& opt);

// --- common cause systems -----------------------------------------------------

enum class PastKind { Weak, Common, Strong };

// cones of `domain` inside the chosen past of the two supports
Region past_region(const Region& domain, const Region& vA, const Region& vB, PastKind past);

struct ClassicalCommonCause {
    Region region;
    std::vector<CylinderEvent> members;
    bool trivial = false;    // every member under A, A-perp, B or B-perp
    double max_defect = 0.0;
};

struct CommonCauseOptions {
    PastKind past = PastKind::Weak;
    enum class Mode { AbelianExhaustive, MaximalAtomic } mode = Mode::AbelianExhaustive;
    std::size_t max_region_size = 2;  // exhaustive partition search cap
    double tolerance = 1e-9;
};

/// Partitions of unit localized in the chosen past whose every member screens
/// off the correlation (classical, exhaustive over set partitions of the
/// atoms, or just the maximal atomic partition of the support of a).
std::vector<ClassicalCommonCause> find_common_cause(const ClassicalState& state,
                                                    const CylinderEvent& a,
                                                    const CylinderEvent& b,
                                                    const CommonCauseOptions& opt);

struct QuantumCommonCause {
    qnet::PartitionOfUnit partition;
    bool trivial = false;
    bool commuting = false;
    double max_defect = 0.0;
};

/// The kinematic solution: any maximal atomic decomposition of N(V_A) screens
/// off every correlation in every state.
QuantumCommonCause kinematic_common_cause(const qnet::FiniteNet& net,
                                          const qnet::DensityState& phi,
                                          const qnet::Projection& a, const qnet::Projection& b,
                                          std::uint64_t seed = 1);

/// Best-effort search for a noncommuting common cause in N(V_C): seeded
/// rotations of a maximal partition with acceptance on screening-defect
/// descent. Empty when the defect never reaches the tolerance.
std::optional<QuantumCommonCause> search_noncommuting_common_cause(
    const qnet::FiniteNet& net, const qnet::DensityState& phi, const qnet::Projection& a,
    const qnet::Projection& b, const Region& vC, std::uint64_t seed = 1, int iterations = 400);

// --- Clauser-Horne -------------------------------------------------------------

// phi(A1 B1 + A1 B2 + A2 B1 - A2 B2 - A1 - B1)
double ch_value(const qnet::DensityState& phi, const qnet::Matrix& a1, const qnet::Matrix& a2,
                const qnet::Matrix& b1, const qnet::Matrix& b2);
double ch_value(const ClassicalState& state, const CylinderEvent& a1, const CylinderEvent& a2,
                const CylinderEvent& b1, const CylinderEvent& b2);

struct Prop3Report {
    double ch_original = 0.0;
    double ch_modified = 0.0;
    bool commuting = false;              // partition commutes with all four projections
    std::array<bool, 4> commutes_with{};  // per projection A1, A2, B1, B2
    bool modified_in_bounds = false;     // required unconditionally
    bool original_in_bounds = false;     // asserted only when commuting
    bool correlated = true;              // diagnostic, not enforced
    bool ok() const { return modified_in_bounds && (!commuting || original_in_bounds); }
};

/// The Clauser-Horne bound holds for phi composed with the non-selective
/// measurement of a maximal atomic partition in a shielding region; it binds
/// the original state only when the partition commutes with all four
/// projections.
Prop3Report verify_prop3(const qnet::FiniteNet& net, const qnet::DensityState& phi,
                         const qnet::Projection& a1, const qnet::Projection& a2,
                         const qnet::Projection& b1, const qnet::Projection& b2,
                         const qnet::PartitionOfUnit& part, double tolerance = 1e-9);

}  // namespace causalnet::checks
