#pragma once

#include <array>
#include <cstdint>
#include <functional>
#include <string>
#include <utility>
#include <vector>

#include "causalnet/events.hpp"
#include "causalnet/geometry.hpp"

namespace causalnet::dynamics {

using events::ClassicalState;
using events::Configuration;
using events::CylinderEvent;
using geometry::CauchySegment;
using geometry::MinimalCone;
using geometry::Region;

/// The eight local transition probabilities p(c_+-): probability that a new
/// cell takes value +1 given the configuration on its three-cone causal
/// shadow. Context order is (upper-left half-step cone, upper-right half-step
/// cone, lower same-column cone); index bit 0 = left, bit 1 = right,
/// bit 2 = below, a set bit meaning +1. Context strings run left,right,below:
/// "+-+" fixes left=+1, right=-1, below=+1.
struct TransitionTable {
    std::array<double, 8> p{};

    static int context_index(int left, int right, int below) {
        return (left > 0 ? 1 : 0) | (right > 0 ? 2 : 0) | (below > 0 ? 4 : 0);
    }
    static int parse_context(const std::string& key);       // "+-+" -> index
    static std::string context_string(int index);

    static TransitionTable constant(double value);
    /// p = 1 iff at least two of the three shadow values are +1
    static TransitionTable majority();

    void validate() const;  // all eight entries inside [0,1]
};

// the three shadow cones of a cell, in context order (left, right, below)
std::array<MinimalCone, 3> cell_shadow(MinimalCone cell);

// cells of the n-th grown half-step layer (n >= 1); the window shrinks by one
// half-unit per side per layer
std::vector<MinimalCone> layer_cells(const CauchySegment& seg, int layer);
// initial segment plus `layers` grown layers
Region trapezoid(const CauchySegment& seg, int layers);

/// Per-cell conditioning rule for the layer extension engine: the probability
/// of +1 as a function of the values on `deps` (bit k of the argument = value
/// on deps[k]). The causal dynamics uses the three-cone shadow; doctored
/// rules (acausal or site-dependent fixtures) plug in here too.
struct CellRule {
    std::vector<MinimalCone> deps;
    std::function<double(std::uint32_t)> prob_plus;
};
using RuleProvider = std::function<CellRule(MinimalCone cell)>;

// the stationary causal rule of the model
RuleProvider shadow_rule(const TransitionTable& table);
/// Falsification fixture: each cell additionally peeks at a spacelike cone
/// two positions to its right on the layer below (where present), flipping
/// the table entry when that cone is +1. Violates the causal-process
/// requirement by construction.
RuleProvider acausal_rule(const TransitionTable& table, const CauchySegment& seg);

struct ExtensionResult {
    ClassicalState state;  // joint distribution over the trapezoid
    Region grownDomain;
};

ExtensionResult extend_forward(const CauchySegment& seg, const ClassicalState& initial,
                               const TransitionTable& table, int layers,
                               std::size_t cap_bits = 24);
ExtensionResult extend_forward_general(const CauchySegment& seg, const ClassicalState& initial,
                                       const RuleProvider& rule, int layers,
                                       std::size_t cap_bits = 24);

/// Exact marginal of the extended state on `keep`, computed by eliminating
/// each cone as soon as no later cell conditions on it. Never materializes
/// the full trapezoid joint, so it scales to windows where extend_forward
/// would not.
ClassicalState extended_marginal(const CauchySegment& seg, const ClassicalState& initial,
                                 const RuleProvider& rule, int layers, const Region& keep,
                                 std::size_t cap_bits = 26);

/// Conditional probability of `target` (an event on cells of a single layer)
/// given an atom on its causal shadow, read off the extended state. Cross
/// checks the product of transition-table entries against the state value and
/// throws on disagreement; the table product is what the conditional must
/// equal for a causal process.
double transition_probability(const ClassicalState& extended, const CylinderEvent& target,
                              const Configuration& shadow_atom, const TransitionTable& table);

// the table-product side of the same identity, independent of any state
double transition_probability_product(const CylinderEvent& target,
                                      const Configuration& shadow_atom,
                                      const TransitionTable& table);

/// One cell-local backward step: recovers (phi(c_+), phi(c_-)) from the
/// later-time pair (phi(c^+), phi(c^-)) by inverting the 2x2 forward matrix
/// [[p+, p-], [1-p+, 1-p-]]. Throws NotInvertible when p_plus == p_minus and
/// NegativeProbability when the recovered pair leaves [0,1].
std::pair<double, double> extend_backward(double phi_plus, double phi_minus,
                                          double p_plus, double p_minus);

/// Whole-surface backward extension, composed from the cell-local step.
/// `surface` is a state on a thickened surface (layers t, t+1/2); for every
/// below-site between neighboring layer-t cones and every configuration c of
/// that pair, the pair (phi(c_+), phi(c_-)) is reconstructed. Aborts on the
/// first failing cell, reporting its context and ratio.
struct BackwardCell {
    MinimalCone below;
    MinimalCone left, right;  // neighboring layer-t cones above `below`
    // indexed by pair configuration (bit 0 = left, bit 1 = right)
    std::array<std::pair<double, double>, 4> past;
};
std::vector<BackwardCell> extend_backward_surface(const CauchySegment& surface,
                                                  const ClassicalState& state,
                                                  const TransitionTable& table);

/// Extension commutes with a lattice translation for translation-invariant
/// initial data. The doctored site-dependent fixtures fail this.
bool check_covariance(const CauchySegment& seg, const ClassicalState& initial,
                      const TransitionTable& table, geometry::Translation g, int layers = 1);
bool check_covariance_general(const CauchySegment& seg, const ClassicalState& initial,
                              const RuleProvider& rule_at_original,
                              const RuleProvider& rule_at_translated, geometry::Translation g,
                              int layers = 1);

}  // namespace causalnet::dynamics
