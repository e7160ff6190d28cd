#pragma once

// Independent oracles used to freeze expected values in tests. These work in
// quarter-unit integer coordinates straight from the continuous definitions
// and never call the lattice predicates they are checking.

#include <cstdint>
#include <vector>

#include "causalnet/dynamics.hpp"
#include "causalnet/events.hpp"
#include "causalnet/geometry.hpp"

namespace oracle {

using causalnet::geometry::CauchySegment;
using causalnet::geometry::MinimalCone;
using causalnet::geometry::Region;

// continuous point, coordinates times 4 so diamond corners are exact integers
struct QPoint {
    int t4, x4;
};

// corners of the unit-diameter diamond of a minimal cone
std::vector<QPoint> diamond_corners(MinimalCone c);

// D(a) subset of J_-(D(b)), decided on corners (both sets are polytopes with
// lightlike edges, so corner checks are exact)
bool cont_precedes(MinimalCone a, MinimalCone b);

bool cont_spacelike(MinimalCone a, MinimalCone b);

// membership of m in the smallest continuous double cone containing the
// diamonds of a and b
bool cont_in_join(MinimalCone m, MinimalCone a, MinimalCone b);

// joint distribution over the trapezoid grown from seg by `layers` half-step
// layers: direct product over cells, one full pass per configuration
std::vector<double> brute_force_joint(const CauchySegment& seg,
                                      const causalnet::events::ClassicalState& initial,
                                      const causalnet::dynamics::TransitionTable& table,
                                      int layers);

}  // namespace oracle
