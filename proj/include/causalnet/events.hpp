#pragma once

#include <cstdint>
#include <vector>

#include "causalnet/geometry.hpp"

namespace causalnet::events {

using geometry::Region;

// probability comparisons / normalization tolerances used throughout
inline constexpr double kProbTol = 1e-9;
inline constexpr double kNormTol = 1e-12;

// enumeration guard for atoms() and the intersection-property check
inline constexpr std::size_t kDefaultAtomCap = 20;

/// Total +/-1 assignment on the cones of a finite region. Bit k of `bits`
/// holds the value on the k-th cone of the sorted region (+1 when set).
struct Configuration {
    Region support;
    std::uint32_t bits = 0;

    int value_on(geometry::MinimalCone c) const;  // +1 or -1
    friend bool operator==(const Configuration&, const Configuration&) = default;
};

// bits of `mask` (laid out on `from`) gathered onto the subregion `to`
std::uint32_t project_mask(const Region& from, std::uint32_t mask, const Region& to);
// scatter a mask on `from` into the bit layout of a superset region `to`
std::uint32_t embed_mask(const Region& from, std::uint32_t mask, const Region& to);

/// Cylinder event: a set of local configurations on a support region, i.e. a
/// projection in the finite abelian local algebra. Canonical form keeps the
/// smallest support: a cone is dropped when acceptance never depends on it.
/// The zero and unit events canonicalize to an empty support.
class CylinderEvent {
  public:
    CylinderEvent() = default;  // zero event
    CylinderEvent(Region support, std::vector<std::uint32_t> accepted);

    static CylinderEvent zero() { return CylinderEvent(); }
    static CylinderEvent unit() { return CylinderEvent(Region{}, {0}); }
    static CylinderEvent atom(const Configuration& c) {
        return CylinderEvent(c.support, {c.bits});
    }

    const Region& support() const { return support_; }
    const std::vector<std::uint32_t>& accepted() const { return accepted_; }  // sorted
    bool is_zero() const { return accepted_.empty(); }
    bool is_unit() const { return support_.empty() && !accepted_.empty(); }

    // same event after canonicalization
    friend bool operator==(const CylinderEvent&, const CylinderEvent&) = default;

    // this event re-expressed on a superset support (isotony embedding)
    CylinderEvent on_support(const Region& superset) const;

  private:
    Region support_;
    std::vector<std::uint32_t> accepted_;
    void canonicalize();
};

CylinderEvent meet(const CylinderEvent& a, const CylinderEvent& b);
CylinderEvent join_ev(const CylinderEvent& a, const CylinderEvent& b);
CylinderEvent complement(const CylinderEvent& e);

/// The 2^|v| single-configuration cylinders of a region, in mask order.
std::vector<CylinderEvent> atoms(const Region& v, std::size_t cap = kDefaultAtomCap);

/// Exact joint probability distribution over all configurations of a finite
/// spacetime window; weights indexed by configuration mask.
struct ClassicalState {
    Region domain;
    std::vector<double> weights;  // size 2^|domain|, sums to 1

    bool normalized(double tol = kNormTol) const;
    bool faithful() const;  // all weights strictly positive
};

ClassicalState uniform_state(const Region& domain);
// independent cells, plus_probability[k] = P(+1) on the k-th cone
ClassicalState product_state(const Region& domain, const std::vector<double>& plus_probability);
ClassicalState point_state(const Configuration& c);

double probability(const ClassicalState& s, const CylinderEvent& e);
ClassicalState condition(const ClassicalState& s, const CylinderEvent& c);
// marginal joint on a subregion of the domain
ClassicalState restrict_state(const ClassicalState& s, const Region& sub);

/// Verifies by enumeration that the events measurable in both regions are
/// exactly the events measurable in the intersection (Sigma(v1) /\ Sigma(v2)
/// = Sigma(v1 /\ v2)); for disjoint regions only zero and unit are shared.
bool check_intersection_property(const Region& v1, const Region& v2, std::size_t cap = 4);

}  // namespace causalnet::events
