#pragma once

#include <compare>
#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

namespace causalnet::geometry {

/// Unit-diameter diamond site of the locally finite covering of 2D Minkowski
/// spacetime. Coordinates are stored doubled (2t, 2i) so half-integer centers
/// stay exact; t2 and i2 always have the same parity.
struct MinimalCone {
    int t2 = 0;
    int i2 = 0;

    friend auto operator<=>(const MinimalCone&, const MinimalCone&) = default;
};

// Null (light-cone) coordinates. On this lattice (sigma, tau) ranges over all
// of Z^2 and the causal order becomes the componentwise product order.
inline int sigma(MinimalCone c) { return (c.t2 - c.i2) / 2; }
inline int tau(MinimalCone c) { return (c.t2 + c.i2) / 2; }
inline MinimalCone from_null(int s, int t) { return MinimalCone{s + t, t - s}; }

bool valid_cone(MinimalCone c);

/// Finite set of minimal cones, kept sorted and duplicate-free.
class Region {
  public:
    Region() = default;
    explicit Region(std::vector<MinimalCone> cones);

    const std::vector<MinimalCone>& cones() const { return cones_; }
    bool empty() const { return cones_.empty(); }
    std::size_t size() const { return cones_.size(); }
    bool contains(MinimalCone c) const;
    bool contains(const Region& other) const;
    // position of c in the sorted cone list, or npos
    std::size_t index_of(MinimalCone c) const;

    friend bool operator==(const Region&, const Region&) = default;

  private:
    std::vector<MinimalCone> cones_;
};

Region region_union(const Region& a, const Region& b);
Region region_intersection(const Region& a, const Region& b);
Region region_difference(const Region& a, const Region& b);

/// Join-closure of two generating minimal cones: all lattice sites whose
/// continuous diamonds lie inside the smallest continuous double cone
/// containing both generators.
struct DoubleCone {
    Region region;
    MinimalCone g1, g2;
};

/// Two adjacent half-integer time layers t and t+1/2 inside a spatial window
/// [i2min, i2max] (doubled coordinates) -- a "thickened" Cauchy surface piece.
struct CauchySegment {
    int t2 = 0;       // base layer time, doubled
    int i2min = 0;    // inclusive window bounds, doubled
    int i2max = 0;

    // cones of one layer, left to right
    std::vector<MinimalCone> layer(int layer_t2) const;
    // both layers, sorted
    Region cones() const;
    bool contains(MinimalCone c) const;
};

/// Lattice symmetry: integer time/space translations composed with the half
/// shift (t,i) -> (t+1/2, i+1/2). Stored doubled; dt2 and di2 share parity.
struct Translation {
    int dt2 = 0;
    int di2 = 0;

    static Translation of(int dt, int di, bool half_shift) {
        return Translation{2 * dt + (half_shift ? 1 : 0), 2 * di + (half_shift ? 1 : 0)};
    }
    Translation then(Translation g) const { return Translation{dt2 + g.dt2, di2 + g.di2}; }
    Translation inverse() const { return Translation{-dt2, -di2}; }

    friend bool operator==(const Translation&, const Translation&) = default;
};

MinimalCone translate(MinimalCone c, Translation g);
Region translate(const Region& r, Translation g);
CauchySegment translate(const CauchySegment& s, Translation g);

// --- causal order -----------------------------------------------------------

// a in J_-(b). Closed-cone convention: lightlike touching counts as causal.
bool causally_precedes(MinimalCone a, MinimalCone b);
bool causally_comparable(MinimalCone a, MinimalCone b);

// no pair of cones causally comparable; symmetric
bool spacelike(const Region& a, const Region& b);
bool spacelike(MinimalCone a, MinimalCone b);

// c in J_-(r): below some cone of r
bool in_causal_past(MinimalCone c, const Region& r);

DoubleCone join(MinimalCone a, MinimalCone b);

/// Causal shadow P_s(v) = s \cap (s \ J_-(v))': the cones of segment s that
/// are spacelike from every cone of s outside J_-(v). These are the sites the
/// transition into v may depend on. Throws WindowTooSmall when the shadow
/// touches the window boundary, so a wider window could change the answer.
Region causal_shadow(const Region& v, const CauchySegment& s);

/// V'' evaluated on the lattice. The spacelike complement V' is never
/// materialized: witnesses excluding a candidate from V'' provably live within
/// one cone of the null-coordinate bounding box of v, so that margin is the
/// window. The overload with an explicit bound asserts the margin requirement.
Region double_complement(const Region& v);
Region double_complement(const Region& v, const Region& bound);

enum class ShieldingVariant { Classical, Quantum };

/// L1 ^ L2 ^ (L3^Q | L3^C) for a candidate shielding region vC between
/// spacelike vA and vB. Throws PreconditionViolation unless spacelike(vA,vB).
bool is_shielding(const Region& vC, const Region& vA, const Region& vB,
                  ShieldingVariant variant);

// which localization requirement failed first, for diagnostics
struct ShieldingReport {
    bool l1 = false, l2 = false, l3 = false;
    bool ok() const { return l1 && l2 && l3; }
};
ShieldingReport shielding_report(const Region& vC, const Region& vA, const Region& vB,
                                 ShieldingVariant variant);

// --- serialization ----------------------------------------------------------

// "V(2t,2i)" with doubled coordinates
std::string to_string(MinimalCone c);
std::string to_string(const Region& r);
MinimalCone parse_cone(const std::string& text);

std::ostream& operator<<(std::ostream& os, MinimalCone c);

}  // namespace causalnet::geometry
