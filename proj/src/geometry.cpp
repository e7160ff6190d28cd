#include "causalnet/geometry.hpp"

#include <algorithm>
#include <cstdio>
#include <cstdlib>
#include <limits>
#include <ostream>
#include <set>

#include "causalnet/errors.hpp"

namespace causalnet::geometry {

bool valid_cone(MinimalCone c) {
    return ((c.t2 ^ c.i2) & 1) == 0;
}

Region::Region(std::vector<MinimalCone> cones) : cones_(std::move(cones)) {
    for (const auto& c : cones_) {
        if (!valid_cone(c))
            throw ValidationError("cone coordinates 2t,2i must share parity: " + to_string(c));
    }
    std::sort(cones_.begin(), cones_.end());
    cones_.erase(std::unique(cones_.begin(), cones_.end()), cones_.end());
}

bool Region::contains(MinimalCone c) const {
    return std::binary_search(cones_.begin(), cones_.end(), c);
}

bool Region::contains(const Region& other) const {
    return std::includes(cones_.begin(), cones_.end(),
                         other.cones_.begin(), other.cones_.end());
}

std::size_t Region::index_of(MinimalCone c) const {
    auto it = std::lower_bound(cones_.begin(), cones_.end(), c);
    if (it == cones_.end() || *it != c) return static_cast<std::size_t>(-1);
    return static_cast<std::size_t>(it - cones_.begin());
}

Region region_union(const Region& a, const Region& b) {
    std::vector<MinimalCone> out;
    std::set_union(a.cones().begin(), a.cones().end(),
                   b.cones().begin(), b.cones().end(), std::back_inserter(out));
    return Region(std::move(out));
}

Region region_intersection(const Region& a, const Region& b) {
    std::vector<MinimalCone> out;
    std::set_intersection(a.cones().begin(), a.cones().end(),
                          b.cones().begin(), b.cones().end(), std::back_inserter(out));
    return Region(std::move(out));
}

Region region_difference(const Region& a, const Region& b) {
    std::vector<MinimalCone> out;
    std::set_difference(a.cones().begin(), a.cones().end(),
                        b.cones().begin(), b.cones().end(), std::back_inserter(out));
    return Region(std::move(out));
}

std::vector<MinimalCone> CauchySegment::layer(int layer_t2) const {
    std::vector<MinimalCone> out;
    // sites on layer layer_t2 have i2 with the same parity as layer_t2
    int first = i2min + (((i2min ^ layer_t2) & 1) ? 1 : 0);
    for (int i2 = first; i2 <= i2max; i2 += 2) out.push_back(MinimalCone{layer_t2, i2});
    return out;
}

Region CauchySegment::cones() const {
    auto lower = layer(t2);
    auto upper = layer(t2 + 1);
    lower.insert(lower.end(), upper.begin(), upper.end());
    return Region(std::move(lower));
}

bool CauchySegment::contains(MinimalCone c) const {
    return (c.t2 == t2 || c.t2 == t2 + 1) && c.i2 >= i2min && c.i2 <= i2max;
}

MinimalCone translate(MinimalCone c, Translation g) {
    return MinimalCone{c.t2 + g.dt2, c.i2 + g.di2};
}

Region translate(const Region& r, Translation g) {
    std::vector<MinimalCone> out;
    out.reserve(r.size());
    for (auto c : r.cones()) out.push_back(translate(c, g));
    return Region(std::move(out));
}

CauchySegment translate(const CauchySegment& s, Translation g) {
    if ((g.dt2 ^ g.di2) & 1)
        throw ValidationError("translation components must share parity");
    return CauchySegment{s.t2 + g.dt2, s.i2min + g.di2, s.i2max + g.di2};
}

bool causally_precedes(MinimalCone a, MinimalCone b) {
    // product order in null coordinates; lightlike boundary counts as causal
    return sigma(a) <= sigma(b) && tau(a) <= tau(b);
}

bool causally_comparable(MinimalCone a, MinimalCone b) {
    return causally_precedes(a, b) || causally_precedes(b, a);
}

bool spacelike(MinimalCone a, MinimalCone b) {
    return !causally_comparable(a, b);
}

bool spacelike(const Region& a, const Region& b) {
    for (auto ca : a.cones())
        for (auto cb : b.cones())
            if (causally_comparable(ca, cb)) return false;
    return true;
}

bool in_causal_past(MinimalCone c, const Region& r) {
    for (auto rc : r.cones())
        if (causally_precedes(c, rc)) return true;
    return false;
}

DoubleCone join(MinimalCone a, MinimalCone b) {
    // In null coordinates each unit diamond is a unit square, so the smallest
    // continuous double cone containing both is the interval hull, and the
    // member sites are exactly the lattice points of that hull.
    int slo = std::min(sigma(a), sigma(b)), shi = std::max(sigma(a), sigma(b));
    int tlo = std::min(tau(a), tau(b)), thi = std::max(tau(a), tau(b));
    std::vector<MinimalCone> cones;
    for (int s = slo; s <= shi; ++s)
        for (int t = tlo; t <= thi; ++t) cones.push_back(from_null(s, t));
    return DoubleCone{Region(std::move(cones)), a, b};
}

Region causal_shadow(const Region& v, const CauchySegment& s) {
    for (auto c : v.cones()) {
        if (c.t2 < s.t2)
            throw PreconditionViolation("causal_shadow: region dips below the segment");
    }
    Region segment = s.cones();
    std::vector<MinimalCone> inside, outside;
    for (auto c : segment.cones()) {
        (in_causal_past(c, v) ? inside : outside).push_back(c);
    }
    std::vector<MinimalCone> shadow;
    for (auto c : inside) {
        bool ok = true;
        for (auto o : outside) {
            if (causally_comparable(c, o)) { ok = false; break; }
        }
        if (ok) shadow.push_back(c);
    }
    // A shadow cone on the window edge could have been excluded by a cone just
    // outside the window; only interior results are certified.
    for (auto c : shadow) {
        if (c.i2 - 2 < s.i2min || c.i2 + 2 > s.i2max)
            throw WindowTooSmall("causal_shadow: shadow of " + to_string(v) +
                                 " reaches the window boundary");
    }
    return Region(std::move(shadow));
}

namespace {

// null-coordinate bounding box expanded by the requested margin
Region null_box(const Region& v, int margin) {
    int slo = std::numeric_limits<int>::max(), shi = std::numeric_limits<int>::min();
    int tlo = slo, thi = shi;
    for (auto c : v.cones()) {
        slo = std::min(slo, sigma(c)); shi = std::max(shi, sigma(c));
        tlo = std::min(tlo, tau(c));   thi = std::max(thi, tau(c));
    }
    std::vector<MinimalCone> cones;
    for (int s = slo - margin; s <= shi + margin; ++s)
        for (int t = tlo - margin; t <= thi + margin; ++t)
            cones.push_back(from_null(s, t));
    return Region(std::move(cones));
}

}  // namespace

Region double_complement(const Region& v) {
    if (v.empty()) return v;
    return double_complement(v, null_box(v, 1));
}

Region double_complement(const Region& v, const Region& bound) {
    if (v.empty()) return v;
    if (!bound.contains(null_box(v, 1)))
        throw PreconditionViolation(
            "double_complement: bound must cover the causal diamond of v plus a one-cone margin");
    // V' restricted to the bound; a one-cone margin beyond the diamond is
    // enough because any excluding witness can be clamped into it.
    std::vector<MinimalCone> complement;
    for (auto w : bound.cones()) {
        bool sl = true;
        for (auto c : v.cones())
            if (causally_comparable(w, c)) { sl = false; break; }
        if (sl) complement.push_back(w);
    }
    std::vector<MinimalCone> out;
    Region hull = null_box(v, 0);  // V'' lies inside the diamond hull
    for (auto m : hull.cones()) {
        bool ok = true;
        for (auto w : complement)
            if (causally_comparable(m, w)) { ok = false; break; }
        if (ok) out.push_back(m);
    }
    return Region(std::move(out));
}

ShieldingReport shielding_report(const Region& vC, const Region& vA, const Region& vB,
                                 ShieldingVariant variant) {
    if (!spacelike(vA, vB))
        throw PreconditionViolation("is_shielding: vA and vB must be spacelike separated");
    ShieldingReport rep;
    // L1: V_C inside the causal past of V_A
    rep.l1 = true;
    for (auto c : vC.cones())
        if (!in_causal_past(c, vA)) { rep.l1 = false; break; }
    // L2: V_A inside the domain of dependence V_C''
    rep.l2 = !vC.empty() && double_complement(vC).contains(vA);
    if (variant == ShieldingVariant::Quantum) {
        // L3^Q: V_C spacelike from V_B
        rep.l3 = spacelike(vC, vB);
    } else {
        // L3^C: J_-(V_C) covers J_-(V_A) /\ J_-(V_B). Both sides are down-sets,
        // so it is enough that every pairwise meet of generators lies below vC.
        rep.l3 = true;
        for (auto a : vA.cones()) {
            for (auto b : vB.cones()) {
                MinimalCone m = from_null(std::min(sigma(a), sigma(b)),
                                          std::min(tau(a), tau(b)));
                if (!in_causal_past(m, vC)) { rep.l3 = false; break; }
            }
            if (!rep.l3) break;
        }
    }
    return rep;
}

bool is_shielding(const Region& vC, const Region& vA, const Region& vB,
                  ShieldingVariant variant) {
    return shielding_report(vC, vA, vB, variant).ok();
}

std::string to_string(MinimalCone c) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "V(%d,%d)", c.t2, c.i2);
    return buf;
}

std::string to_string(const Region& r) {
    std::string out = "{";
    bool first = true;
    for (auto c : r.cones()) {
        if (!first) out += ",";
        out += to_string(c);
        first = false;
    }
    return out + "}";
}

MinimalCone parse_cone(const std::string& text) {
    int t2 = 0, i2 = 0;
    if (std::sscanf(text.c_str(), "V(%d,%d)", &t2, &i2) != 2)
        throw ValidationError("cannot parse cone literal: " + text);
    MinimalCone c{t2, i2};
    if (!valid_cone(c)) throw ValidationError("cone coordinates must share parity: " + text);
    return c;
}

std::ostream& operator<<(std::ostream& os, MinimalCone c) {
    return os << to_string(c);
}

}  // namespace causalnet::geometry
