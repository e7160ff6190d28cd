#include "causalnet/events.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "causalnet/errors.hpp"

namespace causalnet::events {

int Configuration::value_on(geometry::MinimalCone c) const {
    auto idx = support.index_of(c);
    if (idx == static_cast<std::size_t>(-1))
        throw SupportNotContained("configuration has no value on " + geometry::to_string(c));
    return (bits >> idx) & 1u ? +1 : -1;
}

std::uint32_t project_mask(const Region& from, std::uint32_t mask, const Region& to) {
    std::uint32_t out = 0;
    const auto& cones = to.cones();
    for (std::size_t k = 0; k < cones.size(); ++k) {
        auto idx = from.index_of(cones[k]);
        if (idx == static_cast<std::size_t>(-1))
            throw SupportNotContained("project_mask: target region not contained in source");
        if ((mask >> idx) & 1u) out |= (1u << k);
    }
    return out;
}

std::uint32_t embed_mask(const Region& from, std::uint32_t mask, const Region& to) {
    std::uint32_t out = 0;
    const auto& cones = from.cones();
    for (std::size_t k = 0; k < cones.size(); ++k) {
        auto idx = to.index_of(cones[k]);
        if (idx == static_cast<std::size_t>(-1))
            throw SupportNotContained("embed_mask: source region not contained in target");
        if ((mask >> k) & 1u) out |= (1u << idx);
    }
    return out;
}

CylinderEvent::CylinderEvent(Region support, std::vector<std::uint32_t> accepted)
    : support_(std::move(support)), accepted_(std::move(accepted)) {
    if (support_.size() > 31)
        throw CapExceeded("cylinder support larger than 31 cones");
    std::sort(accepted_.begin(), accepted_.end());
    accepted_.erase(std::unique(accepted_.begin(), accepted_.end()), accepted_.end());
    const std::uint32_t limit = 1u << support_.size();
    for (auto m : accepted_)
        if (m >= limit) throw ValidationError("accepted mask exceeds support size");
    canonicalize();
}

void CylinderEvent::canonicalize() {
    if (accepted_.empty()) {  // zero event
        support_ = Region{};
        return;
    }
    // drop every cone whose value the acceptance set never depends on,
    // i.e. the set is closed under flipping that bit
    std::vector<geometry::MinimalCone> kept;
    std::vector<std::size_t> kept_idx;
    for (std::size_t k = 0; k < support_.size(); ++k) {
        bool closed = true;
        for (auto m : accepted_) {
            if (!std::binary_search(accepted_.begin(), accepted_.end(), m ^ (1u << k))) {
                closed = false;
                break;
            }
        }
        if (!closed) {
            kept.push_back(support_.cones()[k]);
            kept_idx.push_back(k);
        }
    }
    if (kept.size() == support_.size()) return;
    std::vector<std::uint32_t> reduced;
    for (auto m : accepted_) {
        std::uint32_t r = 0;
        for (std::size_t j = 0; j < kept_idx.size(); ++j)
            if ((m >> kept_idx[j]) & 1u) r |= (1u << j);
        reduced.push_back(r);
    }
    std::sort(reduced.begin(), reduced.end());
    reduced.erase(std::unique(reduced.begin(), reduced.end()), reduced.end());
    support_ = Region(std::move(kept));
    accepted_ = std::move(reduced);
}

CylinderEvent CylinderEvent::on_support(const Region& superset) const {
    if (!superset.contains(support_))
        throw SupportNotContained("on_support: target must contain the event support");
    if (is_zero()) return CylinderEvent(superset, {});
    if (superset.size() > 25)
        throw CapExceeded("on_support: target region too large to enumerate");
    std::vector<std::uint32_t> out;
    const std::uint32_t n = 1u << superset.size();
    for (std::uint32_t m = 0; m < n; ++m) {
        std::uint32_t proj = project_mask(superset, m, support_);
        if (std::binary_search(accepted_.begin(), accepted_.end(), proj)) out.push_back(m);
    }
    CylinderEvent e;
    e.support_ = superset;
    e.accepted_ = std::move(out);  // already sorted, not re-canonicalized
    return e;
}

namespace {

Region merged_support(const CylinderEvent& a, const CylinderEvent& b) {
    return geometry::region_union(a.support(), b.support());
}

}  // namespace

CylinderEvent meet(const CylinderEvent& a, const CylinderEvent& b) {
    Region u = merged_support(a, b);
    auto ea = a.on_support(u).accepted();
    auto eb = b.on_support(u).accepted();
    std::vector<std::uint32_t> out;
    std::set_intersection(ea.begin(), ea.end(), eb.begin(), eb.end(), std::back_inserter(out));
    return CylinderEvent(u, std::move(out));
}

CylinderEvent join_ev(const CylinderEvent& a, const CylinderEvent& b) {
    Region u = merged_support(a, b);
    auto ea = a.on_support(u).accepted();
    auto eb = b.on_support(u).accepted();
    std::vector<std::uint32_t> out;
    std::set_union(ea.begin(), ea.end(), eb.begin(), eb.end(), std::back_inserter(out));
    return CylinderEvent(u, std::move(out));
}

CylinderEvent complement(const CylinderEvent& e) {
    const Region& s = e.support();
    const std::uint32_t n = 1u << s.size();
    std::vector<std::uint32_t> out;
    for (std::uint32_t m = 0; m < n; ++m)
        if (!std::binary_search(e.accepted().begin(), e.accepted().end(), m)) out.push_back(m);
    return CylinderEvent(s, std::move(out));
}

std::vector<CylinderEvent> atoms(const Region& v, std::size_t cap) {
    if (v.size() > cap)
        throw CapExceeded("atoms: region has " + std::to_string(v.size()) +
                          " cones, cap is " + std::to_string(cap));
    std::vector<CylinderEvent> out;
    const std::uint32_t n = 1u << v.size();
    out.reserve(n);
    for (std::uint32_t m = 0; m < n; ++m) out.push_back(CylinderEvent::atom({v, m}));
    return out;
}

bool ClassicalState::normalized(double tol) const {
    if (weights.size() != (std::size_t{1} << domain.size())) return false;
    double sum = 0.0;
    for (double w : weights) {
        if (w < 0.0) return false;
        sum += w;
    }
    return std::abs(sum - 1.0) <= tol;
}

bool ClassicalState::faithful() const {
    for (double w : weights)
        if (w <= 0.0) return false;
    return true;
}

ClassicalState uniform_state(const Region& domain) {
    if (domain.size() > 25) throw CapExceeded("uniform_state: domain too large");
    std::size_t n = std::size_t{1} << domain.size();
    return ClassicalState{domain, std::vector<double>(n, 1.0 / static_cast<double>(n))};
}

ClassicalState product_state(const Region& domain, const std::vector<double>& plus_probability) {
    if (plus_probability.size() != domain.size())
        throw ValidationError("product_state: one probability per cone required");
    for (double p : plus_probability)
        if (p < 0.0 || p > 1.0) throw ValidationError("product_state: probability outside [0,1]");
    if (domain.size() > 25) throw CapExceeded("product_state: domain too large");
    std::size_t n = std::size_t{1} << domain.size();
    std::vector<double> w(n, 1.0);
    for (std::size_t m = 0; m < n; ++m)
        for (std::size_t k = 0; k < domain.size(); ++k)
            w[m] *= ((m >> k) & 1u) ? plus_probability[k] : 1.0 - plus_probability[k];
    return ClassicalState{domain, std::move(w)};
}

ClassicalState point_state(const Configuration& c) {
    std::size_t n = std::size_t{1} << c.support.size();
    std::vector<double> w(n, 0.0);
    w[c.bits] = 1.0;
    return ClassicalState{c.support, std::move(w)};
}

double probability(const ClassicalState& s, const CylinderEvent& e) {
    if (!s.domain.contains(e.support()))
        throw SupportNotContained("probability: event support not inside the state domain");
    if (e.is_zero()) return 0.0;
    // membership table over the event support for O(1) tests per configuration
    std::vector<char> member(std::size_t{1} << e.support().size(), 0);
    for (auto m : e.accepted()) member[m] = 1;
    // positions of the support cones inside the domain
    std::vector<std::size_t> pos;
    for (auto c : e.support().cones()) pos.push_back(s.domain.index_of(c));
    double sum = 0.0;
    for (std::size_t m = 0; m < s.weights.size(); ++m) {
        std::uint32_t proj = 0;
        for (std::size_t k = 0; k < pos.size(); ++k)
            if ((m >> pos[k]) & 1u) proj |= (1u << k);
        if (member[proj]) sum += s.weights[m];
    }
    return sum;
}

ClassicalState condition(const ClassicalState& s, const CylinderEvent& c) {
    if (!s.domain.contains(c.support()))
        throw SupportNotContained("condition: event support not inside the state domain");
    double p = probability(s, c);
    if (p <= 0.0)
        throw ZeroProbability("condition: zero-probability conditioning event");
    std::vector<char> member(std::size_t{1} << c.support().size(), 0);
    for (auto m : c.accepted()) member[m] = 1;
    std::vector<std::size_t> pos;
    for (auto cone : c.support().cones()) pos.push_back(s.domain.index_of(cone));
    std::vector<double> w(s.weights.size(), 0.0);
    for (std::size_t m = 0; m < s.weights.size(); ++m) {
        std::uint32_t proj = 0;
        for (std::size_t k = 0; k < pos.size(); ++k)
            if ((m >> pos[k]) & 1u) proj |= (1u << k);
        if (member[proj]) w[m] = s.weights[m] / p;
    }
    return ClassicalState{s.domain, std::move(w)};
}

ClassicalState restrict_state(const ClassicalState& s, const Region& sub) {
    if (!s.domain.contains(sub))
        throw SupportNotContained("restrict_state: subregion not inside the state domain");
    std::vector<std::size_t> pos;
    for (auto c : sub.cones()) pos.push_back(s.domain.index_of(c));
    std::vector<double> w(std::size_t{1} << sub.size(), 0.0);
    for (std::size_t m = 0; m < s.weights.size(); ++m) {
        std::uint32_t proj = 0;
        for (std::size_t k = 0; k < pos.size(); ++k)
            if ((m >> pos[k]) & 1u) proj |= (1u << k);
        w[proj] += s.weights[m];
    }
    return ClassicalState{sub, std::move(w)};
}

namespace {

// An event of Sigma(v1), read as a set S of v1-configurations, is measurable
// with respect to `probe` iff within every probe-equivalence class of full
// configurations the occurring v1-projections are uniformly in or out of S.
// The distinct per-class occurrence masks are precomputed here.
std::vector<std::uint64_t> class_masks(const Region& v1, const Region& u, const Region& probe) {
    const std::uint32_t n = 1u << u.size();
    Region probe_in_u = geometry::region_intersection(u, probe);
    std::vector<std::uint64_t> per_class(std::size_t{1} << probe_in_u.size(), 0);
    for (std::uint32_t m = 0; m < n; ++m) {
        std::uint32_t cls = project_mask(u, m, probe_in_u);
        std::uint32_t in_v1 = project_mask(u, m, v1);
        per_class[cls] |= std::uint64_t{1} << in_v1;
    }
    std::sort(per_class.begin(), per_class.end());
    per_class.erase(std::unique(per_class.begin(), per_class.end()), per_class.end());
    return per_class;
}

bool monochromatic(std::uint64_t subset, const std::vector<std::uint64_t>& masks) {
    for (auto m : masks) {
        std::uint64_t hit = subset & m;
        if (hit != 0 && hit != m) return false;
    }
    return true;
}

}  // namespace

bool check_intersection_property(const Region& v1, const Region& v2, std::size_t cap) {
    // enumerate the full event algebra of the smaller region
    const Region& small = v1.size() <= v2.size() ? v1 : v2;
    const Region& other = v1.size() <= v2.size() ? v2 : v1;
    if (small.size() > cap || cap > 4)
        throw CapExceeded("check_intersection_property: region too large to enumerate");
    Region u = geometry::region_union(v1, v2);
    if (u.size() > 2 * cap + 4)
        throw CapExceeded("check_intersection_property: union too large to enumerate");
    Region inter = geometry::region_intersection(v1, v2);

    auto other_masks = class_masks(small, u, other);
    auto inter_masks = class_masks(small, u, inter);

    const std::uint32_t atoms_n = 1u << small.size();
    const std::uint64_t subsets = std::uint64_t{1} << atoms_n;
    std::uint64_t shared = 0;
    for (std::uint64_t s = 0; s < subsets; ++s) {
        bool in_other = monochromatic(s, other_masks);
        bool in_inter = monochromatic(s, inter_masks);
        if (in_other != in_inter) return false;
        if (in_other) ++shared;
    }
    // the shared events must be a full copy of the intersection algebra
    return shared == (std::uint64_t{1} << (std::uint32_t{1} << inter.size()));
}

}  // namespace causalnet::events
