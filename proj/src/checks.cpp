#include "causalnet/checks.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <functional>
#include <future>
#include <json.hpp>
#include <limits>
#include <random>
#include <set>
#include <sstream>

#include "causalnet/errors.hpp"

namespace causalnet::checks {

using geometry::MinimalCone;

namespace {

std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ull;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
    return x ^ (x >> 31);
}

std::string atom_string(const Region& r, std::uint32_t mask) {
    std::string s;
    for (std::size_t k = 0; k < r.size(); ++k) s += ((mask >> k) & 1u) ? '+' : '-';
    return s;
}

}  // namespace

std::vector<Region> enumerate_event_regions(const CauchySegment& seg, int layers,
                                            std::size_t max_support) {
    Region window = dynamics::trapezoid(seg, layers);
    std::set<std::vector<MinimalCone>> seen;
    std::vector<Region> out;
    for (auto g1 : window.cones()) {
        for (auto g2 : window.cones()) {
            auto dc = geometry::join(g1, g2);
            if (dc.region.size() > max_support) continue;
            if (!window.contains(dc.region)) continue;
            if (seen.insert(dc.region.cones()).second) out.push_back(dc.region);
        }
    }
    std::sort(out.begin(), out.end(),
              [](const Region& a, const Region& b) { return a.cones() < b.cones(); });
    return out;
}

std::vector<Region> enumerate_screeners(const CauchySegment& seg, int layers, const Region& vA,
                                        const Region& vB, std::size_t max_size) {
    std::set<std::vector<MinimalCone>> seen;
    std::vector<Region> out;
    // thickened surfaces (u, u+1) from the base of the trapezoid upward
    for (int k = 0; k <= layers; ++k) {
        int shrink_lower = k == 0 ? 0 : k - 1;
        int lo = seg.i2min + (k == 0 ? 0 : shrink_lower);
        int hi = seg.i2max - (k == 0 ? 0 : shrink_lower);
        CauchySegment surface{seg.t2 + k, lo, hi};
        // pool: surface cones inside J_-(V_A) in spatial order, upper layer
        // clipped one half-unit narrower when above the initial segment
        std::vector<MinimalCone> pool;
        for (auto c : surface.layer(surface.t2)) {
            if (geometry::in_causal_past(c, vA)) pool.push_back(c);
        }
        int upper_lo = k == 0 ? lo : lo + 1, upper_hi = k == 0 ? hi : hi - 1;
        for (auto c : surface.layer(surface.t2 + 1)) {
            if (c.i2 < upper_lo || c.i2 > upper_hi) continue;
            if (geometry::in_causal_past(c, vA)) pool.push_back(c);
        }
        std::sort(pool.begin(), pool.end(),
                  [](MinimalCone a, MinimalCone b) { return a.i2 < b.i2; });
        for (std::size_t first = 0; first < pool.size(); ++first) {
            for (std::size_t last = first; last < pool.size() && last - first < max_size;
                 ++last) {
                std::vector<MinimalCone> piece(pool.begin() + first, pool.begin() + last + 1);
                Region candidate(piece);
                if (!geometry::is_shielding(candidate, vA, vB,
                                            geometry::ShieldingVariant::Classical))
                    continue;
                if (seen.insert(candidate.cones()).second) out.push_back(candidate);
            }
        }
    }
    return out;
}

std::vector<QuintupleGroup> enumerate_groups(const CauchySegment& seg,
                                             const StochasticCheckOptions& opt) {
    auto regions = enumerate_event_regions(seg, opt.layers, opt.max_event_support);
    std::vector<QuintupleGroup> groups;
    for (const auto& vA : regions) {
        for (const auto& vB : regions) {
            if (vA == vB || !geometry::spacelike(vA, vB)) continue;
            for (auto& vC : enumerate_screeners(seg, opt.layers, vA, vB, opt.max_screener_size)) {
                QuintupleGroup g{vA, vB, vC, {}};
                g.support_union = geometry::region_union(geometry::region_union(vA, vB), vC);
                groups.push_back(std::move(g));
            }
        }
    }
    return groups;
}

namespace {

struct GroupOutcome {
    std::size_t cases = 0, skipped = 0;
    double max_defect = 0.0;
    std::vector<Defect> failures;
    std::vector<Defect> rows;
};

// quintuples in one group, in fixed order: conditioning atom, then the two
// event bitmasks (proper events only)
void sweep_group(const QuintupleGroup& g, const events::ClassicalState& marginal,
                 const StochasticCheckOptions& opt, std::size_t case_offset,
                 std::size_t total_cases, bool keep_rows, GroupOutcome& out) {
    const Region& u = marginal.domain;
    const std::size_t nA = std::size_t{1} << g.vA.size();
    const std::size_t nB = std::size_t{1} << g.vB.size();
    const std::size_t nC = std::size_t{1} << g.vC.size();
    std::vector<double> hist(nA * nB * nC, 0.0);
    std::vector<std::size_t> posA, posB, posC;
    for (auto c : g.vA.cones()) posA.push_back(u.index_of(c));
    for (auto c : g.vB.cones()) posB.push_back(u.index_of(c));
    for (auto c : g.vC.cones()) posC.push_back(u.index_of(c));
    for (std::size_t m = 0; m < marginal.weights.size(); ++m) {
        std::size_t ia = 0, ib = 0, ic = 0;
        for (std::size_t k = 0; k < posA.size(); ++k)
            if ((m >> posA[k]) & 1u) ia |= (std::size_t{1} << k);
        for (std::size_t k = 0; k < posB.size(); ++k)
            if ((m >> posB[k]) & 1u) ib |= (std::size_t{1} << k);
        for (std::size_t k = 0; k < posC.size(); ++k)
            if ((m >> posC[k]) & 1u) ic |= (std::size_t{1} << k);
        hist[(ia * nB + ib) * nC + ic] += marginal.weights[m];
    }

    const std::size_t events_a = (std::size_t{1} << nA) - 2;
    const std::size_t events_b = (std::size_t{1} << nB) - 2;
    const double sample_ratio =
        opt.max_cases == 0 ? 1.0
                           : std::min(1.0, static_cast<double>(opt.max_cases) /
                                               static_cast<double>(total_cases));
    std::size_t local_index = 0;
    for (std::size_t ic = 0; ic < nC; ++ic) {
        double pC = 0.0;
        std::vector<double> cell(nA * nB);
        std::vector<double> rowA(nA, 0.0), colB(nB, 0.0);
        for (std::size_t ia = 0; ia < nA; ++ia)
            for (std::size_t ib = 0; ib < nB; ++ib) {
                double w = hist[(ia * nB + ib) * nC + ic];
                cell[ia * nB + ib] = w;
                rowA[ia] += w;
                colB[ib] += w;
                pC += w;
            }
        if (pC <= 0.0) {
            ++out.skipped;
            local_index += events_a * events_b;
            continue;
        }
        for (std::size_t sa = 1; sa <= events_a; ++sa) {
            double pAC = 0.0;
            std::vector<double> tb(nB, 0.0);
            for (std::size_t ia = 0; ia < nA; ++ia) {
                if (!((sa >> ia) & 1u)) continue;
                pAC += rowA[ia];
                for (std::size_t ib = 0; ib < nB; ++ib) tb[ib] += cell[ia * nB + ib];
            }
            for (std::size_t sb = 1; sb <= events_b; ++sb) {
                const std::size_t case_index = case_offset + local_index;
                ++local_index;
                if (sample_ratio < 1.0) {
                    double roll = static_cast<double>(
                                      splitmix64(opt.seed ^ case_index) >> 11) /
                                  9007199254740992.0;  // 2^53
                    if (roll >= sample_ratio) continue;
                }
                double pBC = 0.0, pABC = 0.0;
                for (std::size_t ib = 0; ib < nB; ++ib) {
                    if (!((sb >> ib) & 1u)) continue;
                    pBC += colB[ib];
                    pABC += tb[ib];
                }
                ++out.cases;
                double cond_ab = pABC / pC;
                double cond_a = pAC / pC;
                double cond_b = pBC / pC;
                double defect = std::abs(cond_ab - cond_a * cond_b);
                if (pBC > 0.0) defect = std::max(defect, std::abs(pABC / pBC - cond_a));
                if (pAC > 0.0) defect = std::max(defect, std::abs(pABC / pAC - cond_b));
                out.max_defect = std::max(out.max_defect, defect);
                if (defect > opt.tolerance || keep_rows) {
                    Defect d;
                    d.case_index = case_index;
                    d.q.vA = g.vA;
                    d.q.vB = g.vB;
                    d.q.vC = g.vC;
                    d.q.a = CylinderEvent(g.vA, [&] {
                        std::vector<std::uint32_t> acc;
                        for (std::size_t ia = 0; ia < nA; ++ia)
                            if ((sa >> ia) & 1u) acc.push_back(static_cast<std::uint32_t>(ia));
                        return acc;
                    }());
                    d.q.b = CylinderEvent(g.vB, [&] {
                        std::vector<std::uint32_t> acc;
                        for (std::size_t ib = 0; ib < nB; ++ib)
                            if ((sb >> ib) & 1u) acc.push_back(static_cast<std::uint32_t>(ib));
                        return acc;
                    }());
                    d.q.c_atom = static_cast<std::uint32_t>(ic);
                    d.p_ab_c = cond_ab;
                    d.p_a_c = cond_a;
                    d.p_b_c = cond_b;
                    d.defect = defect;
                    if (defect > opt.tolerance) out.failures.push_back(d);
                    if (keep_rows) out.rows.push_back(std::move(d));
                }
            }
        }
    }
}

std::size_t group_case_count(const QuintupleGroup& g) {
    const std::size_t nA = std::size_t{1} << g.vA.size();
    const std::size_t nB = std::size_t{1} << g.vB.size();
    const std::size_t nC = std::size_t{1} << g.vC.size();
    return nC * ((std::size_t{1} << nA) - 2) * ((std::size_t{1} << nB) - 2);
}

}  // namespace

CheckReport run_local_causality(const CauchySegment& seg, const ClassicalState& initial,
                                const TransitionTable& table,
                                const std::vector<QuintupleGroup>& groups,
                                const StochasticCheckOptions& opt) {
    auto t0 = std::chrono::steady_clock::now();
    table.validate();
    dynamics::RuleProvider rule = opt.acausal_fixture ? dynamics::acausal_rule(table, seg)
                                                      : dynamics::shadow_rule(table);
    std::vector<std::size_t> offsets(groups.size() + 1, 0);
    for (std::size_t i = 0; i < groups.size(); ++i)
        offsets[i + 1] = offsets[i] + group_case_count(groups[i]);
    const std::size_t total_cases = offsets.back();

    std::vector<GroupOutcome> outcomes(groups.size());
    auto work = [&](std::size_t begin, std::size_t end) {
        for (std::size_t i = begin; i < end; ++i) {
            auto marginal = dynamics::extended_marginal(seg, initial, rule, opt.layers,
                                                        groups[i].support_union);
            bool keep_rows = offsets[i] < opt.max_csv_rows;
            sweep_group(groups[i], marginal, opt, offsets[i], total_cases, keep_rows,
                        outcomes[i]);
        }
    };
    const int threads = std::max(1, opt.threads);
    if (threads == 1 || groups.size() < 2) {
        work(0, groups.size());
    } else {
        std::vector<std::future<void>> futs;
        std::size_t chunk = (groups.size() + threads - 1) / threads;
        for (int t = 0; t < threads; ++t) {
            std::size_t b = t * chunk, e = std::min(groups.size(), b + chunk);
            if (b >= e) break;
            futs.push_back(std::async(std::launch::async, work, b, e));
        }
        for (auto& f : futs) f.get();
    }

    CheckReport rep;
    rep.tolerance = opt.tolerance;
    for (std::size_t i = 0; i < groups.size(); ++i) {
        rep.cases += outcomes[i].cases;
        rep.skipped_zero_probability += outcomes[i].skipped;
        rep.max_defect = std::max(rep.max_defect, outcomes[i].max_defect);
        for (auto& f : outcomes[i].failures) rep.failures.push_back(std::move(f));
        for (auto& r : outcomes[i].rows)
            if (rep.sampled.size() < opt.max_csv_rows) rep.sampled.push_back(std::move(r));
    }
    rep.wall_clock_ms = std::chrono::duration_cast<std::chrono::milliseconds>(
                            std::chrono::steady_clock::now() - t0)
                            .count();
    return rep;
}

CheckReport verify_local_causality_stochastic(const CauchySegment& seg,
                                              const ClassicalState& initial,
                                              const TransitionTable& table,
                                              const StochasticCheckOptions& opt) {
    return run_local_causality(seg, initial, table, enumerate_groups(seg, opt), opt);
}

Defect recheck_quintuple(const CauchySegment& seg, const ClassicalState& initial,
                         const TransitionTable& table, const Quintuple& q,
                         const StochasticCheckOptions& opt) {
    dynamics::RuleProvider rule = opt.acausal_fixture ? dynamics::acausal_rule(table, seg)
                                                      : dynamics::shadow_rule(table);
    Region u = geometry::region_union(geometry::region_union(q.vA, q.vB), q.vC);
    auto marginal = dynamics::extended_marginal(seg, initial, rule, opt.layers, u);
    QuintupleGroup g{q.vA, q.vB, q.vC, u};
    GroupOutcome out;
    StochasticCheckOptions single = opt;
    single.max_cases = 0;  // exhaustive within the group
    sweep_group(g, marginal, single, 0, group_case_count(g), true, out);
    for (const auto& row : out.rows) {
        if (row.q.c_atom == q.c_atom && row.q.a == q.a && row.q.b == q.b) return row;
    }
    throw ValidationError("recheck_quintuple: quintuple not in the enumeration domain");
}

std::string report_to_json(const CheckReport& rep) {
    nlohmann::json j;
    j["scenario"] = rep.scenario;
    j["cases"] = rep.cases;
    j["skippedZeroProbability"] = rep.skipped_zero_probability;
    j["maxDefect"] = rep.max_defect;
    j["tolerance"] = rep.tolerance;
    j["passed"] = rep.passed();
    auto dump = [](const Defect& d) {
        nlohmann::json r;
        r["caseIndex"] = d.case_index;
        r["vA"] = geometry::to_string(d.q.vA);
        r["vB"] = geometry::to_string(d.q.vB);
        r["vC"] = geometry::to_string(d.q.vC);
        r["atom"] = atom_string(d.q.vC, d.q.c_atom);
        nlohmann::json ea = nlohmann::json::array(), eb = nlohmann::json::array();
        for (auto m : d.q.a.accepted()) ea.push_back(m);
        for (auto m : d.q.b.accepted()) eb.push_back(m);
        r["eventA"] = {{"support", geometry::to_string(d.q.a.support())}, {"accepted", ea}};
        r["eventB"] = {{"support", geometry::to_string(d.q.b.support())}, {"accepted", eb}};
        r["pABC"] = d.p_ab_c;
        r["pAC"] = d.p_a_c;
        r["pBC"] = d.p_b_c;
        r["defect"] = d.defect;
        return r;
    };
    j["failures"] = nlohmann::json::array();
    for (const auto& f : rep.failures) j["failures"].push_back(dump(f));
    return j.dump(2) + "\n";
}

std::string defects_csv(const CheckReport& rep) {
    std::ostringstream os;
    os << "case_index,vA,vB,vC,atom,p_AB_C,p_A_C,p_B_C,defect\n";
    os.precision(17);
    auto row = [&os](const Defect& d) {
        os << d.case_index << ',' << geometry::to_string(d.q.vA) << '|'
           << geometry::to_string(d.q.a.support()) << ',' << geometry::to_string(d.q.vB) << '|'
           << geometry::to_string(d.q.b.support()) << ',' << geometry::to_string(d.q.vC) << ','
           << atom_string(d.q.vC, d.q.c_atom) << ',' << d.p_ab_c << ',' << d.p_a_c << ','
           << d.p_b_c << ',' << d.defect << '\n';
    };
    for (const auto& d : rep.sampled) row(d);
    // failures always appear, even past the row cap
    for (const auto& d : rep.failures)
        if (d.case_index >= (rep.sampled.empty() ? 0 : rep.sampled.back().case_index + 1))
            row(d);
    return os.str();
}

// --- common causes -------------------------------------------------------------

Region past_region(const Region& domain, const Region& vA, const Region& vB, PastKind past) {
    std::vector<MinimalCone> out;
    for (auto c : domain.cones()) {
        bool inA = geometry::in_causal_past(c, vA);
        bool inB = geometry::in_causal_past(c, vB);
        bool take = false;
        switch (past) {
            case PastKind::Weak: take = inA || inB; break;
            case PastKind::Common: take = inA && inB; break;
            case PastKind::Strong: {
                take = true;
                for (auto x : vA.cones()) take = take && geometry::causally_precedes(c, x);
                for (auto x : vB.cones()) take = take && geometry::causally_precedes(c, x);
                break;
            }
        }
        if (take) out.push_back(c);
    }
    return Region(std::move(out));
}

namespace {

// set partitions of {0..n-1} by restricted growth strings
void partitions_of(std::size_t n, const std::function<void(const std::vector<int>&)>& visit) {
    std::vector<int> rgs(n, 0);
    while (true) {
        visit(rgs);
        // next restricted growth string
        std::size_t i = n;
        while (i-- > 1) {
            int maxp = 0;
            for (std::size_t j = 0; j < i; ++j) maxp = std::max(maxp, rgs[j]);
            if (rgs[i] <= maxp) {
                ++rgs[i];
                for (std::size_t j = i + 1; j < n; ++j) rgs[j] = 0;
                break;
            }
        }
        if (i == 0) break;
    }
}

bool event_below(const CylinderEvent& c, const CylinderEvent& x) {
    return meet(c, x) == c;
}

}  // namespace

std::vector<ClassicalCommonCause> find_common_cause(const ClassicalState& state,
                                                    const CylinderEvent& a,
                                                    const CylinderEvent& b,
                                                    const CommonCauseOptions& opt) {
    double pa = probability(state, a), pb = probability(state, b);
    double pab = probability(state, meet(a, b));
    if (std::abs(pab - pa * pb) <= opt.tolerance)
        throw PreconditionViolation("find_common_cause: the events do not correlate");
    Region pool = past_region(state.domain, a.support(), b.support(), opt.past);
    if (pool.empty())
        throw NoCandidateRegion("find_common_cause: the chosen past contains no cones");

    auto screening_defect = [&](const std::vector<CylinderEvent>& members) {
        double worst = 0.0;
        for (const auto& c : members) {
            double pc = probability(state, c);
            if (pc <= 0.0) return std::numeric_limits<double>::infinity();
            auto cond = events::condition(state, c);
            double d = std::abs(probability(cond, meet(a, b)) -
                                probability(cond, a) * probability(cond, b));
            worst = std::max(worst, d);
        }
        return worst;
    };
    auto trivial_tag = [&](const std::vector<CylinderEvent>& members) {
        for (const auto& c : members) {
            if (!event_below(c, a) && !event_below(c, events::complement(a)) &&
                !event_below(c, b) && !event_below(c, events::complement(b)))
                return false;
        }
        return true;
    };

    std::vector<ClassicalCommonCause> found;
    if (opt.mode == CommonCauseOptions::Mode::MaximalAtomic) {
        Region vc = a.support();
        if (!pool.contains(vc))
            throw NoCandidateRegion(
                "find_common_cause: support of A is outside the chosen past");
        std::vector<CylinderEvent> members = events::atoms(vc);
        ClassicalCommonCause cc{vc, members, trivial_tag(members), screening_defect(members)};
        if (cc.max_defect <= opt.tolerance) found.push_back(std::move(cc));
        return found;
    }

    // exhaustive: all subregions up to the cap, all set partitions of their atoms
    const std::uint32_t subsets = 1u << pool.size();
    for (std::uint32_t mask = 1; mask < subsets; ++mask) {
        if (static_cast<std::size_t>(__builtin_popcount(mask)) > opt.max_region_size) continue;
        std::vector<MinimalCone> cones;
        for (std::size_t k = 0; k < pool.size(); ++k)
            if ((mask >> k) & 1u) cones.push_back(pool.cones()[k]);
        Region vc(cones);
        const std::size_t n_atoms = std::size_t{1} << vc.size();
        partitions_of(n_atoms, [&](const std::vector<int>& rgs) {
            int blocks = 1 + *std::max_element(rgs.begin(), rgs.end());
            if (blocks < 2) return;  // the unit alone cannot screen a correlation
            std::vector<std::vector<std::uint32_t>> groups(blocks);
            for (std::size_t atom = 0; atom < n_atoms; ++atom)
                groups[rgs[atom]].push_back(static_cast<std::uint32_t>(atom));
            std::vector<CylinderEvent> members;
            for (auto& gmask : groups) members.emplace_back(vc, gmask);
            double defect = screening_defect(members);
            if (defect <= opt.tolerance)
                found.push_back(
                    ClassicalCommonCause{vc, members, trivial_tag(members), defect});
        });
    }
    return found;
}

QuantumCommonCause kinematic_common_cause(const qnet::FiniteNet& net,
                                          const qnet::DensityState& phi,
                                          const qnet::Projection& a, const qnet::Projection& b,
                                          std::uint64_t seed) {
    const auto& na = net.algebra(a.region);
    auto partition = qnet::maximal_atomic_partition(na, seed);
    QuantumCommonCause out;
    out.partition = qnet::PartitionOfUnit{partition, a.region};
    out.commuting = true;
    out.trivial = true;
    for (const auto& c : partition) {
        if ((c * a.matrix - a.matrix * c).norm() > qnet::kAlgTol ||
            (c * b.matrix - b.matrix * c).norm() > qnet::kAlgTol)
            out.commuting = false;
        bool below_a = (c * a.matrix - c).norm() <= qnet::kAlgTol;
        bool below_na = (c * a.matrix).norm() <= qnet::kAlgTol;
        bool below_b = (c * b.matrix - c).norm() <= qnet::kAlgTol;
        bool below_nb = (c * b.matrix).norm() <= qnet::kAlgTol;
        if (!below_a && !below_na && !below_b && !below_nb) out.trivial = false;
        double pc = qnet::expectation(phi, c);
        if (pc <= 1e-12) continue;
        double ab = (phi.rho * c * a.matrix * b.matrix * c).trace().real() / pc;
        double ea = (phi.rho * c * a.matrix * c).trace().real() / pc;
        double eb = (phi.rho * c * b.matrix * c).trace().real() / pc;
        out.max_defect = std::max(out.max_defect, std::abs(ab - ea * eb));
    }
    return out;
}

namespace {

qnet::Matrix scaled_algebra_unitary(const qnet::Subalgebra& a, std::uint64_t seed, double eps) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> g(0.0, 1.0);
    qnet::Matrix x = qnet::Matrix::Zero(a.ambient_dim(), a.ambient_dim());
    for (const auto& basis : a.basis()) x += std::complex<double>(g(rng), g(rng)) * basis;
    qnet::Matrix h = (x + x.adjoint()) / 2.0;
    Eigen::SelfAdjointEigenSolver<qnet::Matrix> es(h);
    qnet::Matrix u = qnet::Matrix::Zero(h.rows(), h.cols());
    for (int k = 0; k < es.eigenvalues().size(); ++k)
        u += std::exp(std::complex<double>(0.0, eps * es.eigenvalues()(k))) *
             es.eigenvectors().col(k) * es.eigenvectors().col(k).adjoint();
    return u;
}

double partition_screening_defect(const qnet::DensityState& phi,
                                  const std::vector<qnet::Matrix>& partition,
                                  const qnet::Matrix& a, const qnet::Matrix& b) {
    double worst = 0.0;
    for (const auto& c : partition) {
        double pc = (phi.rho * c).trace().real();
        if (pc <= 1e-12) continue;
        double ab = (phi.rho * c * a * b * c).trace().real() / pc;
        double ea = (phi.rho * c * a * c).trace().real() / pc;
        double eb = (phi.rho * c * b * c).trace().real() / pc;
        worst = std::max(worst, std::abs(ab - ea * eb));
    }
    return worst;
}

}  // namespace

std::optional<QuantumCommonCause> search_noncommuting_common_cause(
    const qnet::FiniteNet& net, const qnet::DensityState& phi, const qnet::Projection& a,
    const qnet::Projection& b, const Region& vC, std::uint64_t seed, int iterations) {
    const auto& nc = net.algebra(vC);
    auto best = qnet::maximal_atomic_partition(nc, seed);
    double best_defect = partition_screening_defect(phi, best, a.matrix, b.matrix);
    double eps = 0.8;
    for (int it = 0; it < iterations && best_defect > 1e-9; ++it) {
        qnet::Matrix u = scaled_algebra_unitary(nc, seed + 1000 + it, eps);
        std::vector<qnet::Matrix> cand;
        cand.reserve(best.size());
        for (const auto& c : best) cand.push_back(u * c * u.adjoint());
        double d = partition_screening_defect(phi, cand, a.matrix, b.matrix);
        if (d < best_defect) {
            best = std::move(cand);
            best_defect = d;
        } else {
            eps *= 0.97;  // cool down the step size
        }
    }
    if (best_defect > 1e-9) return std::nullopt;
    QuantumCommonCause out;
    out.partition = qnet::PartitionOfUnit{best, vC};
    out.max_defect = best_defect;
    out.commuting = true;
    out.trivial = true;
    for (const auto& c : best) {
        if ((c * a.matrix - a.matrix * c).norm() > qnet::kAlgTol ||
            (c * b.matrix - b.matrix * c).norm() > qnet::kAlgTol)
            out.commuting = false;
        bool below = (c * a.matrix - c).norm() <= qnet::kAlgTol ||
                     (c * a.matrix).norm() <= qnet::kAlgTol ||
                     (c * b.matrix - c).norm() <= qnet::kAlgTol ||
                     (c * b.matrix).norm() <= qnet::kAlgTol;
        if (!below) out.trivial = false;
    }
    return out;
}

// --- Clauser-Horne --------------------------------------------------------------

double ch_value(const qnet::DensityState& phi, const qnet::Matrix& a1, const qnet::Matrix& a2,
                const qnet::Matrix& b1, const qnet::Matrix& b2) {
    qnet::Matrix combo = a1 * b1 + a1 * b2 + a2 * b1 - a2 * b2 - a1 - b1;
    return (phi.rho * combo).trace().real();
}

double ch_value(const ClassicalState& state, const CylinderEvent& a1, const CylinderEvent& a2,
                const CylinderEvent& b1, const CylinderEvent& b2) {
    using events::probability;
    return probability(state, meet(a1, b1)) + probability(state, meet(a1, b2)) +
           probability(state, meet(a2, b1)) - probability(state, meet(a2, b2)) -
           probability(state, a1) - probability(state, b1);
}

Prop3Report verify_prop3(const qnet::FiniteNet& net, const qnet::DensityState& phi,
                         const qnet::Projection& a1, const qnet::Projection& a2,
                         const qnet::Projection& b1, const qnet::Projection& b2,
                         const qnet::PartitionOfUnit& part, double tolerance) {
    part.validate();
    if (!(a1.region == a2.region) || !(b1.region == b2.region))
        throw ValidationError("verify_prop3: the A and B pairs must share their regions");
    const auto& nc = net.algebra(part.region);
    // maximal atomic partition: right member count, every member minimal
    auto canonical = qnet::maximal_atomic_partition(nc, 1);
    if (part.projections.size() != canonical.size())
        throw ValidationError("verify_prop3: partition is not maximal in N(V_C)");
    for (const auto& c : part.projections) {
        if (!nc.contains(c, 1e-8))
            throw ValidationError("verify_prop3: partition member outside N(V_C)");
        for (const auto& basis : nc.basis()) {
            qnet::Matrix cbc = c * basis * c;
            std::complex<double> r = cbc.trace() / c.trace();
            if ((cbc - r * c).norm() > 1e-8)
                throw ValidationError("verify_prop3: partition member is not minimal");
        }
    }
    auto variant = net.quasilocal().is_abelian() ? geometry::ShieldingVariant::Classical
                                                 : geometry::ShieldingVariant::Quantum;
    if (!geometry::is_shielding(part.region, a1.region, b1.region, variant))
        throw PreconditionViolation("verify_prop3: partition region is not shielding");

    Prop3Report rep;
    rep.commuting = true;
    const qnet::Matrix* four[4] = {&a1.matrix, &a2.matrix, &b1.matrix, &b2.matrix};
    for (int i = 0; i < 4; ++i) {
        bool commutes = true;
        for (const auto& c : part.projections)
            if ((c * (*four[i]) - (*four[i]) * c).norm() > qnet::kAlgTol) commutes = false;
        rep.commutes_with[i] = commutes;
        rep.commuting = rep.commuting && commutes;
    }
    rep.correlated = true;
    for (const auto* am : {&a1.matrix, &a2.matrix})
        for (const auto* bm : {&b1.matrix, &b2.matrix}) {
            double joint = (phi.rho * (*am) * (*bm)).trace().real();
            double pa = (phi.rho * (*am)).trace().real();
            double pb = (phi.rho * (*bm)).trace().real();
            if (std::abs(joint - pa * pb) <= tolerance) rep.correlated = false;
        }
    rep.ch_original = ch_value(phi, a1.matrix, a2.matrix, b1.matrix, b2.matrix);
    qnet::DensityState modified = qnet::nonselective(phi, part);
    rep.ch_modified = ch_value(modified, a1.matrix, a2.matrix, b1.matrix, b2.matrix);
    rep.modified_in_bounds =
        rep.ch_modified >= -1.0 - tolerance && rep.ch_modified <= tolerance;
    rep.original_in_bounds =
        rep.ch_original >= -1.0 - tolerance && rep.ch_original <= tolerance;
    return rep;
}

}  // namespace causalnet::checks
