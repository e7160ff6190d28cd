#include "causalnet/dynamics.hpp"

#include <algorithm>
#include <cmath>

#include "causalnet/errors.hpp"

namespace causalnet::dynamics {

int TransitionTable::parse_context(const std::string& key) {
    if (key.size() != 3 || key.find_first_not_of("+-") != std::string::npos)
        throw ValidationError("transition context must be three of '+'/'-': " + key);
    return context_index(key[0] == '+' ? 1 : -1, key[1] == '+' ? 1 : -1,
                         key[2] == '+' ? 1 : -1);
}

std::string TransitionTable::context_string(int index) {
    std::string s = "---";
    if (index & 1) s[0] = '+';
    if (index & 2) s[1] = '+';
    if (index & 4) s[2] = '+';
    return s;
}

TransitionTable TransitionTable::constant(double value) {
    TransitionTable t;
    t.p.fill(value);
    return t;
}

TransitionTable TransitionTable::majority() {
    TransitionTable t;
    for (int c = 0; c < 8; ++c) {
        int ones = (c & 1) + ((c >> 1) & 1) + ((c >> 2) & 1);
        t.p[c] = ones >= 2 ? 1.0 : 0.0;
    }
    return t;
}

void TransitionTable::validate() const {
    for (int c = 0; c < 8; ++c)
        if (!(p[c] >= 0.0 && p[c] <= 1.0))
            throw ValidationError("transition probability for context " + context_string(c) +
                                  " outside [0,1]");
}

std::array<MinimalCone, 3> cell_shadow(MinimalCone cell) {
    return {MinimalCone{cell.t2 - 1, cell.i2 - 1}, MinimalCone{cell.t2 - 1, cell.i2 + 1},
            MinimalCone{cell.t2 - 2, cell.i2}};
}

std::vector<MinimalCone> layer_cells(const CauchySegment& seg, int layer) {
    if (layer < 1) throw ValidationError("layer index starts at 1");
    int t2 = seg.t2 + 1 + layer;
    int lo = seg.i2min + layer, hi = seg.i2max - layer;
    std::vector<MinimalCone> cells;
    int first = lo + (((lo ^ t2) & 1) ? 1 : 0);
    for (int i2 = first; i2 <= hi; i2 += 2) cells.push_back(MinimalCone{t2, i2});
    return cells;
}

Region trapezoid(const CauchySegment& seg, int layers) {
    std::vector<MinimalCone> cones = seg.cones().cones();
    for (int n = 1; n <= layers; ++n) {
        auto cells = layer_cells(seg, n);
        cones.insert(cones.end(), cells.begin(), cells.end());
    }
    return Region(std::move(cones));
}

RuleProvider shadow_rule(const TransitionTable& table) {
    return [table](MinimalCone cell) {
        auto sh = cell_shadow(cell);
        CellRule rule;
        rule.deps.assign(sh.begin(), sh.end());
        rule.prob_plus = [table](std::uint32_t ctx) { return table.p[ctx & 7u]; };
        return rule;
    };
}

RuleProvider acausal_rule(const TransitionTable& table, const CauchySegment& seg) {
    return [table, seg](MinimalCone cell) {
        auto sh = cell_shadow(cell);
        CellRule rule;
        rule.deps.assign(sh.begin(), sh.end());
        // peek at a spacelike cone on the layer below, two sites to the right
        int n = cell.t2 - seg.t2 - 1;  // index of the layer being grown
        MinimalCone peek{cell.t2 - 1, cell.i2 + 3};
        if (peek.i2 <= seg.i2max - (n - 1)) {
            rule.deps.push_back(peek);
            rule.prob_plus = [table](std::uint32_t ctx) {
                double p = table.p[ctx & 7u];
                return (ctx & 8u) ? 1.0 - p : p;
            };
        } else {
            rule.prob_plus = [table](std::uint32_t ctx) { return table.p[ctx & 7u]; };
        }
        return rule;
    };
}

namespace {

void check_initial(const CauchySegment& seg, const ClassicalState& initial) {
    if (initial.domain != seg.cones())
        throw ValidationError("initial state domain must equal the Cauchy segment cones");
    if (!initial.normalized())
        throw ValidationError("initial state is not a normalized distribution");
}

}  // namespace

ExtensionResult extend_forward_general(const CauchySegment& seg, const ClassicalState& initial,
                                       const RuleProvider& rule, int layers,
                                       std::size_t cap_bits) {
    check_initial(seg, initial);
    if (layers < 0) throw ValidationError("layer count must be nonnegative");
    Region domain = initial.domain;
    std::vector<double> w = initial.weights;
    for (int n = 1; n <= layers; ++n) {
        auto cells = layer_cells(seg, n);
        if (cells.empty())
            throw WindowTooSmall("extend_forward: window exhausted at layer " +
                                 std::to_string(n));
        for (auto cell : cells) {
            if (domain.size() + 1 > cap_bits)
                throw CapExceeded("extend_forward: trapezoid exceeds the configuration cap");
            CellRule r = rule(cell);
            std::vector<std::size_t> pos;
            for (auto d : r.deps) {
                auto idx = domain.index_of(d);
                if (idx == static_cast<std::size_t>(-1))
                    throw WindowTooSmall("extend_forward: conditioning cone " +
                                         geometry::to_string(d) + " outside the window");
                pos.push_back(idx);
            }
            // the new cell sorts after every existing cone, so it is the top bit
            const std::size_t half = w.size();
            std::vector<double> grown(half * 2);
            for (std::size_t m = 0; m < half; ++m) {
                std::uint32_t ctx = 0;
                for (std::size_t k = 0; k < pos.size(); ++k)
                    if ((m >> pos[k]) & 1u) ctx |= (1u << k);
                double p = r.prob_plus(ctx);
                grown[m] = w[m] * (1.0 - p);
                grown[m + half] = w[m] * p;
            }
            w = std::move(grown);
            auto cones = domain.cones();
            cones.push_back(cell);
            domain = Region(std::move(cones));
        }
    }
    return ExtensionResult{ClassicalState{domain, std::move(w)}, domain};
}

ExtensionResult extend_forward(const CauchySegment& seg, const ClassicalState& initial,
                               const TransitionTable& table, int layers, std::size_t cap_bits) {
    table.validate();
    return extend_forward_general(seg, initial, shadow_rule(table), layers, cap_bits);
}

namespace {

// sum out the cone at bit position b; remaining bits keep their relative order
void drop_bit(std::vector<double>& w, std::size_t b) {
    const std::size_t n = w.size();
    const std::size_t lowmask = (std::size_t{1} << b) - 1;
    std::vector<double> out(n / 2);
    for (std::size_t m = 0; m < n; ++m) {
        std::size_t packed = (m & lowmask) | ((m >> 1) & ~lowmask);
        out[packed] += w[m];
    }
    w = std::move(out);
}

}  // namespace

ClassicalState extended_marginal(const CauchySegment& seg, const ClassicalState& initial,
                                 const RuleProvider& rule, int layers, const Region& keep,
                                 std::size_t cap_bits) {
    check_initial(seg, initial);
    Region full = trapezoid(seg, layers);
    if (!full.contains(keep))
        throw SupportNotContained("extended_marginal: keep region outside the trapezoid");

    // construction order and per-cell rules
    std::vector<MinimalCone> cells;
    std::vector<CellRule> rules;
    for (int n = 1; n <= layers; ++n) {
        auto lc = layer_cells(seg, n);
        if (lc.empty())
            throw WindowTooSmall("extended_marginal: window exhausted at layer " +
                                 std::to_string(n));
        for (auto c : lc) {
            cells.push_back(c);
            rules.push_back(rule(c));
        }
    }
    // a cell matters only if it is kept or some later live cell conditions on it
    std::vector<char> live(cells.size(), 0);
    for (std::size_t i = cells.size(); i-- > 0;) {
        live[i] = keep.contains(cells[i]) ? 1 : 0;
        for (std::size_t j = i + 1; j < cells.size() && !live[i]; ++j) {
            if (!live[j]) continue;
            for (auto d : rules[j].deps)
                if (d == cells[i]) { live[i] = 1; break; }
        }
    }
    // last live cell that conditions on a cone (-1: no future use)
    auto last_use = [&](MinimalCone c, std::size_t from) -> std::ptrdiff_t {
        std::ptrdiff_t last = -1;
        for (std::size_t i = from; i < cells.size(); ++i) {
            if (!live[i]) continue;
            for (auto d : rules[i].deps)
                if (d == c) last = static_cast<std::ptrdiff_t>(i);
        }
        return last;
    };

    Region active = initial.domain;
    std::vector<double> w = initial.weights;
    auto drop_unneeded = [&](std::size_t next_cell) {
        for (std::size_t k = active.size(); k-- > 0;) {
            MinimalCone c = active.cones()[k];
            if (keep.contains(c)) continue;
            if (last_use(c, next_cell) < 0) {
                drop_bit(w, k);
                active = geometry::region_difference(active, Region({c}));
            }
        }
    };
    drop_unneeded(0);

    for (std::size_t i = 0; i < cells.size(); ++i) {
        MinimalCone cell = cells[i];
        if (!live[i]) continue;  // a dead cell's pair of branches sums out to one
        if (active.size() + 1 > cap_bits)
            throw CapExceeded("extended_marginal: active set exceeds the configuration cap");
        const CellRule& r = rules[i];
        std::vector<std::size_t> pos;
        for (auto d : r.deps) {
            auto idx = active.index_of(d);
            if (idx == static_cast<std::size_t>(-1))
                throw WindowTooSmall("extended_marginal: conditioning cone " +
                                     geometry::to_string(d) + " outside the window");
            pos.push_back(idx);
        }
        const std::size_t half = w.size();
        std::vector<double> grown(half * 2);
        for (std::size_t m = 0; m < half; ++m) {
            std::uint32_t ctx = 0;
            for (std::size_t k = 0; k < pos.size(); ++k)
                if ((m >> pos[k]) & 1u) ctx |= (1u << k);
            double p = r.prob_plus(ctx);
            grown[m] = w[m] * (1.0 - p);
            grown[m + half] = w[m] * p;
        }
        w = std::move(grown);
        auto cones = active.cones();
        cones.push_back(cell);
        active = Region(std::move(cones));
        drop_unneeded(i + 1);
    }
    if (!(active == keep))
        throw std::logic_error("extended_marginal: active set did not reduce to keep");
    return ClassicalState{keep, std::move(w)};
}

double transition_probability_product(const CylinderEvent& target,
                                      const Configuration& shadow_atom,
                                      const TransitionTable& table) {
    const Region& sup = target.support();
    double total = 0.0;
    for (auto mask : target.accepted()) {
        double prod = 1.0;
        for (std::size_t k = 0; k < sup.size(); ++k) {
            auto sh = cell_shadow(sup.cones()[k]);
            int ctx = TransitionTable::context_index(shadow_atom.value_on(sh[0]),
                                                     shadow_atom.value_on(sh[1]),
                                                     shadow_atom.value_on(sh[2]));
            double p = table.p[ctx];
            prod *= ((mask >> k) & 1u) ? p : 1.0 - p;
        }
        total += prod;
    }
    return total;
}

double transition_probability(const ClassicalState& extended, const CylinderEvent& target,
                              const Configuration& shadow_atom, const TransitionTable& table) {
    const Region& sup = target.support();
    for (auto c : sup.cones())
        if (c.t2 != sup.cones().front().t2)
            throw ValidationError("transition_probability: target must live on a single layer");
    // the atom must pin the full causal shadow of the target
    std::vector<MinimalCone> shadow_cones;
    for (auto c : sup.cones()) {
        auto sh = cell_shadow(c);
        shadow_cones.insert(shadow_cones.end(), sh.begin(), sh.end());
    }
    Region shadow(std::move(shadow_cones));
    if (!(shadow_atom.support == shadow))
        throw ValidationError("transition_probability: conditioning atom must pin exactly "
                              "the causal shadow of the target");
    CylinderEvent atom = CylinderEvent::atom(shadow_atom);
    double p_atom = probability(extended, atom);
    if (p_atom <= 0.0)
        throw ZeroProbability("transition_probability: zero-probability shadow atom");
    double p_state = probability(extended, meet(target, atom)) / p_atom;
    double p_table = transition_probability_product(target, shadow_atom, table);
    if (std::abs(p_state - p_table) > 1e-9)
        throw PreconditionViolation(
            "transition_probability: state conditional does not match the table product; "
            "the state was not extended causally through this layer");
    return p_state;
}

std::pair<double, double> extend_backward(double phi_plus, double phi_minus,
                                          double p_plus, double p_minus) {
    if (phi_plus < 0.0 || phi_minus < 0.0 || phi_plus + phi_minus > 1.0 + 1e-12)
        throw ValidationError("extend_backward: inputs must be event probabilities");
    if (p_plus == p_minus)
        throw NotInvertible("extend_backward: p(c_+) == p(c_-), step matrix is singular");
    const double det = p_plus - p_minus;
    double past_plus = ((1.0 - p_minus) * phi_plus - p_minus * phi_minus) / det;
    double past_minus = (-(1.0 - p_plus) * phi_plus + p_plus * phi_minus) / det;
    const double tol = 1e-12;
    if (past_plus < -tol || past_minus < -tol || past_plus > 1.0 + tol ||
        past_minus > 1.0 + tol) {
        std::string rho = phi_minus > 0.0 ? std::to_string(phi_plus / phi_minus) : "inf";
        throw NegativeProbability("extend_backward: ratio constraint fails (rho = " + rho +
                                  "), recovered pair (" + std::to_string(past_plus) + ", " +
                                  std::to_string(past_minus) + ") leaves [0,1]");
    }
    past_plus = std::clamp(past_plus, 0.0, 1.0);
    past_minus = std::clamp(past_minus, 0.0, 1.0);
    return {past_plus, past_minus};
}

std::vector<BackwardCell> extend_backward_surface(const CauchySegment& surface,
                                                  const ClassicalState& state,
                                                  const TransitionTable& table) {
    check_initial(surface, state);
    table.validate();
    std::vector<BackwardCell> out;
    auto base = surface.layer(surface.t2);
    for (std::size_t k = 0; k + 1 < base.size(); ++k) {
        MinimalCone left = base[k], right = base[k + 1];
        MinimalCone above{surface.t2 + 1, left.i2 + 1};
        MinimalCone below{surface.t2 - 1, left.i2 + 1};
        if (!surface.contains(above)) continue;
        ClassicalState tri = restrict_state(state, Region({left, right, above}));
        // sorted order puts the two base cones first: bit0=left, bit1=right, bit2=above
        BackwardCell cell{below, left, right, {}};
        for (std::uint32_t pair = 0; pair < 4; ++pair) {
            double phi_plus = tri.weights[pair | 4u];
            double phi_minus = tri.weights[pair];
            int l = (pair & 1) ? 1 : -1, r = (pair & 2) ? 1 : -1;
            double pp = table.p[TransitionTable::context_index(l, r, +1)];
            double pm = table.p[TransitionTable::context_index(l, r, -1)];
            try {
                cell.past[pair] = extend_backward(phi_plus, phi_minus, pp, pm);
            } catch (const std::runtime_error& e) {
                throw std::runtime_error("backward extension failed at " +
                                         geometry::to_string(below) + ", pair context (" +
                                         std::string(l > 0 ? "+" : "-") +
                                         std::string(r > 0 ? "+" : "-") + "): " + e.what());
            }
        }
        out.push_back(std::move(cell));
    }
    return out;
}

bool check_covariance_general(const CauchySegment& seg, const ClassicalState& initial,
                              const RuleProvider& rule_at_original,
                              const RuleProvider& rule_at_translated, geometry::Translation g,
                              int layers) {
    auto r1 = extend_forward_general(seg, initial, rule_at_original, layers);
    CauchySegment tseg = geometry::translate(seg, g);
    // translation preserves the cone sort order, so the weights carry over
    ClassicalState tinitial{geometry::translate(initial.domain, g), initial.weights};
    auto r2 = extend_forward_general(tseg, tinitial, rule_at_translated, layers);
    if (r1.state.weights.size() != r2.state.weights.size()) return false;
    for (std::size_t m = 0; m < r1.state.weights.size(); ++m)
        if (std::abs(r1.state.weights[m] - r2.state.weights[m]) > 1e-12) return false;
    return true;
}

bool check_covariance(const CauchySegment& seg, const ClassicalState& initial,
                      const TransitionTable& table, geometry::Translation g, int layers) {
    auto rule = shadow_rule(table);
    return check_covariance_general(seg, initial, rule, rule, g, layers);
}

}  // namespace causalnet::dynamics
