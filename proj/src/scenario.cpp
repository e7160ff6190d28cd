#include "causalnet/scenario.hpp"

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <json.hpp>
#include <random>
#include <sstream>

#include "causalnet/errors.hpp"

namespace causalnet::scenario {

using nlohmann::json;

namespace {

[[noreturn]] void bad(const std::string& path, const std::string& why) {
    throw ValidationError(path + ": " + why);
}

const json& need(const json& j, const std::string& key, const std::string& path) {
    auto it = j.find(key);
    if (it == j.end()) bad(path + "." + key, "missing");
    return *it;
}

geometry::Region parse_region(const json& j, const std::string& path) {
    if (!j.is_array()) bad(path, "expected an array of cone literals");
    std::vector<geometry::MinimalCone> cones;
    for (const auto& c : j) {
        if (!c.is_string()) bad(path, "cone literals are strings like \"V(2,0)\"");
        cones.push_back(geometry::parse_cone(c.get<std::string>()));
    }
    return geometry::Region(std::move(cones));
}

qnet::Matrix parse_matrix(const json& j, int dim, const std::string& path) {
    if (!j.is_array() || j.size() != static_cast<std::size_t>(dim) * dim)
        bad(path, "expected " + std::to_string(dim * dim) + " row-major [re,im] pairs");
    qnet::Matrix m(dim, dim);
    for (int i = 0; i < dim; ++i)
        for (int k = 0; k < dim; ++k) {
            const auto& e = j[i * dim + k];
            if (!e.is_array() || e.size() != 2)
                bad(path + "[" + std::to_string(i * dim + k) + "]", "expected [re,im]");
            m(i, k) = std::complex<double>(e[0].get<double>(), e[1].get<double>());
        }
    return m;
}

events::CylinderEvent parse_event(const json& j, const std::string& path) {
    geometry::Region support = parse_region(need(j, "support", path), path + ".support");
    const json& acc = need(j, "accepted", path);
    if (!acc.is_array()) bad(path + ".accepted", "expected an array of configuration masks");
    std::vector<std::uint32_t> masks;
    for (const auto& a : acc) masks.push_back(a.get<std::uint32_t>());
    return events::CylinderEvent(std::move(support), std::move(masks));
}

}  // namespace

events::ClassicalState InitialSpec::build(const geometry::Region& domain) const {
    switch (kind) {
        case Kind::Uniform: return events::uniform_state(domain);
        case Kind::Biases:
            if (values.size() != domain.size())
                throw ValidationError("initial.plusProbability: expected " +
                                      std::to_string(domain.size()) + " entries, got " +
                                      std::to_string(values.size()));
            return events::product_state(domain, values);
        case Kind::Explicit: {
            if (values.size() != (std::size_t{1} << domain.size()))
                throw ValidationError("initial.weights: expected 2^" +
                                      std::to_string(domain.size()) + " entries");
            events::ClassicalState s{domain, values};
            if (!s.normalized())
                throw ValidationError("initial.weights: not a normalized distribution");
            return s;
        }
    }
    throw ValidationError("initial.kind: unknown");
}

checks::StochasticCheckOptions Scenario::check_options() const {
    checks::StochasticCheckOptions opt;
    opt.layers = lattice ? lattice->layers : 0;
    opt.tolerance = tolerance;
    opt.max_cases = max_cases;
    opt.seed = seed;
    opt.max_event_support = max_event_support;
    opt.max_screener_size = max_screener_size;
    opt.acausal_fixture = acausal_fixture;
    opt.threads = threads;
    return opt;
}

Scenario parse_scenario(const std::string& text) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::exception& e) {
        throw ValidationError(std::string("scenario is not valid JSON: ") + e.what());
    }
    Scenario sc;
    sc.schema_version = need(j, "schemaVersion", "scenario").get<int>();
    if (sc.schema_version != 1)
        bad("scenario.schemaVersion", "unsupported version " + std::to_string(sc.schema_version));
    sc.name = j.value("name", std::string("unnamed"));
    if (j.contains("seed")) {
        sc.seed = j["seed"].get<std::uint64_t>();
        sc.seed_present = true;
    }
    sc.tolerance = j.value("tolerance", 1e-9);
    sc.max_cases = j.value("maxCases", std::size_t{0});
    sc.max_event_support = j.value("maxEventSupport", std::size_t{2});
    sc.max_screener_size = j.value("maxScreenerSize", std::size_t{4});
    sc.threads = j.value("threads", 1);
    sc.output_dir = j.value("output", std::string());
    if (j.contains("checks")) {
        for (const auto& c : j["checks"]) sc.check_names.push_back(c.get<std::string>());
    }
    if (sc.max_cases > 0 && !sc.seed_present)
        bad("scenario.seed", "required whenever maxCases enables sampling");

    if (j.contains("dynamics")) {
        std::string d = j["dynamics"].get<std::string>();
        if (d == "acausal-fixture")
            sc.acausal_fixture = true;
        else if (d != "causal")
            bad("scenario.dynamics", "expected \"causal\" or \"acausal-fixture\"");
    }

    if (j.contains("lattice")) {
        const json& l = j["lattice"];
        LatticeSpec spec;
        spec.segment.t2 = need(l, "baseTime2", "lattice").get<int>();
        const json& w = need(l, "window2", "lattice");
        if (!w.is_array() || w.size() != 2) bad("lattice.window2", "expected [min2, max2]");
        spec.segment.i2min = w[0].get<int>();
        spec.segment.i2max = w[1].get<int>();
        if (spec.segment.i2min > spec.segment.i2max)
            bad("lattice.window2", "empty window");
        spec.layers = l.value("layers", 0);
        if (spec.layers < 0) bad("lattice.layers", "negative");
        sc.lattice = spec;
    }

    if (j.contains("table")) {
        const json& t = j["table"];
        dynamics::TransitionTable table;
        for (int c = 0; c < 8; ++c) {
            std::string key = dynamics::TransitionTable::context_string(c);
            if (!t.contains(key)) bad("table", "missing context \"" + key + "\"");
            table.p[c] = t[key].get<double>();
        }
        table.validate();
        sc.table = table;
    }

    if (j.contains("initial")) {
        const json& i = j["initial"];
        std::string kind = need(i, "kind", "initial").get<std::string>();
        if (kind == "uniform") {
            sc.initial.kind = InitialSpec::Kind::Uniform;
        } else if (kind == "biases") {
            sc.initial.kind = InitialSpec::Kind::Biases;
            for (const auto& v : need(i, "plusProbability", "initial"))
                sc.initial.values.push_back(v.get<double>());
        } else if (kind == "explicit") {
            sc.initial.kind = InitialSpec::Kind::Explicit;
            for (const auto& v : need(i, "weights", "initial"))
                sc.initial.values.push_back(v.get<double>());
        } else {
            bad("initial.kind", "expected uniform | biases | explicit");
        }
    }

    if (j.contains("commonCause")) {
        const json& c = j["commonCause"];
        CommonCauseSpec spec;
        spec.a = parse_event(need(c, "eventA", "commonCause"), "commonCause.eventA");
        spec.b = parse_event(need(c, "eventB", "commonCause"), "commonCause.eventB");
        std::string past = c.value("past", std::string("weak"));
        if (past == "weak") spec.past = checks::PastKind::Weak;
        else if (past == "common") spec.past = checks::PastKind::Common;
        else if (past == "strong") spec.past = checks::PastKind::Strong;
        else bad("commonCause.past", "expected weak | common | strong");
        std::string mode = c.value("mode", std::string("abelian-exhaustive"));
        if (mode == "abelian-exhaustive")
            spec.mode = checks::CommonCauseOptions::Mode::AbelianExhaustive;
        else if (mode == "maximal-atomic")
            spec.mode = checks::CommonCauseOptions::Mode::MaximalAtomic;
        else bad("commonCause.mode", "expected abelian-exhaustive | maximal-atomic");
        spec.max_region_size = c.value("maxRegionSize", std::size_t{2});
        sc.common_cause = spec;
    }

    if (j.contains("axioms")) {
        const json& a = j["axioms"];
        AxiomsSpec spec;
        spec.window = parse_region(need(a, "window", "axioms"), "axioms.window");
        spec.lpc_closure = a.value("lpcClosure", false);
        sc.axioms = spec;
    }

    if (j.contains("quantum")) {
        const json& q = j["quantum"];
        QuantumSpec spec;
        spec.dimension = need(q, "dimension", "quantum").get<int>();
        if (spec.dimension < 1 || spec.dimension > qnet::kDimCap)
            bad("quantum.dimension", "outside [1, " + std::to_string(qnet::kDimCap) + "]");
        spec.net.dim = spec.dimension;
        const json& regions = need(q, "regions", "quantum");
        for (std::size_t k = 0; k < regions.size(); ++k) {
            std::string path = "quantum.regions[" + std::to_string(k) + "]";
            geometry::Region region = parse_region(need(regions[k], "cones", path), path + ".cones");
            std::vector<qnet::Matrix> gens;
            for (const auto& g : need(regions[k], "generators", path))
                gens.push_back(parse_matrix(g, spec.dimension, path + ".generators"));
            spec.net.regions.push_back(
                {std::move(region), qnet::Subalgebra::generated(spec.dimension, gens)});
        }
        if (q.contains("state")) {
            qnet::DensityState phi{parse_matrix(q["state"], spec.dimension, "quantum.state")};
            phi.validate();
            spec.state = phi;
        }
        if (q.contains("projections")) {
            for (const auto& [name, pj] : q["projections"].items()) {
                std::string path = "quantum.projections." + name;
                qnet::Projection p{parse_matrix(need(pj, "matrix", path), spec.dimension,
                                                path + ".matrix"),
                                   parse_region(need(pj, "cones", path), path + ".cones")};
                if (!qnet::is_projection(p.matrix)) bad(path + ".matrix", "not a projection");
                spec.projections.emplace(name, std::move(p));
            }
        }
        if (q.contains("partition")) {
            const json& p = q["partition"];
            qnet::PartitionOfUnit part;
            part.region = parse_region(need(p, "cones", "quantum.partition"),
                                       "quantum.partition.cones");
            for (const auto& m : need(p, "projections", "quantum.partition"))
                part.projections.push_back(
                    parse_matrix(m, spec.dimension, "quantum.partition.projections"));
            part.validate();
            spec.partition = part;
        }
        if (q.contains("ch")) {
            for (const auto& n : q["ch"]) spec.ch_names.push_back(n.get<std::string>());
            if (spec.ch_names.size() != 4)
                bad("quantum.ch", "expected four projection names [A1,A2,B1,B2]");
        }
        spec.no_signaling_trials = q.value("noSignalingTrials", 0);
        sc.quantum = spec;
    }
    return sc;
}

Scenario load_scenario(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ValidationError("cannot open scenario file: " + path);
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_scenario(ss.str());
}

void write_file_atomic(const std::string& path, const std::string& content) {
    std::string tmp = path + ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw std::runtime_error("cannot write " + tmp);
        out << content;
    }
    std::filesystem::rename(tmp, path);
}

namespace {

const LatticeSpec& need_lattice(const Scenario& sc) {
    if (!sc.lattice) throw ValidationError("lattice: missing (required by this command)");
    return *sc.lattice;
}

const dynamics::TransitionTable& need_table(const Scenario& sc) {
    if (!sc.table) throw ValidationError("table: missing (required by this command)");
    return *sc.table;
}

const QuantumSpec& need_quantum(const Scenario& sc) {
    if (!sc.quantum) throw ValidationError("quantum: missing (required by this command)");
    return *sc.quantum;
}

json region_json(const geometry::Region& r) {
    json out = json::array();
    for (auto c : r.cones()) out.push_back(geometry::to_string(c));
    return out;
}

}  // namespace

CommandResult cmd_simulate(const Scenario& sc) {
    const LatticeSpec& lat = need_lattice(sc);
    const auto& table = need_table(sc);
    auto initial = sc.initial.build(lat.segment.cones());
    dynamics::ExtensionResult result =
        sc.acausal_fixture
            ? dynamics::extend_forward_general(lat.segment, initial,
                                               dynamics::acausal_rule(table, lat.segment),
                                               lat.layers)
            : dynamics::extend_forward(lat.segment, initial, table, lat.layers);

    json out;
    out["scenario"] = sc.name;
    out["domain"] = region_json(result.grownDomain);
    json marg = json::array();
    double norm = 0.0;
    for (double w : result.state.weights) norm += w;
    for (auto c : result.grownDomain.cones()) {
        events::CylinderEvent plus(geometry::Region({c}), {1});
        marg.push_back({{"cone", geometry::to_string(c)},
                        {"pPlus", events::probability(result.state, plus)}});
    }
    out["marginals"] = marg;
    out["normalization"] = norm;
    CommandResult res;
    res.files["marginals.json"] = out.dump(2) + "\n";
    res.summary = "simulated " + std::to_string(result.grownDomain.size()) + " cones";
    return res;
}

namespace {

CommandResult check_local_causality(const Scenario& sc) {
    const LatticeSpec& lat = need_lattice(sc);
    auto initial = sc.initial.build(lat.segment.cones());
    auto rep = checks::verify_local_causality_stochastic(lat.segment, initial, need_table(sc),
                                                         sc.check_options());
    rep.scenario = sc.name;
    CommandResult res;
    res.exit_code = rep.passed() ? 0 : 1;
    res.files["report.json"] = checks::report_to_json(rep);
    res.files["defects.csv"] = checks::defects_csv(rep);
    std::ostringstream os;
    os << "local-causality: " << rep.cases << " quintuples, max defect " << rep.max_defect
       << ", " << rep.failures.size() << " failures (" << rep.wall_clock_ms << " ms)";
    res.summary = os.str();
    return res;
}

CommandResult check_common_cause(const Scenario& sc) {
    if (!sc.common_cause)
        throw ValidationError("commonCause: missing (required by this command)");
    const LatticeSpec& lat = need_lattice(sc);
    auto initial = sc.initial.build(lat.segment.cones());
    events::ClassicalState state =
        lat.layers == 0
            ? initial
            : dynamics::extend_forward(lat.segment, initial, need_table(sc), lat.layers).state;
    checks::CommonCauseOptions opt;
    opt.past = sc.common_cause->past;
    opt.mode = sc.common_cause->mode;
    opt.max_region_size = sc.common_cause->max_region_size;
    opt.tolerance = sc.tolerance;
    auto found = checks::find_common_cause(state, sc.common_cause->a, sc.common_cause->b, opt);

    json out;
    out["scenario"] = sc.name;
    out["solutions"] = json::array();
    for (const auto& cc : found) {
        json s;
        s["region"] = region_json(cc.region);
        s["members"] = json::array();
        for (const auto& m : cc.members) {
            json me;
            me["support"] = region_json(m.support());
            me["accepted"] = m.accepted();
            s["members"].push_back(me);
        }
        s["trivial"] = cc.trivial;
        s["commuting"] = true;  // abelian events always commute
        s["maxDefect"] = cc.max_defect;
        out["solutions"].push_back(s);
    }
    CommandResult res;
    res.exit_code = found.empty() ? 1 : 0;
    res.files["report.json"] = out.dump(2) + "\n";
    res.summary = "common-cause: " + std::to_string(found.size()) + " screening partitions";
    return res;
}

CommandResult check_ch(const Scenario& sc) {
    const QuantumSpec& q = need_quantum(sc);
    if (!q.state) throw ValidationError("quantum.state: missing (required by check ch)");
    if (!q.partition) throw ValidationError("quantum.partition: missing (required by check ch)");
    if (q.ch_names.size() != 4) throw ValidationError("quantum.ch: four names required");
    std::array<const qnet::Projection*, 4> p{};
    for (int k = 0; k < 4; ++k) {
        auto it = q.projections.find(q.ch_names[k]);
        if (it == q.projections.end())
            throw ValidationError("quantum.ch: unknown projection \"" + q.ch_names[k] + "\"");
        p[k] = &it->second;
    }
    auto rep = checks::verify_prop3(q.net, *q.state, *p[0], *p[1], *p[2], *p[3], *q.partition,
                                    sc.tolerance);
    json out;
    out["scenario"] = sc.name;
    out["chOriginal"] = rep.ch_original;
    out["chModified"] = rep.ch_modified;
    out["commuting"] = rep.commuting;
    out["commutesWith"] = rep.commutes_with;
    out["modifiedInBounds"] = rep.modified_in_bounds;
    out["originalInBounds"] = rep.original_in_bounds;
    out["correlated"] = rep.correlated;
    out["prop3Consistent"] = rep.ok();
    CommandResult res;
    // exit 1 when the original state violates the bound (a Bell violation) or
    // any Prop-3 guarantee breaks
    res.exit_code = (rep.original_in_bounds && rep.ok()) ? 0 : 1;
    res.files["report.json"] = out.dump(2) + "\n";
    std::ostringstream os;
    os << "ch: original " << rep.ch_original << ", modified " << rep.ch_modified
       << (rep.commuting ? " (commuting partition)" : " (noncommuting partition)");
    res.summary = os.str();
    return res;
}

CommandResult check_no_signaling(const Scenario& sc) {
    const QuantumSpec& q = need_quantum(sc);
    if (q.net.regions.size() < 2)
        throw ValidationError("quantum.regions: need at least two regions for no-signaling");
    int trials = q.no_signaling_trials > 0 ? q.no_signaling_trials : 200;
    std::mt19937_64 rng(sc.seed);
    std::normal_distribution<double> g(0.0, 1.0);
    std::size_t checked = 0, violations = 0;
    json viol = json::array();
    for (int t = 0; t < trials; ++t) {
        for (const auto& ra : q.net.regions) {
            for (const auto& rb : q.net.regions) {
                if (!geometry::spacelike(ra.region, rb.region)) continue;
                qnet::Matrix x(q.dimension, q.dimension);
                for (int i = 0; i < q.dimension; ++i)
                    for (int k = 0; k < q.dimension; ++k)
                        x(i, k) = std::complex<double>(g(rng), g(rng));
                qnet::Matrix rho = x * x.adjoint();
                rho /= rho.trace();
                qnet::DensityState phi{rho};
                auto part = qnet::maximal_atomic_partition(
                    ra.algebra, sc.seed + static_cast<std::uint64_t>(t) * 977 + 1);
                auto bpart = qnet::maximal_atomic_partition(
                    rb.algebra, sc.seed + static_cast<std::uint64_t>(t) * 977 + 2);
                qnet::Projection b{bpart.front(), rb.region};
                ++checked;
                if (!qnet::check_no_signaling(q.net, phi,
                                              qnet::PartitionOfUnit{part, ra.region}, b)) {
                    ++violations;
                    viol.push_back({{"trial", t},
                                    {"vA", geometry::to_string(ra.region)},
                                    {"vB", geometry::to_string(rb.region)}});
                }
            }
        }
    }
    json out;
    out["scenario"] = sc.name;
    out["trials"] = checked;
    out["violations"] = violations;
    out["failures"] = viol;
    CommandResult res;
    res.exit_code = violations == 0 ? 0 : 1;
    res.files["report.json"] = out.dump(2) + "\n";
    res.summary = "no-signaling: " + std::to_string(checked) + " trials, " +
                  std::to_string(violations) + " violations";
    return res;
}

CommandResult check_axioms(const Scenario& sc) {
    json out;
    out["scenario"] = sc.name;
    bool gate = true;
    if (sc.axioms) {
        qnet::FiniteNet net = qnet::ising_net(sc.axioms->window, sc.axioms->lpc_closure);
        bool isotony = qnet::check_isotony(net);
        bool micro = qnet::check_microcausality(net);
        bool inter = qnet::check_intersection_property(net);
        // events-level intersection property over the window subregions
        bool sigma_inter = true;
        const auto& cones = sc.axioms->window.cones();
        for (std::size_t i = 0; i < cones.size() && sigma_inter; ++i)
            for (std::size_t k = i + 1; k < cones.size() && sigma_inter; ++k)
                sigma_inter = events::check_intersection_property(
                    geometry::Region({cones[i]}), geometry::Region({cones[k]}));
        // half-shift covariance of the causal predicates on the window
        geometry::Translation half = geometry::Translation::of(0, 0, true);
        bool covariance = true;
        for (auto c1 : cones)
            for (auto c2 : cones) {
                if (geometry::spacelike(c1, c2) !=
                    geometry::spacelike(geometry::translate(c1, half),
                                        geometry::translate(c2, half)))
                    covariance = false;
                if (geometry::causally_precedes(c1, c2) !=
                    geometry::causally_precedes(geometry::translate(c1, half),
                                                geometry::translate(c2, half)))
                    covariance = false;
            }
        json ising;
        ising["isotony"] = isotony;
        ising["microcausality"] = micro;
        ising["intersectionProperty"] = inter;
        ising["sigmaIntersectionProperty"] = sigma_inter;
        ising["halfShiftCovariance"] = covariance;
        // informational: expected to fail for the plain cylinder assignment
        ising["localPrimitiveCausality"] = qnet::check_local_primitive_causality(net);
        out["ising"] = ising;
        gate = gate && isotony && micro && inter && sigma_inter && covariance;
    }
    if (sc.quantum) {
        const QuantumSpec& q = *sc.quantum;
        bool isotony = qnet::check_isotony(q.net);
        bool micro = qnet::check_microcausality(q.net);
        bool haag = qnet::check_haag_duality(q.net);
        bool lpc = qnet::check_local_primitive_causality(q.net);
        json qu;
        qu["isotony"] = isotony;
        qu["microcausality"] = micro;
        qu["haagDuality"] = haag;
        qu["localPrimitiveCausality"] = lpc;
        out["quantum"] = qu;
        gate = gate && isotony && micro && haag && lpc;
    }
    if (!sc.axioms && !sc.quantum)
        throw ValidationError("axioms/quantum: at least one section required by check axioms");
    out["passed"] = gate;
    CommandResult res;
    res.exit_code = gate ? 0 : 1;
    res.files["report.json"] = out.dump(2) + "\n";
    res.summary = std::string("axioms: ") + (gate ? "pass" : "fail");
    return res;
}

}  // namespace

CommandResult cmd_check(const Scenario& sc, const std::string& which) {
    if (which == "local-causality") return check_local_causality(sc);
    if (which == "ch") return check_ch(sc);
    if (which == "common-cause") return check_common_cause(sc);
    if (which == "no-signaling") return check_no_signaling(sc);
    if (which == "axioms") return check_axioms(sc);
    throw ValidationError("unknown check \"" + which + "\" (expected local-causality | ch | "
                          "common-cause | no-signaling | axioms)");
}

CommandResult cmd_extend_backward(const Scenario& sc) {
    const LatticeSpec& lat = need_lattice(sc);
    const auto& table = need_table(sc);
    auto state = sc.initial.build(lat.segment.cones());
    json out;
    out["scenario"] = sc.name;
    CommandResult res;
    try {
        auto cells = dynamics::extend_backward_surface(lat.segment, state, table);
        json arr = json::array();
        for (const auto& cell : cells) {
            json c;
            c["below"] = geometry::to_string(cell.below);
            c["left"] = geometry::to_string(cell.left);
            c["right"] = geometry::to_string(cell.right);
            json pairs = json::array();
            for (std::uint32_t pc = 0; pc < 4; ++pc) {
                std::string ctx;
                ctx += (pc & 1u) ? '+' : '-';
                ctx += (pc & 2u) ? '+' : '-';
                pairs.push_back({{"context", ctx},
                                 {"phiPastPlus", cell.past[pc].first},
                                 {"phiPastMinus", cell.past[pc].second}});
            }
            c["pairs"] = pairs;
            arr.push_back(c);
        }
        out["cells"] = arr;
        out["ok"] = true;
        res.summary = "extend-backward: " + std::to_string(cells.size()) + " cells recovered";
    } catch (const NotInvertible& e) {
        out["ok"] = false;
        out["error"] = e.what();
        res.exit_code = 1;
        res.summary = std::string("extend-backward failed: ") + e.what();
    } catch (const NegativeProbability& e) {
        out["ok"] = false;
        out["error"] = e.what();
        res.exit_code = 1;
        res.summary = std::string("extend-backward failed: ") + e.what();
    } catch (const std::runtime_error& e) {
        // the surface pass wraps cell context and ratio into the message
        out["ok"] = false;
        out["error"] = e.what();
        res.exit_code = 1;
        res.summary = std::string("extend-backward failed: ") + e.what();
    }
    res.files["backward.json"] = out.dump(2) + "\n";
    return res;
}

}  // namespace causalnet::scenario
