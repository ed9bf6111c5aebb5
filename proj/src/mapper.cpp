// This file is part of esp-router, released under the Apache-2.0 license.
// See LICENSE for details.

#include "espr/mapper.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <stdexcept>
#include <thread>
#include <unordered_map>

#include "espr/select.hpp"
#include "espr/sim.hpp"
#include "espr/util.hpp"

namespace espr {

namespace {

std::uint64_t bounded_rand(Rng& rng, std::uint64_t n) {
    std::uint64_t x, r;
    do {
        x = rng();
        r = x % n;
    } while (x - r > std::uint64_t{0} - n);
    return r;
}

}  // namespace

Mapping Mapping::make(int num_vars, int num_qubits) {
    Mapping m;
    m.var_to_phys.assign(num_vars, -1);
    m.phys_to_var.assign(num_qubits, -1);
    return m;
}

void Mapping::assign(VarId v, PhysId p) {
    var_to_phys[v] = p;
    phys_to_var[p] = v;
}

void Mapping::swap_phys(PhysId a, PhysId b) {
    const VarId va = phys_to_var[a];
    const VarId vb = phys_to_var[b];
    phys_to_var[a] = vb;
    phys_to_var[b] = va;
    if (va >= 0) var_to_phys[va] = b;
    if (vb >= 0) var_to_phys[vb] = a;
}

Mapping random_mapping(const Circuit& c, const DeviceModel& d, Rng& rng) {
    if (c.num_vars > d.num_qubits()) {
        throw std::invalid_argument("more variables than physical qubits");
    }
    std::vector<PhysId> ids(d.num_qubits());
    for (int i = 0; i < d.num_qubits(); ++i) ids[i] = i;
    for (int i = d.num_qubits() - 1; i > 0; --i) {
        const int j = static_cast<int>(bounded_rand(rng, static_cast<std::uint64_t>(i) + 1));
        std::swap(ids[i], ids[j]);
    }
    Mapping m = Mapping::make(c.num_vars, d.num_qubits());
    for (VarId v = 0; v < c.num_vars; ++v) m.assign(v, ids[v]);
    return m;
}

Mapping gce_initial_mapping(const Circuit& c, const DeviceModel& d, Rng& rng) {
    if (c.num_vars > d.num_qubits()) {
        throw std::invalid_argument("more variables than physical qubits");
    }

    // Guest graph: CNOT count per variable pair.
    struct GuestEdge {
        VarId v0, v1;
        int weight;
    };
    std::unordered_map<std::uint64_t, int> counts;
    for (const Gate& g : c.gates) {
        if (g.kind != GateKind::Cnot) continue;
        const VarId a = std::min(g.q0, g.q1);
        const VarId b = std::max(g.q0, g.q1);
        ++counts[(static_cast<std::uint64_t>(a) << 32) | static_cast<std::uint32_t>(b)];
    }
    std::vector<GuestEdge> guest;
    for (auto [key, w] : counts) {
        guest.push_back({static_cast<VarId>(key >> 32), static_cast<VarId>(key & 0xffffffff), w});
    }
    std::sort(guest.begin(), guest.end(), [](const GuestEdge& a, const GuestEdge& b) {
        if (a.weight != b.weight) return a.weight > b.weight;
        if (a.v0 != b.v0) return a.v0 < b.v0;
        return a.v1 < b.v1;
    });

    Mapping m = Mapping::make(c.num_vars, d.num_qubits());
    std::vector<bool> alive(guest.size(), true);
    std::size_t remaining = guest.size();

    auto lowest_free_edge = [&]() -> const CouplingEdge* {
        const CouplingEdge* best = nullptr;
        for (const CouplingEdge& e : d.edges()) {
            if (m.var_at(e.q0) >= 0 || m.var_at(e.q1) >= 0) continue;
            if (!best || e.cx_error < best->cx_error ||
                (e.cx_error == best->cx_error &&
                 std::pair(e.q0, e.q1) < std::pair(best->q0, best->q1))) {
                best = &e;
            }
        }
        return best;
    };

    auto seed_component = [&](const GuestEdge& e) -> bool {
        const CouplingEdge* edge = lowest_free_edge();
        if (!edge) return false;
        m.assign(e.v0, edge->q0);
        m.assign(e.v1, edge->q1);
        return true;
    };

    while (remaining > 0) {
        // Greatest edge connecting the mapped set to an unmapped variable.
        std::size_t pick = guest.size();
        bool pick_is_fresh = false;
        for (std::size_t i = 0; i < guest.size(); ++i) {
            if (!alive[i]) continue;
            const bool m0 = m.var_to_phys[guest[i].v0] >= 0;
            const bool m1 = m.var_to_phys[guest[i].v1] >= 0;
            if (m0 && m1) {
                alive[i] = false;
                --remaining;
                continue;
            }
            if (m0 != m1) {
                pick = i;
                break;
            }
        }
        if (pick == guest.size()) {
            // No mapped-to-unmapped edge left; start the next guest component.
            for (std::size_t i = 0; i < guest.size(); ++i) {
                if (alive[i]) {
                    pick = i;
                    pick_is_fresh = true;
                    break;
                }
            }
            if (pick == guest.size()) break;
        }

        GuestEdge e = guest[pick];
        alive[pick] = false;
        --remaining;
        if (pick_is_fresh) {
            seed_component(e);
            continue;
        }
        if (m.var_to_phys[e.v0] < 0) std::swap(e.v0, e.v1);  // e.v0 is the mapped endpoint
        const PhysId anchor = m.var_to_phys[e.v0];
        PhysId best = -1;
        double best_err = 0.0;
        for (PhysId nb : d.neighbors(anchor)) {
            if (m.var_at(nb) >= 0) continue;
            const double err = d.cx_error(anchor, nb);
            if (best < 0 || err < best_err || (err == best_err && nb < best)) {
                best = nb;
                best_err = err;
            }
        }
        if (best >= 0) m.assign(e.v1, best);
        // Otherwise the edge is skipped; the variable falls back to the
        // random fill below.
    }

    std::vector<PhysId> free;
    for (PhysId p = 0; p < d.num_qubits(); ++p) {
        if (m.var_at(p) < 0) free.push_back(p);
    }
    for (VarId v = 0; v < c.num_vars; ++v) {
        if (m.var_to_phys[v] >= 0) continue;
        const std::size_t j = bounded_rand(rng, free.size());
        m.assign(v, free[j]);
        free.erase(free.begin() + static_cast<std::ptrdiff_t>(j));
    }
    return m;
}

std::vector<SwapPlan> all_swap_plans(const DeviceModel& d, const PathTable& pt, PhysId control_pos,
                                     PhysId target_pos) {
    std::vector<SwapPlan> plans;
    if (control_pos == target_pos) throw std::invalid_argument("operands share a qubit");

    auto realize = [&](PhysId q0, PhysId q1) -> bool {
        SwapPlan plan;
        plan.meet0 = q0;
        plan.meet1 = q1;
        PhysId cur_c = control_pos;
        PhysId cur_t = target_pos;
        auto walk = [&](PhysId from, PhysId to) {
            const std::vector<PhysId> path = pt.path(from, to);
            for (std::size_t i = 0; i + 1 < path.size(); ++i) {
                const PhysId x = path[i];
                const PhysId y = path[i + 1];
                plan.swap_gates.push_back({GateKind::Cnot, x, y});
                plan.swap_gates.push_back({GateKind::Cnot, y, x});
                plan.swap_gates.push_back({GateKind::Cnot, x, y});
                if (cur_c == x) cur_c = y;
                else if (cur_c == y) cur_c = x;
                if (cur_t == x) cur_t = y;
                else if (cur_t == y) cur_t = x;
            }
        };
        walk(cur_c, q0);
        walk(cur_t, q1);
        if (cur_c != q0 || cur_t != q1) return false;  // chains collided
        double esp = 1.0;
        for (const PlacedGate& g : plan.swap_gates) esp *= 1.0 - d.cx_error(g.q0, g.q1);
        plan.movement_esp = esp;
        plan.total_esp = esp * (1.0 - d.cx_error(q0, q1));
        plans.push_back(std::move(plan));
        return true;
    };

    for (const CouplingEdge& e : d.edges()) {
        realize(e.q0, e.q1);
        realize(e.q1, e.q0);
    }
    // Fallback: walk the direct best path and meet on its last edge. Always
    // collision-free, so the candidate set is never empty.
    {
        const std::vector<PhysId> direct = pt.path(control_pos, target_pos);
        if (direct.size() >= 2) {
            SwapPlan plan;
            plan.meet0 = direct[direct.size() - 2];
            plan.meet1 = direct.back();
            for (std::size_t i = 0; i + 2 < direct.size(); ++i) {
                const PhysId x = direct[i];
                const PhysId y = direct[i + 1];
                plan.swap_gates.push_back({GateKind::Cnot, x, y});
                plan.swap_gates.push_back({GateKind::Cnot, y, x});
                plan.swap_gates.push_back({GateKind::Cnot, x, y});
            }
            double esp = 1.0;
            for (const PlacedGate& g : plan.swap_gates) esp *= 1.0 - d.cx_error(g.q0, g.q1);
            plan.movement_esp = esp;
            plan.total_esp = esp * (1.0 - d.cx_error(plan.meet0, plan.meet1));
            bool dup = false;
            for (const SwapPlan& p : plans) {
                dup |= (p.meet0 == plan.meet0 && p.meet1 == plan.meet1 &&
                        p.swap_gates.size() == plan.swap_gates.size());
            }
            if (!dup) plans.push_back(std::move(plan));
        }
    }

    std::stable_sort(plans.begin(), plans.end(), [](const SwapPlan& a, const SwapPlan& b) {
        if (a.total_esp != b.total_esp) return a.total_esp > b.total_esp;
        if (a.swap_gates.size() != b.swap_gates.size()) {
            return a.swap_gates.size() < b.swap_gates.size();
        }
        const auto ka = std::tuple(std::min(a.meet0, a.meet1), std::max(a.meet0, a.meet1), a.meet0);
        const auto kb = std::tuple(std::min(b.meet0, b.meet1), std::max(b.meet0, b.meet1), b.meet0);
        return ka < kb;
    });
    return plans;
}

BestSwapTable::BestSwapTable(const DeviceModel& d, const PathTable& pt) : n_(d.num_qubits()) {
    plans_.resize(static_cast<std::size_t>(n_) * n_);
    for (PhysId c = 0; c < n_; ++c) {
        for (PhysId t = 0; t < n_; ++t) {
            if (c == t) continue;
            plans_[static_cast<std::size_t>(c) * n_ + t] = all_swap_plans(d, pt, c, t).front();
        }
    }
}

const SwapPlan& BestSwapTable::plan(PhysId control_pos, PhysId target_pos) const {
    return plans_[static_cast<std::size_t>(control_pos) * n_ + target_pos];
}

namespace {

struct Problem {
    const Circuit* circuit;
    const DeviceModel* device;
    const DependencyDag* dag;
    std::vector<std::vector<int>> succs;
    std::vector<int> measure_order;  // gate indices of measures, source order
    int total_cnots = 0;
};

std::uint64_t state_hash(const SearchState& s) {
    std::uint64_t h = 1469598103934665603ULL;
    auto mix = [&h](std::uint64_t x) {
        h ^= x;
        h *= 1099511628211ULL;
    };
    for (PhysId p : s.mapping.var_to_phys) mix(static_cast<std::uint64_t>(p) + 1);
    for (std::uint64_t w : s.executed) mix(w);
    return h;
}

// Emits every ready non-CNOT, non-Measure gate (ascending index; cascades).
void drain_singles(SearchState& s, const Problem& pb, std::vector<PlacedGate>& sink) {
    const auto& gates = pb.circuit->gates;
    bool again = true;
    while (again) {
        again = false;
        for (int gi = 0; gi < static_cast<int>(gates.size()); ++gi) {
            const Gate& g = gates[gi];
            if (g.kind == GateKind::Cnot || g.kind == GateKind::Measure) continue;
            if (s.is_executed(gi) || s.unmet[gi] != 0) continue;
            const PhysId p = s.mapping.phys_of(g.q0);
            sink.push_back({g.kind, p, -1});
            s.esp *= 1.0 - pb.device->single_error(p);
            s.mark_executed(gi);
            ++s.emitted_count;
            for (int nx : pb.succs[gi]) --s.unmet[nx];
            again = true;
        }
    }
}

double score_state(const SearchState& s, const Problem& pb, const BestSwapTable& bst,
                   std::uint64_t* work) {
    const auto& gates = pb.circuit->gates;
    double score = s.esp;
    std::uint64_t visited = 0;
    for (int gi = 0; gi < static_cast<int>(gates.size()); ++gi) {
        if (s.is_executed(gi)) continue;
        ++visited;
        const Gate& g = gates[gi];
        if (g.kind == GateKind::Cnot) {
            score *= bst.plan(s.mapping.phys_of(g.q0), s.mapping.phys_of(g.q1)).total_esp;
        } else if (g.kind == GateKind::Measure) {
            score *= 1.0 - pb.device->readout_error(s.mapping.phys_of(g.q0));
        } else {
            score *= 1.0 - pb.device->single_error(s.mapping.phys_of(g.q0));
        }
    }
    if (work) *work += visited;
    return score;
}

SearchState make_initial_state(const Problem& pb, const Mapping& m) {
    SearchState s;
    s.mapping = m;
    s.initial_mapping = std::make_shared<Mapping>(m);
    const std::size_t n = pb.circuit->gates.size();
    s.executed.assign((n + 63) / 64, 0);
    s.unmet.assign(n, 0);
    for (std::size_t gi = 0; gi < n; ++gi) {
        s.unmet[gi] = static_cast<std::uint8_t>(pb.dag->preds[gi].size());
    }
    auto node = std::make_shared<TraceNode>();
    drain_singles(s, pb, node->gates);
    s.trace = std::move(node);
    s.hash = state_hash(s);
    return s;
}

SearchState expand_state(const SearchState& s, int gate_idx, const SwapPlan& plan,
                         const Problem& pb) {
    SearchState nx;
    nx.mapping = s.mapping;
    nx.initial_mapping = s.initial_mapping;
    nx.executed = s.executed;
    nx.unmet = s.unmet;
    nx.esp = s.esp;
    nx.emitted_count = s.emitted_count;
    nx.cnots_done = s.cnots_done + 1;

    auto node = std::make_shared<TraceNode>();
    node->parent = s.trace;
    for (std::size_t i = 0; i < plan.swap_gates.size(); i += 3) {
        const PlacedGate& sw = plan.swap_gates[i];
        nx.mapping.swap_phys(sw.q0, sw.q1);
    }
    for (const PlacedGate& sw : plan.swap_gates) {
        node->gates.push_back(sw);
        nx.esp *= 1.0 - pb.device->cx_error(sw.q0, sw.q1);
    }
    node->gates.push_back({GateKind::Cnot, plan.meet0, plan.meet1});
    nx.esp *= 1.0 - pb.device->cx_error(plan.meet0, plan.meet1);
    nx.emitted_count += static_cast<int>(plan.swap_gates.size()) + 1;
    nx.mark_executed(gate_idx);
    for (int sc : pb.succs[gate_idx]) --nx.unmet[sc];
    drain_singles(nx, pb, node->gates);
    nx.trace = std::move(node);
    nx.hash = state_hash(nx);
    return nx;
}

// Total order used for duplicate merging and pruning: higher score first,
// then higher esp, fewer emitted gates, smaller hash.
bool better_state(const SearchState& a, const SearchState& b) {
    if (a.score != b.score) return a.score > b.score;
    if (a.esp != b.esp) return a.esp > b.esp;
    if (a.emitted_count != b.emitted_count) return a.emitted_count < b.emitted_count;
    return a.hash < b.hash;
}

void dedupe_states(std::vector<SearchState>& states) {
    std::unordered_map<std::uint64_t, std::vector<std::size_t>> by_hash;
    std::vector<SearchState> out;
    out.reserve(states.size());
    for (SearchState& s : states) {
        auto& slots = by_hash[s.hash];
        bool merged = false;
        for (std::size_t idx : slots) {
            SearchState& kept = out[idx];
            if (kept.mapping.var_to_phys == s.mapping.var_to_phys && kept.executed == s.executed) {
                if (better_state(s, kept)) kept = std::move(s);
                merged = true;
                break;
            }
        }
        if (!merged) {
            slots.push_back(out.size());
            out.push_back(std::move(s));
        }
    }
    states = std::move(out);
}

double final_esp_of(const SearchState& s, const Problem& pb) {
    double esp = s.esp;
    for (int gi : pb.measure_order) {
        esp *= 1.0 - pb.device->readout_error(s.mapping.phys_of(pb.circuit->gates[gi].q0));
    }
    return esp;
}

CompiledCircuit finalize_state(const SearchState& s, const Problem& pb, CompileStats stats) {
    CompiledCircuit out;
    std::vector<const TraceNode*> chain;
    for (const TraceNode* n = s.trace.get(); n; n = n->parent.get()) chain.push_back(n);
    for (auto it = chain.rbegin(); it != chain.rend(); ++it) {
        out.gates.insert(out.gates.end(), (*it)->gates.begin(), (*it)->gates.end());
    }
    out.esp = s.esp;
    for (int gi : pb.measure_order) {
        const PhysId p = s.mapping.phys_of(pb.circuit->gates[gi].q0);
        out.gates.push_back({GateKind::Measure, p, -1});
        out.measures.push_back(p);
        out.esp *= 1.0 - pb.device->readout_error(p);
    }
    out.initial_mapping = *s.initial_mapping;
    out.final_mapping = s.mapping;
    out.gate_count = static_cast<int>(out.gates.size());
    out.stats = stats;
    return out;
}

Problem make_problem(const Circuit& c, const DeviceModel& d, const DependencyDag& dag) {
    Problem pb;
    pb.circuit = &c;
    pb.device = &d;
    pb.dag = &dag;
    pb.succs.resize(c.gates.size());
    for (std::size_t gi = 0; gi < c.gates.size(); ++gi) {
        for (int p : dag.preds[gi]) pb.succs[p].push_back(static_cast<int>(gi));
    }
    for (std::size_t gi = 0; gi < c.gates.size(); ++gi) {
        if (c.gates[gi].kind == GateKind::Cnot) ++pb.total_cnots;
        if (c.gates[gi].kind == GateKind::Measure) {
            pb.measure_order.push_back(static_cast<int>(gi));
        }
    }
    return pb;
}

std::vector<SearchState> expand_all(const std::vector<SearchState>& beam, const Problem& pb,
                                    const BestSwapTable& bst, int threads, CompileStats& stats) {
    const auto& gates = pb.circuit->gates;
    auto expand_range = [&](std::size_t lo, std::size_t hi, std::vector<SearchState>& sink,
                            std::uint64_t& work) {
        for (std::size_t si = lo; si < hi; ++si) {
            const SearchState& s = beam[si];
            for (int gi = 0; gi < static_cast<int>(gates.size()); ++gi) {
                if (gates[gi].kind != GateKind::Cnot) continue;
                if (s.is_executed(gi) || s.unmet[gi] != 0) continue;
                const SwapPlan& plan =
                    bst.plan(s.mapping.phys_of(gates[gi].q0), s.mapping.phys_of(gates[gi].q1));
                SearchState nx = expand_state(s, gi, plan, pb);
                nx.score = score_state(nx, pb, bst, &work);
                sink.push_back(std::move(nx));
            }
        }
    };

    std::vector<SearchState> next;
    if (threads <= 1 || beam.size() < 2) {
        std::uint64_t work = 0;
        expand_range(0, beam.size(), next, work);
        stats.score_work += work;
    } else {
        const int t = std::min<int>(threads, static_cast<int>(beam.size()));
        std::vector<std::vector<SearchState>> sinks(t);
        std::vector<std::uint64_t> works(t, 0);
        std::vector<std::thread> pool;
        const std::size_t chunk = (beam.size() + t - 1) / t;
        for (int i = 0; i < t; ++i) {
            const std::size_t lo = i * chunk;
            const std::size_t hi = std::min(beam.size(), lo + chunk);
            pool.emplace_back([&, lo, hi, i] { expand_range(lo, hi, sinks[i], works[i]); });
        }
        for (auto& th : pool) th.join();
        for (int i = 0; i < t; ++i) {
            stats.score_work += works[i];
            for (auto& s : sinks[i]) next.push_back(std::move(s));
        }
    }
    stats.expansions += next.size();
    return next;
}

void check_compile_inputs(const Circuit& c, const DeviceModel& d, int beam_width,
                          int random_mappings) {
    validate_circuit(c);
    if (c.num_vars > d.num_qubits()) {
        throw std::invalid_argument("more variables than physical qubits");
    }
    if (beam_width < 1) throw std::invalid_argument("beam width must be >= 1");
    if (random_mappings < 0) throw std::invalid_argument("random mapping count must be >= 0");
}

CompiledCircuit run_beam(const CompilerConfig& cfg, std::vector<SearchState> beam,
                         const Problem& pb, const BestSwapTable& bst) {
    const auto t0 = std::chrono::steady_clock::now();
    CompileStats stats;
    for (SearchState& s : beam) s.score = score_state(s, pb, bst, &stats.score_work);
    stats.expansions += beam.size();
    dedupe_states(beam);

    for (int iter = 0; iter < pb.total_cnots; ++iter) {
        ++stats.iterations;
        std::vector<SearchState> next = expand_all(beam, pb, bst, cfg.threads, stats);
        dedupe_states(next);
        keep_top_k(next, static_cast<std::size_t>(cfg.beam_width), better_state);
        beam = std::move(next);
    }

    const SearchState* best = nullptr;
    double best_esp = -1.0;
    for (const SearchState& s : beam) {
        const double esp = final_esp_of(s, pb);
        if (!best || esp > best_esp ||
            (esp == best_esp && (s.emitted_count < best->emitted_count ||
                                 (s.emitted_count == best->emitted_count && s.hash < best->hash)))) {
            best = &s;
            best_esp = esp;
        }
    }
    stats.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return finalize_state(*best, pb, stats);
}

}  // namespace

double update_score(const SearchState& s, const Circuit& c, const BestSwapTable& bst,
                    const DeviceModel& d) {
    DependencyDag dag = build_dependencies(c);
    Problem pb = make_problem(c, d, dag);
    return score_state(s, pb, bst, nullptr);
}

CompiledCircuit compile_beam(const Circuit& c, const DeviceModel& d, const CompilerConfig& cfg) {
    check_compile_inputs(c, d, cfg.beam_width, cfg.random_mappings);
    if (!cfg.use_gce && cfg.random_mappings == 0) {
        throw std::invalid_argument("no initial mappings (need GCE or random mappings)");
    }
    const DependencyDag dag = build_dependencies(c);
    const Problem pb = make_problem(c, d, dag);
    const PathTable pt(d);
    const BestSwapTable bst(d, pt);

    Rng rng(cfg.seed);
    std::vector<SearchState> beam;
    if (cfg.use_gce) beam.push_back(make_initial_state(pb, gce_initial_mapping(c, d, rng)));
    for (int i = 0; i < cfg.random_mappings; ++i) {
        beam.push_back(make_initial_state(pb, random_mapping(c, d, rng)));
    }
    return run_beam(cfg, std::move(beam), pb, bst);
}

CompiledCircuit compile_beam_with_initial(const Circuit& c, const DeviceModel& d,
                                          const CompilerConfig& cfg,
                                          const std::vector<Mapping>& initial) {
    check_compile_inputs(c, d, cfg.beam_width, 0);
    if (initial.empty()) throw std::invalid_argument("no initial mappings");
    const DependencyDag dag = build_dependencies(c);
    const Problem pb = make_problem(c, d, dag);
    const PathTable pt(d);
    const BestSwapTable bst(d, pt);
    std::vector<SearchState> beam;
    beam.reserve(initial.size());
    for (const Mapping& m : initial) beam.push_back(make_initial_state(pb, m));
    return run_beam(cfg, std::move(beam), pb, bst);
}

CompiledCircuit compile_random(const Circuit& c, const DeviceModel& d, std::uint64_t seed) {
    check_compile_inputs(c, d, 1, 0);
    const auto t0 = std::chrono::steady_clock::now();
    const DependencyDag dag = build_dependencies(c);
    const Problem pb = make_problem(c, d, dag);
    const PathTable pt(d);
    const BestSwapTable bst(d, pt);

    Rng rng(seed);
    CompileStats stats;
    SearchState cur = make_initial_state(pb, random_mapping(c, d, rng));
    for (int iter = 0; iter < pb.total_cnots; ++iter) {
        ++stats.iterations;
        std::vector<SearchState> next;
        for (int gi = 0; gi < static_cast<int>(c.gates.size()); ++gi) {
            if (c.gates[gi].kind != GateKind::Cnot) continue;
            if (cur.is_executed(gi) || cur.unmet[gi] != 0) continue;
            const SwapPlan& plan =
                bst.plan(cur.mapping.phys_of(c.gates[gi].q0), cur.mapping.phys_of(c.gates[gi].q1));
            next.push_back(expand_state(cur, gi, plan, pb));
        }
        stats.expansions += next.size();
        cur = std::move(next[bounded_rand(rng, next.size())]);
    }
    stats.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return finalize_state(cur, pb, stats);
}

VerifyCompiledResult verify_compiled(const Circuit& src, const CompiledCircuit& out, double tol) {
    validate_circuit(src);

    // Active physical qubits: everything a gate touches plus every variable's
    // initial and final position.
    std::vector<PhysId> active;
    auto add = [&active](PhysId p) {
        if (p < 0) return;
        if (std::find(active.begin(), active.end(), p) == active.end()) active.push_back(p);
    };
    for (const PlacedGate& g : out.gates) {
        add(g.q0);
        add(g.q1);
    }
    for (VarId v = 0; v < src.num_vars; ++v) {
        add(out.initial_mapping.var_to_phys.at(v));
        add(out.final_mapping.var_to_phys.at(v));
    }
    std::sort(active.begin(), active.end());
    const int m = static_cast<int>(active.size());
    if (m > 12) {
        throw std::invalid_argument("compiled circuit touches " + std::to_string(m) +
                                    " qubits; verification is capped at 12");
    }
    std::vector<int> local(out.initial_mapping.phys_to_var.size(), -1);
    for (int i = 0; i < m; ++i) local[active[i]] = i;

    // Source unitary columns double as the per-input expected amplitudes.
    std::vector<Gate> src_unitary_gates;
    for (const Gate& g : src.gates) {
        if (g.kind != GateKind::Measure) src_unitary_gates.push_back(g);
    }
    const Unitary usrc = unitary_of(src_unitary_gates, src.num_vars);
    const std::size_t vdim = usrc.dim();
    const std::size_t mdim = std::size_t{1} << m;

    VerifyCompiledResult r;
    r.pass = true;
    for (std::size_t x = 0; x < vdim; ++x) {
        std::uint64_t start = 0;
        for (VarId v = 0; v < src.num_vars; ++v) {
            if (x & (std::size_t{1} << v)) {
                start |= std::uint64_t{1} << local[out.initial_mapping.var_to_phys[v]];
            }
        }
        std::vector<cplx> state = basis_state(m, start);
        for (const PlacedGate& g : out.gates) {
            if (g.kind == GateKind::Measure) continue;
            apply_gate_kind(state, g.kind, local[g.q0], g.q1 >= 0 ? local[g.q1] : -1);
        }
        std::vector<cplx> expect(mdim, cplx{0.0, 0.0});
        for (std::size_t y = 0; y < vdim; ++y) {
            const cplx amp = usrc.at(y, x);
            if (amp == cplx{0.0, 0.0}) continue;
            std::uint64_t pos = 0;
            for (VarId v = 0; v < src.num_vars; ++v) {
                if (y & (std::size_t{1} << v)) {
                    pos |= std::uint64_t{1} << local[out.final_mapping.var_to_phys[v]];
                }
            }
            expect[pos] += amp;
        }
        for (std::size_t i = 0; i < mdim; ++i) {
            const double dev = std::abs(state[i] - expect[i]);
            if (dev > r.max_deviation) {
                r.max_deviation = dev;
                if (dev > tol && r.pass) {
                    r.pass = false;
                    r.detail = "first divergence: input basis " + std::to_string(x) +
                               ", amplitude index " + std::to_string(i);
                }
            }
        }
    }
    if (r.pass) r.detail = "ok";
    return r;
}

}  // namespace espr
