// This file is part of esp-router, released under the Apache-2.0 license.
// See LICENSE for details.

#include "espr/remote_cnot.hpp"

#include <algorithm>
#include <numeric>
#include <stdexcept>

#include "espr/sim.hpp"

namespace espr {

bool RemoteCnotTemplate::relocates() const {
    for (std::size_t i = 0; i < relocation.size(); ++i) {
        if (relocation[i] != static_cast<int>(i)) return true;
    }
    return false;
}

std::vector<std::vector<PhysId>> enumerate_paths(const DeviceModel& d, PhysId u, PhysId v,
                                                 int max_hops) {
    if (max_hops < 1 || max_hops > 4) {
        throw std::invalid_argument("max_hops must be in 1..4");
    }
    std::vector<std::vector<PhysId>> found;
    std::vector<PhysId> cur{u};
    std::vector<bool> on_path(d.num_qubits(), false);
    on_path[u] = true;

    auto dfs = [&](auto&& self, PhysId at) -> void {
        if (at == v) {
            found.push_back(cur);
            return;
        }
        if (static_cast<int>(cur.size()) - 1 >= max_hops) return;
        for (PhysId nb : d.neighbors(at)) {  // neighbors sorted ascending
            if (on_path[nb]) continue;
            on_path[nb] = true;
            cur.push_back(nb);
            self(self, nb);
            cur.pop_back();
            on_path[nb] = false;
        }
    };
    if (u != v) dfs(dfs, u);

    std::stable_sort(found.begin(), found.end(),
                     [](const std::vector<PhysId>& a, const std::vector<PhysId>& b) {
                         if (a.size() != b.size()) return a.size() < b.size();
                         return a < b;
                     });
    return found;
}

namespace {

void push_cx(std::vector<PlacedGate>& gates, PhysId c, PhysId t) {
    gates.push_back({GateKind::Cnot, c, t});
}

// SWAP as three CNOTs; `flip` selects the opposite direction decomposition.
void push_swap(std::vector<PlacedGate>& gates, PhysId a, PhysId b, bool flip) {
    if (flip) std::swap(a, b);
    push_cx(gates, a, b);
    push_cx(gates, b, a);
    push_cx(gates, a, b);
}

std::vector<int> identity_perm(std::size_t n) {
    std::vector<int> p(n);
    std::iota(p.begin(), p.end(), 0);
    return p;
}

// Nested bridge: the 2-hop ladder CX(0,1)..CX(k-1,k), CX(k-2,k-1)..CX(1,2)
// played twice equals CNOT(0 -> k) on the full domain. `mirror` plays the
// ladder from the far end instead.
std::vector<PlacedGate> bridge_gates(const std::vector<PhysId>& path, bool mirror) {
    const int k = static_cast<int>(path.size()) - 1;
    std::vector<std::pair<int, int>> half;
    if (!mirror) {
        for (int i = 0; i < k; ++i) half.emplace_back(i, i + 1);
        for (int i = k - 2; i >= 1; --i) half.emplace_back(i, i + 1);
    } else {
        for (int i = k - 1; i >= 0; --i) half.emplace_back(i, i + 1);
        for (int i = 1; i <= k - 2; ++i) half.emplace_back(i, i + 1);
    }
    std::vector<PlacedGate> gates;
    for (int rep = 0; rep < 2; ++rep) {
        for (auto [a, b] : half) push_cx(gates, path[a], path[b]);
    }
    return gates;
}

// SWAP-movement realization: control walks to path[meet], target to
// path[meet+1], then one CNOT over the meeting edge. Relocating.
RemoteCnotTemplate swap_movement_template(const std::vector<PhysId>& path, int meet, bool flip,
                                          const std::string& name) {
    const int k = static_cast<int>(path.size()) - 1;
    RemoteCnotTemplate t;
    t.name = name;
    t.path = path;
    t.domain = EquivalenceDomain::Full;
    t.relocation = identity_perm(path.size());
    auto do_swap = [&](int i, int j) {
        push_swap(t.gates, path[i], path[j], flip);
        std::swap(t.relocation[i], t.relocation[j]);
    };
    for (int i = 0; i < meet; ++i) do_swap(i, i + 1);            // control forward
    for (int i = k; i > meet + 1; --i) do_swap(i, i - 1);        // target backward
    push_cx(t.gates, path[meet], path[meet + 1]);
    // relocation[i] = final position of the content initially at position i.
    std::vector<int> final_pos(path.size());
    for (std::size_t pos = 0; pos < path.size(); ++pos) final_pos[t.relocation[pos]] = static_cast<int>(pos);
    t.relocation = final_pos;
    return t;
}

}  // namespace

std::vector<RemoteCnotTemplate> templates_for_path(const DeviceModel& d,
                                                   const std::vector<PhysId>& path) {
    if (path.size() < 2) throw std::invalid_argument("path needs at least two qubits");
    for (std::size_t i = 0; i + 1 < path.size(); ++i) {
        if (!d.has_edge(path[i], path[i + 1])) {
            throw std::invalid_argument("path hop (" + std::to_string(path[i]) + "," +
                                        std::to_string(path[i + 1]) + ") is not a device edge");
        }
    }
    const int hops = static_cast<int>(path.size()) - 1;
    std::vector<RemoteCnotTemplate> out;

    if (hops == 1) {
        RemoteCnotTemplate t;
        t.name = "A";
        t.path = path;
        t.relocation = identity_perm(2);
        push_cx(t.gates, path[0], path[1]);
        out.push_back(std::move(t));
        return out;
    }

    auto bridge = [&](bool mirror, const std::string& name) {
        RemoteCnotTemplate t;
        t.name = name;
        t.path = path;
        t.relocation = identity_perm(path.size());
        t.gates = bridge_gates(path, mirror);
        out.push_back(std::move(t));
    };

    if (hops == 2) {
        // The seven 2-hop candidates: two bridge orderings, the shorter
        // ancilla-assisted bridge, and four SWAP-relocation forms.
        bridge(false, "B");
        RemoteCnotTemplate c;
        c.name = "C";
        c.path = path;
        c.relocation = identity_perm(3);
        c.domain = EquivalenceDomain::AncillaZero;
        push_cx(c.gates, path[0], path[1]);
        push_cx(c.gates, path[1], path[2]);
        push_cx(c.gates, path[0], path[1]);
        out.push_back(std::move(c));
        bridge(true, "D");
        out.push_back(swap_movement_template(path, 0, false, "E"));
        out.push_back(swap_movement_template(path, 0, true, "F"));
        out.push_back(swap_movement_template(path, 1, false, "G"));
        out.push_back(swap_movement_template(path, 1, true, "H"));
        return out;
    }

    bridge(false, "B");
    bridge(true, "D");
    for (int meet = 0; meet < hops; ++meet) {
        const std::string base = "S" + std::to_string(meet);
        out.push_back(swap_movement_template(path, meet, false, base + "a"));
        out.push_back(swap_movement_template(path, meet, true, base + "b"));
    }
    return out;
}

CandidateSet instantiate_candidates(const DeviceModel& d, const std::vector<PhysId>& path) {
    CandidateSet cs;
    cs.control = path.front();
    cs.target = path.back();
    for (auto& t : templates_for_path(d, path)) {
        Candidate c;
        c.esp = esp_circuit(d, t.gates);
        c.tmpl = std::move(t);
        cs.candidates.push_back(std::move(c));
    }
    std::stable_sort(cs.candidates.begin(), cs.candidates.end(),
                     [](const Candidate& a, const Candidate& b) {
                         if (a.esp != b.esp) return a.esp > b.esp;
                         return a.tmpl.name < b.tmpl.name;
                     });
    return cs;
}

CandidateSet enumerate_candidates(const DeviceModel& d, PhysId u, PhysId v, int max_hops) {
    CandidateSet cs;
    cs.control = u;
    cs.target = v;
    for (const auto& path : enumerate_paths(d, u, v, max_hops)) {
        CandidateSet per_path = instantiate_candidates(d, path);
        for (auto& c : per_path.candidates) cs.candidates.push_back(std::move(c));
    }
    std::stable_sort(cs.candidates.begin(), cs.candidates.end(),
                     [](const Candidate& a, const Candidate& b) {
                         if (a.esp != b.esp) return a.esp > b.esp;
                         return a.tmpl.name < b.tmpl.name;
                     });
    return cs;
}

VerifyResult verify_template_on(const RemoteCnotTemplate& t, EquivalenceDomain domain,
                                double tol) {
    const int nq = static_cast<int>(t.path.size());
    if (nq > 5) throw std::invalid_argument("template too large to verify (max 4 hops)");

    // Local index: path position i <-> qubit bit i.
    std::vector<Gate> local;
    for (const PlacedGate& pg : t.gates) {
        int a = -1;
        int b = -1;
        for (int i = 0; i < nq; ++i) {
            if (t.path[i] == pg.q0) a = i;
            if (t.path[i] == pg.q1) b = i;
        }
        if (a < 0 || (pg.q1 >= 0 && b < 0)) {
            return {false, 0.0, t.name + ": gate touches a qubit off the path"};
        }
        local.push_back({pg.kind, a, b});
    }
    const Unitary u = unitary_of(local, nq);

    // Expected: relocation permutation applied after an endpoint CNOT.
    const std::size_t dim = std::size_t{1} << nq;
    auto permute = [&](std::size_t basis) {
        std::size_t out = 0;
        for (int i = 0; i < nq; ++i) {
            if (basis & (std::size_t{1} << i)) out |= std::size_t{1} << t.relocation[i];
        }
        return out;
    };
    const int ctrl_bit = 0;
    const int tgt_bit = nq - 1;

    double worst = 0.0;
    std::string detail;
    for (std::size_t col = 0; col < dim; ++col) {
        if (domain == EquivalenceDomain::AncillaZero) {
            std::size_t interior = col & ~((std::size_t{1} << ctrl_bit) | (std::size_t{1} << tgt_bit));
            if (interior != 0) continue;
        }
        std::size_t expect = col;
        if (col & (std::size_t{1} << ctrl_bit)) expect ^= std::size_t{1} << tgt_bit;
        expect = permute(expect);
        for (std::size_t row = 0; row < dim; ++row) {
            const cplx want = (row == expect) ? cplx{1.0, 0.0} : cplx{0.0, 0.0};
            const double dev = std::abs(u.at(row, col) - want);
            if (dev > worst) {
                worst = dev;
                detail = t.name + ": first divergence at column " + std::to_string(col);
            }
        }
    }
    VerifyResult r;
    r.max_deviation = worst;
    r.pass = worst <= tol;
    r.detail = r.pass ? (t.name + ": ok") : detail;
    return r;
}

VerifyResult verify_template(const RemoteCnotTemplate& t, double tol) {
    return verify_template_on(t, t.domain, tol);
}

const Candidate& select_best(const CandidateSet& cs) {
    if (cs.candidates.empty()) throw std::invalid_argument("empty candidate set");
    const Candidate* best = &cs.candidates.front();
    for (const Candidate& c : cs.candidates) {
        if (c.esp > best->esp || (c.esp == best->esp && c.tmpl.name < best->tmpl.name)) {
            best = &c;
        }
    }
    return *best;
}

}  // namespace espr
