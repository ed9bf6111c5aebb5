// This file is part of esp-router, released under the Apache-2.0 license.
// See LICENSE for details.

#include "espr/device.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <limits>
#include <stdexcept>

#include "espr/util.hpp"
#include "json.hpp"

namespace espr {

namespace {

void check_prob(double p, const std::string& what) {
    if (!(p >= 0.0 && p < 1.0)) {
        throw std::invalid_argument(what + " out of range [0,1): " + std::to_string(p));
    }
}

}  // namespace

DeviceModel::DeviceModel(std::string name, std::vector<PhysQubit> qubits,
                         std::vector<CouplingEdge> edges)
    : name_(std::move(name)), qubits_(std::move(qubits)), edges_(std::move(edges)) {
    const int n = static_cast<int>(qubits_.size());
    if (n == 0) throw std::invalid_argument("device has no qubits");
    for (int i = 0; i < n; ++i) {
        if (qubits_[i].id != i) {
            throw std::invalid_argument("qubit ids must be dense 0..n-1");
        }
        check_prob(qubits_[i].single_error, "single_error");
        check_prob(qubits_[i].readout_error, "readout_error");
    }
    adj_.assign(n, {});
    cx_err_.assign(n, std::vector<double>(n, -1.0));
    for (auto& e : edges_) {
        if (e.q0 == e.q1) throw std::invalid_argument("self-loop edge");
        if (e.q0 < 0 || e.q0 >= n || e.q1 < 0 || e.q1 >= n) {
            throw std::invalid_argument("edge endpoint out of range");
        }
        check_prob(e.cx_error, "cx_error");
        if (e.q0 > e.q1) std::swap(e.q0, e.q1);
        if (cx_err_[e.q0][e.q1] >= 0.0) {
            throw std::invalid_argument("duplicate edge (" + std::to_string(e.q0) + "," +
                                        std::to_string(e.q1) + ")");
        }
        cx_err_[e.q0][e.q1] = cx_err_[e.q1][e.q0] = e.cx_error;
        adj_[e.q0].push_back(e.q1);
        adj_[e.q1].push_back(e.q0);
    }
    for (auto& nbrs : adj_) std::sort(nbrs.begin(), nbrs.end());

    // Connectivity check (single-qubit devices are trivially connected).
    std::vector<bool> seen(n, false);
    std::deque<PhysId> queue{0};
    seen[0] = true;
    int count = 1;
    while (!queue.empty()) {
        const PhysId q = queue.front();
        queue.pop_front();
        for (PhysId nb : adj_[q]) {
            if (!seen[nb]) {
                seen[nb] = true;
                ++count;
                queue.push_back(nb);
            }
        }
    }
    if (count != n) throw std::invalid_argument("device graph is disconnected");
}

bool DeviceModel::has_edge(PhysId a, PhysId b) const {
    if (a < 0 || b < 0 || a >= num_qubits() || b >= num_qubits() || a == b) return false;
    return cx_err_[a][b] >= 0.0;
}

double DeviceModel::cx_error(PhysId a, PhysId b) const {
    if (!has_edge(a, b)) {
        throw std::invalid_argument("no coupling edge (" + std::to_string(a) + "," +
                                    std::to_string(b) + ")");
    }
    return cx_err_[a][b];
}

double DeviceModel::esp_swap(PhysId a, PhysId b) const {
    const double e = 1.0 - cx_error(a, b);
    return e * e * e;
}

DeviceModel load_device(const std::string& text) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(text);
    } catch (const nlohmann::json::exception& e) {
        throw std::invalid_argument(std::string("device file is not valid JSON: ") + e.what());
    }
    try {
        std::vector<PhysQubit> qubits;
        for (const auto& q : j.at("qubits")) {
            qubits.push_back({q.at("id").get<int>(), q.at("single_error").get<double>(),
                              q.at("readout_error").get<double>()});
        }
        std::sort(qubits.begin(), qubits.end(),
                  [](const PhysQubit& a, const PhysQubit& b) { return a.id < b.id; });
        std::vector<CouplingEdge> edges;
        for (const auto& e : j.at("edges")) {
            edges.push_back(
                {e.at("q0").get<int>(), e.at("q1").get<int>(), e.at("cx_error").get<double>()});
        }
        return DeviceModel(j.at("name").get<std::string>(), std::move(qubits), std::move(edges));
    } catch (const nlohmann::json::exception& e) {
        throw std::invalid_argument(std::string("malformed device file: ") + e.what());
    }
}

DeviceModel load_device_file(const std::string& path) { return load_device(read_file(path)); }

double esp_gate(const DeviceModel& d, GateKind kind, PhysId q0, PhysId q1) {
    if (q0 < 0 || q0 >= d.num_qubits()) throw std::invalid_argument("invalid qubit id");
    switch (kind) {
        case GateKind::Cnot:
            return 1.0 - d.cx_error(q0, q1);
        case GateKind::Measure:
            return 1.0 - d.readout_error(q0);
        default:
            return 1.0 - d.single_error(q0);
    }
}

double esp_circuit(const DeviceModel& d, const std::vector<PlacedGate>& placed) {
    double esp = 1.0;
    std::vector<bool> measured(d.num_qubits(), false);
    for (const PlacedGate& g : placed) {
        if (g.kind == GateKind::Measure) {
            if (measured[g.q0]) continue;  // SPAM counts once per qubit
            measured[g.q0] = true;
        }
        esp *= esp_gate(d, g.kind, g.q0, g.q1);
    }
    return esp;
}

PathTable::PathTable(const DeviceModel& d) : n_(d.num_qubits()) {
    const double inf = std::numeric_limits<double>::infinity();
    std::vector<double> cost(static_cast<std::size_t>(n_) * n_, inf);
    hops_.assign(static_cast<std::size_t>(n_) * n_, std::numeric_limits<int>::max());
    next_.assign(static_cast<std::size_t>(n_) * n_, -1);
    esp_.assign(static_cast<std::size_t>(n_) * n_, 0.0);

    for (PhysId v = 0; v < n_; ++v) {
        cost[idx(v, v)] = 0.0;
        hops_[idx(v, v)] = 0;
        next_[idx(v, v)] = v;
    }
    for (const CouplingEdge& e : d.edges()) {
        // -ln turns the max-product objective into min-sum exactly.
        const double w = -std::log(d.esp_swap(e.q0, e.q1));
        cost[idx(e.q0, e.q1)] = w;
        cost[idx(e.q1, e.q0)] = w;
        hops_[idx(e.q0, e.q1)] = 1;
        hops_[idx(e.q1, e.q0)] = 1;
        next_[idx(e.q0, e.q1)] = e.q1;
        next_[idx(e.q1, e.q0)] = e.q0;
    }

    // Warshall-Floyd with deterministic tie-breaking: fewer hops, then the
    // lexicographically smaller vertex sequence (compared via next hop).
    const double rel_eps = 1e-12;
    for (PhysId k = 0; k < n_; ++k) {
        for (PhysId i = 0; i < n_; ++i) {
            if (i == k) continue;
            const double cik = cost[idx(i, k)];
            if (cik == inf) continue;
            for (PhysId j = 0; j < n_; ++j) {
                if (j == k || j == i) continue;
                const double ckj = cost[idx(k, j)];
                if (ckj == inf) continue;
                const double cand = cik + ckj;
                const double cur = cost[idx(i, j)];
                if (cur == inf) {
                    cost[idx(i, j)] = cand;
                    hops_[idx(i, j)] = hops_[idx(i, k)] + hops_[idx(k, j)];
                    next_[idx(i, j)] = next_[idx(i, k)];
                    continue;
                }
                const double tol = rel_eps * std::max(1.0, std::abs(cur));
                bool better = false;
                if (cand < cur - tol) {
                    better = true;
                } else if (cand <= cur + tol) {
                    const int cand_hops = hops_[idx(i, k)] + hops_[idx(k, j)];
                    if (cand_hops < hops_[idx(i, j)]) {
                        better = true;
                    } else if (cand_hops == hops_[idx(i, j)] &&
                               next_[idx(i, k)] < next_[idx(i, j)]) {
                        better = true;
                    }
                }
                if (better) {
                    cost[idx(i, j)] = cand;
                    hops_[idx(i, j)] = hops_[idx(i, k)] + hops_[idx(k, j)];
                    next_[idx(i, j)] = next_[idx(i, k)];
                }
            }
        }
    }

    // Stored ESP is recomputed along the reconstructed path: bit-exactly the
    // product of per-SWAP ESPs.
    for (PhysId u = 0; u < n_; ++u) {
        for (PhysId v = 0; v < n_; ++v) {
            double esp = 1.0;
            PhysId cur = u;
            while (cur != v) {
                const PhysId nx = next_[idx(cur, v)];
                esp *= d.esp_swap(cur, nx);
                cur = nx;
            }
            esp_[idx(u, v)] = esp;
        }
    }
}

std::vector<PhysId> PathTable::path(PhysId u, PhysId v) const {
    std::vector<PhysId> p{u};
    PhysId cur = u;
    while (cur != v) {
        cur = next_[idx(cur, v)];
        p.push_back(cur);
    }
    return p;
}

PathTable all_pairs_best_paths(const DeviceModel& d) { return PathTable(d); }

int eccentricity(const DeviceModel& d, PhysId q) {
    if (q < 0 || q >= d.num_qubits()) throw std::invalid_argument("invalid qubit id");
    std::vector<int> dist(d.num_qubits(), -1);
    std::deque<PhysId> queue{q};
    dist[q] = 0;
    int worst = 0;
    while (!queue.empty()) {
        const PhysId u = queue.front();
        queue.pop_front();
        worst = std::max(worst, dist[u]);
        for (PhysId nb : d.neighbors(u)) {
            if (dist[nb] < 0) {
                dist[nb] = dist[u] + 1;
                queue.push_back(nb);
            }
        }
    }
    return worst;
}

}  // namespace espr
