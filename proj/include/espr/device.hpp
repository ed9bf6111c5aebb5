// This file is part of esp-router, released under the Apache-2.0 license.
// See LICENSE for details.

#pragma once

#include <string>
#include <vector>

#include "espr/circuit.hpp"

namespace espr {

using PhysId = int;

struct PhysQubit {
    PhysId id = 0;
    double single_error = 0.0;   // class G
    double readout_error = 0.0;  // class S
};

struct CouplingEdge {
    PhysId q0 = 0;
    PhysId q1 = 0;
    double cx_error = 0.0;  // class B
};

/// Host graph: qubits, undirected coupling edges and calibrated error rates.
/// Must be connected; probabilities live in [0, 1).
class DeviceModel {
public:
    DeviceModel() = default;
    DeviceModel(std::string name, std::vector<PhysQubit> qubits, std::vector<CouplingEdge> edges);

    const std::string& name() const { return name_; }
    int num_qubits() const { return static_cast<int>(qubits_.size()); }
    const std::vector<PhysQubit>& qubits() const { return qubits_; }
    const std::vector<CouplingEdge>& edges() const { return edges_; }

    bool has_edge(PhysId a, PhysId b) const;
    /// cx_error of edge (a,b); throws if absent.
    double cx_error(PhysId a, PhysId b) const;
    double single_error(PhysId q) const { return qubits_.at(q).single_error; }
    double readout_error(PhysId q) const { return qubits_.at(q).readout_error; }
    const std::vector<PhysId>& neighbors(PhysId q) const { return adj_.at(q); }

    /// ESP of one SWAP on edge (a,b): three CNOTs.
    double esp_swap(PhysId a, PhysId b) const;

private:
    std::string name_;
    std::vector<PhysQubit> qubits_;
    std::vector<CouplingEdge> edges_;
    std::vector<std::vector<PhysId>> adj_;
    std::vector<std::vector<double>> cx_err_;  // -1 where no edge
};

/// Loads the JSON device file format (see README). Validates ranges,
/// duplicate edges and connectivity.
DeviceModel load_device(const std::string& text);
DeviceModel load_device_file(const std::string& path);

/// A gate placed on physical qubits. q1 = -1 for single-operand kinds.
struct PlacedGate {
    GateKind kind;
    PhysId q0 = -1;
    PhysId q1 = -1;
};

/// 1 - error rate of the matching class (G single, B CNOT, S measure).
/// Throws on adjacency violation for CNOT.
double esp_gate(const DeviceModel& d, GateKind kind, PhysId q0, PhysId q1 = -1);

/// Product of per-gate ESPs; SPAM counted once per measured qubit.
double esp_circuit(const DeviceModel& d, const std::vector<PlacedGate>& placed);

/// Best-ESP SWAP path for every ordered qubit pair, computed once per device
/// by Floyd-Warshall on -ln(esp_swap) weights. Ties broken by fewer hops,
/// then lexicographically smallest qubit-id sequence.
class PathTable {
public:
    explicit PathTable(const DeviceModel& d);

    /// Product of per-SWAP ESPs along the stored path (1.0 for u == v).
    double esp(PhysId u, PhysId v) const { return esp_[idx(u, v)]; }
    /// Vertex sequence u..v (single element when u == v).
    std::vector<PhysId> path(PhysId u, PhysId v) const;
    int hops(PhysId u, PhysId v) const { return hops_[idx(u, v)]; }

private:
    std::size_t idx(PhysId u, PhysId v) const { return static_cast<std::size_t>(u) * n_ + v; }
    int n_ = 0;
    std::vector<double> esp_;
    std::vector<int> hops_;
    std::vector<PhysId> next_;  // next vertex on the path u -> v
};

PathTable all_pairs_best_paths(const DeviceModel& d);

/// Maximum unweighted hop distance from q to any other qubit.
int eccentricity(const DeviceModel& d, PhysId q);

}  // namespace espr
