// This file is part of esp-router, released under the Apache-2.0 license.
// See LICENSE for details.

#pragma once

#include <cstdint>
#include <memory>
#include <random>
#include <vector>

#include "espr/circuit.hpp"
#include "espr/device.hpp"

namespace espr {

using Rng = std::mt19937_64;

/// Injective assignment of circuit variables to physical qubits.
struct Mapping {
    std::vector<PhysId> var_to_phys;  // size = num_vars
    std::vector<VarId> phys_to_var;   // size = num_qubits, -1 where free

    static Mapping make(int num_vars, int num_qubits);
    PhysId phys_of(VarId v) const { return var_to_phys[v]; }
    VarId var_at(PhysId p) const { return phys_to_var[p]; }
    void assign(VarId v, PhysId p);
    void swap_phys(PhysId a, PhysId b);
    bool operator==(const Mapping& o) const { return var_to_phys == o.var_to_phys; }
};

struct CompilerConfig {
    int beam_width = 10000;     // B
    int random_mappings = 1000; // M
    std::uint64_t seed = 0;
    bool use_gce = true;
    int threads = 1;
};

struct CompileStats {
    std::uint64_t expansions = 0;   // states generated before pruning
    std::uint64_t score_work = 0;   // unexecuted-gate enumerations in scoring
    std::uint64_t iterations = 0;
    double seconds = 0.0;
};

struct CompiledCircuit {
    std::vector<PlacedGate> gates;
    double esp = 0.0;
    Mapping initial_mapping;
    Mapping final_mapping;
    /// Physical qubit measured for each source measure, in source order.
    std::vector<PhysId> measures;
    int gate_count = 0;
    CompileStats stats;
};

/// Greatest Connecting Edge initial mapping: embeds the guest graph's
/// maximum spanning tree onto low-error device edges, falling back to random
/// free qubits for whatever remains.
Mapping gce_initial_mapping(const Circuit& c, const DeviceModel& d, Rng& rng);

/// Uniform random injective assignment.
Mapping random_mapping(const Circuit& c, const DeviceModel& d, Rng& rng);

/// Realization of one CNOT whose operands may be far apart: SWAP chains
/// moving control and target to a meeting edge, then the CNOT itself.
struct SwapPlan {
    std::vector<PlacedGate> swap_gates;  // 3 CNOTs per SWAP, in emission order
    PhysId meet0 = -1;                   // control lands here
    PhysId meet1 = -1;                   // target lands here
    double movement_esp = 1.0;           // product over swap_gates
    double total_esp = 0.0;              // movement_esp * (1 - cx_error(meet))
};

/// Precomputed best meeting edge and SWAP recipe for every ordered pair of
/// physical qubits.
class BestSwapTable {
public:
    BestSwapTable(const DeviceModel& d, const PathTable& pt);
    const SwapPlan& plan(PhysId control_pos, PhysId target_pos) const;

private:
    int n_ = 0;
    std::vector<SwapPlan> plans_;
};

/// All valid swap plans for a control/target position pair, one per
/// (meeting edge, orientation); deterministic order, best first.
std::vector<SwapPlan> all_swap_plans(const DeviceModel& d, const PathTable& pt, PhysId control_pos,
                                     PhysId target_pos);

/// Immutable chunk of emitted gates; states share their history through
/// parent pointers.
struct TraceNode {
    std::shared_ptr<const TraceNode> parent;
    std::vector<PlacedGate> gates;
};

/// One beam-search state: which gates ran, where the variables sit, the
/// accumulated ESP of the emitted trace and the lookahead score.
struct SearchState {
    Mapping mapping;
    std::shared_ptr<const Mapping> initial_mapping;
    std::vector<std::uint64_t> executed;  // bitset over source gates
    std::vector<std::uint8_t> unmet;      // unmet dependency count per gate
    double esp = 1.0;
    double score = 0.0;
    int emitted_count = 0;
    int cnots_done = 0;
    std::shared_ptr<const TraceNode> trace;
    std::uint64_t hash = 0;

    bool is_executed(int gate) const {
        return (executed[gate >> 6] >> (gate & 63)) & 1;
    }
    void mark_executed(int gate) { executed[gate >> 6] |= std::uint64_t{1} << (gate & 63); }
};

/// Lookahead score of a state: its ESP times the imaginary ESP of every
/// unexecuted gate under the current mapping.
double update_score(const SearchState& s, const Circuit& c, const BestSwapTable& bst,
                    const DeviceModel& d);

/// Beam-search compilation maximizing circuit ESP (deterministic per seed).
CompiledCircuit compile_beam(const Circuit& c, const DeviceModel& d, const CompilerConfig& cfg);

/// As compile_beam but seeded with an explicit set of initial mappings
/// (no GCE, no random mappings); used by oracle-scale tests.
CompiledCircuit compile_beam_with_initial(const Circuit& c, const DeviceModel& d,
                                          const CompilerConfig& cfg,
                                          const std::vector<Mapping>& initial);

/// Random-selection baseline: one random initial mapping, the survivor of
/// each round drawn uniformly among the expansions.
CompiledCircuit compile_random(const Circuit& c, const DeviceModel& d, std::uint64_t seed);

struct VerifyCompiledResult {
    bool pass = false;
    double max_deviation = 0.0;
    std::string detail;  // first divergence when failing
};

/// Semantic safety net: simulates the compiled gates on all source basis
/// states (ancillas |0>) and compares with the source circuit's action
/// embedded through the final mapping. Requires <= 12 touched qubits.
VerifyCompiledResult verify_compiled(const Circuit& src, const CompiledCircuit& out,
                                     double tol = 1e-8);

}  // namespace espr
