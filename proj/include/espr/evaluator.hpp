// This file is part of esp-router, released under the Apache-2.0 license.
// See LICENSE for details.

#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "espr/device.hpp"
#include "espr/mapper.hpp"

namespace espr {

/// Probability mass over measured bitstrings. Outcome bit k is the k-th
/// measured qubit (source measurement order), rendered little-endian.
struct Distribution {
    int num_bits = 0;
    std::map<std::uint64_t, double> probs;
    std::uint64_t shot_count = 0;      // 0 for ideal
    std::uint64_t error_free_shots = 0;

    std::uint64_t num_outcomes() const { return std::uint64_t{1} << num_bits; }
    double prob(std::uint64_t outcome) const;
};

struct NoiseConfig {
    bool gate_errors = true;     // classes G and B
    bool readout_errors = true;  // class S
    std::uint64_t seed = 0;
    std::uint64_t shots = 1;
};

struct ExperimentRecord {
    std::string circuit_id;
    std::string compiler;  // "beam" | "random"
    double esp = 0.0;
    double kl_median = 0.0;
    double kl_min = 0.0;
    double kl_max = 0.0;
    std::uint64_t shots = 0;
    int runs = 0;
};

struct ExperimentResult {
    std::vector<ExperimentRecord> records;
    double correlation = 0.0;  // Pearson of (esp, kl_median)
    bool correlation_defined = false;
};

/// Exact Born-rule distribution of the measured bits under noiseless
/// statevector evolution; unmeasured qubits are marginalized out.
Distribution ideal_distribution(const Circuit& c, int max_qubits = 20);
Distribution ideal_distribution(const CompiledCircuit& c, int max_qubits = 20);

/// Monte-Carlo Pauli-injection trajectories keyed to the device error rates:
/// after each gate, with probability of its class rate, a uniformly random
/// non-identity Pauli is applied on the gate's support; Measure flips the
/// classical bit with the readout error. Deterministic per seed with
/// counter-derived per-shot streams.
Distribution noisy_sample(const CompiledCircuit& c, const DeviceModel& d, const NoiseConfig& nc,
                          int max_qubits = 20);

/// D_KL(ideal || empirical) in nats. The empirical side is Laplace-smoothed
/// with alpha (alpha = 0 disables smoothing); terms with zero ideal mass
/// contribute nothing. Throws on mismatched outcome spaces.
double kl_divergence(const Distribution& ideal, const Distribution& empirical, double alpha = 1.0);

struct ExperimentItem {
    std::string id;
    std::string compiler;
    CompiledCircuit compiled;
};

/// Per circuit: `runs` independent noisy samples of `shots` each, KL against
/// the circuit's own ideal distribution; plus the Pearson correlation of
/// (esp, median KL) across circuits.
ExperimentResult run_experiment(const std::vector<ExperimentItem>& items, const DeviceModel& d,
                                int runs, std::uint64_t shots, std::uint64_t seed);

double pearson_correlation(const std::vector<double>& x, const std::vector<double>& y,
                           bool& defined);

/// One line per record, tab-separated, then `correlation <value>`.
std::string format_experiment(const ExperimentResult& r);

/// CSV dump `outcome,probability` in outcome order.
std::string distribution_csv(const Distribution& dist);

}  // namespace espr
