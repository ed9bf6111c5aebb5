// This file is part of esp-router, released under the Apache-2.0 license.
// See LICENSE for details.

#pragma once

#include <string>
#include <vector>

#include "espr/device.hpp"

namespace espr {

enum class EquivalenceDomain : std::uint8_t {
    Full,         // unitary equals CNOT (x) I on the whole path register
    AncillaZero,  // equality holds only when interior qubits start in |0>
};

/// A verified realization of CNOT(path.front() -> path.back()) along a
/// device path. `relocation[i]` is the path position where the content of
/// path position i ends up (identity when the template does not relocate).
struct RemoteCnotTemplate {
    std::string name;
    std::vector<PhysId> path;
    std::vector<PlacedGate> gates;
    std::vector<int> relocation;
    EquivalenceDomain domain = EquivalenceDomain::Full;

    int hop_count() const { return static_cast<int>(path.size()) - 1; }
    bool relocates() const;
};

struct Candidate {
    RemoteCnotTemplate tmpl;
    double esp = 0.0;
};

struct CandidateSet {
    PhysId control = -1;
    PhysId target = -1;
    std::vector<Candidate> candidates;  // sorted descending by esp
};

/// All simple paths u -> v of length <= max_hops (1 <= max_hops <= 4),
/// in deterministic order (shorter first, then lexicographic).
std::vector<std::vector<PhysId>> enumerate_paths(const DeviceModel& d, PhysId u, PhysId v,
                                                 int max_hops);

/// Templates realizing a CNOT along `path`. A 1-hop path yields the direct
/// CNOT; a 2-hop path yields the seven candidates B..H; longer paths yield
/// the two nested bridge orderings plus SWAP-movement candidates for every
/// meeting edge on the path, in both SWAP decomposition directions.
std::vector<RemoteCnotTemplate> templates_for_path(const DeviceModel& d,
                                                   const std::vector<PhysId>& path);

/// Instantiates and ESP-ranks all templates for `path`.
CandidateSet instantiate_candidates(const DeviceModel& d, const std::vector<PhysId>& path);

/// Candidates over every path between u and v up to max_hops.
CandidateSet enumerate_candidates(const DeviceModel& d, PhysId u, PhysId v, int max_hops);

struct VerifyResult {
    bool pass = false;
    double max_deviation = 0.0;
    std::string detail;
};

/// Checks that the template's gate sequence, composed with its relocation
/// permutation, equals CNOT(endpoints) (x) identity on the declared domain.
VerifyResult verify_template(const RemoteCnotTemplate& t, double tol = 1e-10);
VerifyResult verify_template_on(const RemoteCnotTemplate& t, EquivalenceDomain domain,
                                double tol = 1e-10);

/// Argmax-ESP candidate; ties broken by template name.
const Candidate& select_best(const CandidateSet& cs);

}  // namespace espr
