// This file is part of esp-router, released under the Apache-2.0 license.
// See LICENSE for details.

#pragma once

#include <complex>
#include <cstdint>
#include <span>
#include <vector>

#include "espr/circuit.hpp"

namespace espr {

using cplx = std::complex<double>;

/// Dense unitary on nq qubits, column-major: m[col * dim + row].
/// Qubit k corresponds to bit k of the basis index (little-endian).
struct Unitary {
    int nq = 0;
    std::vector<cplx> m;

    std::size_t dim() const { return std::size_t{1} << nq; }
    cplx at(std::size_t row, std::size_t col) const { return m[col * dim() + row]; }
};

Unitary identity_unitary(int nq);

/// In-place statevector kernels. `q`, `control`, `target` index bits of the
/// amplitude array, which must have length 2^nq.
void apply_single(std::span<cplx> state, int q, const cplx u[4]);
void apply_cnot(std::span<cplx> state, int control, int target);
void apply_gate_kind(std::span<cplx> state, GateKind kind, int q0, int q1);

/// Exact unitary of a measure-free gate sequence. Operand indices must be
/// < nq. Throws std::invalid_argument when nq exceeds max_qubits or a
/// Measure is present.
Unitary unitary_of(const std::vector<Gate>& gates, int nq, int max_qubits = 12);
Unitary unitary_of(const Circuit& c, int max_qubits = 12);

double max_abs_diff(const Unitary& a, const Unitary& b);

/// |basis> statevector of nq qubits.
std::vector<cplx> basis_state(int nq, std::uint64_t basis);

}  // namespace espr
