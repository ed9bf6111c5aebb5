// This file is part of esp-router, released under the Apache-2.0 license.
// See LICENSE for details.

#include "espr/sim.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace espr {

namespace {

constexpr double kInvSqrt2 = 0.70710678118654752440;

const cplx* matrix_for(GateKind kind) {
    using namespace std::complex_literals;
    static const cplx h[4] = {kInvSqrt2, kInvSqrt2, kInvSqrt2, -kInvSqrt2};
    static const cplx x[4] = {0.0, 1.0, 1.0, 0.0};
    static const cplx s[4] = {1.0, 0.0, 0.0, 1.0i};
    static const cplx sdg[4] = {1.0, 0.0, 0.0, -1.0i};
    static const cplx t[4] = {1.0, 0.0, 0.0, cplx{kInvSqrt2, kInvSqrt2}};
    static const cplx tdg[4] = {1.0, 0.0, 0.0, cplx{kInvSqrt2, -kInvSqrt2}};
    switch (kind) {
        case GateKind::H: return h;
        case GateKind::X: return x;
        case GateKind::S: return s;
        case GateKind::Sdg: return sdg;
        case GateKind::T: return t;
        case GateKind::Tdg: return tdg;
        default: return nullptr;
    }
}

}  // namespace

Unitary identity_unitary(int nq) {
    Unitary u;
    u.nq = nq;
    const std::size_t dim = u.dim();
    u.m.assign(dim * dim, cplx{0.0, 0.0});
    for (std::size_t i = 0; i < dim; ++i) u.m[i * dim + i] = 1.0;
    return u;
}

void apply_single(std::span<cplx> state, int q, const cplx u[4]) {
    // u is row-major {u00, u01, u10, u11}.
    const std::size_t bit = std::size_t{1} << q;
    const std::size_t n = state.size();
    for (std::size_t base = 0; base < n; base += 2 * bit) {
        for (std::size_t off = 0; off < bit; ++off) {
            const std::size_t i0 = base + off;
            const std::size_t i1 = i0 + bit;
            const cplx a = state[i0];
            const cplx b = state[i1];
            state[i0] = u[0] * a + u[1] * b;
            state[i1] = u[2] * a + u[3] * b;
        }
    }
}

void apply_cnot(std::span<cplx> state, int control, int target) {
    const std::size_t cbit = std::size_t{1} << control;
    const std::size_t tbit = std::size_t{1} << target;
    const std::size_t n = state.size();
    for (std::size_t i = 0; i < n; ++i) {
        if ((i & cbit) && !(i & tbit)) {
            std::swap(state[i], state[i | tbit]);
        }
    }
}

void apply_gate_kind(std::span<cplx> state, GateKind kind, int q0, int q1) {
    if (kind == GateKind::Cnot) {
        apply_cnot(state, q0, q1);
        return;
    }
    if (kind == GateKind::Measure) {
        throw std::invalid_argument("cannot apply Measure as a unitary");
    }
    apply_single(state, q0, matrix_for(kind));
}

Unitary unitary_of(const std::vector<Gate>& gates, int nq, int max_qubits) {
    if (nq > max_qubits) {
        throw std::invalid_argument("circuit too large for unitary oracle: " + std::to_string(nq) +
                                    " > " + std::to_string(max_qubits) + " qubits");
    }
    Unitary u = identity_unitary(nq);
    const std::size_t dim = u.dim();
    for (const Gate& g : gates) {
        if (g.kind == GateKind::Measure) {
            throw std::invalid_argument("unitary oracle requires a measure-free circuit");
        }
        for (std::size_t col = 0; col < dim; ++col) {
            apply_gate_kind(std::span<cplx>(u.m.data() + col * dim, dim), g.kind, g.q0, g.q1);
        }
    }
    return u;
}

Unitary unitary_of(const Circuit& c, int max_qubits) {
    return unitary_of(c.gates, c.num_vars, max_qubits);
}

double max_abs_diff(const Unitary& a, const Unitary& b) {
    if (a.nq != b.nq) throw std::invalid_argument("unitary dimension mismatch");
    double worst = 0.0;
    for (std::size_t i = 0; i < a.m.size(); ++i) {
        worst = std::max(worst, std::abs(a.m[i] - b.m[i]));
    }
    return worst;
}

std::vector<cplx> basis_state(int nq, std::uint64_t basis) {
    std::vector<cplx> state(std::size_t{1} << nq, cplx{0.0, 0.0});
    state[basis] = 1.0;
    return state;
}

}  // namespace espr
