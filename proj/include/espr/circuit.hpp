// This file is part of esp-router, released under the Apache-2.0 license.
// See LICENSE for details.

#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace espr {

/// Logical qubit variable. Ids are dense 0..num_vars-1 within a Circuit.
using VarId = int;

enum class GateKind : std::uint8_t {
    H,
    X,
    S,
    Sdg,
    T,
    Tdg,
    Cnot,
    Measure,
};

bool is_two_qubit(GateKind k);
bool is_measure(GateKind k);
const char* gate_name(GateKind k);

/// One gate in program order. For Cnot, q0 is the control and q1 the target;
/// single-operand kinds leave q1 = -1.
struct Gate {
    GateKind kind;
    VarId q0 = -1;
    VarId q1 = -1;

    bool touches(VarId v) const { return q0 == v || q1 == v; }
};

struct Circuit {
    int num_vars = 0;
    std::vector<Gate> gates;
};

/// Immediate predecessors per gate: for each operand, the latest earlier gate
/// sharing it. Acyclic by construction.
struct DependencyDag {
    std::vector<std::vector<int>> preds;
};

struct ParseError : std::invalid_argument {
    ParseError(int line_, int col_, const std::string& what_)
        : std::invalid_argument(std::to_string(line_) + ":" + std::to_string(col_) + ": " + what_),
          line(line_),
          col(col_) {}
    int line;
    int col;
};

/// Parses the circuit text format (a strict subset of OpenQASM 2.0, see
/// README). Throws ParseError with line/column on malformed input, unknown
/// gate names, out-of-range operands, and gates after a measure.
Circuit parse_circuit(const std::string& text);

/// Inverse of parse_circuit: emits one statement per line.
std::string emit_circuit(const Circuit& c);

/// Validates operand ranges, operand distinctness and measure terminality.
/// Throws std::invalid_argument on violation.
void validate_circuit(const Circuit& c);

DependencyDag build_dependencies(const Circuit& c);

/// Ripple-carry adder testbench over 2n+2 variables: carry-in, interleaved
/// b/a input registers, carry-out. Input registers are put into uniform
/// superposition; the n+1 sum bits are measured.
Circuit gen_cuccaro_adder(int n);

/// Expansion of a Toffoli into 6 CNOT and 9 single-qubit gates.
std::vector<Gate> toffoli_gates(VarId c0, VarId c1, VarId target);

}  // namespace espr
