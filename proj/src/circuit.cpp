// This file is part of esp-router, released under the Apache-2.0 license.
// See LICENSE for details.

#include "espr/circuit.hpp"

#include <array>
#include <cctype>
#include <optional>
#include <sstream>
#include <unordered_map>

namespace espr {

bool is_two_qubit(GateKind k) { return k == GateKind::Cnot; }
bool is_measure(GateKind k) { return k == GateKind::Measure; }

const char* gate_name(GateKind k) {
    switch (k) {
        case GateKind::H: return "h";
        case GateKind::X: return "x";
        case GateKind::S: return "s";
        case GateKind::Sdg: return "sdg";
        case GateKind::T: return "t";
        case GateKind::Tdg: return "tdg";
        case GateKind::Cnot: return "cx";
        case GateKind::Measure: return "measure";
    }
    return "?";
}

namespace {

std::optional<GateKind> single_qubit_kind(const std::string& name) {
    if (name == "h") return GateKind::H;
    if (name == "x") return GateKind::X;
    if (name == "s") return GateKind::S;
    if (name == "sdg") return GateKind::Sdg;
    if (name == "t") return GateKind::T;
    if (name == "tdg") return GateKind::Tdg;
    return std::nullopt;
}

struct Token {
    enum Kind { Ident, Int, LBracket, RBracket, Comma, Semi, End } kind;
    std::string text;
    long value = 0;
    int line = 1;
    int col = 1;
};

class Lexer {
public:
    explicit Lexer(const std::string& text) : text_(text) {}

    Token next() {
        skip_ws_and_comments();
        Token t;
        t.line = line_;
        t.col = col_;
        if (pos_ >= text_.size()) {
            t.kind = Token::End;
            return t;
        }
        const char c = text_[pos_];
        if (c == '[') return take(t, Token::LBracket);
        if (c == ']') return take(t, Token::RBracket);
        if (c == ',') return take(t, Token::Comma);
        if (c == ';') return take(t, Token::Semi);
        if (std::isdigit(static_cast<unsigned char>(c))) {
            t.kind = Token::Int;
            while (pos_ < text_.size() && std::isdigit(static_cast<unsigned char>(text_[pos_]))) {
                t.text += text_[pos_];
                advance();
            }
            t.value = std::stol(t.text);
            return t;
        }
        if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
            t.kind = Token::Ident;
            while (pos_ < text_.size()) {
                const char d = text_[pos_];
                if (!std::isalnum(static_cast<unsigned char>(d)) && d != '_') break;
                t.text += d;
                advance();
            }
            return t;
        }
        throw ParseError(line_, col_, std::string("unexpected character '") + c + "'");
    }

private:
    Token take(Token t, Token::Kind k) {
        t.kind = k;
        t.text = text_[pos_];
        advance();
        return t;
    }

    void skip_ws_and_comments() {
        while (pos_ < text_.size()) {
            const char c = text_[pos_];
            if (c == '/' && pos_ + 1 < text_.size() && text_[pos_ + 1] == '/') {
                while (pos_ < text_.size() && text_[pos_] != '\n') advance();
            } else if (std::isspace(static_cast<unsigned char>(c))) {
                advance();
            } else {
                break;
            }
        }
    }

    void advance() {
        if (text_[pos_] == '\n') {
            ++line_;
            col_ = 1;
        } else {
            ++col_;
        }
        ++pos_;
    }

    const std::string& text_;
    std::size_t pos_ = 0;
    int line_ = 1;
    int col_ = 1;
};

class Parser {
public:
    explicit Parser(const std::string& text) : lexer_(text) { shift(); }

    Circuit run() {
        Circuit c;
        expect_ident("qreg", "expected 'qreg' declaration first");
        reg_name_ = expect(Token::Ident, "register name").text;
        expect(Token::LBracket, "'['");
        const Token size = expect(Token::Int, "register size");
        expect(Token::RBracket, "']'");
        expect(Token::Semi, "';'");
        c.num_vars = static_cast<int>(size.value);
        measured_.assign(c.num_vars, false);

        while (cur_.kind != Token::End) {
            c.gates.push_back(statement(c.num_vars));
        }
        return c;
    }

private:
    Gate statement(int num_vars) {
        const Token head = expect(Token::Ident, "gate name");
        Gate g;
        if (head.text == "qreg") {
            throw ParseError(head.line, head.col, "duplicate qreg declaration");
        } else if (head.text == "cx") {
            g.kind = GateKind::Cnot;
            g.q0 = operand(num_vars, head);
            expect(Token::Comma, "','");
            g.q1 = operand(num_vars, head);
            if (g.q0 == g.q1) {
                throw ParseError(head.line, head.col, "cx operands must be distinct");
            }
        } else if (head.text == "measure") {
            g.kind = GateKind::Measure;
            g.q0 = operand(num_vars, head);
        } else if (auto k = single_qubit_kind(head.text)) {
            g.kind = *k;
            g.q0 = operand(num_vars, head);
        } else {
            throw ParseError(head.line, head.col, "unknown gate name '" + head.text + "'");
        }
        expect(Token::Semi, "';'");
        for (VarId v : {g.q0, g.q1}) {
            if (v >= 0 && measured_[v]) {
                throw ParseError(head.line, head.col,
                                 "gate after measure on qubit " + std::to_string(v));
            }
        }
        if (g.kind == GateKind::Measure) measured_[g.q0] = true;
        return g;
    }

    VarId operand(int num_vars, const Token& head) {
        const Token name = expect(Token::Ident, "register name");
        if (name.text != reg_name_) {
            throw ParseError(name.line, name.col, "unknown register '" + name.text + "'");
        }
        expect(Token::LBracket, "'['");
        const Token idx = expect(Token::Int, "qubit index");
        expect(Token::RBracket, "']'");
        if (idx.value >= num_vars) {
            throw ParseError(idx.line, idx.col,
                             "operand " + std::to_string(idx.value) + " out of range (register size " +
                                 std::to_string(num_vars) + ")");
        }
        (void)head;
        return static_cast<VarId>(idx.value);
    }

    void expect_ident(const std::string& word, const std::string& msg) {
        if (cur_.kind != Token::Ident || cur_.text != word) {
            throw ParseError(cur_.line, cur_.col, msg);
        }
        shift();
    }

    Token expect(Token::Kind k, const std::string& what) {
        if (cur_.kind != k) {
            throw ParseError(cur_.line, cur_.col, "expected " + what);
        }
        Token t = cur_;
        shift();
        return t;
    }

    void shift() { cur_ = lexer_.next(); }

    Lexer lexer_;
    Token cur_;
    std::string reg_name_;
    std::vector<bool> measured_;
};

}  // namespace

Circuit parse_circuit(const std::string& text) {
    Parser p(text);
    return p.run();
}

std::string emit_circuit(const Circuit& c) {
    std::ostringstream out;
    out << "qreg q[" << c.num_vars << "];\n";
    for (const Gate& g : c.gates) {
        out << gate_name(g.kind) << " q[" << g.q0 << "]";
        if (g.kind == GateKind::Cnot) out << ",q[" << g.q1 << "]";
        out << ";\n";
    }
    return out.str();
}

void validate_circuit(const Circuit& c) {
    std::vector<bool> measured(c.num_vars, false);
    for (std::size_t i = 0; i < c.gates.size(); ++i) {
        const Gate& g = c.gates[i];
        const int arity = is_two_qubit(g.kind) ? 2 : 1;
        for (int k = 0; k < arity; ++k) {
            const VarId v = (k == 0) ? g.q0 : g.q1;
            if (v < 0 || v >= c.num_vars) {
                throw std::invalid_argument("gate " + std::to_string(i) + ": operand out of range");
            }
            if (measured[v]) {
                throw std::invalid_argument("gate " + std::to_string(i) + ": gate after measure");
            }
        }
        if (arity == 2 && g.q0 == g.q1) {
            throw std::invalid_argument("gate " + std::to_string(i) + ": operands not distinct");
        }
        if (arity == 1 && g.q1 != -1) {
            throw std::invalid_argument("gate " + std::to_string(i) + ": arity mismatch");
        }
        if (g.kind == GateKind::Measure) measured[g.q0] = true;
    }
}

DependencyDag build_dependencies(const Circuit& c) {
    DependencyDag dag;
    dag.preds.resize(c.gates.size());
    std::vector<int> last_on_var(c.num_vars, -1);
    for (std::size_t i = 0; i < c.gates.size(); ++i) {
        const Gate& g = c.gates[i];
        const int arity = is_two_qubit(g.kind) ? 2 : 1;
        for (int k = 0; k < arity; ++k) {
            const VarId v = (k == 0) ? g.q0 : g.q1;
            const int p = last_on_var[v];
            if (p >= 0) {
                auto& ps = dag.preds[i];
                bool dup = false;
                for (int e : ps) dup |= (e == p);
                if (!dup) ps.push_back(p);
            }
        }
        for (int k = 0; k < arity; ++k) {
            last_on_var[(k == 0) ? g.q0 : g.q1] = static_cast<int>(i);
        }
    }
    return dag;
}

std::vector<Gate> toffoli_gates(VarId c0, VarId c1, VarId target) {
    // 6-CNOT / 9-single-qubit network (exact, no residual phase).
    std::vector<Gate> g;
    g.push_back({GateKind::H, target});
    g.push_back({GateKind::Cnot, c1, target});
    g.push_back({GateKind::Tdg, target});
    g.push_back({GateKind::Cnot, c0, target});
    g.push_back({GateKind::T, target});
    g.push_back({GateKind::Cnot, c1, target});
    g.push_back({GateKind::Tdg, target});
    g.push_back({GateKind::Cnot, c0, target});
    g.push_back({GateKind::T, c1});
    g.push_back({GateKind::T, target});
    g.push_back({GateKind::H, target});
    g.push_back({GateKind::Cnot, c0, c1});
    g.push_back({GateKind::T, c0});
    g.push_back({GateKind::Tdg, c1});
    g.push_back({GateKind::Cnot, c0, c1});
    return g;
}

namespace {

void append(std::vector<Gate>& gates, std::vector<Gate> more) {
    gates.insert(gates.end(), more.begin(), more.end());
}

// MAJ on (carry, b, a): after it, a holds the new carry.
void append_maj(std::vector<Gate>& gates, VarId carry, VarId b, VarId a) {
    gates.push_back({GateKind::Cnot, a, b});
    gates.push_back({GateKind::Cnot, a, carry});
    append(gates, toffoli_gates(carry, b, a));
}

// UMA on (carry, b, a): restores carry and a, leaves the sum bit on b.
void append_uma(std::vector<Gate>& gates, VarId carry, VarId b, VarId a) {
    append(gates, toffoli_gates(carry, b, a));
    gates.push_back({GateKind::Cnot, a, carry});
    gates.push_back({GateKind::Cnot, carry, b});
}

void append_swap(std::vector<Gate>& gates, VarId x, VarId y) {
    gates.push_back({GateKind::Cnot, x, y});
    gates.push_back({GateKind::Cnot, y, x});
    gates.push_back({GateKind::Cnot, x, y});
}

}  // namespace

Circuit gen_cuccaro_adder(int n) {
    if (n < 1) throw std::invalid_argument("adder width must be >= 1");
    Circuit c;
    c.num_vars = 2 * n + 2;
    const VarId carry_in = 0;
    const VarId carry_out = 2 * n + 1;
    auto b_of = [](int i) { return 1 + 2 * i; };
    auto a_of = [](int i) { return 2 + 2 * i; };

    for (int i = 0; i < n; ++i) {
        c.gates.push_back({GateKind::H, b_of(i)});
        c.gates.push_back({GateKind::H, a_of(i)});
    }
    append_maj(c.gates, carry_in, b_of(0), a_of(0));
    for (int i = 1; i < n; ++i) {
        append_maj(c.gates, a_of(i - 1), b_of(i), a_of(i));
    }
    // Carry write to z: a SWAP-conjugated CNOT, net effect CX(a_{n-1} -> z).
    append_swap(c.gates, a_of(n - 1), carry_out);
    c.gates.push_back({GateKind::Cnot, carry_out, a_of(n - 1)});
    append_swap(c.gates, a_of(n - 1), carry_out);
    for (int i = n - 1; i >= 1; --i) {
        append_uma(c.gates, a_of(i - 1), b_of(i), a_of(i));
    }
    append_uma(c.gates, carry_in, b_of(0), a_of(0));
    for (int i = 0; i < n; ++i) {
        c.gates.push_back({GateKind::Measure, b_of(i)});
    }
    c.gates.push_back({GateKind::Measure, carry_out});
    return c;
}

}  // namespace espr
