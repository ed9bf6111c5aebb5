// This file is part of esp-router, released under the Apache-2.0 license.
// See LICENSE for details.

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <random>

#include "espr/circuit.hpp"
#include "espr/evaluator.hpp"

using namespace espr;

namespace {

DeviceModel uniform_device(int n, double cx, double single, double readout) {
    std::vector<PhysQubit> qubits;
    for (int i = 0; i < n; ++i) qubits.push_back({i, single, readout});
    std::vector<CouplingEdge> edges;
    for (int i = 0; i < n; ++i) {
        for (int j = i + 1; j < n; ++j) edges.push_back({i, j, cx});
    }
    return DeviceModel("uniform", qubits, edges);
}

CompiledCircuit identity_compiled(const Circuit& c, int num_qubits) {
    CompiledCircuit cc;
    for (const Gate& g : c.gates) {
        cc.gates.push_back({g.kind, g.q0, g.q1});
        if (g.kind == GateKind::Measure) cc.measures.push_back(g.q0);
    }
    cc.gate_count = static_cast<int>(cc.gates.size());
    cc.initial_mapping = Mapping::make(c.num_vars, num_qubits);
    for (VarId v = 0; v < c.num_vars; ++v) cc.initial_mapping.assign(v, v);
    cc.final_mapping = cc.initial_mapping;
    return cc;
}

double total_variation(const Distribution& a, const Distribution& b) {
    double tv = 0.0;
    for (std::uint64_t o = 0; o < a.num_outcomes(); ++o) {
        tv += std::abs(a.prob(o) - b.prob(o));
    }
    return 0.5 * tv;
}

Distribution from_probs(std::vector<double> p, std::uint64_t shots) {
    Distribution d;
    d.num_bits = 0;
    while ((std::uint64_t{1} << d.num_bits) < p.size()) ++d.num_bits;
    for (std::size_t i = 0; i < p.size(); ++i) {
        if (p[i] > 0.0) d.probs[i] = p[i];
    }
    d.shot_count = shots;
    return d;
}

}  // namespace

TEST_CASE("ideal_distribution: H then measure is a coin flip") {
    const Circuit c = parse_circuit("qreg q[1]; h q[0]; measure q[0];");
    const Distribution dist = ideal_distribution(c);
    CHECK(dist.num_bits == 1);
    CHECK(dist.prob(0) == doctest::Approx(0.5).epsilon(1e-12));
    CHECK(dist.prob(1) == doctest::Approx(0.5).epsilon(1e-12));
}

TEST_CASE("ideal_distribution: adder testbenches match the convolution oracle") {
    // sum of two uniform n-bit integers: P(s) = #{(a,b): a+b=s} / 4^n
    for (int n : {1, 2}) {
        const Distribution dist = ideal_distribution(gen_cuccaro_adder(n));
        CHECK(dist.num_bits == n + 1);
        std::vector<double> expect(std::size_t{1} << (n + 1), 0.0);
        for (std::uint64_t a = 0; a < (std::uint64_t{1} << n); ++a) {
            for (std::uint64_t b = 0; b < (std::uint64_t{1} << n); ++b) {
                expect[a + b] += 1.0 / std::pow(4.0, n);
            }
        }
        for (std::uint64_t s = 0; s < expect.size(); ++s) {
            CHECK(dist.prob(s) == doctest::Approx(expect[s]).epsilon(1e-9));
        }
    }
    // the n=1 pinned values: {1/4, 1/2, 1/4}
    const Distribution one = ideal_distribution(gen_cuccaro_adder(1));
    CHECK(one.prob(0) == doctest::Approx(0.25).epsilon(1e-9));
    CHECK(one.prob(1) == doctest::Approx(0.50).epsilon(1e-9));
    CHECK(one.prob(2) == doctest::Approx(0.25).epsilon(1e-9));
    CHECK(one.prob(3) == doctest::Approx(0.0));
}

TEST_CASE("ideal_distribution: rejects oversized circuits") {
    Circuit big;
    big.num_vars = 21;
    for (VarId v = 0; v < 21; ++v) big.gates.push_back({GateKind::H, v});
    CHECK_THROWS_AS(ideal_distribution(big), std::invalid_argument);
}

TEST_CASE("noisy_sample: zero rates reproduce the ideal sampler") {
    const Circuit c = gen_cuccaro_adder(1);
    const CompiledCircuit cc = identity_compiled(c, 4);
    const DeviceModel d = uniform_device(4, 0.0, 0.0, 0.0);
    NoiseConfig nc;
    nc.seed = 77;
    nc.shots = 100000;
    const Distribution emp = noisy_sample(cc, d, nc);
    CHECK(emp.error_free_shots == nc.shots);
    const Distribution ideal = ideal_distribution(c);
    CHECK(total_variation(emp, ideal) < 0.02);
    for (const auto& [o, p] : emp.probs) CHECK(ideal.prob(o) > 0.0);  // support subset

    double mass = 0.0;
    for (const auto& [o, p] : emp.probs) mass += p;
    CHECK(mass == doctest::Approx(1.0).epsilon(1e-9));

    const Distribution again = noisy_sample(cc, d, nc);
    CHECK(emp.probs == again.probs);  // bit-identical per seed

    NoiseConfig other = nc;
    other.seed = 78;
    CHECK(noisy_sample(cc, d, other).probs != emp.probs);
}

TEST_CASE("noisy_sample: single-gate closed form") {
    // X then measure with single_error 0.3: X or Y flips restore |0>, Z does
    // not, so P(outcome 0) = 0.3 * 2/3 = 0.2.
    const Circuit c = parse_circuit("qreg q[1]; x q[0]; measure q[0];");
    const CompiledCircuit cc = identity_compiled(c, 1);
    std::vector<PhysQubit> qs = {{0, 0.3, 0.0}};
    const DeviceModel d("one", qs, {});
    NoiseConfig nc;
    nc.seed = 5;
    nc.shots = 100000;
    const Distribution emp = noisy_sample(cc, d, nc);
    CHECK(emp.prob(0) == doctest::Approx(0.2).epsilon(0.05));
    CHECK(std::abs(emp.prob(0) - 0.2) < 0.01);
    // error-free fraction concentrates near 1 - 0.3
    const double ef = static_cast<double>(emp.error_free_shots) / nc.shots;
    CHECK(std::abs(ef - 0.7) < 0.01);
}

TEST_CASE("noisy_sample: two-qubit channel within 3 sigma") {
    // |00> -> CX -> measure both. A CNOT error applies one of 15 two-qubit
    // Paulis; the 3 phase-only ones (IZ, ZI, ZZ) keep the readout at 00.
    const Circuit c = parse_circuit("qreg q[2]; cx q[0],q[1]; measure q[0]; measure q[1];");
    const CompiledCircuit cc = identity_compiled(c, 2);
    const double eps = 0.12;
    const DeviceModel d = uniform_device(2, eps, 0.0, 0.0);
    NoiseConfig nc;
    nc.seed = 11;
    nc.shots = 100000;
    const Distribution emp = noisy_sample(cc, d, nc);
    const double expect = (1.0 - eps) + eps * (3.0 / 15.0);
    const double sigma = std::sqrt(expect * (1.0 - expect) / static_cast<double>(nc.shots));
    CHECK(std::abs(emp.prob(0) - expect) < 3.0 * sigma);
}

TEST_CASE("noisy_sample: readout errors flip classical bits") {
    const Circuit c = parse_circuit("qreg q[1]; measure q[0];");
    const CompiledCircuit cc = identity_compiled(c, 1);
    std::vector<PhysQubit> qs = {{0, 0.0, 0.25}};
    const DeviceModel d("one", qs, {});
    NoiseConfig nc;
    nc.seed = 3;
    nc.shots = 200000;
    const Distribution emp = noisy_sample(cc, d, nc);
    CHECK(emp.prob(1) == doctest::Approx(0.25).epsilon(0.03));
    CHECK_THROWS_AS(noisy_sample(cc, d, NoiseConfig{true, true, 0, 0}), std::invalid_argument);
}

TEST_CASE("kl_divergence: hand-evaluated two-point case") {
    const Distribution ideal = from_probs({0.5, 0.5}, 0);
    const Distribution emp = from_probs({0.75, 0.25}, 0);
    // unsmoothed: 0.5 ln(2/3) + 0.5 ln 2
    const double expect = 0.5 * std::log(0.5 / 0.75) + 0.5 * std::log(0.5 / 0.25);
    CHECK(expect == doctest::Approx(0.1438).epsilon(1e-3));
    CHECK(kl_divergence(ideal, emp, 0.0) == doctest::Approx(expect).epsilon(1e-12));
}

TEST_CASE("kl_divergence: adder ideal vs uniform guide value") {
    const Distribution ideal = ideal_distribution(gen_cuccaro_adder(1));
    const Distribution uniform = from_probs({0.25, 0.25, 0.25, 0.25}, 0);
    // direct formula: 1/4 ln(1) + 1/2 ln(2) + 1/4 ln(1) = ln(2)/2
    CHECK(kl_divergence(ideal, uniform, 0.0) ==
          doctest::Approx(0.5 * std::log(2.0)).epsilon(1e-9));
}

TEST_CASE("kl_divergence: identical distributions and smoothing bias") {
    std::mt19937_64 rng(13);
    for (int trial = 0; trial < 30; ++trial) {
        const int k = 2 + static_cast<int>(rng() % 7);
        const std::uint64_t shots = 1000 + rng() % 9000;
        std::vector<std::uint64_t> counts(k, 0);
        std::uint64_t left = shots;
        for (int i = 0; i + 1 < k; ++i) {
            counts[i] = rng() % (left + 1);
            left -= counts[i];
        }
        counts[k - 1] = left;
        std::vector<double> p(k);
        for (int i = 0; i < k; ++i) p[i] = static_cast<double>(counts[i]) / shots;
        const Distribution dist = from_probs(p, shots);
        CHECK(kl_divergence(dist, dist, 0.0) == doctest::Approx(0.0).epsilon(1e-12));
        // smoothing bias bound: alpha * K / shots
        const double kk = static_cast<double>(dist.num_outcomes());
        CHECK(kl_divergence(dist, dist, 1.0) <= kk / static_cast<double>(shots) + 1e-12);
        CHECK(kl_divergence(dist, dist, 1.0) >= 0.0);
    }
}

TEST_CASE("kl_divergence: non-negative over random pairs (Gibbs)") {
    std::mt19937_64 rng(14);
    auto random_dist = [&rng](int k, std::uint64_t shots) {
        std::vector<double> w(k);
        double sum = 0.0;
        for (auto& x : w) {
            x = 1e-9 + static_cast<double>(rng() >> 11) * 0x1.0p-53;
            sum += x;
        }
        for (auto& x : w) x /= sum;
        return from_probs(w, shots);
    };
    for (int trial = 0; trial < 200; ++trial) {
        const int k = 2 + static_cast<int>(rng() % 15);
        const Distribution p = random_dist(k, 0);
        const Distribution q = random_dist(k, 5000);
        CHECK(kl_divergence(p, q, 1.0) >= 0.0);
        CHECK(kl_divergence(p, q, 0.0) >= 0.0);
    }
}

TEST_CASE("kl_divergence: mismatched spaces and empirical zeros") {
    const Distribution a = from_probs({0.5, 0.5}, 0);
    const Distribution b = from_probs({0.25, 0.25, 0.25, 0.25}, 0);
    CHECK_THROWS_AS(kl_divergence(a, b), std::invalid_argument);
    // unsmoothed with a zero where ideal has mass
    const Distribution zero = from_probs({1.0, 0.0}, 100);
    CHECK_THROWS_AS(kl_divergence(a, zero, 0.0), std::invalid_argument);
    CHECK(kl_divergence(a, zero, 1.0) > 0.0);  // smoothing rescues it
}

TEST_CASE("error-free trajectory fraction tracks the ESP") {
    // Two compilations of the same circuit with different ESPs: the
    // error-free shot fractions estimate exactly those ESPs.
    const Circuit c = parse_circuit(
        "qreg q[2]; h q[0]; cx q[0],q[1]; measure q[0]; measure q[1];");
    const CompiledCircuit direct = identity_compiled(c, 3);

    CompiledCircuit padded = direct;  // an extra swap inflates the gate count
    padded.gates.insert(padded.gates.begin() + 2, {GateKind::Cnot, 1, 2});
    padded.gates.insert(padded.gates.begin() + 2, {GateKind::Cnot, 2, 1});
    padded.gates.insert(padded.gates.begin() + 2, {GateKind::Cnot, 1, 2});

    const DeviceModel d = uniform_device(3, 0.05, 0.002, 0.0);
    const double esp_a = esp_circuit(d, direct.gates);
    const double esp_b = esp_circuit(d, padded.gates);
    REQUIRE(esp_a > esp_b);

    NoiseConfig nc;
    nc.seed = 21;
    nc.shots = 200000;
    const double ef_a =
        static_cast<double>(noisy_sample(direct, d, nc).error_free_shots) / nc.shots;
    const double ef_b =
        static_cast<double>(noisy_sample(padded, d, nc).error_free_shots) / nc.shots;
    CHECK(std::abs(ef_a - esp_a) < 0.005);
    CHECK(std::abs(ef_b - esp_b) < 0.005);
    CHECK(ef_a > ef_b);
}

TEST_CASE("run_experiment: zero noise leaves only the sampling floor") {
    const Circuit c = gen_cuccaro_adder(1);
    std::vector<ExperimentItem> items;
    items.push_back({"adder1", "beam", identity_compiled(c, 4)});
    const DeviceModel d = uniform_device(4, 0.0, 0.0, 0.0);
    const ExperimentResult res = run_experiment(items, d, 3, 5000, 9);
    REQUIRE(res.records.size() == 1);
    // smoothing bias alpha*K/shots plus sampling noise: well under 0.01
    CHECK(res.records[0].kl_median < 0.01);
    CHECK(res.records[0].kl_min <= res.records[0].kl_median);
    CHECK(res.records[0].kl_median <= res.records[0].kl_max);
    CHECK_FALSE(res.correlation_defined);  // single circuit
}

TEST_CASE("run_experiment: identical circuits give an undefined correlation") {
    const Circuit c = parse_circuit("qreg q[1]; h q[0]; measure q[0];");
    std::vector<ExperimentItem> items;
    items.push_back({"a", "beam", identity_compiled(c, 1)});
    items.push_back({"b", "beam", identity_compiled(c, 1)});
    std::vector<PhysQubit> qs = {{0, 0.01, 0.02}};
    const DeviceModel d("one", qs, {});
    const ExperimentResult res = run_experiment(items, d, 2, 1000, 1);
    CHECK_FALSE(res.correlation_defined);
    const std::string text = format_experiment(res);
    CHECK(text.find("correlation undefined") != std::string::npos);
    CHECK(text.find("a\tbeam\t") != std::string::npos);
}

TEST_CASE("distribution_csv shape") {
    const Distribution dist = from_probs({0.25, 0.75}, 0);
    const std::string csv = distribution_csv(dist);
    CHECK(csv.find("outcome,probability\n") == 0);
    CHECK(csv.find("0,0.25") != std::string::npos);
    CHECK(csv.find("1,0.75") != std::string::npos);
}
