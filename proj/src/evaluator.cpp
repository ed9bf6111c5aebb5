// This file is part of esp-router, released under the Apache-2.0 license.
// See LICENSE for details.

#include "espr/evaluator.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>
#include <stdexcept>

#include "espr/sim.hpp"
#include "espr/util.hpp"

namespace espr {

double Distribution::prob(std::uint64_t outcome) const {
    auto it = probs.find(outcome);
    return it == probs.end() ? 0.0 : it->second;
}

namespace {

// A simulation job: compacted gate list, qubit count, measured bits in
// source measurement order.
struct SimJob {
    int nq = 0;
    std::vector<PlacedGate> gates;  // local indices, measures stripped
    std::vector<int> measured;      // local indices, source order
    std::vector<double> gate_error; // per gate: class rate at its location
    std::vector<double> readout;    // per measured bit
};

SimJob compact_job(const std::vector<PlacedGate>& gates, const std::vector<PhysId>& measures,
                   const DeviceModel* d, int max_qubits) {
    SimJob job;
    std::vector<int> local;
    auto local_of = [&](PhysId p) {
        for (std::size_t i = 0; i < local.size(); ++i) {
            if (local[i] == p) return static_cast<int>(i);
        }
        local.push_back(p);
        return static_cast<int>(local.size()) - 1;
    };
    for (const PlacedGate& g : gates) {
        if (g.kind == GateKind::Measure) continue;
        PlacedGate lg{g.kind, local_of(g.q0), g.q1 >= 0 ? local_of(g.q1) : -1};
        job.gates.push_back(lg);
        if (d) {
            job.gate_error.push_back(g.kind == GateKind::Cnot ? d->cx_error(g.q0, g.q1)
                                                              : d->single_error(g.q0));
        }
    }
    for (PhysId p : measures) {
        job.measured.push_back(local_of(p));
        if (d) job.readout.push_back(d->readout_error(p));
    }
    job.nq = static_cast<int>(local.size());
    if (job.nq > max_qubits) {
        throw std::invalid_argument("circuit touches " + std::to_string(job.nq) +
                                    " qubits; cap is " + std::to_string(max_qubits));
    }
    return job;
}

SimJob job_from_circuit(const Circuit& c, int max_qubits) {
    validate_circuit(c);
    std::vector<PlacedGate> placed;
    std::vector<PhysId> measures;
    for (const Gate& g : c.gates) {
        if (g.kind == GateKind::Measure) {
            measures.push_back(g.q0);
        } else {
            placed.push_back({g.kind, g.q0, g.q1});
        }
    }
    return compact_job(placed, measures, nullptr, max_qubits);
}

std::vector<cplx> run_noiseless(const SimJob& job) {
    std::vector<cplx> state = basis_state(job.nq, 0);
    for (const PlacedGate& g : job.gates) {
        apply_gate_kind(state, g.kind, g.q0, g.q1);
    }
    return state;
}

Distribution distribution_of_state(const SimJob& job, const std::vector<cplx>& state) {
    Distribution dist;
    dist.num_bits = static_cast<int>(job.measured.size());
    for (std::size_t i = 0; i < state.size(); ++i) {
        const double p = std::norm(state[i]);
        if (p <= 0.0) continue;
        std::uint64_t outcome = 0;
        for (std::size_t b = 0; b < job.measured.size(); ++b) {
            if (i & (std::size_t{1} << job.measured[b])) outcome |= std::uint64_t{1} << b;
        }
        dist.probs[outcome] += p;
    }
    return dist;
}

}  // namespace

Distribution ideal_distribution(const Circuit& c, int max_qubits) {
    const SimJob job = job_from_circuit(c, max_qubits);
    return distribution_of_state(job, run_noiseless(job));
}

Distribution ideal_distribution(const CompiledCircuit& c, int max_qubits) {
    const SimJob job = compact_job(c.gates, c.measures, nullptr, max_qubits);
    return distribution_of_state(job, run_noiseless(job));
}

namespace {

// Uniform double in [0,1) from the top 53 bits; stable across platforms.
double u01(Rng& rng) { return static_cast<double>(rng() >> 11) * 0x1.0p-53; }

// Cumulative distribution over basis states for fast outcome sampling.
struct MeasureSampler {
    std::vector<double> cumulative;

    explicit MeasureSampler(const std::vector<cplx>& state) {
        cumulative.resize(state.size());
        double acc = 0.0;
        for (std::size_t i = 0; i < state.size(); ++i) {
            acc += std::norm(state[i]);
            cumulative[i] = acc;
        }
    }

    std::uint64_t draw(double u) const {
        const double target = u * cumulative.back();
        const auto it = std::upper_bound(cumulative.begin(), cumulative.end(), target);
        return static_cast<std::uint64_t>(std::min<std::ptrdiff_t>(
            std::distance(cumulative.begin(), it), cumulative.size() - 1));
    }
};

void apply_pauli(std::span<cplx> state, int q, int which) {
    // which: 0 = X, 1 = Y, 2 = Z
    using namespace std::complex_literals;
    static const cplx y[4] = {0.0, -1.0i, 1.0i, 0.0};
    static const cplx z[4] = {1.0, 0.0, 0.0, -1.0};
    static const cplx x[4] = {0.0, 1.0, 1.0, 0.0};
    const cplx* m = which == 0 ? x : (which == 1 ? y : z);
    apply_single(state, q, m);
}

}  // namespace

Distribution noisy_sample(const CompiledCircuit& c, const DeviceModel& d, const NoiseConfig& nc,
                          int max_qubits) {
    if (nc.shots == 0) throw std::invalid_argument("shots must be >= 1");
    const SimJob job = compact_job(c.gates, c.measures, &d, max_qubits);

    const std::vector<cplx> clean = run_noiseless(job);
    const MeasureSampler clean_sampler(clean);

    Distribution dist;
    dist.num_bits = static_cast<int>(job.measured.size());
    dist.shot_count = nc.shots;
    std::map<std::uint64_t, std::uint64_t> counts;

    std::vector<cplx> scratch;
    std::vector<int> error_at;   // gate indices that drew an error this shot
    std::vector<int> error_kind; // Pauli selector per erroring gate

    for (std::uint64_t shot = 0; shot < nc.shots; ++shot) {
        Rng rng(mix_seed(nc.seed, shot));
        error_at.clear();
        error_kind.clear();
        if (nc.gate_errors) {
            for (std::size_t gi = 0; gi < job.gates.size(); ++gi) {
                const double eps = job.gate_error[gi];
                if (eps > 0.0 && u01(rng) < eps) {
                    const bool two = job.gates[gi].kind == GateKind::Cnot;
                    const int n_paulis = two ? 15 : 3;
                    error_at.push_back(static_cast<int>(gi));
                    error_kind.push_back(static_cast<int>(rng() % n_paulis));
                }
            }
        }

        std::uint64_t basis;
        if (error_at.empty()) {
            ++dist.error_free_shots;
            basis = clean_sampler.draw(u01(rng));
        } else {
            scratch.assign(std::size_t{1} << job.nq, cplx{0.0, 0.0});
            scratch[0] = 1.0;
            std::size_t nexterr = 0;
            for (std::size_t gi = 0; gi < job.gates.size(); ++gi) {
                const PlacedGate& g = job.gates[gi];
                apply_gate_kind(scratch, g.kind, g.q0, g.q1);
                if (nexterr < error_at.size() && error_at[nexterr] == static_cast<int>(gi)) {
                    const int sel = error_kind[nexterr];
                    ++nexterr;
                    if (g.kind == GateKind::Cnot) {
                        // sel+1 in 1..15 encodes a non-identity two-qubit Pauli
                        // as (P_q0, P_q1) base-4 digits.
                        const int code = sel + 1;
                        const int p0 = code % 4;
                        const int p1 = code / 4;
                        if (p0 != 0) apply_pauli(scratch, g.q0, p0 - 1);
                        if (p1 != 0) apply_pauli(scratch, g.q1, p1 - 1);
                    } else {
                        apply_pauli(scratch, g.q0, sel);
                    }
                }
            }
            basis = MeasureSampler(scratch).draw(u01(rng));
        }

        std::uint64_t outcome = 0;
        for (std::size_t b = 0; b < job.measured.size(); ++b) {
            bool bit = (basis >> job.measured[b]) & 1;
            if (nc.readout_errors && job.readout[b] > 0.0 &&
                u01(rng) < job.readout[b]) {
                bit = !bit;
            }
            if (bit) outcome |= std::uint64_t{1} << b;
        }
        ++counts[outcome];
    }

    for (auto [outcome, n] : counts) {
        dist.probs[outcome] = static_cast<double>(n) / static_cast<double>(nc.shots);
    }
    return dist;
}

double kl_divergence(const Distribution& ideal, const Distribution& empirical, double alpha) {
    if (ideal.num_bits != empirical.num_bits) {
        throw std::invalid_argument("distributions have different outcome spaces");
    }
    const double k = static_cast<double>(ideal.num_outcomes());
    const double shots = static_cast<double>(empirical.shot_count);
    double sum = 0.0;
    for (const auto& [outcome, p] : ideal.probs) {
        if (p <= 0.0) continue;
        double q = empirical.prob(outcome);
        if (alpha > 0.0 && shots > 0.0) {
            q = (q * shots + alpha) / (shots + alpha * k);
        }
        if (q <= 0.0) {
            throw std::invalid_argument("empirical probability is zero where ideal mass exists; "
                                        "enable smoothing or add shots");
        }
        sum += p * std::log(p / q);
    }
    return sum;
}

double pearson_correlation(const std::vector<double>& x, const std::vector<double>& y,
                           bool& defined) {
    defined = false;
    if (x.size() != y.size() || x.size() < 2) return 0.0;
    const double n = static_cast<double>(x.size());
    const double mx = std::accumulate(x.begin(), x.end(), 0.0) / n;
    const double my = std::accumulate(y.begin(), y.end(), 0.0) / n;
    double sxx = 0.0, syy = 0.0, sxy = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        sxx += (x[i] - mx) * (x[i] - mx);
        syy += (y[i] - my) * (y[i] - my);
        sxy += (x[i] - mx) * (y[i] - my);
    }
    if (sxx <= 0.0 || syy <= 0.0) return 0.0;
    defined = true;
    return sxy / std::sqrt(sxx * syy);
}

ExperimentResult run_experiment(const std::vector<ExperimentItem>& items, const DeviceModel& d,
                                int runs, std::uint64_t shots, std::uint64_t seed) {
    if (runs < 1) throw std::invalid_argument("runs must be >= 1");
    if (shots < 1) throw std::invalid_argument("shots must be >= 1");
    ExperimentResult res;
    std::vector<double> esps, medians;
    for (std::size_t idx = 0; idx < items.size(); ++idx) {
        const ExperimentItem& item = items[idx];
        const Distribution ideal = ideal_distribution(item.compiled);
        std::vector<double> kls;
        for (int r = 0; r < runs; ++r) {
            NoiseConfig nc;
            nc.seed = mix_seed(seed, idx * 1000003ULL + static_cast<std::uint64_t>(r));
            nc.shots = shots;
            const Distribution emp = noisy_sample(item.compiled, d, nc);
            kls.push_back(kl_divergence(ideal, emp));
        }
        std::sort(kls.begin(), kls.end());
        ExperimentRecord rec;
        rec.circuit_id = item.id;
        rec.compiler = item.compiler;
        rec.esp = item.compiled.esp;
        rec.kl_min = kls.front();
        rec.kl_max = kls.back();
        const std::size_t mid = kls.size() / 2;
        rec.kl_median =
            (kls.size() % 2 == 1) ? kls[mid] : 0.5 * (kls[mid - 1] + kls[mid]);
        rec.shots = shots;
        rec.runs = runs;
        res.records.push_back(rec);
        esps.push_back(rec.esp);
        medians.push_back(rec.kl_median);
    }
    res.correlation = pearson_correlation(esps, medians, res.correlation_defined);
    return res;
}

std::string format_experiment(const ExperimentResult& r) {
    std::ostringstream out;
    out.precision(9);
    for (const ExperimentRecord& rec : r.records) {
        out << rec.circuit_id << '\t' << rec.compiler << '\t' << rec.esp << '\t' << rec.kl_median
            << '\t' << rec.kl_min << '\t' << rec.kl_max << '\n';
    }
    if (r.correlation_defined) {
        out << "correlation " << r.correlation << '\n';
    } else {
        out << "correlation undefined\n";
    }
    return out.str();
}

std::string distribution_csv(const Distribution& dist) {
    std::ostringstream out;
    out.precision(9);
    out << "outcome,probability\n";
    for (std::uint64_t o = 0; o < dist.num_outcomes(); ++o) {
        const double p = dist.prob(o);
        if (p > 0.0 || dist.num_bits <= 10) out << o << ',' << p << '\n';
    }
    return out.str();
}

}  // namespace espr
