// This file is part of esp-router, released under the Apache-2.0 license.
// See LICENSE for details.

#include "espr/cli.hpp"

#include <chrono>
#include <filesystem>
#include <iomanip>
#include <iostream>
#include <map>
#include <sstream>

#include "CLI11.hpp"
#include "json.hpp"

#include "espr/circuit.hpp"
#include "espr/device.hpp"
#include "espr/evaluator.hpp"
#include "espr/mapper.hpp"
#include "espr/remote_cnot.hpp"
#include "espr/util.hpp"

namespace espr {

namespace {

namespace fs = std::filesystem;
using nlohmann::json;

struct ManifestBuilder {
    std::string command;
    std::map<std::string, std::string> flags;
    std::uint64_t seed = 0;
    std::map<std::string, std::string> input_hashes;
    std::chrono::steady_clock::time_point start = std::chrono::steady_clock::now();

    void input(const std::string& path, const std::string& content) {
        input_hashes[path] = sha256_hex(content);
    }

    void write(const std::string& path) const {
        json j;
        j["command"] = command;
        j["flags"] = flags;
        j["seed"] = seed;
        j["inputs"] = input_hashes;
        j["version"] = kToolVersion;
        j["wall_time_s"] =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        write_file(path, j.dump(2) + "\n");
    }
};

json mapping_json(const Mapping& m) {
    json j = json::array();
    for (PhysId p : m.var_to_phys) j.push_back(p);
    return j;
}

std::string compiled_qasm(const CompiledCircuit& cc, int num_qubits) {
    Circuit as_circuit;
    as_circuit.num_vars = num_qubits;
    for (const PlacedGate& g : cc.gates) {
        as_circuit.gates.push_back({g.kind, g.q0, g.q1});
    }
    return emit_circuit(as_circuit);
}

int cmd_compile(const std::string& circuit_path, const std::string& device_path,
                const std::string& out_prefix, int beam_width, int random_mappings,
                std::uint64_t seed, const std::string& strategy, bool no_gce, int threads,
                std::ostream& out) {
    ManifestBuilder manifest;
    manifest.command = "compile";
    manifest.seed = seed;
    manifest.flags = {{"circuit", circuit_path},
                      {"device", device_path},
                      {"out", out_prefix},
                      {"beam-width", std::to_string(beam_width)},
                      {"random-mappings", std::to_string(random_mappings)},
                      {"seed", std::to_string(seed)},
                      {"strategy", strategy},
                      {"no-gce", no_gce ? "true" : "false"},
                      {"threads", std::to_string(threads)}};

    const std::string circuit_text = read_file(circuit_path);
    const std::string device_text = read_file(device_path);
    manifest.input(circuit_path, circuit_text);
    manifest.input(device_path, device_text);

    const Circuit circuit = parse_circuit(circuit_text);
    const DeviceModel device = load_device(device_text);
    log_msg(LogLevel::Info, "compiling " + circuit_path + " (" +
                                std::to_string(circuit.gates.size()) + " gates) onto " +
                                device.name() + " (" + std::to_string(device.num_qubits()) +
                                " qubits)");

    CompiledCircuit cc;
    if (strategy == "beam") {
        CompilerConfig cfg;
        cfg.beam_width = beam_width;
        cfg.random_mappings = random_mappings;
        cfg.seed = seed;
        cfg.use_gce = !no_gce;
        cfg.threads = threads;
        cc = compile_beam(circuit, device, cfg);
    } else if (strategy == "random") {
        cc = compile_random(circuit, device, seed);
    } else {
        throw std::invalid_argument("unknown strategy '" + strategy + "' (beam|random)");
    }

    write_file(out_prefix + ".qasm", compiled_qasm(cc, device.num_qubits()));

    json report;
    report["esp"] = cc.esp;
    report["gate_count"] = cc.gate_count;
    report["seconds"] = cc.stats.seconds;
    report["seed"] = seed;
    report["config"] = {{"strategy", strategy},
                        {"beam_width", beam_width},
                        {"random_mappings", random_mappings},
                        {"use_gce", !no_gce},
                        {"threads", threads}};
    report["initial_mapping"] = mapping_json(cc.initial_mapping);
    report["final_mapping"] = mapping_json(cc.final_mapping);
    report["measures"] = cc.measures;
    report["stats"] = {{"expansions", cc.stats.expansions},
                       {"score_work", cc.stats.score_work},
                       {"iterations", cc.stats.iterations}};
    write_file(out_prefix + ".report.json", report.dump(2) + "\n");
    manifest.write(out_prefix + ".manifest.json");

    out << "compiled " << circuit_path << ": esp " << cc.esp << ", " << cc.gate_count
        << " gates, " << cc.stats.seconds << " s\n";
    return 0;
}

int cmd_gen_adder(int n, const std::string& out_path, std::ostream& out) {
    ManifestBuilder manifest;
    manifest.command = "gen-adder";
    manifest.flags = {{"n", std::to_string(n)}, {"out", out_path}};
    const Circuit c = gen_cuccaro_adder(n);
    write_file(out_path, emit_circuit(c));
    manifest.write(out_path + ".manifest.json");
    out << "wrote " << out_path << " (" << c.gates.size() << " gates, " << c.num_vars
        << " qubits)\n";
    return 0;
}

int cmd_select_circuit(const std::string& device_path, int control, int target, int max_hops,
                       std::ostream& out) {
    const std::string device_text = read_file(device_path);
    const DeviceModel device = load_device(device_text);
    if (control < 0 || control >= device.num_qubits() || target < 0 ||
        target >= device.num_qubits() || control == target) {
        throw std::invalid_argument("control/target must be distinct device qubits");
    }
    const CandidateSet cs = enumerate_candidates(device, control, target, max_hops);
    if (cs.candidates.empty()) {
        out << "no path from " << control << " to " << target << " within " << max_hops
            << " hops\n";
        return 0;
    }
    out << "name\tpath\tgates\tesp\n";
    for (const Candidate& c : cs.candidates) {
        out << c.tmpl.name << '\t';
        for (std::size_t i = 0; i < c.tmpl.path.size(); ++i) {
            if (i) out << '-';
            out << c.tmpl.path[i];
        }
        out << '\t' << c.tmpl.gates.size() << '\t' << std::setprecision(9) << c.esp << '\n';
    }
    return 0;
}

CompiledCircuit load_compiled(const std::string& qasm_path, const DeviceModel& device,
                              std::string* strategy, ManifestBuilder* manifest) {
    const std::string text = read_file(qasm_path);
    if (manifest) manifest->input(qasm_path, text);
    const Circuit parsed = parse_circuit(text);
    CompiledCircuit cc;
    for (const Gate& g : parsed.gates) {
        cc.gates.push_back({g.kind, g.q0, g.q1});
        if (g.kind == GateKind::Measure) cc.measures.push_back(g.q0);
    }
    cc.gate_count = static_cast<int>(cc.gates.size());
    cc.esp = esp_circuit(device, cc.gates);

    const std::string report_path = qasm_path.substr(0, qasm_path.size() - 5) + ".report.json";
    if (fs::exists(report_path)) {
        const std::string rtext = read_file(report_path);
        if (manifest) manifest->input(report_path, rtext);
        const json report = json::parse(rtext);
        if (strategy) *strategy = report.at("config").at("strategy").get<std::string>();
        auto load_mapping = [&](const char* key, Mapping& m) {
            if (!report.contains(key)) return;
            m = Mapping::make(static_cast<int>(report.at(key).size()), device.num_qubits());
            int v = 0;
            for (const auto& p : report.at(key)) m.assign(v++, p.get<PhysId>());
        };
        load_mapping("initial_mapping", cc.initial_mapping);
        load_mapping("final_mapping", cc.final_mapping);
    } else if (strategy) {
        *strategy = "unknown";
    }
    return cc;
}

int cmd_evaluate(const std::string& compiled_dir, const std::string& device_path,
                 std::uint64_t shots, int runs, std::uint64_t seed, const std::string& out_prefix,
                 const std::string& dump_dir, std::ostream& out) {
    if (shots == 0) throw std::invalid_argument("shots must be >= 1");
    ManifestBuilder manifest;
    manifest.command = "evaluate";
    manifest.seed = seed;
    manifest.flags = {{"compiled", compiled_dir}, {"device", device_path},
                      {"shots", std::to_string(shots)}, {"runs", std::to_string(runs)},
                      {"seed", std::to_string(seed)}, {"out", out_prefix},
                      {"dump-dist", dump_dir}};

    const std::string device_text = read_file(device_path);
    manifest.input(device_path, device_text);
    const DeviceModel device = load_device(device_text);

    std::vector<std::string> qasm_files;
    if (fs::is_directory(compiled_dir)) {
        for (const auto& entry : fs::directory_iterator(compiled_dir)) {
            if (entry.path().extension() == ".qasm") qasm_files.push_back(entry.path().string());
        }
        std::sort(qasm_files.begin(), qasm_files.end());
    } else {
        qasm_files.push_back(compiled_dir);
    }
    if (qasm_files.empty()) throw std::invalid_argument("no .qasm files under " + compiled_dir);

    std::vector<ExperimentItem> items;
    for (const std::string& path : qasm_files) {
        ExperimentItem item;
        item.id = fs::path(path).stem().string();
        item.compiled = load_compiled(path, device, &item.compiler, &manifest);
        items.push_back(std::move(item));
    }

    log_msg(LogLevel::Info, "evaluating " + std::to_string(items.size()) + " circuits, " +
                                std::to_string(runs) + " runs x " + std::to_string(shots) +
                                " shots");
    const ExperimentResult result = run_experiment(items, device, runs, shots, seed);
    const std::string table = format_experiment(result);
    out << table;
    if (!out_prefix.empty()) {
        write_file(out_prefix + ".records.tsv", table);
        std::ostringstream scatter;
        scatter.precision(9);
        scatter << "esp,kl_median,compiler\n";
        for (const ExperimentRecord& r : result.records) {
            scatter << r.esp << ',' << r.kl_median << ',' << r.compiler << '\n';
        }
        write_file(out_prefix + ".scatter.csv", scatter.str());
        manifest.write(out_prefix + ".manifest.json");
    }
    if (!dump_dir.empty()) {
        fs::create_directories(dump_dir);
        for (const ExperimentItem& item : items) {
            write_file((fs::path(dump_dir) / (item.id + ".ideal.csv")).string(),
                       distribution_csv(ideal_distribution(item.compiled)));
            NoiseConfig nc;
            nc.seed = seed;
            nc.shots = shots;
            write_file((fs::path(dump_dir) / (item.id + ".empirical.csv")).string(),
                       distribution_csv(noisy_sample(item.compiled, device, nc)));
        }
    }
    return 0;
}

int cmd_verify(const std::string& circuit_path, const std::string& compiled_path,
               const std::string& device_path, bool templates, std::ostream& out) {
    if (templates) {
        // Built-in template check on a 5-qubit line with uneven rates.
        std::vector<PhysQubit> qubits;
        for (int i = 0; i < 5; ++i) qubits.push_back({i, 0.001, 0.02});
        std::vector<CouplingEdge> edges;
        for (int i = 0; i < 4; ++i) edges.push_back({i, i + 1, 0.01 + 0.01 * i});
        const DeviceModel line("line5", qubits, edges);
        bool all_ok = true;
        for (int hops = 1; hops <= 4; ++hops) {
            std::vector<PhysId> path;
            for (int i = 0; i <= hops; ++i) path.push_back(i);
            for (const auto& t : templates_for_path(line, path)) {
                const VerifyResult r = verify_template(t);
                all_ok &= r.pass;
                out << hops << "-hop " << t.name << ": " << (r.pass ? "pass" : "FAIL")
                    << " (max deviation " << r.max_deviation << ")\n";
            }
        }
        return all_ok ? 0 : 1;
    }

    const std::string circuit_text = read_file(circuit_path);
    const Circuit src = parse_circuit(circuit_text);
    const DeviceModel device = load_device(read_file(device_path));
    const CompiledCircuit cc = load_compiled(compiled_path, device, nullptr, nullptr);
    if (cc.initial_mapping.var_to_phys.empty()) {
        throw std::invalid_argument("compiled circuit has no sidecar report with mappings");
    }
    const VerifyCompiledResult r = verify_compiled(src, cc);
    out << (r.pass ? "pass" : "FAIL") << " (max deviation " << r.max_deviation << ")";
    if (!r.pass) out << " " << r.detail;
    out << "\n";
    return r.pass ? 0 : 1;
}

}  // namespace

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
    CLI::App app{"esp-router: reliability-aware circuit mapping and evaluation"};
    app.require_subcommand(1);

    // compile
    auto* compile = app.add_subcommand("compile", "map a circuit onto a device maximizing ESP");
    std::string circuit_path, device_path, out_prefix, strategy = "beam";
    int beam_width = 10000, random_mappings = 1000, threads = 1;
    std::uint64_t seed = 0;
    bool no_gce = false;
    compile->add_option("--circuit", circuit_path, "circuit file")->required();
    compile->add_option("--device", device_path, "device file")->required();
    compile->add_option("--out", out_prefix, "output prefix")->required();
    compile->add_option("--beam-width", beam_width, "beam width B");
    compile->add_option("--random-mappings", random_mappings, "random initial mappings M");
    compile->add_option("--seed", seed, "random seed");
    compile->add_option("--strategy", strategy, "beam|random");
    compile->add_flag("--no-gce", no_gce, "skip the GCE initial mapping");
    compile->add_option("--threads", threads, "expansion worker threads");

    // gen-adder
    auto* gen = app.add_subcommand("gen-adder", "generate the adder testbench circuit");
    int adder_n = 1;
    std::string gen_out;
    gen->add_option("--n", adder_n, "input register width")->required();
    gen->add_option("--out", gen_out, "output circuit file")->required();

    // select-circuit
    auto* select = app.add_subcommand("select-circuit", "rank remote-CNOT realizations");
    std::string sel_device;
    int control = 0, target = 0, max_hops = 4;
    select->add_option("--device", sel_device, "device file")->required();
    select->add_option("--control", control, "control qubit")->required();
    select->add_option("--target", target, "target qubit")->required();
    select->add_option("--max-hops", max_hops, "maximum path length");

    // evaluate
    auto* evaluate = app.add_subcommand("evaluate", "noisy sampling and KL against ideal");
    std::string eval_compiled, eval_device, eval_out, dump_dir;
    std::uint64_t eval_shots = 5000, eval_seed = 0;
    int eval_runs = 5;
    evaluate->add_option("--compiled", eval_compiled, "compiled .qasm file or directory")
        ->required();
    evaluate->add_option("--device", eval_device, "device file")->required();
    evaluate->add_option("--shots", eval_shots, "shots per run");
    evaluate->add_option("--runs", eval_runs, "runs per circuit");
    evaluate->add_option("--seed", eval_seed, "random seed");
    evaluate->add_option("--out", eval_out, "output prefix");
    evaluate->add_option("--dump-dist", dump_dir, "directory for distribution CSV dumps");

    // verify
    auto* verify = app.add_subcommand("verify", "check compiled circuits or built-in templates");
    std::string ver_circuit, ver_compiled, ver_device;
    bool ver_templates = false;
    verify->add_option("--circuit", ver_circuit, "source circuit file");
    verify->add_option("--compiled", ver_compiled, "compiled .qasm file");
    verify->add_option("--device", ver_device, "device file");
    verify->add_flag("--templates", ver_templates, "verify the built-in remote-CNOT templates");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        out << app.help();
        return 0;
    } catch (const CLI::ParseError& e) {
        err << e.what() << "\n";
        return 2;
    }

    try {
        if (compile->parsed()) {
            return cmd_compile(circuit_path, device_path, out_prefix, beam_width, random_mappings,
                               seed, strategy, no_gce, threads, out);
        }
        if (gen->parsed()) return cmd_gen_adder(adder_n, gen_out, out);
        if (select->parsed()) {
            return cmd_select_circuit(sel_device, control, target, max_hops, out);
        }
        if (evaluate->parsed()) {
            return cmd_evaluate(eval_compiled, eval_device, eval_shots, eval_runs, eval_seed,
                                eval_out, dump_dir, out);
        }
        if (verify->parsed()) {
            if (!ver_templates && (ver_circuit.empty() || ver_compiled.empty() ||
                                   ver_device.empty())) {
                err << "verify needs --templates or --circuit/--compiled/--device\n";
                return 2;
            }
            return cmd_verify(ver_circuit, ver_compiled, ver_device, ver_templates, out);
        }
    } catch (const std::invalid_argument& e) {
        err << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        err << "internal error: " << e.what() << "\n";
        return 1;
    }
    return 2;
}

}  // namespace espr
