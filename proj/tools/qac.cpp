// Command-line front end: every pipeline as a subcommand with explicit
// seeds and machine-readable reports. Exit 0 = asserted properties pass,
// 1 = property violation, 2 = usage or I/O error.

#include <fstream>
#include <future>
#include <iostream>

#include <CLI11.hpp>

#include "qac/circuit_io.hpp"
#include "qac/cleanup.hpp"
#include "qac/compile.hpp"
#include "qac/depth2.hpp"
#include "qac/generate.hpp"
#include "qac/nekomata.hpp"

namespace {

constexpr const char* kVersion = "0.1.0";

using qac::json;

double default_tolerance() {
    if (const char* env = std::getenv("QAC_ACTIVATION_TOL")) {
        const double v = std::atof(env);
        if (v > 0) return v;
    }
    return qac::kActivationTol;
}

json report_envelope(const qac::ReflectionCircuit& c) {
    return json{{"tool", "qac"},
                {"version", kVersion},
                {"circuit_hash", qac::content_hash(c)}};
}

void emit(const json& j, const std::string& output_path) {
    if (output_path.empty()) {
        std::cout << j.dump(2) << '\n';
        return;
    }
    std::ofstream out(output_path);
    if (!out) throw std::runtime_error("cannot write " + output_path);
    out << j.dump(2) << '\n';
}

void emit_text(const std::string& text, const std::string& output_path) {
    if (output_path.empty()) {
        std::cout << text;
        return;
    }
    std::ofstream out(output_path);
    if (!out) throw std::runtime_error("cannot write " + output_path);
    out << text;
}

std::vector<int> parse_bits(const std::string& bits, std::size_t n) {
    if (bits.size() != n) {
        throw std::runtime_error("input needs exactly " + std::to_string(n) +
                                 " bits");
    }
    std::vector<int> x(n);
    for (std::size_t i = 0; i < n; ++i) {
        if (bits[i] != '0' && bits[i] != '1') {
            throw std::runtime_error("input must be a bit string");
        }
        x[i] = bits[i] - '0';
    }
    return x;
}

std::vector<std::size_t> parse_indices(const std::string& csv) {
    std::vector<std::size_t> out;
    std::size_t pos = 0;
    while (pos < csv.size()) {
        std::size_t next = csv.find(',', pos);
        if (next == std::string::npos) next = csv.size();
        out.push_back(std::stoull(csv.substr(pos, next - pos)));
        pos = next + 1;
    }
    return out;
}

json complexj(const qac::Complex& c) {
    return json::array({c.real(), c.imag()});
}

json qubit_state_json(const qac::QubitState& s) {
    return json::array({complexj(s.amp0), complexj(s.amp1)});
}

json state_amplitudes_json(const qac::DenseState& s) {
    json arr = json::array();
    for (const auto& a : s.amplitudes) arr.push_back(complexj(a));
    return arr;
}

// ----------------------------------------------------------------------

int cmd_validate(const std::string& path) {
    const auto c = qac::load_circuit(path);
    const auto report = qac::validate(c);
    json out = report_envelope(c);
    out["valid"] = report.empty();
    json violations = json::array();
    for (const auto& v : report) {
        violations.push_back({{"location", v.location}, {"message", v.message}});
    }
    out["violations"] = violations;
    emit(out, "");
    return report.empty() ? 0 : 1;
}

int cmd_simulate(const std::string& path, const std::string& input, bool dump,
                 const std::string& output) {
    const auto c = qac::load_circuit(path);
    const auto x = parse_bits(input, c.n_inputs);
    const auto s = qac::run(c, x);
    json out = report_envelope(c);
    out["input"] = input;
    out["norm"] = std::sqrt(s.norm2());
    std::size_t nonzero = 0;
    for (const auto& a : s.amplitudes) {
        if (std::abs(a) > 1e-12) ++nonzero;
    }
    out["nonzero_amplitudes"] = nonzero;
    if (c.output_qubit) {
        out["accept_probability"] = qac::accept_prob(c, x);
    }
    if (dump) out["amplitudes"] = state_amplitudes_json(s);
    emit(out, output);
    return 0;
}

int cmd_activation(const std::string& path, const std::string& proj_path,
                   const std::string& input, double tol,
                   const std::string& output) {
    const auto c = qac::load_circuit(path);
    std::ifstream pin(proj_path);
    if (!pin) throw std::runtime_error("cannot open projector: " + proj_path);
    const auto pj = json::parse(pin);
    const auto proj = qac::projector_from_json(pj);
    const auto x = parse_bits(input, c.n_inputs);
    const double norm2 = qac::activation_norm2(c, proj, x);
    json out = report_envelope(c);
    out["projected_norm2"] = norm2;
    out["activation"] = norm2 > tol ? 1 : 0;
    out["ambiguous"] = qac::in_ambiguous_band(norm2);
    emit(out, output);
    return 0;
}

json cleanup_result_json(const qac::ReflectionCircuit& original,
                         const qac::CleanupResult& res,
                         const qac::CleanupCheck& check) {
    json out = report_envelope(original);
    out["mode"] = res.mode == qac::CleanupMode::Parity      ? "parity"
                  : res.mode == qac::CleanupMode::Majority ? "majority"
                                                           : "structural";
    out["survivors"] = res.survivors;
    json fixed = json::object();
    for (const auto& [i, b] : res.classical_fixed) {
        fixed[std::to_string(i)] = b;
    }
    out["classical_fixed"] = fixed;
    json pairs = json::array();
    for (const auto& p : res.quantum_pairs) {
        pairs.push_back({{"gate", p.gate_index},
                         {"i", p.input_i},
                         {"j", p.input_j},
                         {"alpha", complexj(p.alpha)},
                         {"beta", complexj(p.beta)}});
    }
    out["quantum_pairs"] = pairs;
    out["parity_flip"] = res.parity_flip;
    out["circuit"] = qac::circuit_to_json(res.circuit);
    out["checked"] = check.oracle_checked;
    out["min_fidelity"] = check.min_fidelity;
    json failures = json::array();
    for (const auto& f : check.failures) failures.push_back(f);
    out["failures"] = failures;
    return out;
}

int cmd_cleanup(const std::string& path, const std::string& mode,
                const std::string& output) {
    const auto c = qac::load_circuit(path);
    qac::CleanupMode m = qac::CleanupMode::Structural;
    if (mode == "parity") {
        m = qac::CleanupMode::Parity;
    } else if (mode == "majority") {
        m = qac::CleanupMode::Majority;
    } else if (mode != "structural") {
        throw std::runtime_error("mode must be parity|majority|structural");
    }
    const auto res = qac::cleanup(c, m);
    const auto check = qac::verify_cleanup(c, res);
    emit(cleanup_result_json(c, res, check), output);
    return check.ok() ? 0 : 1;
}

json compile_report_json(const qac::ReflectionCircuit& c,
                         const qac::CompilationReport& rep) {
    json out = report_envelope(c);
    out["prefix"] = qac::to_prefix(rep.bool_circuit);
    if (qac::is_dnf(rep.bool_circuit)) {
        std::ostringstream os;
        qac::write_dnf_dimacs(rep.bool_circuit, os);
        out["dnf"] = os.str();
    }
    out["declared_bound"] = rep.declared_bound;
    out["prefold_size"] = rep.prefold_size;
    out["measured_size"] = rep.measured_size;
    out["measured_depth"] = rep.measured_depth;
    out["oracle_checked"] = rep.oracle_checked;
    out["mismatches"] = rep.mismatches;
    out["ambiguous_inputs"] = rep.ambiguous_inputs;
    out["clause_bound_note"] = rep.clause_bound_note;
    json bounds = json::array();
    for (const auto& b : rep.bounds) {
        bounds.push_back({{"rule", b.rule},
                          {"prefold", b.prefold},
                          {"declared", b.declared},
                          {"ok", b.ok()}});
    }
    out["bounds"] = bounds;
    out["bounds_ok"] = rep.bounds_ok();
    return out;
}

int cmd_compile(const std::string& path, bool verify,
                const std::string& output) {
    const auto c = qac::load_circuit(path);
    const auto rep = qac::compile_depth3_output(c);
    emit(compile_report_json(c, rep), output);
    if (!rep.bounds_ok()) return 1;
    if (verify && (!rep.oracle_checked || !rep.mismatches.empty())) return 1;
    return 0;
}

int cmd_fourier(const std::string& path, const std::string& csv_kind,
                const std::string& output) {
    const auto c = qac::load_circuit(path);
    const auto table = qac::acceptance_table(c);
    const auto sp = qac::fwht(table);
    if (csv_kind == "spectrum") {
        std::ostringstream os;
        qac::write_spectrum_csv(sp, os);
        emit_text(os.str(), output);
        return 0;
    }
    if (csv_kind == "tails") {
        std::ostringstream os;
        qac::write_tail_csv(sp, os);
        emit_text(os.str(), output);
        return 0;
    }
    json out = report_envelope(c);
    out["total_influence"] = qac::total_influence(sp);
    out["total_influence_combinatorial"] =
        qac::total_influence_combinatorial(table);
    out["parity_correlation"] = qac::parity_correlation(sp);
    json tails = json::array();
    for (std::size_t k = 0; k <= sp.n; ++k) {
        tails.push_back(qac::tail_weight(sp, k));
    }
    out["tail_weights"] = tails;
    emit(out, output);
    return 0;
}

// Structured depth-2 fixture used by the influence experiment.
qac::ReflectionCircuit influence_fixture(std::uint64_t seed, std::size_t n,
                                         std::size_t anc) {
    qac::GeneratorOptions opt;
    opt.n_inputs = n;
    opt.n_ancillae = anc;
    opt.depth = 2;
    opt.max_gate_width = 3;
    opt.cleaned_up = true;
    opt.snap_probability = 0.6;
    auto c = qac::random_circuit(opt, seed);
    if (c.layers[1].empty()) {
        c.layers[1].push_back(
            qac::make_gate({{0, qac::ket1()}, {n, qac::ket1()}}));
    }
    const qac::ReflectionGate* widest = &c.layers[1].front();
    for (const auto& g : c.layers[1]) {
        if (g.width() > widest->width()) widest = &g;
    }
    qac::Rng rng(seed ^ 0x9e3779b97f4a7c15ULL);
    c.output_qubit = widest->qubits.front();
    const qac::QubitState mu0 = qac::random_qubit_state(rng);
    c.output_basis = {mu0, mu0.orthogonal()};
    return c;
}

int cmd_influence_exp(std::uint64_t seed0, std::size_t seeds, std::size_t n,
                      std::size_t anc, double eps, std::size_t jobs,
                      const std::string& output,
                      const std::string& tails_csv) {
    std::vector<json> records(seeds);
    std::vector<std::vector<double>> tails(seeds);
    std::atomic<bool> all_ok{true};

    auto work = [&](std::size_t lo, std::size_t hi) {
        for (std::size_t s = lo; s < hi; ++s) {
            const auto c = influence_fixture(seed0 + s, n, anc);
            const auto rec = qac::section5_experiment(c, eps);
            const auto sp = qac::fwht(qac::acceptance_table(c));
            json j{{"seed", seed0 + s},
                   {"circuit_hash", qac::content_hash(c)},
                   {"case", rec.case_id},
                   {"axis_mass", rec.axis_mass},
                   {"pass", rec.ok}};
            if (rec.case_id == 1) {
                j["l2_diff"] = rec.l2_diff;
                j["bound"] = rec.case1_bound;
            } else {
                j["delta_sum"] = rec.delta_sum;
                j["bound"] = rec.lnsum_bound;
            }
            j["matrix_bound_ok"] = rec.matrix_bound_ok;
            j["maclaurin_ok"] = rec.maclaurin_ok;
            records[s] = std::move(j);
            std::vector<double> tw;
            for (std::size_t k = 0; k <= sp.n; ++k) {
                tw.push_back(qac::tail_weight(sp, k));
            }
            tails[s] = std::move(tw);
            if (!rec.ok) all_ok = false;
        }
    };
    if (jobs <= 1 || seeds < 2) {
        work(0, seeds);
    } else {
        std::vector<std::future<void>> futs;
        const std::size_t chunk = (seeds + jobs - 1) / jobs;
        for (std::size_t lo = 0; lo < seeds; lo += chunk) {
            futs.push_back(std::async(std::launch::async, work, lo,
                                      std::min(lo + chunk, seeds)));
        }
        for (auto& f : futs) f.get();
    }

    json out{{"tool", "qac"},
             {"version", kVersion},
             {"eps", eps},
             {"records", records}};
    const bool ok = all_ok.load();
    out["all_pass"] = ok;
    emit(out, output);
    if (!tails_csv.empty()) {
        std::ostringstream os;
        os << "seed,k,tail_weight\n";
        for (std::size_t s = 0; s < seeds; ++s) {
            for (std::size_t k = 0; k < tails[s].size(); ++k) {
                os << (seed0 + s) << ',' << k << ',' << tails[s][k] << '\n';
            }
        }
        emit_text(os.str(), tails_csv);
    }
    return ok ? 0 : 1;
}

int cmd_killsets(const std::string& path, const std::string& output) {
    const auto c = qac::load_circuit(path);
    const auto ks = qac::kill_sets(c);
    const auto assign = qac::onesided_assignment(c);
    json out = report_envelope(c);
    json gates = json::array();
    for (std::size_t j = 0; j < ks.kills.size(); ++j) {
        json kills = json::array();
        for (const auto& [i, b] : ks.kills[j]) {
            kills.push_back(json::array({i, b}));
        }
        gates.push_back(
            {{"gate", j}, {"trivial", ks.trivial[j]}, {"kills", kills}});
    }
    out["gates"] = gates;
    out["assignment"] = assign.z;
    out["kill_counts"] = assign.kill_counts;
    bool ok = true;
    for (auto kc : assign.kill_counts) {
        if (kc > 2) ok = false;
    }
    out["kill_counts_within_two"] = ok;
    emit(out, output);
    return ok ? 0 : 1;
}

int cmd_restrict_build(const std::string& path, const std::string& output) {
    const auto c = qac::load_circuit(path);
    const auto res = qac::restriction_builder(c);
    json out = report_envelope(c);
    out["feasible"] = res.feasible;
    out["reason"] = res.reason;
    json assigns = json::object();
    for (const auto& [i, b] : res.restriction.assignments) {
        assigns[std::to_string(i)] = b;
    }
    out["restriction"] = assigns;
    out["family"] = res.family;
    out["killed_gates"] = res.killed_gates;
    out["nontrivial_gates"] = res.nontrivial_gates;
    emit(out, output);
    return 0; // infeasibility at small n is reported, not asserted
}

json cert_json(const qac::NekomataCert& cert) {
    json bases = json::array();
    for (const auto& [mu, mup] : cert.bases) {
        bases.push_back(
            json::array({qubit_state_json(mu), qubit_state_json(mup)}));
    }
    return json{{"targets", cert.targets},
                {"bases", bases},
                {"alpha", complexj(cert.alpha)},
                {"beta", complexj(cert.beta)},
                {"gamma0", state_amplitudes_json(cert.gamma0)},
                {"gamma1", state_amplitudes_json(cert.gamma1)},
                {"fidelity", cert.reconstruction_fidelity}};
}

int cmd_neko_certify(const std::string& path, const std::string& targets_csv,
                     const std::string& output) {
    const auto c = qac::load_circuit(path);
    if (c.n_inputs != 0) {
        throw std::runtime_error(
            "certification works on synthesis-mode circuits (no inputs)");
    }
    const auto s = qac::run(c, std::vector<int>{});
    const auto targets = parse_indices(targets_csv);
    const auto cert = qac::certify_nekomata(s, targets);
    json out = report_envelope(c);
    out["found"] = cert.has_value();
    if (cert) out["certificate"] = cert_json(*cert);
    emit(out, output);
    return 0;
}

int cmd_neko_search(std::size_t targets, std::size_t budget, std::size_t seeds,
                    std::uint64_t seed0, std::size_t jobs,
                    const std::string& output, const std::string& csv) {
    qac::NekoSearchReport rep;
    if (jobs <= 1 || seeds < 2) {
        rep = qac::depth2_neko_search(targets, budget, seeds, seed0);
    } else {
        std::vector<std::future<qac::NekoSearchReport>> futs;
        const std::size_t chunk = (seeds + jobs - 1) / jobs;
        for (std::size_t lo = 0; lo < seeds; lo += chunk) {
            const std::size_t cnt = std::min(chunk, seeds - lo);
            futs.push_back(std::async(std::launch::async, [=] {
                return qac::depth2_neko_search(targets, budget, cnt,
                                               seed0 + lo);
            }));
        }
        bool first = true;
        for (auto& f : futs) {
            auto part = f.get();
            if (first) {
                rep = std::move(part);
                first = false;
            } else {
                for (auto& r : part.records) rep.records.push_back(r);
                rep.best_fidelity =
                    std::max(rep.best_fidelity, part.best_fidelity);
            }
        }
    }
    json out{{"tool", "qac"},
             {"version", kVersion},
             {"targets", targets},
             {"budget", budget},
             {"planted_included", rep.planted_included},
             {"planted_fidelity", rep.planted_fidelity},
             {"best_fidelity", rep.best_fidelity}};
    emit(out, output);
    if (!csv.empty()) {
        std::ostringstream os;
        qac::write_search_csv(rep, os);
        emit_text(os.str(), csv);
    }
    return 0;
}

int cmd_gen(std::size_t inputs, std::size_t ancillae, std::size_t depth,
            std::size_t width, bool cleaned, bool with_output, double snap,
            std::uint64_t seed, const std::string& output) {
    qac::GeneratorOptions opt;
    opt.n_inputs = inputs;
    opt.n_ancillae = ancillae;
    opt.depth = depth;
    opt.max_gate_width = width;
    opt.cleaned_up = cleaned;
    opt.with_output = with_output;
    opt.snap_probability = snap;
    const auto c = qac::random_circuit(opt, seed);
    emit_text(qac::serialize(c) + "\n", output);
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Reflection-circuit toolkit: simulation, clean-up, "
                 "classical compilation, Fourier analysis, nekomata "
                 "certificates"};
    app.require_subcommand(1);

    std::string circuit_path, projector_path, input_bits, output_path;
    std::string csv_path, mode = "structural", csv_kind, targets_csv;
    bool verify_flag = false, dump_flag = false, cleaned = false,
         with_output = false;
    double tol = default_tolerance();
    double eps = 0.25, snap = 0.0;
    std::uint64_t seed = 0;
    std::size_t seeds = 1, jobs = 1, n_inputs = 3, n_ancillae = 3, depth = 2,
                width = 3, targets = 4, budget = 6;

    auto* v = app.add_subcommand("validate", "check circuit invariants");
    v->add_option("circuit", circuit_path)->required();

    auto* sim = app.add_subcommand("simulate", "run and summarize the state");
    sim->add_option("circuit", circuit_path)->required();
    sim->add_option("--input", input_bits)->required();
    sim->add_flag("--dump", dump_flag);
    sim->add_option("--output", output_path);

    auto* act = app.add_subcommand("activation", "projector activation bit");
    act->add_option("circuit", circuit_path)->required();
    act->add_option("--projector", projector_path)->required();
    act->add_option("--input", input_bits)->required();
    act->add_option("--tol", tol);
    act->add_option("--output", output_path);

    auto* cl = app.add_subcommand("cleanup", "clean-up transformation");
    cl->add_option("circuit", circuit_path)->required();
    cl->add_option("--mode", mode)
        ->check(CLI::IsMember({"parity", "majority", "structural"}));
    cl->add_option("--output", output_path);

    auto* co = app.add_subcommand("compile", "depth-<=3 output compiler");
    co->add_option("circuit", circuit_path)->required();
    co->add_flag("--verify", verify_flag);
    co->add_option("--output", output_path);

    auto* ver = app.add_subcommand("verify", "compile and oracle-check");
    ver->add_option("circuit", circuit_path)->required();
    ver->add_option("--output", output_path);

    auto* fo = app.add_subcommand("fourier", "acceptance spectrum analysis");
    fo->add_option("circuit", circuit_path)->required();
    fo->add_option("--csv", csv_kind)
        ->check(CLI::IsMember({"spectrum", "tails"}));
    fo->add_option("--output", output_path);

    auto* inf = app.add_subcommand("influence-exp", "layer-2 influence suite");
    inf->add_option("--seed", seed)->required();
    inf->add_option("--seeds", seeds)->required();
    inf->add_option("--inputs", n_inputs);
    inf->add_option("--ancillae", n_ancillae);
    inf->add_option("--eps", eps);
    inf->add_option("--jobs", jobs);
    inf->add_option("--output", output_path);
    inf->add_option("--tails-csv", csv_path);

    auto* ks = app.add_subcommand("killsets", "kill sets and assignment");
    ks->add_option("circuit", circuit_path)->required();
    ks->add_option("--output", output_path);

    auto* rb = app.add_subcommand("restrict-build", "deterministic restriction");
    rb->add_option("circuit", circuit_path)->required();
    rb->add_option("--output", output_path);

    auto* nc = app.add_subcommand("neko-certify", "nekomata certificate");
    nc->add_option("circuit", circuit_path)->required();
    nc->add_option("--targets", targets_csv)->required();
    nc->add_option("--output", output_path);

    auto* ns = app.add_subcommand("neko-search", "depth-2 synthesis search");
    ns->add_option("--targets", targets)->required();
    ns->add_option("--budget", budget)->required();
    ns->add_option("--seeds", seeds)->required();
    ns->add_option("--seed", seed)->required();
    ns->add_option("--jobs", jobs);
    ns->add_option("--output", output_path);
    ns->add_option("--csv", csv_path);

    auto* gen = app.add_subcommand("gen", "random circuit generator");
    gen->add_option("--inputs", n_inputs)->required();
    gen->add_option("--ancillae", n_ancillae)->required();
    gen->add_option("--depth", depth)->required();
    gen->add_option("--width", width)->required();
    gen->add_flag("--cleaned", cleaned);
    gen->add_flag("--with-output", with_output);
    gen->add_option("--snap", snap);
    gen->add_option("--seed", seed)->required();
    gen->add_option("--output", output_path);

    CLI11_PARSE(app, argc, argv);

    try {
        if (v->parsed()) return cmd_validate(circuit_path);
        if (sim->parsed()) {
            return cmd_simulate(circuit_path, input_bits, dump_flag,
                                output_path);
        }
        if (act->parsed()) {
            return cmd_activation(circuit_path, projector_path, input_bits,
                                  tol, output_path);
        }
        if (cl->parsed()) return cmd_cleanup(circuit_path, mode, output_path);
        if (co->parsed()) {
            return cmd_compile(circuit_path, verify_flag, output_path);
        }
        if (ver->parsed()) return cmd_compile(circuit_path, true, output_path);
        if (fo->parsed()) {
            return cmd_fourier(circuit_path, csv_kind, output_path);
        }
        if (inf->parsed()) {
            return cmd_influence_exp(seed, seeds, n_inputs, n_ancillae, eps,
                                     jobs, output_path, csv_path);
        }
        if (ks->parsed()) return cmd_killsets(circuit_path, output_path);
        if (rb->parsed()) return cmd_restrict_build(circuit_path, output_path);
        if (nc->parsed()) {
            return cmd_neko_certify(circuit_path, targets_csv, output_path);
        }
        if (ns->parsed()) {
            return cmd_neko_search(targets, budget, seeds, seed, jobs,
                                   output_path, csv_path);
        }
        if (gen->parsed()) {
            return cmd_gen(n_inputs, n_ancillae, depth, width, cleaned,
                           with_output, snap, seed, output_path);
        }
    } catch (const qac::ParseError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    }
    return 2;
}
