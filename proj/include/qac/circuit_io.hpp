#pragma once

#include <fstream>
#include <string>

#include <json.hpp>

#include "qac/circuit.hpp"
#include "qac/projector.hpp"

namespace qac {

using json = nlohmann::json;

inline json complex_to_json(const Complex& c) {
    return json::array({c.real(), c.imag()});
}

inline json qubit_state_to_json(const QubitState& s) {
    return json::array({complex_to_json(s.amp0), complex_to_json(s.amp1)});
}

inline json gate_to_json(const ReflectionGate& g) {
    json states = json::object();
    for (const auto& [q, s] : g.states) {
        states[std::to_string(q)] = qubit_state_to_json(s);
    }
    return json{{"qubits", g.qubits}, {"states", states}};
}

inline json circuit_to_json(const ReflectionCircuit& c) {
    json init = json::object();
    for (const auto& [q, s] : c.ancilla_init) {
        init[std::to_string(q)] = qubit_state_to_json(s);
    }
    json layers = json::array();
    for (const auto& layer : c.layers) {
        json jl = json::array();
        for (const auto& g : layer) jl.push_back(gate_to_json(g));
        layers.push_back(jl);
    }
    json out{{"n_inputs", c.n_inputs},
             {"n_ancillae", c.n_ancillae},
             {"ancilla_init", init},
             {"layers", layers}};
    if (c.output_qubit) {
        out["output_qubit"] = *c.output_qubit;
        out["output_basis"] =
            json::array({qubit_state_to_json(c.output_basis->first),
                         qubit_state_to_json(c.output_basis->second)});
    }
    return out;
}

// Serializes a valid circuit to its JSON text form. Doubles round-trip
// bit-faithfully (shortest-representation printing).
inline std::string serialize(const ReflectionCircuit& c) {
    const auto report = validate(c);
    if (!report.empty()) {
        throw std::invalid_argument("refusing to serialize invalid circuit: " +
                                    report.front().location + ": " +
                                    report.front().message);
    }
    return circuit_to_json(c).dump(2);
}

struct ParseError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

namespace detail {

inline const json& require_field(const json& j, const char* name,
                                 const std::string& context) {
    auto it = j.find(name);
    if (it == j.end()) {
        throw ParseError("missing field '" + std::string(name) + "' in " +
                         context);
    }
    return *it;
}

inline Complex complex_from_json(const json& j, const std::string& context) {
    if (!j.is_array() || j.size() != 2 || !j[0].is_number() ||
        !j[1].is_number()) {
        throw ParseError("expected [re, im] pair in " + context);
    }
    return {j[0].get<double>(), j[1].get<double>()};
}

inline QubitState qubit_state_from_json(const json& j,
                                        const std::string& context) {
    if (!j.is_array() || j.size() != 2) {
        throw ParseError("expected two amplitudes in " + context);
    }
    return {complex_from_json(j[0], context), complex_from_json(j[1], context)};
}

inline std::size_t index_from_key(const std::string& key,
                                  const std::string& context) {
    try {
        return static_cast<std::size_t>(std::stoull(key));
    } catch (const std::exception&) {
        throw ParseError("bad qubit index key '" + key + "' in " + context);
    }
}

inline ReflectionGate gate_from_json(const json& j, const std::string& context) {
    if (!j.is_object()) throw ParseError("expected gate object in " + context);
    ReflectionGate g;
    const json& qubits = require_field(j, "qubits", context);
    if (!qubits.is_array()) throw ParseError("bad 'qubits' in " + context);
    for (const auto& q : qubits) g.qubits.push_back(q.get<std::size_t>());
    const json& states = require_field(j, "states", context);
    if (!states.is_object()) throw ParseError("bad 'states' in " + context);
    for (auto it = states.begin(); it != states.end(); ++it) {
        g.states.emplace(index_from_key(it.key(), context),
                         qubit_state_from_json(it.value(), context));
    }
    return g;
}

} // namespace detail

inline ReflectionCircuit circuit_from_json(const json& j) {
    if (!j.is_object()) throw ParseError("expected a circuit object");
    ReflectionCircuit c;
    c.n_inputs = detail::require_field(j, "n_inputs", "circuit").get<std::size_t>();
    c.n_ancillae =
        detail::require_field(j, "n_ancillae", "circuit").get<std::size_t>();
    const json& init = detail::require_field(j, "ancilla_init", "circuit");
    if (!init.is_object()) throw ParseError("bad 'ancilla_init'");
    for (auto it = init.begin(); it != init.end(); ++it) {
        c.ancilla_init.emplace(
            detail::index_from_key(it.key(), "ancilla_init"),
            detail::qubit_state_from_json(it.value(), "ancilla_init"));
    }
    const json& layers = detail::require_field(j, "layers", "circuit");
    if (!layers.is_array()) throw ParseError("bad 'layers'");
    for (std::size_t l = 0; l < layers.size(); ++l) {
        Layer nl;
        if (!layers[l].is_array()) {
            throw ParseError("layer " + std::to_string(l) + " is not an array");
        }
        for (std::size_t gi = 0; gi < layers[l].size(); ++gi) {
            nl.push_back(detail::gate_from_json(
                layers[l][gi],
                "layer " + std::to_string(l) + " gate " + std::to_string(gi)));
        }
        c.layers.push_back(std::move(nl));
    }
    if (j.contains("output_qubit") && !j["output_qubit"].is_null()) {
        c.output_qubit = j["output_qubit"].get<std::size_t>();
        const json& basis = detail::require_field(j, "output_basis", "circuit");
        if (!basis.is_array() || basis.size() != 2) {
            throw ParseError("bad 'output_basis'");
        }
        c.output_basis = {detail::qubit_state_from_json(basis[0], "output_basis"),
                          detail::qubit_state_from_json(basis[1], "output_basis")};
    }
    return c;
}

// Parses circuit text; malformed documents raise ParseError with a position
// or the missing field's name.
inline ReflectionCircuit parse(const std::string& text) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::parse_error& e) {
        throw ParseError(std::string("JSON syntax error: ") + e.what());
    }
    return circuit_from_json(j);
}

inline ReflectionCircuit load_circuit(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ParseError("cannot open circuit file: " + path);
    std::string text((std::istreambuf_iterator<char>(in)),
                     std::istreambuf_iterator<char>());
    return parse(text);
}

// --- Projector JSON ---------------------------------------------------

inline json projector_to_json(const ProjectorExpr& p) {
    switch (p.kind()) {
        case ProjectorExpr::Kind::Identity:
            return json{{"kind", "identity"}, {"qubits", p.qubits()}};
        case ProjectorExpr::Kind::SepRank1: {
            json states = json::object();
            for (const auto& [q, s] : p.states()) {
                states[std::to_string(q)] = qubit_state_to_json(s);
            }
            return json{{"kind", "sep_rank1"}, {"states", states}};
        }
        case ProjectorExpr::Kind::Complement:
            return json{{"kind", "complement"},
                        {"child", projector_to_json(p.child())}};
        case ProjectorExpr::Kind::Tensor: {
            json children = json::array();
            for (std::size_t i = 0; i < p.child_count(); ++i) {
                children.push_back(projector_to_json(p.child(i)));
            }
            return json{{"kind", "tensor"}, {"children", children}};
        }
    }
    throw std::logic_error("unreachable projector kind");
}

inline ProjectorExpr projector_from_json(const json& j) {
    if (!j.is_object()) throw ParseError("expected projector object");
    const std::string kind =
        detail::require_field(j, "kind", "projector").get<std::string>();
    if (kind == "identity") {
        std::vector<std::size_t> qubits;
        if (j.contains("qubits")) {
            for (const auto& q : j["qubits"]) qubits.push_back(q.get<std::size_t>());
        }
        return ProjectorExpr::identity(qubits);
    }
    if (kind == "sep_rank1") {
        const json& states = detail::require_field(j, "states", "projector");
        std::vector<std::pair<std::size_t, QubitState>> entries;
        for (auto it = states.begin(); it != states.end(); ++it) {
            entries.emplace_back(
                detail::index_from_key(it.key(), "projector"),
                detail::qubit_state_from_json(it.value(), "projector"));
        }
        return ProjectorExpr::sep_rank1(std::move(entries));
    }
    if (kind == "complement") {
        return ProjectorExpr::complement(
            projector_from_json(detail::require_field(j, "child", "projector")));
    }
    if (kind == "tensor") {
        std::vector<ProjectorExpr> children;
        for (const auto& c : detail::require_field(j, "children", "projector")) {
            children.push_back(projector_from_json(c));
        }
        return ProjectorExpr::tensor(std::move(children));
    }
    throw ParseError("unknown projector kind '" + kind + "'");
}

// Stable FNV-1a content hash of the canonical serialization; embedded in CLI
// reports for provenance.
inline std::string content_hash(const ReflectionCircuit& c) {
    const std::string text = circuit_to_json(c).dump();
    std::uint64_t h = 1469598103934665603ULL;
    for (unsigned char ch : text) {
        h ^= ch;
        h *= 1099511628211ULL;
    }
    char buf[17];
    std::snprintf(buf, sizeof(buf), "%016llx",
                  static_cast<unsigned long long>(h));
    return std::string(buf);
}

} // namespace qac
