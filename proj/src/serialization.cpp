#include "mirrorchain/serialization.hpp"

#include <cmath>
#include <set>

namespace mirrorchain {

namespace {

std::string child(const std::string& pointer, const std::string& key) { return pointer + "/" + key; }
std::string child(const std::string& pointer, std::size_t index) { return pointer + "/" + std::to_string(index); }

void expect_object(const Json& j, const std::string& pointer, std::initializer_list<const char*> allowed) {
    if (!j.is_object()) throw SchemaError(pointer.empty() ? "/" : pointer, "expected an object");
    const std::set<std::string> keys(allowed.begin(), allowed.end());
    for (const auto& [key, value] : j.items()) {
        if (!keys.count(key)) throw SchemaError(child(pointer, key), "unknown key");
    }
}

const Json& require(const Json& j, const std::string& pointer, const char* key) {
    if (!j.contains(key)) throw SchemaError(child(pointer, key), "missing required key");
    return j.at(key);
}

double number(const Json& j, const std::string& pointer) {
    if (!j.is_number()) throw SchemaError(pointer, "expected a number");
    return j.get<double>();
}

int integer(const Json& j, const std::string& pointer) {
    if (!j.is_number_integer()) throw SchemaError(pointer, "expected an integer");
    return j.get<int>();
}

std::vector<double> numbers(const Json& j, const std::string& pointer) {
    if (!j.is_array()) throw SchemaError(pointer, "expected an array of numbers");
    std::vector<double> out;
    for (std::size_t i = 0; i < j.size(); ++i) out.push_back(number(j[i], child(pointer, i)));
    return out;
}

std::vector<Site> sites(const Json& j, const std::string& pointer) {
    if (!j.is_array()) throw SchemaError(pointer, "expected an array of sites");
    std::vector<Site> out;
    for (std::size_t i = 0; i < j.size(); ++i) out.push_back(integer(j[i], child(pointer, i)));
    return out;
}

std::string label(const Json& j, const std::string& pointer) {
    if (!j.is_string()) throw SchemaError(pointer, "expected a string");
    return j.get<std::string>();
}

SystematicError named_error(const Json& j, double time, const std::string& pointer) {
    const Json& kind = j["kind"];
    if (!kind.is_string()) throw SchemaError(child(pointer, "kind"), "expected a string");
    if (kind == "pauli_z") {
        expect_object(j, pointer, {"kind", "site", "time", "time_fraction", "label"});
        return make_pauli_z_error(integer(require(j, pointer, "site"), child(pointer, "site")), time);
    }
    if (kind == "phase") {
        expect_object(j, pointer, {"kind", "site", "theta", "time", "time_fraction", "label"});
        return make_phase_error(integer(require(j, pointer, "site"), child(pointer, "site")),
                                number(require(j, pointer, "theta"), child(pointer, "theta")), time);
    }
    if (kind == "hop") {
        expect_object(j, pointer, {"kind", "sites", "theta", "time", "time_fraction", "label"});
        const auto pair = sites(require(j, pointer, "sites"), child(pointer, "sites"));
        if (pair.size() != 2) throw SchemaError(child(pointer, "sites"), "expected two sites");
        return make_hop_error({pair[0], pair[1]}, number(require(j, pointer, "theta"), child(pointer, "theta")), time);
    }
    if (kind == "majorana") {
        expect_object(j, pointer, {"kind", "site", "time", "time_fraction", "label"});
        return make_majorana_error(integer(require(j, pointer, "site"), child(pointer, "site")), time);
    }
    if (kind == "bit_flip") {
        make_bit_flip_error(integer(require(j, pointer, "site"), child(pointer, "site")), time);
    }
    throw SchemaError(child(pointer, "kind"), "expected pauli_z, phase, hop or majorana");
}

}  // namespace

Json complex_to_json(Complex z) { return Json::array({z.real(), z.imag()}); }

Complex complex_from_json(const Json& j, const std::string& pointer) {
    if (j.is_number()) return Complex{j.get<double>(), 0.0};
    if (!j.is_array() || j.size() != 2) throw SchemaError(pointer, "expected [re, im]");
    return Complex{number(j[0], child(pointer, 0)), number(j[1], child(pointer, 1))};
}

Json vector_to_json(const CVector& v) {
    Json out = Json::array();
    for (Eigen::Index i = 0; i < v.size(); ++i) out.push_back(complex_to_json(v(i)));
    return out;
}

CVector vector_from_json(const Json& j, const std::string& pointer) {
    if (!j.is_array()) throw SchemaError(pointer, "expected an array of [re, im] pairs");
    CVector out(static_cast<Eigen::Index>(j.size()));
    for (std::size_t i = 0; i < j.size(); ++i) out(static_cast<Eigen::Index>(i)) = complex_from_json(j[i], child(pointer, i));
    return out;
}

// ---------------------------------------------------------------------------

Json to_json(const ChainSpec& spec) {
    Json j;
    j["n_sites"] = spec.n_sites();
    j["couplings"] = spec.couplings();
    j["fields"] = spec.fields();
    j["transfer_time"] = spec.transfer_time();
    j["scheme"] = spec.scheme() == CouplingScheme::UniformPst ? "uniform_pst" : "explicit";
    if (spec.transfer_phase()) j["transfer_phase"] = *spec.transfer_phase();
    return j;
}

ChainSpec chain_from_json(const Json& j, const std::string& pointer) {
    expect_object(j, pointer, {"n_sites", "couplings", "fields", "transfer_time", "scheme", "transfer_phase"});
    const Json& scheme = require(j, pointer, "scheme");
    if (!scheme.is_string()) throw SchemaError(child(pointer, "scheme"), "expected a string");
    const int n = integer(require(j, pointer, "n_sites"), child(pointer, "n_sites"));
    if (n < 2) throw SchemaError(child(pointer, "n_sites"), "chain needs at least 2 sites");
    if (scheme == "uniform_pst") {
        ChainSpec reference = build_uniform_pst(n);
        auto agrees = [&](const char* key, const std::vector<double>& expected) {
            if (!j.contains(key)) return;
            const auto given = numbers(j[key], child(pointer, key));
            bool same = given.size() == expected.size();
            for (std::size_t i = 0; same && i < given.size(); ++i) same = std::abs(given[i] - expected[i]) <= 1e-12;
            if (!same) throw SchemaError(child(pointer, key), "does not match the uniform_pst scheme");
        };
        agrees("couplings", reference.couplings());
        agrees("fields", reference.fields());
        if (j.contains("transfer_time") &&
            std::abs(number(j["transfer_time"], child(pointer, "transfer_time")) - reference.transfer_time()) > 1e-12) {
            throw SchemaError(child(pointer, "transfer_time"), "does not match the uniform_pst scheme");
        }
        return reference;
    }
    if (scheme != "explicit") throw SchemaError(child(pointer, "scheme"), "expected \"uniform_pst\" or \"explicit\"");
    if (j.contains("fields") && j["fields"].is_array() && j["fields"].size() != static_cast<std::size_t>(n)) {
        throw SchemaError(child(pointer, "fields"), "expected n_sites entries");
    }
    try {
        return ChainSpec(numbers(require(j, pointer, "couplings"), child(pointer, "couplings")),
                         j.contains("fields") ? numbers(j["fields"], child(pointer, "fields"))
                                              : std::vector<double>(static_cast<std::size_t>(n), 0.0),
                         number(require(j, pointer, "transfer_time"), child(pointer, "transfer_time")));
    } catch (const InvalidArgument& e) {
        throw SchemaError(pointer.empty() ? "/" : pointer, e.what());
    }
}

// ---------------------------------------------------------------------------

Json to_json(const SystematicError& error) {
    Json j;
    j["time"] = error.time;
    if (!error.label.empty()) j["label"] = error.label;
    Json strings = Json::array();
    for (const auto& s : error.strings) {
        strings.push_back(Json{{"gamma", complex_to_json(s.weight)}, {"create", s.creators}, {"annihilate", s.annihilators}});
    }
    j["strings"] = std::move(strings);
    return j;
}

SystematicError error_from_json(const Json& j, double transfer_time, const std::string& pointer) {
    if (!j.is_object()) throw SchemaError(pointer.empty() ? "/" : pointer, "expected an object");
    double time = 0.0;
    if (j.contains("time") && j.contains("time_fraction")) {
        throw SchemaError(child(pointer, "time_fraction"), "give either time or time_fraction, not both");
    }
    if (j.contains("time")) {
        time = number(j["time"], child(pointer, "time"));
    } else if (j.contains("time_fraction")) {
        time = number(j["time_fraction"], child(pointer, "time_fraction")) * transfer_time;
    } else {
        throw SchemaError(child(pointer, "time"), "missing required key");
    }
    if (time < 0.0 || time > transfer_time) throw SchemaError(child(pointer, "time"), "must lie in [0, t_f]");

    if (j.contains("kind")) {
        SystematicError named = named_error(j, time, pointer);
        named.label = j.contains("label") ? label(j["label"], child(pointer, "label")) : j["kind"].get<std::string>();
        return named;
    }

    expect_object(j, pointer, {"time", "time_fraction", "strings", "label"});
    SystematicError error;
    error.time = time;
    if (j.contains("label")) error.label = label(j["label"], child(pointer, "label"));
    const Json& strings = require(j, pointer, "strings");
    const std::string sp = child(pointer, "strings");
    if (!strings.is_array() || strings.empty()) throw SchemaError(sp, "expected a nonempty array");
    for (std::size_t i = 0; i < strings.size(); ++i) {
        const std::string p = child(sp, i);
        expect_object(strings[i], p, {"gamma", "create", "annihilate"});
        ErrorString s;
        s.weight = strings[i].contains("gamma") ? complex_from_json(strings[i]["gamma"], child(p, "gamma")) : Complex{1.0};
        if (strings[i].contains("create")) s.creators = sites(strings[i]["create"], child(p, "create"));
        if (strings[i].contains("annihilate")) s.annihilators = sites(strings[i]["annihilate"], child(p, "annihilate"));
        error.strings.push_back(std::move(s));
    }
    return error;
}

// ---------------------------------------------------------------------------

Json to_json(const EncodingPair& pair) {
    Json j;
    j["D"] = pair.region_size;
    j["q0"] = Json{{"epsilon", vector_to_json(pair.q0.epsilon)}, {"eta", vector_to_json(pair.q0.eta)}};
    j["q1"] = Json{{"epsilon", vector_to_json(pair.q1.epsilon)}, {"eta", vector_to_json(pair.q1.eta)}};
    return j;
}

EncodingPair pair_from_json(const Json& j, const std::string& pointer) {
    expect_object(j, pointer, {"D", "q0", "q1"});
    EncodingPair pair;
    pair.region_size = integer(require(j, pointer, "D"), child(pointer, "D"));
    for (const char* name : {"q0", "q1"}) {
        const std::string p = child(pointer, name);
        const Json& m = require(j, pointer, name);
        expect_object(m, p, {"epsilon", "eta"});
        EncodingMode mode;
        mode.epsilon = vector_from_json(require(m, p, "epsilon"), child(p, "epsilon"));
        mode.eta = m.contains("eta") ? vector_from_json(m["eta"], child(p, "eta")) : CVector::Zero(mode.epsilon.size());
        if (mode.epsilon.size() != pair.region_size || mode.eta.size() != pair.region_size) {
            throw SchemaError(p, "coefficient vectors must have length D");
        }
        (std::string(name) == "q0" ? pair.q0 : pair.q1) = std::move(mode);
    }
    return pair;
}

Json to_json(const ProtocolReport& report) {
    Json j;
    j["fidelity"] = report.fidelity;
    j["baseline_fidelity"] = report.baseline_fidelity;
    j["unitarity_residual"] = report.unitarity_residual;
    j["gram_cross_norm"] = report.gram_cross_norm;
    j["error_norm"] = report.error_norm;
    j["output_purity"] = report.output_purity;
    j["z"] = report.z;
    j["D"] = report.region_size;
    return j;
}

Json to_json(const ProbeReport& report) {
    Json j;
    j["kind"] = report.kind == ProbeKind::Vacuum ? "vacuum" : "filled";
    j["sector"] = report.sector;
    j["eigenvalues"] = std::vector<double>(report.eigenvalues.data(), report.eigenvalues.data() + report.eigenvalues.size());
    Json span = Json::array();
    for (Eigen::Index c = 0; c < report.span.cols(); ++c) span.push_back(vector_to_json(report.span.col(c)));
    j["span"] = std::move(span);
    j["post_selection_weight"] = report.post_selection_weight;
    return j;
}

Json to_json(const PureState& state) {
    Json j;
    j["bit_convention"] = "site 1 is the least-significant bit of the amplitude index";
    j["n_sites"] = state.n_sites();
    j["amplitudes"] = vector_to_json(state.amplitudes());
    return j;
}

PureState state_from_json(const Json& j, const std::string& pointer) {
    expect_object(j, pointer, {"bit_convention", "n_sites", "amplitudes"});
    const int n = integer(require(j, pointer, "n_sites"), child(pointer, "n_sites"));
    CVector amps = vector_from_json(require(j, pointer, "amplitudes"), child(pointer, "amplitudes"));
    if (n < 1 || n > 24 || amps.size() != (Eigen::Index{1} << n)) {
        throw SchemaError(child(pointer, "amplitudes"), "expected 2^n_sites amplitudes");
    }
    const bool normalized = std::abs(amps.norm() - 1.0) < 1e-10;
    return PureState(n, std::move(amps), normalized);
}

}  // namespace mirrorchain
