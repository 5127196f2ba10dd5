#pragma once

#include <json.hpp>

#include "mirrorchain/chain.hpp"
#include "mirrorchain/decoder.hpp"
#include "mirrorchain/encoder.hpp"
#include "mirrorchain/errmodel.hpp"
#include "mirrorchain/fock.hpp"
#include "mirrorchain/probe.hpp"

namespace mirrorchain {

using Json = nlohmann::ordered_json;

/// Thrown on malformed JSON input; `pointer` is an RFC 6901 path to the
/// offending value.
class SchemaError : public std::runtime_error {
public:
    SchemaError(std::string pointer, const std::string& what)
        : std::runtime_error(pointer + ": " + what), pointer_(std::move(pointer)) {}
    const std::string& pointer() const noexcept { return pointer_; }

private:
    std::string pointer_;
};

Json complex_to_json(Complex z);
Complex complex_from_json(const Json& j, const std::string& pointer);
Json vector_to_json(const CVector& v);
CVector vector_from_json(const Json& j, const std::string& pointer);

// {"n_sites", "couplings", "fields", "transfer_time", "scheme"}
Json to_json(const ChainSpec& spec);
/// Accepts either the full form or {"scheme": "uniform_pst", "n_sites": N}.
ChainSpec chain_from_json(const Json& j, const std::string& pointer = "");

// {"time", "strings": [{"gamma", "create", "annihilate"}]} or a named kind.
Json to_json(const SystematicError& error);
/// `transfer_time` resolves "time_fraction" entries.
SystematicError error_from_json(const Json& j, double transfer_time, const std::string& pointer = "");

// {"D", "q0": {"epsilon", "eta"}, "q1": {...}}
Json to_json(const EncodingPair& pair);
EncodingPair pair_from_json(const Json& j, const std::string& pointer = "");

// {"fidelity", "baseline_fidelity", "unitarity_residual", "gram_cross_norm", "z", "D"}
Json to_json(const ProtocolReport& report);

// {"kind", "sector", "eigenvalues", "span", "post_selection_weight"}
Json to_json(const ProbeReport& report);

// {"bit_convention", "n_sites", "amplitudes": [[re, im], ...]}
Json to_json(const PureState& state);
PureState state_from_json(const Json& j, const std::string& pointer = "");

}  // namespace mirrorchain
