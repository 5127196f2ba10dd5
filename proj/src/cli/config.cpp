#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <random>
#include <set>
#include <sstream>

#include "mirrorchain/cli.hpp"

namespace mirrorchain::cli {

namespace {

void only_keys(const Json& j, const std::string& pointer, std::initializer_list<const char*> allowed) {
    if (!j.is_object()) throw SchemaError(pointer, "expected an object");
    const std::set<std::string> keys(allowed.begin(), allowed.end());
    for (const auto& [key, value] : j.items()) {
        if (!keys.count(key)) throw SchemaError(pointer + "/" + key, "unknown key");
    }
}

int bounded_int(const Json& j, const std::string& pointer, int lo, int hi) {
    if (!j.is_number_integer()) throw SchemaError(pointer, "expected an integer");
    const auto v = j.get<long long>();
    if (v < lo || v > hi) {
        throw SchemaError(pointer, "expected an integer in [" + std::to_string(lo) + ", " + std::to_string(hi) + "]");
    }
    return static_cast<int>(v);
}

double positive(const Json& j, const std::string& pointer) {
    if (!j.is_number() || !(j.get<double>() > 0.0)) throw SchemaError(pointer, "expected a positive number");
    return j.get<double>();
}

bool flag(const Json& j, const std::string& pointer) {
    if (!j.is_boolean()) throw SchemaError(pointer, "expected true or false");
    return j.get<bool>();
}

Json amplitudes_json(const Amplitudes& a) { return Json::array({complex_to_json(a.alpha), complex_to_json(a.beta)}); }

}  // namespace

std::optional<std::uint64_t> seed_from_environment() {
    const char* raw = std::getenv("MIRRORCHAIN_SEED");
    if (raw == nullptr) return std::nullopt;
    const std::string text(raw);
    if (text.empty() || text.find_first_not_of("0123456789") != std::string::npos || text.size() > 20) {
        throw SchemaError("/pipeline/seed", "MIRRORCHAIN_SEED must be an unsigned integer, got \"" + text + "\"");
    }
    try {
        return std::stoull(text);
    } catch (const std::out_of_range&) {
        throw SchemaError("/pipeline/seed", "MIRRORCHAIN_SEED does not fit in 64 bits");
    }
}

Amplitudes sample_amplitudes(std::uint64_t seed, std::uint64_t index) {
    std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                      static_cast<std::uint32_t>(index), static_cast<std::uint32_t>(index >> 32)};
    std::mt19937_64 rng(seq);
    std::normal_distribution<double> gauss;
    Complex alpha{gauss(rng), gauss(rng)};
    Complex beta{gauss(rng), gauss(rng)};
    const double norm = std::sqrt(std::norm(alpha) + std::norm(beta));
    return Amplitudes{alpha / norm, beta / norm};
}

ExperimentConfig parse_config(const Json& j, std::optional<std::uint64_t> seed_override) {
    only_keys(j, "", {"chain", "errors", "encoding", "pipeline", "probe", "tolerances", "output", "sweep"});
    if (!j.contains("chain")) throw SchemaError("/chain", "missing required key");
    ExperimentConfig config{.chain = chain_from_json(j["chain"], "/chain")};
    config.source = j;
    const int n = config.chain.n_sites();

    if (j.contains("errors")) {
        const Json& list = j["errors"];
        if (!list.is_array()) throw SchemaError("/errors", "expected an array");
        for (std::size_t i = 0; i < list.size(); ++i) {
            const std::string p = "/errors/" + std::to_string(i);
            try {
                SystematicError e = error_from_json(list[i], config.chain.transfer_time(), p);
                validate_error(e, config.chain);
                config.errors.push_back(std::move(e));
            } catch (const UnsupportedError& e) {
                throw SchemaError(p + "/kind", e.what());
            } catch (const InvalidArgument& e) {
                throw SchemaError(p, e.what());
            }
        }
    }

    if (j.contains("encoding")) {
        const Json& e = j["encoding"];
        only_keys(e, "/encoding", {"D", "eta_allowed", "max_D"});
        if (e.contains("D")) {
            if (e["D"].is_string()) {
                if (e["D"] != "auto") throw SchemaError("/encoding/D", "expected \"auto\" or an integer");
            } else {
                config.encoding.region_size = bounded_int(e["D"], "/encoding/D", 2, n);
            }
        }
        if (e.contains("eta_allowed")) config.encoding.eta_allowed = flag(e["eta_allowed"], "/encoding/eta_allowed");
        if (e.contains("max_D")) config.encoding.max_region = bounded_int(e["max_D"], "/encoding/max_D", 2, n);
    }

    if (j.contains("pipeline")) {
        const Json& p = j["pipeline"];
        only_keys(p, "/pipeline", {"samples", "seed", "alpha_beta"});
        if (p.contains("samples")) config.pipeline.samples = bounded_int(p["samples"], "/pipeline/samples", 1, 1000000);
        if (p.contains("seed")) {
            if (!p["seed"].is_number_unsigned()) throw SchemaError("/pipeline/seed", "expected an unsigned integer");
            config.pipeline.seed = p["seed"].get<std::uint64_t>();
        }
        if (p.contains("alpha_beta")) {
            const Json& ab = p["alpha_beta"];
            if (ab.is_string()) {
                if (ab != "random") throw SchemaError("/pipeline/alpha_beta", "expected \"random\" or [alpha, beta]");
            } else {
                if (!ab.is_array() || ab.size() != 2) {
                    throw SchemaError("/pipeline/alpha_beta", "expected \"random\" or [alpha, beta]");
                }
                Amplitudes a{complex_from_json(ab[0], "/pipeline/alpha_beta/0"),
                             complex_from_json(ab[1], "/pipeline/alpha_beta/1")};
                const double norm = std::sqrt(std::norm(a.alpha) + std::norm(a.beta));
                if (!(norm > 0.0)) throw SchemaError("/pipeline/alpha_beta", "amplitudes must not both vanish");
                config.pipeline.fixed = Amplitudes{a.alpha / norm, a.beta / norm};
            }
        }
    }
    if (seed_override) config.pipeline.seed = *seed_override;

    if (j.contains("probe")) {
        const Json& p = j["probe"];
        only_keys(p, "/probe", {"mode", "shots"});
        if (p.contains("mode")) {
            if (p["mode"] == "sampled") {
                config.probe.sampled = true;
            } else if (p["mode"] != "exact") {
                throw SchemaError("/probe/mode", "expected \"exact\" or \"sampled\"");
            }
        }
        if (p.contains("shots")) config.probe.shots = bounded_int(p["shots"], "/probe/shots", 1, 1000000000);
    }

    if (j.contains("tolerances")) {
        const Json& t = j["tolerances"];
        only_keys(t, "/tolerances",
                  {"pst", "fidelity", "null_space", "gram_schmidt", "joint_orthonormality", "vacuum_rank",
                   "probe_eigen", "probe_weight", "containment"});
        auto read = [&](const char* key, double& slot) {
            if (t.contains(key)) slot = positive(t[key], std::string("/tolerances/") + key);
        };
        read("pst", config.tolerances.pst);
        read("fidelity", config.tolerances.fidelity);
        read("null_space", config.tolerances.null_space);
        read("gram_schmidt", config.tolerances.gram_schmidt);
        read("joint_orthonormality", config.tolerances.joint_orthonormality);
        read("vacuum_rank", config.tolerances.vacuum_rank);
        read("probe_eigen", config.tolerances.probe_eigen);
        read("probe_weight", config.tolerances.probe_weight);
        read("containment", config.tolerances.containment);
    }

    // Shot noise spreads weight of order 1/sqrt(shots) over every sector and
    // eigenvalue; the exact-mode cutoffs would read all of it as error modes,
    // and the resulting approximate code never meets the exact decoder checks.
    if (config.probe.sampled) {
        const double noise_floor = std::min(0.5, 10.0 / std::sqrt(static_cast<double>(config.probe.shots)));
        const Json* t = j.contains("tolerances") ? &j["tolerances"] : nullptr;
        for (auto [key, slot] : {std::pair{"probe_eigen", &config.tolerances.probe_eigen},
                                 std::pair{"probe_weight", &config.tolerances.probe_weight},
                                 std::pair{"gram_schmidt", &config.tolerances.gram_schmidt},
                                 std::pair{"joint_orthonormality", &config.tolerances.joint_orthonormality}}) {
            if (!t || !t->contains(key)) *slot = noise_floor;
        }
    }

    if (j.contains("output")) {
        const Json& o = j["output"];
        only_keys(o, "/output", {"dir"});
        if (o.contains("dir")) {
            if (!o["dir"].is_string()) throw SchemaError("/output/dir", "expected a string");
            config.output_dir = o["dir"].get<std::string>();
        }
    }

    if (j.contains("sweep")) {
        const Json& s = j["sweep"];
        only_keys(s, "/sweep", {"axis", "values"});
        if (!s.contains("axis")) throw SchemaError("/sweep/axis", "missing required key");
        if (!s["axis"].is_string()) throw SchemaError("/sweep/axis", "expected a string");
        SweepSettings sweep{s["axis"].get<std::string>(), {}};
        if (sweep.axis != "time_fraction" && sweep.axis != "D") {
            throw SchemaError("/sweep/axis", "unknown axis \"" + sweep.axis + "\"; expected time_fraction or D");
        }
        if (!s.contains("values")) throw SchemaError("/sweep/values", "missing required key");
        if (!s["values"].is_array()) throw SchemaError("/sweep/values", "expected an array");
        for (std::size_t i = 0; i < s["values"].size(); ++i) {
            const Json& v = s["values"][i];
            const std::string p = "/sweep/values/" + std::to_string(i);
            if (sweep.axis == "D") {
                sweep.values.push_back(bounded_int(v, p, 2, n));
            } else {
                if (!v.is_number() || v.get<double>() < 0.0 || v.get<double>() > 1.0) {
                    throw SchemaError(p, "expected a number in [0, 1]");
                }
                sweep.values.push_back(v.get<double>());
            }
        }
        config.sweep = std::move(sweep);
    }
    return config;
}

ExperimentConfig load_config(const std::filesystem::path& path, std::optional<std::uint64_t> seed_override) {
    std::ifstream in(path);
    if (!in) throw SchemaError("", "cannot open config file " + path.string());
    Json j;
    try {
        j = Json::parse(in);
    } catch (const Json::parse_error& e) {
        throw SchemaError("", std::string("config is not valid JSON: ") + e.what());
    }
    return parse_config(j, seed_override);
}

Json ExperimentConfig::resolved() const {
    Json j;
    j["chain"] = to_json(chain);
    Json list = Json::array();
    for (const auto& e : errors) list.push_back(to_json(e));
    j["errors"] = std::move(list);
    j["encoding"] = Json{{"D", encoding.region_size ? Json(*encoding.region_size) : Json("auto")},
                         {"eta_allowed", encoding.eta_allowed},
                         {"max_D", max_region()}};
    j["pipeline"] = Json{{"samples", pipeline.samples},
                         {"seed", pipeline.seed},
                         {"alpha_beta", pipeline.fixed ? amplitudes_json(*pipeline.fixed) : Json("random")}};
    j["probe"] = Json{{"mode", probe.sampled ? "sampled" : "exact"}, {"shots", probe.shots}};
    j["tolerances"] = Json{{"pst", tolerances.pst},
                           {"fidelity", tolerances.fidelity},
                           {"null_space", tolerances.null_space},
                           {"gram_schmidt", tolerances.gram_schmidt},
                           {"joint_orthonormality", tolerances.joint_orthonormality},
                           {"vacuum_rank", tolerances.vacuum_rank},
                           {"probe_eigen", tolerances.probe_eigen},
                           {"probe_weight", tolerances.probe_weight},
                           {"containment", tolerances.containment}};
    if (output_dir) j["output"] = Json{{"dir", *output_dir}};
    if (sweep) j["sweep"] = Json{{"axis", sweep->axis}, {"values", sweep->values}};
    return j;
}

}  // namespace mirrorchain::cli
