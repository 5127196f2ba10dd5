#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "mirrorchain/serialization.hpp"

namespace mirrorchain::cli {

enum ExitCode : int {
    kSuccess = 0,
    kVerificationFailure = 1,
    kUsage = 2,
    kCapacity = 3,
};

struct Tolerances {
    double pst = 1e-10;
    double fidelity = 1e-8;        // pass iff every sample reaches 1 - fidelity
    double null_space = 1e-10;
    double gram_schmidt = 1e-8;
    double joint_orthonormality = 1e-8;
    double vacuum_rank = 1e-8;
    double probe_eigen = 1e-9;
    double probe_weight = 1e-13;
    double containment = 1e-8;
};

struct EncodingOptions {
    std::optional<int> region_size;  // empty: "auto"
    bool eta_allowed = false;
    std::optional<int> max_region;   // empty: N / 2
};

struct PipelineOptions {
    int samples = 20;
    std::uint64_t seed = 0;
    std::optional<Amplitudes> fixed;  // empty: Haar-random (alpha, beta) per sample
};

struct ProbeSettings {
    bool sampled = false;
    long shots = 100000;
};

struct SweepSettings {
    std::string axis;  // "time_fraction" or "D"
    std::vector<double> values;
};

struct ExperimentConfig {
    ChainSpec chain;
    std::vector<SystematicError> errors{};
    EncodingOptions encoding{};
    PipelineOptions pipeline{};
    ProbeSettings probe{};
    Tolerances tolerances{};
    std::optional<std::string> output_dir{};
    std::optional<SweepSettings> sweep{};
    Json source{};  // the config as read

    int max_region() const { return encoding.max_region.value_or(chain.n_sites() / 2); }
    /// Every setting after defaults and overrides, suitable for re-running.
    Json resolved() const;
};

/// Validates the whole document before anything is computed; throws
/// SchemaError with a JSON pointer to the first offending value.
ExperimentConfig parse_config(const Json& j, std::optional<std::uint64_t> seed_override = std::nullopt);
ExperimentConfig load_config(const std::filesystem::path& path,
                             std::optional<std::uint64_t> seed_override = std::nullopt);

/// Reads MIRRORCHAIN_SEED; throws SchemaError("/pipeline/seed", ...) if it is
/// set but not an unsigned integer.
std::optional<std::uint64_t> seed_from_environment();

/// Haar-random normalized (alpha, beta) for sample `index`, independent of
/// evaluation order.
Amplitudes sample_amplitudes(std::uint64_t seed, std::uint64_t index);

/// Runs fn(0..count-1) on up to `jobs` threads. The first exception by index
/// is rethrown after all workers finish.
void parallel_for(std::size_t count, int jobs, const std::function<void(std::size_t)>& fn);

struct RunContext {
    int jobs = 1;
    std::filesystem::path out_dir = ".";
    std::ostream* out = nullptr;
    std::ostream* err = nullptr;
};

int cmd_verify_chain(const ExperimentConfig& config, const RunContext& ctx);
int cmd_protect(const ExperimentConfig& config, const RunContext& ctx);
int cmd_probe_protect(const ExperimentConfig& config, const RunContext& ctx);
int cmd_sweep(const ExperimentConfig& config, const RunContext& ctx);

/// Full command-line entry point; never throws.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

std::string version();

}  // namespace mirrorchain::cli
