#pragma once

#include <span>
#include <vector>

#include "mirrorchain/encoder.hpp"
#include "mirrorchain/errmodel.hpp"
#include "mirrorchain/linalg.hpp"

namespace mirrorchain {

/// One branch of the error expansion: for every error (in time order) the
/// string index and the mask of factors that land on the decoding region.
struct BranchLabel {
    struct Part {
        int error = 0;
        int string = 0;
        std::uint32_t mask = 0;  // bit j set: factor j acts on the decoding region
    };
    std::vector<Part> parts;
};

/// Decoding-region images of both logical states under every error branch:
/// column c of `zero` is P_c q_0^dag |psi>, of `one` is P_c q_1^dag |psi>.
struct LogicalVectors {
    int region_size = 0;
    CMatrix zero;
    CMatrix one;
    std::vector<BranchLabel> labels;
    std::vector<int> annihilated;  // columns whose vectors vanish

    double cross_gram_norm() const { return (zero.adjoint() * one).cwiseAbs().maxCoeff(); }
    double gram_mismatch() const {
        return (zero.adjoint() * zero - one.adjoint() * one).cwiseAbs().maxCoeff();
    }
};

/// Region operator products P for each branch, in the same order as the
/// logical-vector columns. Errors are applied in ascending time.
struct BranchOperators {
    std::vector<CMatrix> products;
    std::vector<int> weights;  // number of mode factors in each product
    std::vector<BranchLabel> labels;
};
BranchOperators branch_operators(const DecodingRegion& region, const ChainSpec& spec,
                                 std::span<const SystematicError> errors);

LogicalVectors build_logical_vectors(const EncodingPair& pair, const PureState& vacuum,
                                     std::span<const SystematicError> errors, const ChainSpec& spec);

/// max ||P q_a^dag - (-1)^w q_a^dag P|| and the same with q_a, over all
/// branches and both modes.
double sign_commutation_residual(const EncodingPair& pair, std::span<const SystematicError> errors,
                                 const ChainSpec& spec);

struct DecoderUnitary {
    int region_size = 0;
    CMatrix entries;
    int z = 0;  // orthonormal vectors per logical value

    double unitarity_residual() const {
        return (entries.adjoint() * entries - CMatrix::Identity(entries.rows(), entries.cols())).cwiseAbs().maxCoeff();
    }
};

/// Orthogonalizes the zero-set, replays the same coefficients on the one-set,
/// sends the r-th pair to |r> (x) |0>_N and |r> (x) |1>_N and completes the
/// map to a unitary in lexicographic order. Throws DecoderConstructionError if
/// the two sets together deviate from orthonormality by more than joint_tol.
DecoderUnitary build_decoder(const LogicalVectors& lv, double tol = 1e-8, double joint_tol = 1e-8);

/// Applies U_D to the last D sites of a full-chain state.
PureState apply_decoder(const PureState& state, const DecoderUnitary& decoder);

// ---------------------------------------------------------------------------
// Pipeline

/// Everything the receiver and sender agree on ahead of time.
struct ProtectedCode {
    EncodingPair pair;
    PureState vacuum;
    DecoderUnitary decoder;
    LogicalVectors logical;
};

ProtectedCode build_protected_code(const EncodingPair& pair, std::span<const SystematicError> errors,
                                   const ChainSpec& spec, double gs_tol = 1e-8, double joint_tol = 1e-8);
ProtectedCode build_protected_code(const EncodingPair& pair, const PureState& vacuum,
                                   std::span<const SystematicError> errors, const ChainSpec& spec,
                                   double gs_tol = 1e-8, double joint_tol = 1e-8);

struct ProtocolReport {
    double fidelity = 0.0;
    double baseline_fidelity = 0.0;
    double unitarity_residual = 0.0;
    double gram_cross_norm = 0.0;
    double gram_mismatch = 0.0;
    double output_purity = 0.0;
    double error_norm = 1.0;  // norm of the state after the errors
    int z = 0;
    // Below this norm the errors have removed the state and there is nothing
    // to decode; fidelity stays 0.
    static constexpr double kVanishingNorm = 1e-10;
    bool annihilated() const { return error_norm <= kVanishingNorm; }
    int region_size = 0;
};

/// Evolves the encoded state through the errors (ascending time), decodes and
/// reads the last site. The baseline sends chi from site 1 without encoding,
/// through the same errors, correcting only the chain's mirror phase.
ProtocolReport run_protocol(const Amplitudes& amps, const Evolver& evolver, const ProtectedCode& code,
                            std::span<const SystematicError> errors);
ProtocolReport run_protocol(const Amplitudes& amps, const ChainSpec& spec, const ProtectedCode& code,
                            std::span<const SystematicError> errors);

/// Kraus mixture: every branch is a list of errors run as a pure trajectory;
/// the unnormalized site-N states are summed before the fidelity read.
ProtocolReport run_protocol_mixture(const Amplitudes& amps, const Evolver& evolver, const ProtectedCode& code,
                                    std::span<const std::vector<SystematicError>> branches);

/// Plain transfer of chi from site 1 through the given errors; returns the
/// site-N reduced state after undoing the mirror phase.
DensityMatrix baseline_output(const Amplitudes& amps, const Evolver& evolver, std::span<const SystematicError> errors);

/// Evolves a full-chain state from t = 0 to t_f, applying each error at its
/// time. Errors are taken in ascending time (stable for ties).
PureState run_timeline(const PureState& initial, const Evolver& evolver, std::span<const SystematicError> errors);

}  // namespace mirrorchain
