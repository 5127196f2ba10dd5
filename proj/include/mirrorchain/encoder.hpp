#pragma once

#include <optional>
#include <span>
#include <vector>

#include "mirrorchain/chain.hpp"
#include "mirrorchain/errmodel.hpp"
#include "mirrorchain/fock.hpp"

namespace mirrorchain {

/// Q^dag = sum_i (epsilon_i a_i^dag + eta_i a_i) over the encoding sites 1..D.
struct EncodingMode {
    CVector epsilon;
    CVector eta;

    int region_size() const { return static_cast<int>(epsilon.size()); }
    /// (epsilon, eta) stacked into C^{2D}.
    CVector stacked() const;
    static EncodingMode from_stacked(const CVector& u);
};

struct EncodingPair {
    int region_size = 2;
    EncodingMode q0;
    EncodingMode q1;

    const EncodingMode& mode(int a) const { return a == 0 ? q0 : q1; }
    bool has_eta(double tol = 0.0) const;
};

struct PairResiduals {
    double normalization = 0.0;  // |<u_a, u_a'> - delta|
    double isotropy = 0.0;       // |sum eps^a eta^a' + eta^a eps^a'|
};
PairResiduals pair_residuals(const EncodingPair& pair);

// ---------------------------------------------------------------------------
// Constraints

/// Linear conditions on the encoding coefficients. Column i of both row
/// families refers to slot i, which the chain mirrors onto site N - i + 1.
///   epsilon rows: {q^dag, F_k}    = sum_i beta_{k,N-i+1} eps_i = 0
///   eta rows:     {q^dag, F_k^dag} = sum_i beta*_{k,N-i+1} eta_i = 0
struct ConstraintSet {
    int region_size = 2;
    CMatrix epsilon_rows;
    CMatrix eta_rows;

    struct Origin {
        Site site = 0;   // 0 when the row came from a probe span
        double time = 0.0;
    };
    std::vector<Origin> origins;  // one per epsilon row

    int row_count() const { return static_cast<int>(epsilon_rows.rows() + eta_rows.rows()); }
    static ConstraintSet empty(int region_size);
    void append_mode(const CVector& decoding_coefficients, Origin origin, bool with_eta);
};

ConstraintSet assemble_constraints(const ChainSpec& spec, std::span<const SystematicError> errors, int region_size,
                                   bool with_eta = true);

struct SolveOptions {
    bool eta_allowed = false;
    double null_tol = 1e-10;
};

/// Two protected modes satisfying the constraints, orthonormal and mutually
/// anticommuting. Throws InsufficientRegion when the admissible space holds
/// fewer than two such modes.
EncodingPair solve_encoding(const ConstraintSet& constraints, const SolveOptions& options = {});

/// Largest |row . coefficients| over all constraint rows and both modes.
double constraint_residual(const ConstraintSet& constraints, const EncodingPair& pair);

/// Sizes the region automatically: D = max(2, n+2), then D+1, ... up to
/// max_region. Rethrows the last InsufficientRegion when every size fails.
struct SizedEncoding {
    EncodingPair pair;
    ConstraintSet constraints;
    std::vector<int> attempts;
};
SizedEncoding solve_auto(const ChainSpec& spec, std::span<const SystematicError> errors, const SolveOptions& options,
                         int max_region);

// ---------------------------------------------------------------------------
// Decoding-region operators

/// Operators on the D-site decoding region (sites N-D+1..N, local bit j-1 for
/// site N-D+j) with the JW string restricted to the region.
class DecodingRegion {
public:
    DecodingRegion(const ChainSpec& spec, int region_size);

    int region_size() const { return region_size_; }
    int n_sites() const { return n_sites_; }
    Eigen::Index dimension() const { return Eigen::Index{1} << region_size_; }
    /// Global site of local slot j (1-based).
    Site global_site(int local) const { return n_sites_ - region_size_ + local; }

    /// sum_m c_m f_m for coefficients over local sites 1..D.
    CMatrix annihilation(const CVector& coefficients) const;

    /// Mirror image of the encoding mode at t_f:
    ///   q_a^dag = sum_i (e^{i phi} eps_i f_{N-i+1}^dag + e^{-i phi} eta_i f_{N-i+1}).
    CMatrix encoded_creation(const EncodingMode& mode) const;

    double mode_phase() const { return mode_phase_; }

private:
    int n_sites_;
    int region_size_;
    double mode_phase_;
    std::vector<CMatrix> creation_;
};

struct VacuumResult {
    PureState state;      // D sites
    CMatrix kernel;       // orthonormal basis of {psi : q_0 psi = q_1 psi = 0}
    int kernel_dimension = 0;
};

/// Common kernel of both encoded annihilators. The returned state is the
/// normalized projection of the computational basis vector with the largest
/// kernel overlap (lowest index on ties), so the choice does not depend on the
/// SVD's internal basis.
VacuumResult vacuum_state(const EncodingPair& pair, const ChainSpec& spec, double rank_tol = 1e-8);

struct Amplitudes {
    Complex alpha{1.0};
    Complex beta{0.0};
    CVector as_vector() const { return (CVector(2) << alpha, beta).finished(); }
};

/// (alpha Q_0^dag + beta Q_1^dag) psi_0 with psi_0 = U(t_f)^dag (complement (x) vacuum).
/// `complement` defaults to |0...0> on the N-D low sites.
PureState build_initial_state(const Amplitudes& amps, const EncodingPair& pair, const Evolver& evolver,
                              const PureState& vacuum, const std::optional<PureState>& complement = std::nullopt);
PureState build_initial_state(const Amplitudes& amps, const EncodingPair& pair, const ChainSpec& spec,
                              const std::optional<PureState>& complement = std::nullopt);

/// Q_a^dag on the full chain (encoding sites 1..D).
PureState apply_encoding_creation(const PureState& state, const EncodingMode& mode);
PureState apply_encoding_annihilation(const PureState& state, const EncodingMode& mode);

// ---------------------------------------------------------------------------
// Two-qubit mirror encoding with an arbitrary interior.

struct MirrorTransfer {
    CVector recovered;               // logical qubit read from sites (N-1, N)
    double fidelity = 0.0;           // |<chi|recovered>|^2
    double separability = 0.0;       // second singular value across the (1..N-2)/(N-1,N) cut
    double prediction_deviation = 0.0;  // ||simulated - predicted|| with the mirror phases
    PureState output;
};

/// Phase carried by interior branch of weight w: (-1)^{w + w(w-1)/2}.
double mirror_branch_sign(int weight);

/// Prepares (alpha a_1^dag + beta a_2^dag)|00> (x) interior, transfers it, and
/// compares against the closed form in which interior string x maps to its
/// reversal with sign (-1)^{w + C(w,2)} and the chain phase e^{i phi (w+1)}.
MirrorTransfer mirror_two_qubit_encode(const Amplitudes& amps, const ChainSpec& spec, const PureState& interior);

}  // namespace mirrorchain
