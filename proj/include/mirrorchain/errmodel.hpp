#pragma once

#include <optional>
#include <set>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "mirrorchain/chain.hpp"
#include "mirrorchain/fock.hpp"
#include "mirrorchain/oracle.hpp"

namespace mirrorchain {

/// gamma * c_1^dag ... c_m^dag a_{m+1} ... a_n. An empty string is gamma * 1.
struct ErrorString {
    Complex weight{1.0};
    std::vector<Site> creators;
    std::vector<Site> annihilators;

    int length() const { return static_cast<int>(creators.size() + annihilators.size()); }
    int annihilator_count() const { return static_cast<int>(annihilators.size()); }
};

/// Weighted sum of strings acting instantaneously at `time`.
struct SystematicError {
    std::vector<ErrorString> strings;
    double time = 0.0;
    std::string label;
};

std::set<Site> affected_sites(std::span<const SystematicError> errors);
inline int affected_count(std::span<const SystematicError> errors) {
    return static_cast<int>(affected_sites(errors).size());
}

/// Throws InvalidArgument if any string touches a site outside [1, n_sites],
/// repeats a site within its creator or annihilator list, or the time lies
/// outside [0, t_f].
void validate_error(const SystematicError& error, const ChainSpec& spec);

// ---------------------------------------------------------------------------
// Named constructors

SystematicError make_pauli_z_error(Site site, double time);
/// exp(i theta n_site)
SystematicError make_phase_error(Site site, double theta, double time);
/// exp(-i theta (a_k^dag a_l + a_l^dag a_k))
SystematicError make_hop_error(std::pair<Site, Site> sites, double theta, double time);
/// a_site + a_site^dag (an X on the site dressed with its JW string).
SystematicError make_majorana_error(Site site, double time);
/// Single-site bit flips need O(site) fermionic modes; always throws
/// UnsupportedError.
[[noreturn]] void make_bit_flip_error(Site site, double time);

// ---------------------------------------------------------------------------
// Application

struct AppliedError {
    PureState state;
    double norm = 0.0;
    bool annihilated() const { return norm == 0.0; }
};

/// Sum over strings of gamma * (string |state>). The result is flagged
/// unnormalized; a zero result is legal and reported through `annihilated`.
AppliedError apply_error(const PureState& state, const SystematicError& error);

/// Dense matrix of the error on n_sites (oracle cap applies).
oracle::DenseOperator dense_error(const SystematicError& error, int n_sites);

/// ||E^dag E - 1||_max, evaluated on the affected sites only: relabelling the
/// affected sites to 1..n in order preserves the generated CAR algebra.
double trace_preservation_residual(const SystematicError& error);
bool is_trace_preserving(const SystematicError& error, double tol = 1e-9);

// ---------------------------------------------------------------------------
// Heisenberg modes

/// a_k evolved from the error time to t_f, split as
///   F~_k (x) 1 + Z^{(x)Dbar} (x) F_k,
/// with coefficients beta_{k,m}(t - t_f) on sites m of the complement (F~) and
/// of the decoding region (F).
struct ModeRestriction {
    Site site = 1;
    double time = 0.0;
    int region_size = 0;   // D
    CVector complement;    // length N - D, sites 1..N-D
    CVector decoding;      // length D, sites N-D+1..N

    CVector full() const;
};

ModeRestriction heisenberg_mode(const ChainSpec& spec, Site site, double time, int region_size);

}  // namespace mirrorchain
