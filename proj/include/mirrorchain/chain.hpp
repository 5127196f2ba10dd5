#pragma once

#include <optional>
#include <vector>

#include "mirrorchain/linalg.hpp"
#include "mirrorchain/types.hpp"

namespace mirrorchain {

enum class CouplingScheme { UniformPst, Explicit };

/// XX chain with nearest-neighbour couplings and local fields:
///   H = 1/2 sum_n J_n (X_n X_{n+1} + Y_n Y_{n+1}) - sum_n B_n Z_n.
class ChainSpec {
public:
    ChainSpec(std::vector<double> couplings, std::vector<double> fields, double transfer_time,
              CouplingScheme scheme = CouplingScheme::Explicit);

    int n_sites() const { return static_cast<int>(fields_.size()); }
    const std::vector<double>& couplings() const { return couplings_; }
    const std::vector<double>& fields() const { return fields_; }
    double transfer_time() const { return transfer_time_; }
    CouplingScheme scheme() const { return scheme_; }

    /// Phase recorded by verify_pst; empty until verified.
    std::optional<double> transfer_phase() const { return transfer_phase_; }
    ChainSpec with_transfer_phase(double phi) const;

    /// Energy of the empty chain, -sum_n B_n.
    double vacuum_energy() const;

    friend bool operator==(const ChainSpec&, const ChainSpec&) = default;

private:
    std::vector<double> couplings_;
    std::vector<double> fields_;
    double transfer_time_;
    CouplingScheme scheme_;
    std::optional<double> transfer_phase_;
};

/// J_n = sqrt(n (N - n)), B = 0, t_f = pi/2; verified before return.
ChainSpec build_uniform_pst(int n_sites);

/// <n|H|m> on the one-excitation states. Diagonal entries are
/// 2 B_n - sum_m B_m, which is exactly the projection of the spin Hamiltonian.
RMatrix single_excitation_hamiltonian(const ChainSpec& spec);

/// Hopping matrix of the free-fermion form of H: off-diagonal J_n, diagonal
/// 2 B_n. It differs from the one-excitation block by the vacuum energy only,
/// and it is what conjugates mode operators: U(t) a_n^dag U(t)^dag =
/// sum_m [exp(-i h t)]_{m,n} a_m^dag.
RMatrix single_particle_hamiltonian(const ChainSpec& spec);

/// beta(t) = exp(-i H_1 t) on the one-excitation subspace.
struct BetaMatrix {
    double time = 0.0;
    CMatrix entries;

    Complex operator()(Site n, Site m) const { return entries(n - 1, m - 1); }
};

/// Diagonalizes H_1 (or the hopping matrix) once and evaluates beta(t) for
/// any t, negative included.
class Propagator {
public:
    enum class Frame {
        Spin,     // one-excitation block of the spin Hamiltonian
        Fermion,  // hopping matrix, vacuum energy removed
    };

    explicit Propagator(const ChainSpec& spec, Frame frame = Frame::Spin);

    BetaMatrix at(double t) const;
    int n_sites() const { return static_cast<int>(solver_.size()); }

private:
    HermitianExponential<double> solver_;
};

BetaMatrix propagator(const ChainSpec& spec, double t);

/// Mode propagator exp(-i h t) for the hopping matrix.
BetaMatrix mode_propagator(const ChainSpec& spec, double t);

struct PstCheck {
    double phase = 0.0;
    double worst_deviation = 0.0;
    int worst_site = 1;
};

/// Checks |beta_{N-n+1,n}(t_f) - e^{i phi}| < tol for every n, with phi read
/// from n = 1. Throws NotPstError naming the worst site otherwise.
PstCheck check_pst(const ChainSpec& spec, double tol);

inline double verify_pst(const ChainSpec& spec, double tol) { return check_pst(spec, tol).phase; }

/// Mirror phase of the mode propagator at t_f, i.e. the phase picked up by
/// a_n^dag -> a_{N-n+1}^dag. Equals verify_pst's phase when B == 0.
double mode_transfer_phase(const ChainSpec& spec);

}  // namespace mirrorchain
