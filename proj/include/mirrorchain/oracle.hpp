#pragma once

#include <span>
#include <vector>

#include "mirrorchain/chain.hpp"
#include "mirrorchain/fock.hpp"

namespace mirrorchain::oracle {

// Brute-force 2^N reference built from explicit Kronecker products of Pauli
// matrices. Slow on purpose; used to certify the sector and fermionic code.

inline constexpr int kMaxSites = 10;

struct DenseOperator {
    int n_sites = 0;
    CMatrix entries;
};

enum class Pauli { I, X, Y, Z };

/// Tensor product with `ops[0]` on site 1 (least-significant bit).
CMatrix kron_sites(std::span<const CMatrix> ops);

/// Pauli `p` on `site`, identity elsewhere.
CMatrix pauli_on(Pauli p, Site site, int n_sites);

DenseOperator dense_hamiltonian(const ChainSpec& spec);

/// Total Z, sum_i Z_i.
DenseOperator dense_total_z(int n_sites);

PureState dense_evolve(const DenseOperator& hamiltonian, const PureState& state, double t);
CMatrix dense_unitary(const DenseOperator& hamiltonian, double t);

struct JwFactor {
    bool create = false;
    Site site = 1;
};

/// Product of JW factors in the written order (leftmost factor acts last),
/// each factor 1/2 prod_{m<n} Z_m (X_n -+ i Y_n).
DenseOperator dense_jw_operator(std::span<const JwFactor> factors, int n_sites);

/// Dense matrix of c_1^dag .. c_m^dag a_1 .. a_k.
DenseOperator dense_string(std::span<const Site> creators, std::span<const Site> annihilators, int n_sites);

}  // namespace mirrorchain::oracle
