#pragma once

#include <memory>
#include <span>
#include <vector>

#include "mirrorchain/chain.hpp"
#include "mirrorchain/types.hpp"

namespace mirrorchain {

/// Full-register ket over N sites. Amplitude index = occupation bitstring with
/// site 1 on the least-significant bit.
class PureState {
public:
    PureState() = default;
    PureState(int n_sites, CVector amplitudes, bool normalized = true);

    /// |0...0>
    static PureState vacuum(int n_sites);
    /// Single computational basis state.
    static PureState basis(int n_sites, std::uint64_t index);

    int n_sites() const { return n_sites_; }
    std::uint64_t dimension() const { return std::uint64_t{1} << n_sites_; }
    const CVector& amplitudes() const { return amplitudes_; }
    CVector& amplitudes() { return amplitudes_; }
    Complex operator[](std::uint64_t index) const { return amplitudes_(static_cast<Eigen::Index>(index)); }

    double norm() const { return amplitudes_.norm(); }
    /// False once an operation that can change the norm has touched the state.
    bool is_normalized() const { return normalized_; }
    void mark_unnormalized() { normalized_ = false; }
    PureState normalized() const;

    /// Squared norm in each excitation sector k = 0..N.
    RVector sector_weights() const;

    /// a (x) b with `this` on the low sites and `high` on the sites above.
    PureState tensor(const PureState& high) const;

private:
    int n_sites_ = 0;
    CVector amplitudes_;
    bool normalized_ = true;
};

/// Reduced state over an ordered site list; region[0] is the low bit of the
/// matrix index.
struct DensityMatrix {
    std::vector<Site> region;
    CMatrix entries;

    int n_sites() const { return static_cast<int>(region.size()); }
    double trace() const { return entries.trace().real(); }
    double purity() const { return (entries * entries).trace().real(); }
};

int popcount(std::uint64_t bits);

/// Jordan-Wigner sign (-1)^{# occupied sites below `site`}.
inline double jw_sign(std::uint64_t index, Site site) {
    return (popcount(index & (site_bit(site) - 1)) & 1) ? -1.0 : 1.0;
}

PureState apply_create(const PureState& state, Site site);
PureState apply_annihilate(const PureState& state, Site site);

/// c_1^dag ... c_m^dag a_1 ... a_k |state>, rightmost operator applied first.
PureState apply_string(const PureState& state, std::span<const Site> creators, std::span<const Site> annihilators);

/// 2^n matrices of a_site^dag and a_site on a register of n sites.
CMatrix creation_matrix(int n_sites, Site site);
inline CMatrix annihilation_matrix(int n_sites, Site site) { return creation_matrix(n_sites, site).adjoint(); }

/// Exact evolution under the chain Hamiltonian. Each excitation sector is
/// diagonalized on first use and cached, so repeated evolutions are cheap.
/// Copies share the cache; concurrent use is safe.
class Evolver {
public:
    explicit Evolver(const ChainSpec& spec);

    const ChainSpec& spec() const;
    PureState evolve(const PureState& state, double duration) const;

    /// Sector-restricted Hamiltonian in ascending-index order (k excitations).
    RMatrix sector_hamiltonian(int k) const;
    const std::vector<std::uint64_t>& sector_basis(int k) const;

private:
    struct Impl;
    std::shared_ptr<const Impl> impl_;
};

PureState evolve(const PureState& state, const ChainSpec& spec, double duration);

DensityMatrix reduced_density(const PureState& state, std::span<const Site> region);

/// Contiguous site range [first, last].
std::vector<Site> site_range(Site first, Site last);

/// <chi| rho |chi> for a single-site density matrix.
double fidelity_to(const DensityMatrix& dm, const CVector& target);

/// Hermiticity, unit trace and positivity residuals of a density matrix.
struct DensityCheck {
    double hermiticity = 0.0;
    double trace_error = 0.0;
    double min_eigenvalue = 0.0;
};
DensityCheck check_density(const DensityMatrix& dm);

}  // namespace mirrorchain
