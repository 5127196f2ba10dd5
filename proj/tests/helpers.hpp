#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <vector>

#include "mirrorchain/fock.hpp"
#include "mirrorchain/oracle.hpp"

namespace mirrorchain::testing {

inline CVector random_vector(Eigen::Index n, std::mt19937_64& rng) {
    std::normal_distribution<double> g;
    CVector v(n);
    for (Eigen::Index i = 0; i < n; ++i) v(i) = Complex{g(rng), g(rng)};
    return v.normalized();
}

inline PureState random_state(int n_sites, std::mt19937_64& rng) {
    return PureState(n_sites, random_vector(Eigen::Index{1} << n_sites, rng));
}

/// Random state with a fixed excitation number.
inline PureState random_sector_state(int n_sites, int k, std::mt19937_64& rng) {
    std::normal_distribution<double> g;
    CVector v = CVector::Zero(Eigen::Index{1} << n_sites);
    for (Eigen::Index b = 0; b < v.size(); ++b) {
        if (popcount(static_cast<std::uint64_t>(b)) == k) v(b) = Complex{g(rng), g(rng)};
    }
    return PureState(n_sites, v.normalized());
}

/// Partial trace by direct summation over the bits outside `region`
/// (region[0] becomes the least significant bit of the result).
inline CMatrix brute_partial_trace(const CVector& psi, int n_sites, const std::vector<Site>& region) {
    const Eigen::Index d = Eigen::Index{1} << region.size();
    CMatrix rho = CMatrix::Zero(d, d);
    const std::uint64_t full = std::uint64_t{1} << n_sites;
    std::uint64_t region_mask = 0;
    for (Site s : region) region_mask |= std::uint64_t{1} << (s - 1);
    auto local = [&](std::uint64_t b) {
        std::uint64_t out = 0;
        for (std::size_t i = 0; i < region.size(); ++i) {
            if (b & (std::uint64_t{1} << (region[i] - 1))) out |= std::uint64_t{1} << i;
        }
        return static_cast<Eigen::Index>(out);
    };
    for (std::uint64_t a = 0; a < full; ++a) {
        for (std::uint64_t b = 0; b < full; ++b) {
            if ((a & ~region_mask) != (b & ~region_mask)) continue;
            rho(local(a), local(b)) += psi(static_cast<Eigen::Index>(a)) * std::conj(psi(static_cast<Eigen::Index>(b)));
        }
    }
    return rho;
}

/// exp(-i G t) for a Hermitian matrix G, by direct eigendecomposition.
inline CMatrix exp_hermitian(const CMatrix& g, double t) {
    Eigen::SelfAdjointEigenSolver<CMatrix> eig(0.5 * (g + g.adjoint()));
    const CVector phases = (-Complex{0.0, 1.0} * t * eig.eigenvalues().cast<Complex>()).array().exp();
    return eig.eigenvectors() * phases.asDiagonal() * eig.eigenvectors().adjoint();
}

inline CMatrix dense_annihilator(int n_sites, Site site) {
    const std::vector<oracle::JwFactor> f{{false, site}};
    return oracle::dense_jw_operator(f, n_sites).entries;
}

inline CMatrix dense_creator(int n_sites, Site site) {
    const std::vector<oracle::JwFactor> f{{true, site}};
    return oracle::dense_jw_operator(f, n_sites).entries;
}

inline double max_abs(const CMatrix& m) { return m.size() == 0 ? 0.0 : m.cwiseAbs().maxCoeff(); }

}  // namespace mirrorchain::testing
