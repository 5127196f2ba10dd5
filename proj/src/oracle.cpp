#include "mirrorchain/oracle.hpp"

#include <string>

#include <Eigen/Eigenvalues>

namespace mirrorchain::oracle {

namespace {

void guard(int n_sites) {
    if (n_sites > kMaxSites) {
        throw ResourceLimit("dense oracle is capped at " + std::to_string(kMaxSites) + " sites, got " +
                            std::to_string(n_sites));
    }
    if (n_sites < 1) throw InvalidArgument("dense oracle needs at least one site");
}

CMatrix pauli(Pauli p) {
    CMatrix m(2, 2);
    switch (p) {
        case Pauli::I: m << 1, 0, 0, 1; break;
        case Pauli::X: m << 0, 1, 1, 0; break;
        case Pauli::Y: m << 0, -kI, kI, 0; break;
        case Pauli::Z: m << 1, 0, 0, -1; break;
    }
    return m;
}

CMatrix kron(const CMatrix& a, const CMatrix& b) {
    CMatrix out(a.rows() * b.rows(), a.cols() * b.cols());
    for (Eigen::Index i = 0; i < a.rows(); ++i) {
        for (Eigen::Index j = 0; j < a.cols(); ++j) {
            out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
        }
    }
    return out;
}

}  // namespace

CMatrix kron_sites(std::span<const CMatrix> ops) {
    CMatrix out = CMatrix::Identity(1, 1);
    // Highest site is the most significant factor.
    for (auto it = ops.rbegin(); it != ops.rend(); ++it) out = kron(out, *it);
    return out;
}

CMatrix pauli_on(Pauli p, Site site, int n_sites) {
    guard(n_sites);
    std::vector<CMatrix> ops(static_cast<std::size_t>(n_sites), pauli(Pauli::I));
    ops[static_cast<std::size_t>(site - 1)] = pauli(p);
    return kron_sites(ops);
}

DenseOperator dense_hamiltonian(const ChainSpec& spec) {
    const int n = spec.n_sites();
    guard(n);
    const Eigen::Index dim = Eigen::Index{1} << n;
    CMatrix h = CMatrix::Zero(dim, dim);
    for (Site i = 1; i < n; ++i) {
        std::vector<CMatrix> xx(static_cast<std::size_t>(n), pauli(Pauli::I));
        std::vector<CMatrix> yy = xx;
        xx[static_cast<std::size_t>(i - 1)] = xx[static_cast<std::size_t>(i)] = pauli(Pauli::X);
        yy[static_cast<std::size_t>(i - 1)] = yy[static_cast<std::size_t>(i)] = pauli(Pauli::Y);
        h += 0.5 * spec.couplings()[static_cast<std::size_t>(i - 1)] * (kron_sites(xx) + kron_sites(yy));
    }
    for (Site i = 1; i <= n; ++i) {
        h -= spec.fields()[static_cast<std::size_t>(i - 1)] * pauli_on(Pauli::Z, i, n);
    }
    return DenseOperator{n, std::move(h)};
}

DenseOperator dense_total_z(int n_sites) {
    guard(n_sites);
    const Eigen::Index dim = Eigen::Index{1} << n_sites;
    CMatrix z = CMatrix::Zero(dim, dim);
    for (Site i = 1; i <= n_sites; ++i) z += pauli_on(Pauli::Z, i, n_sites);
    return DenseOperator{n_sites, std::move(z)};
}

CMatrix dense_unitary(const DenseOperator& hamiltonian, double t) {
    guard(hamiltonian.n_sites);
    Eigen::SelfAdjointEigenSolver<CMatrix> solver(hamiltonian.entries);
    const CVector phases = (-kI * t * solver.eigenvalues().cast<Complex>()).array().exp();
    return solver.eigenvectors() * phases.asDiagonal() * solver.eigenvectors().adjoint();
}

PureState dense_evolve(const DenseOperator& hamiltonian, const PureState& state, double t) {
    if (state.n_sites() != hamiltonian.n_sites) throw InvalidArgument("state and operator sizes differ");
    return PureState(state.n_sites(), dense_unitary(hamiltonian, t) * state.amplitudes(), state.is_normalized());
}

DenseOperator dense_jw_operator(std::span<const JwFactor> factors, int n_sites) {
    guard(n_sites);
    const Eigen::Index dim = Eigen::Index{1} << n_sites;
    CMatrix out = CMatrix::Identity(dim, dim);
    for (const JwFactor& f : factors) {
        if (f.site < 1 || f.site > n_sites) {
            throw InvalidArgument("JW factor site " + std::to_string(f.site) + " out of range");
        }
        std::vector<CMatrix> ops(static_cast<std::size_t>(n_sites), pauli(Pauli::I));
        for (Site m = 1; m < f.site; ++m) ops[static_cast<std::size_t>(m - 1)] = pauli(Pauli::Z);
        const Complex sign = f.create ? -kI : kI;
        ops[static_cast<std::size_t>(f.site - 1)] = 0.5 * (pauli(Pauli::X) + sign * pauli(Pauli::Y));
        out = out * kron_sites(ops);
    }
    return DenseOperator{n_sites, std::move(out)};
}

DenseOperator dense_string(std::span<const Site> creators, std::span<const Site> annihilators, int n_sites) {
    std::vector<JwFactor> factors;
    for (Site s : creators) factors.push_back({true, s});
    for (Site s : annihilators) factors.push_back({false, s});
    return dense_jw_operator(factors, n_sites);
}

}  // namespace mirrorchain::oracle
