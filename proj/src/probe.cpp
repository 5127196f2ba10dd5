#include "mirrorchain/probe.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include <Eigen/Eigenvalues>

#include "mirrorchain/decoder.hpp"
#include "mirrorchain/linalg.hpp"
#include "mirrorchain/oracle.hpp"

namespace mirrorchain {

namespace {

ProbeReport run_probe(ProbeKind kind, const ChainSpec& spec, std::span<const SystematicError> errors, int region_size,
                      const ProbeOptions& options) {
    const int n = spec.n_sites();
    if (region_size < 2 || region_size > n) throw InvalidArgument("probe region size must lie in [2, N]");
    const std::uint64_t filled = (std::uint64_t{1} << region_size) - 1;
    const PureState initial = PureState::basis(n, kind == ProbeKind::Vacuum ? 0 : filled);
    const PureState final_state = run_timeline(initial, Evolver(spec), errors);
    const auto region = site_range(n - region_size + 1, n);
    DensityMatrix rho = reduced_density(final_state, region);
    const double tr = rho.trace();
    if (tr > 0.0) rho.entries /= tr;

    double residual = 0.0;
    if (options.tomography.shots) {
        TomographyResult t = sampled_tomography(rho, options.tomography);
        rho = std::move(t.estimate);
        residual = t.inversion_residual;
    }
    ProbeReport report = analyze_probe(kind, rho, options);
    report.tomography_residual = residual;
    return report;
}

}  // namespace

ProbeReport analyze_probe(ProbeKind kind, const DensityMatrix& rho, const ProbeOptions& options) {
    const int d = rho.n_sites();
    ProbeReport report;
    report.kind = kind;
    report.region_size = d;
    report.sector = kind == ProbeKind::Vacuum ? 1 : d - 1;
    report.rho = rho;
    report.sector_weights = RVector::Zero(d + 1);
    const Eigen::Index dim = rho.entries.rows();
    for (Eigen::Index b = 0; b < dim; ++b) {
        report.sector_weights(popcount(static_cast<std::uint64_t>(b))) += rho.entries(b, b).real();
    }

    // One basis state per local site j: a lone particle (vacuum probe) or a
    // lone hole (filled probe). f_j |1...1> = (-1)^{j-1} |hole j>.
    std::vector<Eigen::Index> basis;
    RVector sign(d);
    for (int j = 1; j <= d; ++j) {
        const std::uint64_t bit = site_bit(j);
        basis.push_back(static_cast<Eigen::Index>(kind == ProbeKind::Vacuum ? bit : ((std::uint64_t{1} << d) - 1) ^ bit));
        sign(j - 1) = (kind == ProbeKind::Filled && (j - 1) % 2 == 1) ? -1.0 : 1.0;
    }
    CMatrix block(d, d);
    for (int i = 0; i < d; ++i) {
        for (int k = 0; k < d; ++k) block(i, k) = rho.entries(basis[static_cast<std::size_t>(i)], basis[static_cast<std::size_t>(k)]);
    }
    report.post_selection_weight = block.trace().real();
    report.span.resize(d, 0);
    report.eigenvalues.resize(0);
    if (report.post_selection_weight <= options.min_weight) return report;

    const CMatrix normalized = 0.5 * (block + block.adjoint()) / report.post_selection_weight;
    Eigen::SelfAdjointEigenSolver<CMatrix> eig(normalized);
    const RVector values = eig.eigenvalues().reverse();
    const CMatrix vectors = eig.eigenvectors().rowwise().reverse();
    report.eigenvalues = values;
    const double cutoff = options.eigen_tol * values(0);
    Eigen::Index keep = 0;
    while (keep < values.size() && values(keep) > cutoff) ++keep;
    report.span = sign.cast<Complex>().asDiagonal() * vectors.leftCols(keep);
    return report;
}

ProbeReport probe_with_vacuum(const ChainSpec& spec, std::span<const SystematicError> errors, int region_size,
                              const ProbeOptions& options) {
    return run_probe(ProbeKind::Vacuum, spec, errors, region_size, options);
}

ProbeReport probe_with_filled(const ChainSpec& spec, std::span<const SystematicError> errors, int region_size,
                              const ProbeOptions& options) {
    return run_probe(ProbeKind::Filled, spec, errors, region_size, options);
}

ConstraintSet spans_to_constraints(const ProbeReport& vacuum, const ProbeReport& filled) {
    if (vacuum.region_size != filled.region_size) throw InvalidArgument("probe reports disagree on the region size");
    ConstraintSet out = ConstraintSet::empty(vacuum.region_size);
    std::vector<CVector> accepted;
    auto add = [&](const CVector& mode) {
        const CVector unit = mode.normalized();
        for (const auto& prev : accepted) {
            const double overlap = std::min(1.0, std::abs(prev.dot(unit)));
            if (std::sqrt(std::max(0.0, 1.0 - overlap * overlap)) < 1e-10) return;
        }
        accepted.push_back(unit);
        out.append_mode(unit, {0, 0.0}, false);
    };
    // A created mode F^dag |0> carries conj(beta); the constraint acts on beta.
    for (Eigen::Index c = 0; c < vacuum.span.cols(); ++c) add(vacuum.span.col(c).conjugate());
    for (Eigen::Index c = 0; c < filled.span.cols(); ++c) add(filled.span.col(c));
    return out;
}

// ---------------------------------------------------------------------------
// Tomography

double trace_distance(const CMatrix& a, const CMatrix& b) {
    const CMatrix diff = a - b;
    Eigen::SelfAdjointEigenSolver<CMatrix> eig(0.5 * (diff + diff.adjoint()), Eigen::EigenvaluesOnly);
    return 0.5 * eig.eigenvalues().cwiseAbs().sum();
}

CMatrix project_to_density(const CMatrix& hermitian) {
    const CMatrix sym = 0.5 * (hermitian + hermitian.adjoint());
    Eigen::SelfAdjointEigenSolver<CMatrix> eig(sym);
    RVector lambda = eig.eigenvalues() / sym.trace().real();  // ascending
    // Zero the most negative eigenvalues and spread their weight evenly over
    // the rest until everything left is nonnegative.
    const Eigen::Index n = lambda.size();
    double carried = 0.0;
    Eigen::Index i = 0;
    for (; i < n; ++i) {
        const double remaining = static_cast<double>(n - i);
        if (lambda(i) + carried / remaining >= 0.0) break;
        carried += lambda(i);
        lambda(i) = 0.0;
    }
    const double remaining = static_cast<double>(n - i);
    for (Eigen::Index j = i; j < n; ++j) lambda(j) += carried / remaining;
    return eig.eigenvectors() * lambda.cast<Complex>().asDiagonal() * eig.eigenvectors().adjoint();
}

namespace {

// Basis change taking the eigenbasis of X, Y or Z to the computational basis.
CMatrix measurement_rotation(int axis) {
    const double h = 1.0 / std::sqrt(2.0);
    CMatrix m(2, 2);
    switch (axis) {
        case 0: m << h, h, h, -h; break;                      // X
        case 1: m << h, -kI * h, h, kI * h; break;            // Y
        default: m << 1, 0, 0, 1; break;                      // Z
    }
    return m;
}

CMatrix pauli_matrix(int p) {
    CMatrix m(2, 2);
    switch (p) {
        case 0: m << 1, 0, 0, 1; break;
        case 1: m << 0, 1, 1, 0; break;
        case 2: m << 0, -kI, kI, 0; break;
        default: m << 1, 0, 0, -1; break;
    }
    return m;
}

}  // namespace

TomographyResult sampled_tomography(const DensityMatrix& truth, const TomographyOptions& options) {
    if (!options.shots) return TomographyResult{truth, 0.0};
    if (*options.shots < 1) throw InvalidArgument("tomography needs at least one shot");
    const int n = truth.n_sites();
    if (n > 6) throw ResourceLimit("sampled tomography is limited to 6 sites");
    const Eigen::Index dim = Eigen::Index{1} << n;

    int settings = 1;
    for (int i = 0; i < n; ++i) settings *= 3;
    int paulis = 1;
    for (int i = 0; i < n; ++i) paulis *= 4;

    std::mt19937_64 rng(options.seed);
    std::vector<double> sums(static_cast<std::size_t>(paulis), 0.0);
    std::vector<int> hits(static_cast<std::size_t>(paulis), 0);

    for (int s = 0; s < settings; ++s) {
        std::vector<int> axes(static_cast<std::size_t>(n));
        std::vector<CMatrix> rot;
        for (int i = 0, code = s; i < n; ++i, code /= 3) {
            axes[static_cast<std::size_t>(i)] = code % 3;
            rot.push_back(measurement_rotation(code % 3));
        }
        const CMatrix v = oracle::kron_sites(rot);
        const CMatrix rotated = v * truth.entries * v.adjoint();
        std::vector<double> probs(static_cast<std::size_t>(dim));
        for (Eigen::Index b = 0; b < dim; ++b) probs[static_cast<std::size_t>(b)] = std::max(0.0, rotated(b, b).real());
        std::discrete_distribution<Eigen::Index> outcome(probs.begin(), probs.end());
        std::vector<long> counts(static_cast<std::size_t>(dim), 0);
        for (long shot = 0; shot < *options.shots; ++shot) ++counts[static_cast<std::size_t>(outcome(rng))];

        // Every Pauli string supported inside this setting's axes.
        for (int p = 0; p < paulis; ++p) {
            bool compatible = true;
            std::uint64_t support = 0;
            for (int i = 0, code = p; i < n; ++i, code /= 4) {
                const int op = code % 4;
                if (op == 0) continue;
                if (op - 1 != axes[static_cast<std::size_t>(i)]) {
                    compatible = false;
                    break;
                }
                support |= std::uint64_t{1} << i;
            }
            if (!compatible) continue;
            double expectation = 0.0;
            for (Eigen::Index b = 0; b < dim; ++b) {
                const double parity = (popcount(static_cast<std::uint64_t>(b) & support) & 1) ? -1.0 : 1.0;
                expectation += parity * static_cast<double>(counts[static_cast<std::size_t>(b)]);
            }
            sums[static_cast<std::size_t>(p)] += expectation / static_cast<double>(*options.shots);
            ++hits[static_cast<std::size_t>(p)];
        }
    }

    CMatrix linear = CMatrix::Zero(dim, dim);
    for (int p = 0; p < paulis; ++p) {
        std::vector<CMatrix> ops;
        for (int i = 0, code = p; i < n; ++i, code /= 4) ops.push_back(pauli_matrix(code % 4));
        linear += (sums[static_cast<std::size_t>(p)] / hits[static_cast<std::size_t>(p)]) * oracle::kron_sites(ops);
    }
    linear /= static_cast<double>(dim);

    TomographyResult out;
    const CMatrix projected = project_to_density(linear);
    out.inversion_residual = (projected - linear).norm();
    out.estimate = DensityMatrix{truth.region, projected};
    return out;
}

}  // namespace mirrorchain
