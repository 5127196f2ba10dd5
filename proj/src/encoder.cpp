#include "mirrorchain/encoder.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include <Eigen/Eigenvalues>
#include <Eigen/SVD>

#include "mirrorchain/linalg.hpp"

namespace mirrorchain {

CVector EncodingMode::stacked() const {
    CVector u(epsilon.size() + eta.size());
    u << epsilon, eta;
    return u;
}

EncodingMode EncodingMode::from_stacked(const CVector& u) {
    const Eigen::Index d = u.size() / 2;
    return EncodingMode{u.head(d), u.tail(d)};
}

bool EncodingPair::has_eta(double tol) const {
    return q0.eta.cwiseAbs().maxCoeff() > tol || q1.eta.cwiseAbs().maxCoeff() > tol;
}

PairResiduals pair_residuals(const EncodingPair& pair) {
    PairResiduals out;
    for (int a = 0; a < 2; ++a) {
        for (int b = 0; b < 2; ++b) {
            const auto& ma = pair.mode(a);
            const auto& mb = pair.mode(b);
            const Complex inner = mb.stacked().dot(ma.stacked());
            out.normalization = std::max(out.normalization, std::abs(inner - Complex(a == b ? 1.0 : 0.0)));
            const Complex bilinear = (ma.epsilon.array() * mb.eta.array() + ma.eta.array() * mb.epsilon.array()).sum();
            out.isotropy = std::max(out.isotropy, std::abs(bilinear));
        }
    }
    return out;
}

// ---------------------------------------------------------------------------
// Constraints

ConstraintSet ConstraintSet::empty(int region_size) {
    ConstraintSet out;
    out.region_size = region_size;
    out.epsilon_rows.resize(0, region_size);
    out.eta_rows.resize(0, region_size);
    return out;
}

void ConstraintSet::append_mode(const CVector& decoding_coefficients, Origin origin, bool with_eta) {
    if (decoding_coefficients.size() != region_size) throw InvalidArgument("mode length differs from region size");
    // Slot i pairs with site N-i+1, i.e. local decoding site D-i+1.
    const CVector row = decoding_coefficients.reverse();
    epsilon_rows.conservativeResize(epsilon_rows.rows() + 1, region_size);
    epsilon_rows.row(epsilon_rows.rows() - 1) = row.transpose();
    origins.push_back(origin);
    if (with_eta) {
        eta_rows.conservativeResize(eta_rows.rows() + 1, region_size);
        eta_rows.row(eta_rows.rows() - 1) = row.conjugate().transpose();
    }
}

ConstraintSet assemble_constraints(const ChainSpec& spec, std::span<const SystematicError> errors, int region_size,
                                   bool with_eta) {
    if (region_size < 2 || region_size > spec.n_sites()) throw InvalidArgument("region size must lie in [2, N]");
    ConstraintSet out = ConstraintSet::empty(region_size);
    for (const auto& error : errors) {
        const SystematicError one[] = {error};
        for (Site k : affected_sites(one)) {
            const ModeRestriction mode = heisenberg_mode(spec, k, error.time, region_size);
            out.append_mode(mode.decoding, {k, error.time}, with_eta);
        }
    }
    return out;
}

namespace {

/// Picks `count` orthonormal vectors from the column span of `basis` by
/// repeatedly projecting the computational basis vector with the largest
/// remaining overlap. Independent of the particular basis handed in.
CMatrix pivoted_projection(const CMatrix& basis, int count) {
    const Eigen::Index dim = basis.rows();
    CMatrix projector = basis * basis.adjoint();
    CMatrix out(dim, count);
    for (int c = 0; c < count; ++c) {
        Eigen::Index best = 0;
        double best_weight = -1.0;
        for (Eigen::Index j = 0; j < dim; ++j) {
            const double w = projector(j, j).real();
            if (w > best_weight + 1e-12) {
                best_weight = w;
                best = j;
            }
        }
        const CVector v = projector.col(best) / std::sqrt(best_weight);
        out.col(c) = v;
        projector -= v * v.adjoint();
    }
    return out;
}

/// Vectors spanning a Hermitian-orthonormal subspace on which the
/// bilinear form eps.eta' + eta.eps' vanishes identically. `basis` is an
/// orthonormal basis (2D x k) of the admissible coefficient space.
std::vector<CVector> isotropic_vectors(const CMatrix& basis, double tol) {
    const Eigen::Index k = basis.cols();
    const Eigen::Index d = basis.rows() / 2;
    CMatrix form = CMatrix::Zero(2 * d, 2 * d);
    form.topRightCorner(d, d).setIdentity();
    form.bottomLeftCorner(d, d).setIdentity();

    std::vector<CVector> out;
    if (k == 0) return out;

    // Restricted form, complex symmetric.
    const CMatrix m = basis.transpose() * form * basis;

    // Radical: directions orthogonal (under the form) to everything.
    Eigen::JacobiSVD<CMatrix> svd(m, Eigen::ComputeFullV);
    const RVector& sv = svd.singularValues();
    Eigen::Index rank = 0;
    while (rank < sv.size() && sv(rank) > tol) ++rank;
    const CMatrix radical = svd.matrixV().rightCols(k - rank);
    const CMatrix regular = svd.matrixV().leftCols(rank);
    for (Eigen::Index c = 0; c < radical.cols(); ++c) out.emplace_back(basis * radical.col(c));

    if (rank >= 2) {
        // Takagi factorization M' = U S U^T of the nondegenerate part via the
        // real symmetric embedding [[A, B], [B, -A]] of M' = A + iB.
        const CMatrix mr = regular.transpose() * m * regular;
        RMatrix embed(2 * rank, 2 * rank);
        embed << mr.real(), mr.imag(), mr.imag(), -mr.real();
        Eigen::SelfAdjointEigenSolver<RMatrix> eig(embed);
        // Eigenvalues come in +-s pairs; the positive half carries the Takagi
        // vectors u = x + i y, sorted descending.
        std::vector<std::pair<double, CVector>> takagi;
        for (Eigen::Index i = 2 * rank - 1; i >= rank; --i) {
            const RVector v = eig.eigenvectors().col(i);
            CVector u = v.head(rank).cast<Complex>() + kI * v.tail(rank).cast<Complex>();
            takagi.emplace_back(eig.eigenvalues()(i), std::move(u));
        }
        // In coordinates c = conj(U) w the form is diag(s); (sqrt s2, i sqrt s1)
        // is null on each consecutive pair of Takagi directions.
        for (std::size_t p = 0; p + 1 < takagi.size(); p += 2) {
            const double s1 = takagi[p].first;
            const double s2 = takagi[p + 1].first;
            const double scale = std::sqrt(s1 + s2);
            const CVector c = (std::sqrt(s2) * takagi[p].second.conjugate() +
                               kI * std::sqrt(s1) * takagi[p + 1].second.conjugate()) /
                              scale;
            out.emplace_back(basis * (regular * c));
        }
    }
    return out;
}

}  // namespace

EncodingPair solve_encoding(const ConstraintSet& constraints, const SolveOptions& options) {
    const int d = constraints.region_size;
    EncodingPair pair;
    pair.region_size = d;

    if (!options.eta_allowed) {
        const CMatrix admissible = null_space(constraints.epsilon_rows, options.null_tol);
        if (admissible.cols() < 2) {
            throw InsufficientRegion("only " + std::to_string(admissible.cols()) +
                                         " admissible encoding mode(s) at D = " + std::to_string(d) + "; try D = " +
                                         std::to_string(d + 1),
                                     d, static_cast<int>(admissible.cols()));
        }
        const CMatrix chosen = pivoted_projection(admissible, 2);
        pair.q0 = EncodingMode{chosen.col(0), CVector::Zero(d)};
        pair.q1 = EncodingMode{chosen.col(1), CVector::Zero(d)};
    } else {
        CMatrix rows = CMatrix::Zero(constraints.epsilon_rows.rows() + constraints.eta_rows.rows(), 2 * d);
        rows.topLeftCorner(constraints.epsilon_rows.rows(), d) = constraints.epsilon_rows;
        rows.bottomRightCorner(constraints.eta_rows.rows(), d) = constraints.eta_rows;
        const CMatrix admissible = null_space(rows, options.null_tol);
        const std::vector<CVector> candidates = isotropic_vectors(admissible, options.null_tol);
        if (candidates.size() < 2) {
            throw InsufficientRegion("only " + std::to_string(candidates.size()) +
                                         " mutually anticommuting mode(s) at D = " + std::to_string(d) + "; try D = " +
                                         std::to_string(d + 1),
                                     d, static_cast<int>(candidates.size()));
        }
        // Candidates are already orthonormal; re-normalize against roundoff.
        CVector u0 = candidates[0].normalized();
        CVector u1 = candidates[1] - u0.dot(candidates[1]) * u0;
        u1.normalize();
        pair.q0 = EncodingMode::from_stacked(u0);
        pair.q1 = EncodingMode::from_stacked(u1);
    }

    const PairResiduals res = pair_residuals(pair);
    if (res.normalization > 1e-10 || res.isotropy > 1e-10) {
        throw InconsistentPair("encoding pair failed its anticommutation checks (normalization " +
                               std::to_string(res.normalization) + ", isotropy " + std::to_string(res.isotropy) + ")");
    }
    if (constraint_residual(constraints, pair) > 1e-9) {
        throw InconsistentPair("encoding pair violates its constraints");
    }
    return pair;
}

double constraint_residual(const ConstraintSet& constraints, const EncodingPair& pair) {
    double worst = 0.0;
    for (int a = 0; a < 2; ++a) {
        const auto& m = pair.mode(a);
        if (constraints.epsilon_rows.rows() > 0) {
            worst = std::max(worst, (constraints.epsilon_rows * m.epsilon).cwiseAbs().maxCoeff());
        }
        if (constraints.eta_rows.rows() > 0) {
            worst = std::max(worst, (constraints.eta_rows * m.eta).cwiseAbs().maxCoeff());
        }
    }
    return worst;
}

SizedEncoding solve_auto(const ChainSpec& spec, std::span<const SystematicError> errors, const SolveOptions& options,
                         int max_region) {
    const int start = std::max(2, affected_count(errors) + 2);
    SizedEncoding out;
    if (start > max_region) {
        throw InsufficientRegion("D = " + std::to_string(start) + " exceeds the cap of " + std::to_string(max_region) +
                                     "; the error touches too many sites for this chain",
                                 start, 0);
    }
    for (int d = start; d <= max_region; ++d) {
        out.attempts.push_back(d);
        out.constraints = assemble_constraints(spec, errors, d, options.eta_allowed);
        try {
            out.pair = solve_encoding(out.constraints, options);
            return out;
        } catch (const InsufficientRegion& e) {
            if (d == max_region) {
                throw InsufficientRegion(std::string(e.what()) + " (cap reached)", d, e.null_dimension());
            }
        }
    }
    throw InsufficientRegion("no region size attempted", start, 0);
}

// ---------------------------------------------------------------------------
// Decoding region

DecodingRegion::DecodingRegion(const ChainSpec& spec, int region_size)
    : n_sites_(spec.n_sites()), region_size_(region_size), mode_phase_(mode_transfer_phase(spec)) {
    if (region_size < 1 || region_size > n_sites_) throw InvalidArgument("region size must lie in [1, N]");
    if (region_size > 12) throw ResourceLimit("decoding region above 12 sites");
    for (int j = 1; j <= region_size; ++j) creation_.push_back(creation_matrix(region_size, j));
}

CMatrix DecodingRegion::annihilation(const CVector& coefficients) const {
    if (coefficients.size() != region_size_) throw InvalidArgument("coefficient length differs from region size");
    CMatrix out = CMatrix::Zero(dimension(), dimension());
    for (int j = 0; j < region_size_; ++j) {
        if (coefficients(j) != Complex{}) out += coefficients(j) * creation_[static_cast<std::size_t>(j)].adjoint();
    }
    return out;
}

CMatrix DecodingRegion::encoded_creation(const EncodingMode& mode) const {
    if (mode.region_size() != region_size_) throw InvalidArgument("mode size differs from region size");
    const Complex forward = std::polar(1.0, mode_phase_);
    CMatrix out = CMatrix::Zero(dimension(), dimension());
    for (int i = 1; i <= region_size_; ++i) {
        const auto& create = creation_[static_cast<std::size_t>(region_size_ - i)];
        const Complex e = mode.epsilon(i - 1);
        const Complex h = mode.eta(i - 1);
        if (e != Complex{}) out += forward * e * create;
        if (h != Complex{}) out += std::conj(forward) * h * create.adjoint();
    }
    return out;
}

VacuumResult vacuum_state(const EncodingPair& pair, const ChainSpec& spec, double rank_tol) {
    const DecodingRegion region(spec, pair.region_size);
    const Eigen::Index dim = region.dimension();
    CMatrix stacked(2 * dim, dim);
    stacked.topRows(dim) = region.encoded_creation(pair.q0).adjoint();
    stacked.bottomRows(dim) = region.encoded_creation(pair.q1).adjoint();
    CMatrix kernel = null_space(stacked, rank_tol);
    if (kernel.cols() == 0) throw InconsistentPair("encoded modes share no vacuum");
    const CMatrix chosen = pivoted_projection(kernel, 1);
    VacuumResult out{PureState(pair.region_size, chosen.col(0)), std::move(kernel), 0};
    out.kernel_dimension = static_cast<int>(out.kernel.cols());
    return out;
}

// ---------------------------------------------------------------------------
// Initial states

PureState apply_encoding_creation(const PureState& state, const EncodingMode& mode) {
    CVector sum = CVector::Zero(state.amplitudes().size());
    for (int i = 1; i <= mode.region_size(); ++i) {
        if (mode.epsilon(i - 1) != Complex{}) sum += mode.epsilon(i - 1) * apply_create(state, i).amplitudes();
        if (mode.eta(i - 1) != Complex{}) sum += mode.eta(i - 1) * apply_annihilate(state, i).amplitudes();
    }
    return PureState(state.n_sites(), std::move(sum), false);
}

PureState apply_encoding_annihilation(const PureState& state, const EncodingMode& mode) {
    CVector sum = CVector::Zero(state.amplitudes().size());
    for (int i = 1; i <= mode.region_size(); ++i) {
        if (mode.epsilon(i - 1) != Complex{}) {
            sum += std::conj(mode.epsilon(i - 1)) * apply_annihilate(state, i).amplitudes();
        }
        if (mode.eta(i - 1) != Complex{}) sum += std::conj(mode.eta(i - 1)) * apply_create(state, i).amplitudes();
    }
    return PureState(state.n_sites(), std::move(sum), false);
}

PureState build_initial_state(const Amplitudes& amps, const EncodingPair& pair, const Evolver& evolver,
                              const PureState& vacuum, const std::optional<PureState>& complement) {
    const ChainSpec& spec = evolver.spec();
    const int n = spec.n_sites();
    const int d = pair.region_size;
    if (std::abs(std::norm(amps.alpha) + std::norm(amps.beta) - 1.0) > 1e-10) {
        throw InvalidArgument("|alpha|^2 + |beta|^2 must equal 1");
    }
    if (vacuum.n_sites() != d) throw InvalidArgument("vacuum must live on the D decoding sites");
    if (complement && complement->n_sites() != n - d) throw InvalidArgument("complement must cover N - D sites");

    const bool plain_complement =
        !complement || std::abs(std::abs((*complement)[0]) - 1.0) < 1e-12;
    const bool plain_vacuum = std::abs(std::abs(vacuum[0]) - 1.0) < 1e-12;

    PureState psi0;
    if (plain_complement && plain_vacuum) {
        // psi_out is c |0...0>, an eigenvector of U(t_f).
        const Complex c = vacuum[0] * (complement ? (*complement)[0] : Complex{1.0});
        psi0 = PureState::vacuum(n);
        psi0.amplitudes()(0) = c * std::exp(kI * spec.vacuum_energy() * spec.transfer_time());
    } else {
        const PureState psi_out = (n == d) ? vacuum : (complement ? *complement : PureState::vacuum(n - d)).tensor(vacuum);
        psi0 = evolver.evolve(psi_out, -spec.transfer_time());
    }

    const PureState zero = apply_encoding_creation(psi0, pair.q0);
    const PureState one = apply_encoding_creation(psi0, pair.q1);
    CVector amps_out = amps.alpha * zero.amplitudes() + amps.beta * one.amplitudes();
    const double norm = amps_out.norm();
    if (std::abs(norm - 1.0) > 1e-10) {
        throw InconsistentPair("encoded state has norm " + std::to_string(norm) + "; vacuum is not annihilated");
    }
    return PureState(n, std::move(amps_out), true);
}

PureState build_initial_state(const Amplitudes& amps, const EncodingPair& pair, const ChainSpec& spec,
                              const std::optional<PureState>& complement) {
    const VacuumResult vac = vacuum_state(pair, spec);
    return build_initial_state(amps, pair, Evolver(spec), vac.state, complement);
}

// ---------------------------------------------------------------------------
// Mirror encoding

double mirror_branch_sign(int weight) {
    const int exponent = weight + weight * (weight - 1) / 2;
    return (exponent % 2 == 0) ? 1.0 : -1.0;
}

MirrorTransfer mirror_two_qubit_encode(const Amplitudes& amps, const ChainSpec& spec, const PureState& interior) {
    const int n = spec.n_sites();
    if (n < 3) throw InvalidArgument("mirror encoding needs N >= 3");
    if (interior.n_sites() != n - 2) throw InvalidArgument("interior must cover sites 3..N");

    // The bit basis of the interior coincides with ascending products of
    // creation operators on sites 3..N acting on the vacuum.
    const PureState padded = PureState::vacuum(2).tensor(interior);
    CVector start = amps.alpha * apply_create(padded, 1).amplitudes() + amps.beta * apply_create(padded, 2).amplitudes();
    const PureState initial(n, std::move(start), false);
    const PureState output = Evolver(spec).evolve(initial, spec.transfer_time());

    const double phi = mode_transfer_phase(spec);
    const Complex vacuum_phase = std::exp(-kI * spec.vacuum_energy() * spec.transfer_time());
    const std::uint64_t low_dim = std::uint64_t{1} << (n - 2);
    CVector predicted = CVector::Zero(output.amplitudes().size());
    for (std::uint64_t x = 0; x < interior.dimension(); ++x) {
        const Complex gamma = interior[x];
        if (gamma == Complex{}) continue;
        std::uint64_t mirrored = 0;
        for (Site site = 3; site <= n; ++site) {
            if (x & site_bit(site - 2)) mirrored |= site_bit(n - site + 1);
        }
        const int w = popcount(x);
        const Complex coeff = gamma * mirror_branch_sign(w) * std::exp(kI * phi * double(w + 1)) * vacuum_phase;
        predicted(static_cast<Eigen::Index>(mirrored | (std::uint64_t{2} * low_dim))) += coeff * amps.alpha;
        predicted(static_cast<Eigen::Index>(mirrored | low_dim)) += coeff * amps.beta;
    }

    MirrorTransfer out;
    out.prediction_deviation = (output.amplitudes() - predicted).norm();

    const Eigen::Map<const CMatrix> split(output.amplitudes().data(), static_cast<Eigen::Index>(low_dim), 4);
    Eigen::JacobiSVD<CMatrix> svd(split, Eigen::ComputeThinV);
    out.separability = svd.singularValues()(1);
    const CVector tail = svd.matrixV().col(0).conjugate();
    out.recovered = CVector(2);
    out.recovered << tail(2), tail(1);  // site N carries alpha, site N-1 carries beta
    out.fidelity = std::norm(amps.as_vector().dot(out.recovered)) / tail.squaredNorm();
    out.output = output;
    return out;
}

}  // namespace mirrorchain
