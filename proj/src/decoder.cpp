#include "mirrorchain/decoder.hpp"

#include <algorithm>
#include <map>
#include <numeric>
#include <string>

namespace mirrorchain {

namespace {

std::vector<int> time_order(std::span<const SystematicError> errors) {
    std::vector<int> order(errors.size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(),
                     [&](int a, int b) { return errors[static_cast<std::size_t>(a)].time < errors[static_cast<std::size_t>(b)].time; });
    return order;
}

struct Branch {
    CMatrix product;
    int weight = 0;
    BranchLabel label;
};

}  // namespace

BranchOperators branch_operators(const DecodingRegion& region, const ChainSpec& spec,
                                 std::span<const SystematicError> errors) {
    const Eigen::Index dim = region.dimension();
    std::vector<Branch> branches{Branch{CMatrix::Identity(dim, dim), 0, {}}};

    for (int e : time_order(errors)) {
        const SystematicError& error = errors[static_cast<std::size_t>(e)];
        std::map<Site, CMatrix> modes;  // F_k on the region
        auto mode = [&](Site k) -> const CMatrix& {
            auto it = modes.find(k);
            if (it == modes.end()) {
                const ModeRestriction m = heisenberg_mode(spec, k, error.time, region.region_size());
                it = modes.emplace(k, region.annihilation(m.decoding)).first;
            }
            return it->second;
        };

        std::vector<Branch> local;
        for (std::size_t i = 0; i < error.strings.size(); ++i) {
            const ErrorString& s = error.strings[i];
            std::vector<CMatrix> factors;
            for (Site k : s.creators) factors.push_back(mode(k).adjoint());
            for (Site k : s.annihilators) factors.push_back(mode(k));
            const auto n = static_cast<std::uint32_t>(factors.size());
            for (std::uint32_t mask = 0; mask < (std::uint32_t{1} << n); ++mask) {
                CMatrix p = CMatrix::Identity(dim, dim);
                int weight = 0;
                for (std::uint32_t j = 0; j < n; ++j) {
                    if (mask & (std::uint32_t{1} << j)) {
                        p = p * factors[j];
                        ++weight;
                    }
                }
                BranchLabel label;
                label.parts.push_back({e, static_cast<int>(i), mask});
                local.push_back(Branch{std::move(p), weight, std::move(label)});
            }
        }

        // Later errors act to the left of earlier ones.
        std::vector<Branch> combined;
        combined.reserve(branches.size() * local.size());
        for (const auto& earlier : branches) {
            for (const auto& later : local) {
                Branch b{later.product * earlier.product, later.weight + earlier.weight, earlier.label};
                b.label.parts.insert(b.label.parts.end(), later.label.parts.begin(), later.label.parts.end());
                combined.push_back(std::move(b));
            }
        }
        branches = std::move(combined);
    }

    BranchOperators out;
    for (auto& b : branches) {
        out.products.push_back(std::move(b.product));
        out.weights.push_back(b.weight);
        out.labels.push_back(std::move(b.label));
    }
    return out;
}

LogicalVectors build_logical_vectors(const EncodingPair& pair, const PureState& vacuum,
                                     std::span<const SystematicError> errors, const ChainSpec& spec) {
    const DecodingRegion region(spec, pair.region_size);
    if (vacuum.n_sites() != pair.region_size) throw InvalidArgument("vacuum must live on the decoding region");
    const CVector base0 = region.encoded_creation(pair.q0) * vacuum.amplitudes();
    const CVector base1 = region.encoded_creation(pair.q1) * vacuum.amplitudes();

    const BranchOperators ops = branch_operators(region, spec, errors);
    const auto count = static_cast<Eigen::Index>(ops.products.size());
    LogicalVectors lv;
    lv.region_size = pair.region_size;
    lv.zero.resize(region.dimension(), count);
    lv.one.resize(region.dimension(), count);
    lv.labels = ops.labels;
    for (Eigen::Index c = 0; c < count; ++c) {
        lv.zero.col(c) = ops.products[static_cast<std::size_t>(c)] * base0;
        lv.one.col(c) = ops.products[static_cast<std::size_t>(c)] * base1;
        if (lv.zero.col(c).norm() < 1e-12 && lv.one.col(c).norm() < 1e-12) lv.annihilated.push_back(static_cast<int>(c));
    }
    return lv;
}

double sign_commutation_residual(const EncodingPair& pair, std::span<const SystematicError> errors,
                                 const ChainSpec& spec) {
    const DecodingRegion region(spec, pair.region_size);
    const BranchOperators ops = branch_operators(region, spec, errors);
    double worst = 0.0;
    for (int a = 0; a < 2; ++a) {
        const CMatrix raise = region.encoded_creation(pair.mode(a));
        const CMatrix lower = raise.adjoint();
        for (std::size_t b = 0; b < ops.products.size(); ++b) {
            const CMatrix& p = ops.products[b];
            const double sign = (ops.weights[b] % 2 == 0) ? 1.0 : -1.0;
            worst = std::max(worst, (p * raise - sign * raise * p).cwiseAbs().maxCoeff());
            worst = std::max(worst, (p * lower - sign * lower * p).cwiseAbs().maxCoeff());
        }
    }
    return worst;
}

DecoderUnitary build_decoder(const LogicalVectors& lv, double tol, double joint_tol) {
    const int d = lv.region_size;
    const Eigen::Index dim = Eigen::Index{1} << d;
    const Eigen::Index half = dim / 2;

    std::vector<Eigen::Index> live;
    for (Eigen::Index c = 0; c < lv.zero.cols(); ++c) {
        if (std::find(lv.annihilated.begin(), lv.annihilated.end(), static_cast<int>(c)) == lv.annihilated.end()) {
            live.push_back(c);
        }
    }
    CMatrix zero(dim, static_cast<Eigen::Index>(live.size()));
    CMatrix one(dim, static_cast<Eigen::Index>(live.size()));
    for (std::size_t i = 0; i < live.size(); ++i) {
        zero.col(static_cast<Eigen::Index>(i)) = lv.zero.col(live[i]);
        one.col(static_cast<Eigen::Index>(i)) = lv.one.col(live[i]);
    }

    const GramSchmidtResult gs = gram_schmidt(zero, tol);
    CMatrix q0 = gs.basis;
    CMatrix q1 = replay_gram_schmidt(gs, one);
    const Eigen::Index z = q0.cols();
    if (z > half) {
        throw DecoderConstructionError(std::to_string(z) + " logical vectors per value do not fit in " +
                                       std::to_string(half) + " labels");
    }

    CMatrix source(dim, 2 * z);
    source << q0, q1;
    const double overlap =
        (source.adjoint() * source - CMatrix::Identity(2 * z, 2 * z)).cwiseAbs().maxCoeff();
    if (overlap > joint_tol) {
        throw DecoderConstructionError("logical sets are not jointly orthonormal (residual " +
                                       std::to_string(overlap) + ")");
    }
    if (overlap > 1e-12) {
        // Nearest orthonormal family (polar factor), so U_D stays unitary.
        Eigen::JacobiSVD<CMatrix> svd(source, Eigen::ComputeThinU | Eigen::ComputeThinV);
        source = svd.matrixU() * svd.matrixV().adjoint();
        q0 = source.leftCols(z);
        q1 = source.rightCols(z);
    }

    const CMatrix rest = orthonormal_completion(source);
    std::vector<bool> used(static_cast<std::size_t>(dim), false);
    DecoderUnitary out;
    out.region_size = d;
    out.z = static_cast<int>(z);
    out.entries = CMatrix::Zero(dim, dim);
    for (Eigen::Index r = 0; r < z; ++r) {
        // Site N is the top bit of the region.
        out.entries.row(r) = q0.col(r).adjoint();
        out.entries.row(r + half) = q1.col(r).adjoint();
        used[static_cast<std::size_t>(r)] = used[static_cast<std::size_t>(r + half)] = true;
    }
    Eigen::Index next = 0;
    for (Eigen::Index idx = 0; idx < dim; ++idx) {
        if (used[static_cast<std::size_t>(idx)]) continue;
        if (next >= rest.cols()) throw DecoderConstructionError("orthogonal completion came up short");
        out.entries.row(idx) = rest.col(next++).adjoint();
    }
    if (out.unitarity_residual() > 1e-10) {
        throw DecoderConstructionError("decoder is not unitary (residual " + std::to_string(out.unitarity_residual()) +
                                       ")");
    }
    return out;
}

PureState apply_decoder(const PureState& state, const DecoderUnitary& decoder) {
    const int n = state.n_sites();
    const int d = decoder.region_size;
    if (d > n) throw InvalidArgument("decoder is larger than the chain");
    const Eigen::Index low = Eigen::Index{1} << (n - d);
    const Eigen::Index high = Eigen::Index{1} << d;
    const Eigen::Map<const CMatrix> split(state.amplitudes().data(), low, high);
    CMatrix decoded = split * decoder.entries.transpose();
    return PureState(n, Eigen::Map<CVector>(decoded.data(), low * high), state.is_normalized());
}

ProtectedCode build_protected_code(const EncodingPair& pair, const PureState& vacuum,
                                   std::span<const SystematicError> errors, const ChainSpec& spec, double gs_tol,
                                   double joint_tol) {
    ProtectedCode code{pair, vacuum, {}, build_logical_vectors(pair, vacuum, errors, spec)};
    code.decoder = build_decoder(code.logical, gs_tol, joint_tol);
    return code;
}

ProtectedCode build_protected_code(const EncodingPair& pair, std::span<const SystematicError> errors,
                                   const ChainSpec& spec, double gs_tol, double joint_tol) {
    return build_protected_code(pair, vacuum_state(pair, spec).state, errors, spec, gs_tol, joint_tol);
}

PureState run_timeline(const PureState& initial, const Evolver& evolver, std::span<const SystematicError> errors) {
    const double tf = evolver.spec().transfer_time();
    PureState state = initial;
    double now = 0.0;
    for (int e : time_order(errors)) {
        const SystematicError& error = errors[static_cast<std::size_t>(e)];
        if (error.time < 0.0 || error.time > tf) throw InvalidArgument("error time outside [0, t_f]");
        state = evolver.evolve(state, error.time - now);
        state = apply_error(state, error).state;
        now = error.time;
    }
    return evolver.evolve(state, tf - now);
}

namespace {

DensityMatrix last_site(const PureState& state) {
    const Site n = state.n_sites();
    const Site region[] = {n};
    return reduced_density(state, region);
}

DensityMatrix undo_mirror_phase(DensityMatrix rho, double phi) {
    const Complex rot = std::polar(1.0, -phi);
    rho.entries(1, 0) *= rot;
    rho.entries(0, 1) *= std::conj(rot);
    return rho;
}

PureState plain_input(const Amplitudes& amps, int n_sites) {
    PureState s = PureState::vacuum(n_sites);
    s.amplitudes()(0) = amps.alpha;
    s.amplitudes()(1) = amps.beta;
    return s;
}

}  // namespace

DensityMatrix baseline_output(const Amplitudes& amps, const Evolver& evolver, std::span<const SystematicError> errors) {
    const PureState out = run_timeline(plain_input(amps, evolver.spec().n_sites()), evolver, errors);
    DensityMatrix rho = last_site(out);
    const double tr = rho.trace();
    if (tr > 0.0) rho.entries /= tr;
    return undo_mirror_phase(std::move(rho), mode_transfer_phase(evolver.spec()));
}

ProtocolReport run_protocol(const Amplitudes& amps, const Evolver& evolver, const ProtectedCode& code,
                            std::span<const SystematicError> errors) {
    if (code.decoder.region_size != code.pair.region_size) {
        throw InvalidArgument("decoder and encoding pair disagree on the region size");
    }
    ProtocolReport report;
    report.region_size = code.pair.region_size;
    report.z = code.decoder.z;
    report.unitarity_residual = code.decoder.unitarity_residual();
    report.gram_cross_norm = code.logical.cross_gram_norm();
    report.gram_mismatch = code.logical.gram_mismatch();

    const PureState input = build_initial_state(amps, code.pair, evolver, code.vacuum);
    const PureState after = run_timeline(input, evolver, errors);
    report.error_norm = after.norm();
    if (!report.annihilated()) {
        const PureState decoded = apply_decoder(after.normalized(), code.decoder);
        const DensityMatrix rho = last_site(decoded);
        report.fidelity = fidelity_to(rho, amps.as_vector());
        report.output_purity = rho.purity();
    }
    report.baseline_fidelity = fidelity_to(baseline_output(amps, evolver, errors), amps.as_vector());
    return report;
}

ProtocolReport run_protocol(const Amplitudes& amps, const ChainSpec& spec, const ProtectedCode& code,
                            std::span<const SystematicError> errors) {
    return run_protocol(amps, Evolver(spec), code, errors);
}

ProtocolReport run_protocol_mixture(const Amplitudes& amps, const Evolver& evolver, const ProtectedCode& code,
                                    std::span<const std::vector<SystematicError>> branches) {
    if (code.decoder.region_size != code.pair.region_size) {
        throw InvalidArgument("decoder and encoding pair disagree on the region size");
    }
    ProtocolReport report;
    report.region_size = code.pair.region_size;
    report.z = code.decoder.z;
    report.unitarity_residual = code.decoder.unitarity_residual();
    report.gram_cross_norm = code.logical.cross_gram_norm();
    report.gram_mismatch = code.logical.gram_mismatch();

    const int n = evolver.spec().n_sites();
    const PureState input = build_initial_state(amps, code.pair, evolver, code.vacuum);
    const PureState plain = plain_input(amps, n);
    CMatrix encoded = CMatrix::Zero(2, 2);
    CMatrix baseline = CMatrix::Zero(2, 2);
    double total = 0.0;
    for (const auto& branch : branches) {
        const PureState after = run_timeline(input, evolver, branch);
        total += after.amplitudes().squaredNorm();
        encoded += last_site(apply_decoder(after, code.decoder)).entries;
        baseline += last_site(run_timeline(plain, evolver, branch)).entries;
    }
    report.error_norm = std::sqrt(total);
    if (!report.annihilated()) {
        const DensityMatrix rho{{n}, encoded / encoded.trace().real()};
        report.fidelity = fidelity_to(rho, amps.as_vector());
        report.output_purity = rho.purity();
    }
    if (baseline.trace().real() > 0.0) {
        const DensityMatrix rho =
            undo_mirror_phase(DensityMatrix{{n}, baseline / baseline.trace().real()}, mode_transfer_phase(evolver.spec()));
        report.baseline_fidelity = fidelity_to(rho, amps.as_vector());
    }
    return report;
}

}  // namespace mirrorchain
