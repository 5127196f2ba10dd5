#include "mirrorchain/fock.hpp"

#include <algorithm>
#include <bit>
#include <mutex>
#include <string>

namespace mirrorchain {

int popcount(std::uint64_t bits) { return std::popcount(bits); }

PureState::PureState(int n_sites, CVector amplitudes, bool normalized)
    : n_sites_(n_sites), amplitudes_(std::move(amplitudes)), normalized_(normalized) {
    if (n_sites < 1 || n_sites > 24) throw InvalidArgument("state needs 1..24 sites");
    if (static_cast<std::uint64_t>(amplitudes_.size()) != dimension()) {
        throw InvalidArgument("amplitude vector length must be 2^N");
    }
}

PureState PureState::vacuum(int n_sites) { return basis(n_sites, 0); }

PureState PureState::basis(int n_sites, std::uint64_t index) {
    CVector amps = CVector::Zero(Eigen::Index{1} << n_sites);
    amps(static_cast<Eigen::Index>(index)) = 1.0;
    return PureState(n_sites, std::move(amps));
}

PureState PureState::normalized() const {
    const double n = norm();
    if (n == 0.0) throw InvalidArgument("cannot normalize the zero vector");
    return PureState(n_sites_, amplitudes_ / n, true);
}

RVector PureState::sector_weights() const {
    RVector w = RVector::Zero(n_sites_ + 1);
    for (std::uint64_t b = 0; b < dimension(); ++b) w(popcount(b)) += std::norm((*this)[b]);
    return w;
}

PureState PureState::tensor(const PureState& high) const {
    const Eigen::Index low_dim = amplitudes_.size();
    CVector amps(low_dim * high.amplitudes().size());
    for (Eigen::Index h = 0; h < high.amplitudes().size(); ++h) {
        amps.segment(h * low_dim, low_dim) = high.amplitudes()(h) * amplitudes_;
    }
    return PureState(n_sites_ + high.n_sites(), std::move(amps), normalized_ && high.is_normalized());
}

namespace {

void check_site(const PureState& state, Site site) {
    if (site < 1 || site > state.n_sites()) {
        throw InvalidArgument("site " + std::to_string(site) + " outside 1.." + std::to_string(state.n_sites()));
    }
}

}  // namespace

PureState apply_create(const PureState& state, Site site) {
    check_site(state, site);
    const std::uint64_t mask = site_bit(site);
    CVector out = CVector::Zero(state.amplitudes().size());
    for (std::uint64_t b = 0; b < state.dimension(); ++b) {
        if (b & mask) continue;
        const Complex a = state[b];
        if (a == Complex{}) continue;
        out(static_cast<Eigen::Index>(b | mask)) = jw_sign(b, site) * a;
    }
    return PureState(state.n_sites(), std::move(out), false);
}

PureState apply_annihilate(const PureState& state, Site site) {
    check_site(state, site);
    const std::uint64_t mask = site_bit(site);
    CVector out = CVector::Zero(state.amplitudes().size());
    for (std::uint64_t b = 0; b < state.dimension(); ++b) {
        if (!(b & mask)) continue;
        const Complex a = state[b];
        if (a == Complex{}) continue;
        out(static_cast<Eigen::Index>(b ^ mask)) = jw_sign(b, site) * a;
    }
    return PureState(state.n_sites(), std::move(out), false);
}

PureState apply_string(const PureState& state, std::span<const Site> creators, std::span<const Site> annihilators) {
    PureState out = state;
    for (auto it = annihilators.rbegin(); it != annihilators.rend(); ++it) out = apply_annihilate(out, *it);
    for (auto it = creators.rbegin(); it != creators.rend(); ++it) out = apply_create(out, *it);
    out.mark_unnormalized();
    return out;
}

CMatrix creation_matrix(int n_sites, Site site) {
    if (site < 1 || site > n_sites) throw InvalidArgument("site " + std::to_string(site) + " out of range");
    const Eigen::Index dim = Eigen::Index{1} << n_sites;
    const std::uint64_t mask = site_bit(site);
    CMatrix m = CMatrix::Zero(dim, dim);
    for (std::uint64_t b = 0; b < static_cast<std::uint64_t>(dim); ++b) {
        if (b & mask) continue;
        m(static_cast<Eigen::Index>(b | mask), static_cast<Eigen::Index>(b)) = jw_sign(b, site);
    }
    return m;
}

// ---------------------------------------------------------------------------
// Sector evolution

struct Evolver::Impl {
    ChainSpec spec;
    std::vector<std::vector<std::uint64_t>> basis;  // per sector, ascending
    std::vector<int> position;                      // index -> slot within its sector
    mutable std::vector<HermitianExponential<double>> solvers;
    mutable std::unique_ptr<std::once_flag[]> ready;

    explicit Impl(const ChainSpec& s) : spec(s) {
        const int n = spec.n_sites();
        const std::uint64_t dim = std::uint64_t{1} << n;
        basis.resize(static_cast<std::size_t>(n + 1));
        position.resize(dim);
        for (std::uint64_t b = 0; b < dim; ++b) {
            auto& sector = basis[static_cast<std::size_t>(popcount(b))];
            position[b] = static_cast<int>(sector.size());
            sector.push_back(b);
        }
        solvers.resize(static_cast<std::size_t>(n + 1));
        ready = std::make_unique<std::once_flag[]>(static_cast<std::size_t>(n + 1));
    }

    RMatrix hamiltonian(int k) const {
        const auto& states = basis[static_cast<std::size_t>(k)];
        const int n = spec.n_sites();
        const auto size = static_cast<Eigen::Index>(states.size());
        RMatrix h = RMatrix::Zero(size, size);
        for (Eigen::Index i = 0; i < size; ++i) {
            const std::uint64_t b = states[static_cast<std::size_t>(i)];
            double diag = 0.0;
            for (Site s = 1; s <= n; ++s) {
                const double z = (b & site_bit(s)) ? -1.0 : 1.0;
                diag -= spec.fields()[static_cast<std::size_t>(s - 1)] * z;
            }
            h(i, i) = diag;
            for (Site s = 1; s < n; ++s) {
                const std::uint64_t pair = site_bit(s) | site_bit(s + 1);
                const std::uint64_t occupied = b & pair;
                if (occupied == 0 || occupied == pair) continue;
                const std::uint64_t partner = b ^ pair;
                h(i, position[partner]) += spec.couplings()[static_cast<std::size_t>(s - 1)];
            }
        }
        return h;
    }

    const HermitianExponential<double>& solver(int k) const {
        std::call_once(ready[static_cast<std::size_t>(k)],
                       [&] { solvers[static_cast<std::size_t>(k)] = HermitianExponential<double>(hamiltonian(k)); });
        return solvers[static_cast<std::size_t>(k)];
    }
};

Evolver::Evolver(const ChainSpec& spec) : impl_(std::make_shared<const Impl>(spec)) {}

const ChainSpec& Evolver::spec() const { return impl_->spec; }

RMatrix Evolver::sector_hamiltonian(int k) const { return impl_->hamiltonian(k); }

const std::vector<std::uint64_t>& Evolver::sector_basis(int k) const {
    return impl_->basis.at(static_cast<std::size_t>(k));
}

PureState Evolver::evolve(const PureState& state, double duration) const {
    if (state.n_sites() != impl_->spec.n_sites()) throw InvalidArgument("state and chain sizes differ");
    CVector out = CVector::Zero(state.amplitudes().size());
    for (int k = 0; k <= state.n_sites(); ++k) {
        const auto& states = impl_->basis[static_cast<std::size_t>(k)];
        CVector local(static_cast<Eigen::Index>(states.size()));
        bool any = false;
        for (std::size_t i = 0; i < states.size(); ++i) {
            local(static_cast<Eigen::Index>(i)) = state[states[i]];
            any = any || local(static_cast<Eigen::Index>(i)) != Complex{};
        }
        if (!any) continue;
        const CVector evolved = impl_->solver(k).apply(local, duration);
        for (std::size_t i = 0; i < states.size(); ++i) {
            out(static_cast<Eigen::Index>(states[i])) = evolved(static_cast<Eigen::Index>(i));
        }
    }
    return PureState(state.n_sites(), std::move(out), state.is_normalized());
}

PureState evolve(const PureState& state, const ChainSpec& spec, double duration) {
    return Evolver(spec).evolve(state, duration);
}

// ---------------------------------------------------------------------------
// Reduced states

std::vector<Site> site_range(Site first, Site last) {
    std::vector<Site> out;
    for (Site s = first; s <= last; ++s) out.push_back(s);
    return out;
}

DensityMatrix reduced_density(const PureState& state, std::span<const Site> region) {
    if (region.empty()) throw InvalidArgument("reduced_density needs a nonempty region");
    const int n = state.n_sites();
    std::vector<Site> sites(region.begin(), region.end());
    std::uint64_t region_mask = 0;
    for (Site s : sites) {
        if (s < 1 || s > n) throw InvalidArgument("region site " + std::to_string(s) + " out of range");
        if (region_mask & site_bit(s)) throw InvalidArgument("region lists a site twice");
        region_mask |= site_bit(s);
    }
    std::vector<Site> env;
    for (Site s = 1; s <= n; ++s) {
        if (!(region_mask & site_bit(s))) env.push_back(s);
    }

    const Eigen::Index rdim = Eigen::Index{1} << sites.size();
    const Eigen::Index edim = Eigen::Index{1} << env.size();
    CMatrix m = CMatrix::Zero(rdim, edim);
    for (std::uint64_t b = 0; b < state.dimension(); ++b) {
        const Complex a = state[b];
        if (a == Complex{}) continue;
        Eigen::Index r = 0;
        for (std::size_t i = 0; i < sites.size(); ++i) {
            if (b & site_bit(sites[i])) r |= Eigen::Index{1} << i;
        }
        Eigen::Index e = 0;
        for (std::size_t i = 0; i < env.size(); ++i) {
            if (b & site_bit(env[i])) e |= Eigen::Index{1} << i;
        }
        m(r, e) = a;
    }
    return DensityMatrix{std::move(sites), m * m.adjoint()};
}

double fidelity_to(const DensityMatrix& dm, const CVector& target) {
    if (dm.n_sites() != 1) throw InvalidArgument("fidelity_to expects a single-site density matrix");
    if (target.size() != 2) throw InvalidArgument("target must be a single-qubit state");
    const Complex f = target.dot(dm.entries * target);
    return std::clamp(f.real(), 0.0, 1.0);
}

DensityCheck check_density(const DensityMatrix& dm) {
    DensityCheck out;
    out.hermiticity = (dm.entries - dm.entries.adjoint()).cwiseAbs().maxCoeff();
    out.trace_error = std::abs(dm.entries.trace() - Complex{1.0});
    const CMatrix sym = 0.5 * (dm.entries + dm.entries.adjoint());
    Eigen::SelfAdjointEigenSolver<CMatrix> solver(sym, Eigen::EigenvaluesOnly);
    out.min_eigenvalue = solver.eigenvalues().minCoeff();
    return out;
}

}  // namespace mirrorchain
