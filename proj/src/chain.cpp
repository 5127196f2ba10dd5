#include "mirrorchain/chain.hpp"

#include <cmath>
#include <numbers>
#include <numeric>
#include <string>

namespace mirrorchain {

ChainSpec::ChainSpec(std::vector<double> couplings, std::vector<double> fields, double transfer_time,
                     CouplingScheme scheme)
    : couplings_(std::move(couplings)),
      fields_(std::move(fields)),
      transfer_time_(transfer_time),
      scheme_(scheme) {
    if (fields_.size() < 2) throw InvalidArgument("chain needs at least 2 sites");
    if (couplings_.size() + 1 != fields_.size()) {
        throw InvalidArgument("expected " + std::to_string(fields_.size() - 1) + " couplings, got " +
                              std::to_string(couplings_.size()));
    }
    for (std::size_t i = 0; i < couplings_.size(); ++i) {
        if (!(couplings_[i] > 0.0) || !std::isfinite(couplings_[i])) {
            throw InvalidArgument("coupling J_" + std::to_string(i + 1) + " must be positive");
        }
    }
    for (double b : fields_) {
        if (!std::isfinite(b)) throw InvalidArgument("fields must be finite");
    }
    if (!(transfer_time_ > 0.0) || !std::isfinite(transfer_time_)) {
        throw InvalidArgument("transfer time must be positive");
    }
}

ChainSpec ChainSpec::with_transfer_phase(double phi) const {
    ChainSpec out = *this;
    out.transfer_phase_ = phi;
    return out;
}

double ChainSpec::vacuum_energy() const { return -std::accumulate(fields_.begin(), fields_.end(), 0.0); }

ChainSpec build_uniform_pst(int n_sites) {
    if (n_sites < 2) throw InvalidArgument("uniform PST chain needs N >= 2");
    std::vector<double> couplings(static_cast<std::size_t>(n_sites - 1));
    for (int n = 1; n < n_sites; ++n) {
        couplings[static_cast<std::size_t>(n - 1)] = std::sqrt(static_cast<double>(n) * (n_sites - n));
    }
    ChainSpec spec(std::move(couplings), std::vector<double>(static_cast<std::size_t>(n_sites), 0.0),
                   std::numbers::pi / 2, CouplingScheme::UniformPst);
    return spec.with_transfer_phase(verify_pst(spec, 1e-10));
}

RMatrix single_particle_hamiltonian(const ChainSpec& spec) {
    const int n = spec.n_sites();
    RMatrix h = RMatrix::Zero(n, n);
    for (int i = 0; i < n; ++i) h(i, i) = 2.0 * spec.fields()[static_cast<std::size_t>(i)];
    for (int i = 0; i + 1 < n; ++i) {
        h(i, i + 1) = spec.couplings()[static_cast<std::size_t>(i)];
        h(i + 1, i) = h(i, i + 1);
    }
    return h;
}

RMatrix single_excitation_hamiltonian(const ChainSpec& spec) {
    RMatrix h = single_particle_hamiltonian(spec);
    h.diagonal().array() += spec.vacuum_energy();
    return h;
}

Propagator::Propagator(const ChainSpec& spec, Frame frame)
    : solver_(frame == Frame::Spin ? single_excitation_hamiltonian(spec) : single_particle_hamiltonian(spec)) {}

BetaMatrix Propagator::at(double t) const { return BetaMatrix{t, solver_.propagator(t)}; }

BetaMatrix propagator(const ChainSpec& spec, double t) { return Propagator(spec).at(t); }

BetaMatrix mode_propagator(const ChainSpec& spec, double t) {
    return Propagator(spec, Propagator::Frame::Fermion).at(t);
}

namespace {

PstCheck mirror_check(const BetaMatrix& beta, int n_sites) {
    PstCheck out;
    const Complex reference = beta(n_sites, 1);
    out.phase = std::arg(reference);
    const Complex target = std::polar(1.0, out.phase);
    for (Site n = 1; n <= n_sites; ++n) {
        const double deviation = std::abs(beta(n_sites - n + 1, n) - target);
        if (deviation > out.worst_deviation) {
            out.worst_deviation = deviation;
            out.worst_site = n;
        }
    }
    // A unit-modulus mirror entry in a unitary row already forces every other
    // entry of that row to vanish, so the mirror column is all we need.
    return out;
}

}  // namespace

PstCheck check_pst(const ChainSpec& spec, double tol) {
    const int n = spec.n_sites();
    const BetaMatrix beta = propagator(spec, spec.transfer_time());
    PstCheck out = mirror_check(beta, n);
    const double reference_modulus = std::abs(beta(n, 1));
    if (reference_modulus < 1.0 - tol) {
        out.worst_deviation = std::max(out.worst_deviation, 1.0 - reference_modulus);
    }
    if (out.worst_deviation >= tol) {
        throw NotPstError("chain does not transfer perfectly: mirror amplitude of site " +
                              std::to_string(out.worst_site) + " deviates by " +
                              std::to_string(out.worst_deviation),
                          out.worst_site, out.worst_deviation);
    }
    return out;
}

double mode_transfer_phase(const ChainSpec& spec) {
    const BetaMatrix beta = mode_propagator(spec, spec.transfer_time());
    return std::arg(beta(spec.n_sites(), 1));
}

}  // namespace mirrorchain
