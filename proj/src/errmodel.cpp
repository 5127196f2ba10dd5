#include "mirrorchain/errmodel.hpp"

#include <algorithm>
#include <cmath>
#include <map>

namespace mirrorchain {

std::set<Site> affected_sites(std::span<const SystematicError> errors) {
    std::set<Site> out;
    for (const auto& e : errors) {
        for (const auto& s : e.strings) {
            out.insert(s.creators.begin(), s.creators.end());
            out.insert(s.annihilators.begin(), s.annihilators.end());
        }
    }
    return out;
}

void validate_error(const SystematicError& error, const ChainSpec& spec) {
    if (error.strings.empty()) throw InvalidArgument("systematic error needs at least one string");
    if (error.time < 0.0 || error.time > spec.transfer_time()) {
        throw InvalidArgument("error time must lie in [0, t_f]");
    }
    for (const auto& s : error.strings) {
        for (const auto* list : {&s.creators, &s.annihilators}) {
            std::set<Site> seen;
            for (Site site : *list) {
                if (site < 1 || site > spec.n_sites()) {
                    throw InvalidArgument("error string touches site " + std::to_string(site) + " outside the chain");
                }
                if (!seen.insert(site).second) {
                    throw InvalidArgument("error string repeats site " + std::to_string(site));
                }
            }
        }
    }
}

SystematicError make_pauli_z_error(Site site, double time) {
    // Z = 1 - 2 a^dag a
    return SystematicError{{ErrorString{1.0, {}, {}}, ErrorString{-2.0, {site}, {site}}},
                           time,
                           "Z_" + std::to_string(site)};
}

SystematicError make_phase_error(Site site, double theta, double time) {
    SystematicError e{{ErrorString{1.0, {}, {}}}, time, "phase_" + std::to_string(site)};
    const Complex w = std::exp(kI * theta) - 1.0;
    if (std::abs(w) > 0.0) e.strings.push_back(ErrorString{w, {site}, {site}});
    return e;
}

SystematicError make_hop_error(std::pair<Site, Site> sites, double theta, double time) {
    const auto [k, l] = sites;
    if (k == l) throw InvalidArgument("hop error needs two distinct sites");
    // On the pair, G = a_k^dag a_l + h.c. is sigma_x on the singly occupied
    // states and zero elsewhere, so exp(-i theta G) = 1 + (cos - 1) P_1 - i sin G
    // with P_1 = n_k + n_l - 2 n_k n_l and n_k n_l = -a_k^dag a_l^dag a_k a_l.
    const double c = std::cos(theta) - 1.0;
    const double s = std::sin(theta);
    SystematicError e{{}, time, "hop_" + std::to_string(k) + "_" + std::to_string(l)};
    e.strings.push_back({1.0, {}, {}});
    if (c != 0.0) {
        e.strings.push_back({c, {k}, {k}});
        e.strings.push_back({c, {l}, {l}});
        e.strings.push_back({2.0 * c, {k, l}, {k, l}});
    }
    if (s != 0.0) {
        e.strings.push_back({-kI * s, {k}, {l}});
        e.strings.push_back({-kI * s, {l}, {k}});
    }
    return e;
}

SystematicError make_majorana_error(Site site, double time) {
    return SystematicError{{ErrorString{1.0, {site}, {}}, ErrorString{1.0, {}, {site}}},
                           time,
                           "majorana_" + std::to_string(site)};
}

void make_bit_flip_error(Site site, double) {
    throw UnsupportedError("X_" + std::to_string(site) +
                           " is not a low-rate fermionic error: its JW string touches every site below it");
}

AppliedError apply_error(const PureState& state, const SystematicError& error) {
    CVector sum = CVector::Zero(state.amplitudes().size());
    for (const auto& s : error.strings) {
        const PureState term = apply_string(state, s.creators, s.annihilators);
        sum += s.weight * term.amplitudes();
    }
    AppliedError out{PureState(state.n_sites(), std::move(sum), false), 0.0};
    out.norm = out.state.norm();
    return out;
}

oracle::DenseOperator dense_error(const SystematicError& error, int n_sites) {
    const Eigen::Index dim = Eigen::Index{1} << n_sites;
    CMatrix m = CMatrix::Zero(dim, dim);
    for (const auto& s : error.strings) {
        m += s.weight * oracle::dense_string(s.creators, s.annihilators, n_sites).entries;
    }
    return oracle::DenseOperator{n_sites, std::move(m)};
}

double trace_preservation_residual(const SystematicError& error) {
    const SystematicError single[] = {error};
    const std::set<Site> sites = affected_sites(single);
    std::map<Site, Site> relabel;
    for (Site s : sites) relabel.emplace(s, static_cast<Site>(relabel.size() + 1));
    SystematicError compact = error;
    for (auto& s : compact.strings) {
        for (auto& c : s.creators) c = relabel.at(c);
        for (auto& a : s.annihilators) a = relabel.at(a);
    }
    const int n = std::max(1, static_cast<int>(sites.size()));
    const CMatrix e = dense_error(compact, n).entries;
    const CMatrix gram = e.adjoint() * e;
    return (gram - CMatrix::Identity(gram.rows(), gram.cols())).cwiseAbs().maxCoeff();
}

bool is_trace_preserving(const SystematicError& error, double tol) {
    return trace_preservation_residual(error) < tol;
}

CVector ModeRestriction::full() const {
    CVector out(complement.size() + decoding.size());
    out << complement, decoding;
    return out;
}

ModeRestriction heisenberg_mode(const ChainSpec& spec, Site site, double time, int region_size) {
    const int n = spec.n_sites();
    if (site < 1 || site > n) throw InvalidArgument("mode site out of range");
    if (time < 0.0 || time > spec.transfer_time()) throw InvalidArgument("mode time must lie in [0, t_f]");
    if (region_size < 2 || region_size > n) throw InvalidArgument("decoding region size must lie in [2, N]");
    const BetaMatrix beta = mode_propagator(spec, time - spec.transfer_time());
    const CVector row = beta.entries.row(site - 1).transpose();
    ModeRestriction out;
    out.site = site;
    out.time = time;
    out.region_size = region_size;
    out.complement = row.head(n - region_size);
    out.decoding = row.tail(region_size);
    return out;
}

}  // namespace mirrorchain
