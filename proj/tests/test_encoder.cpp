#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <random>

#include "helpers.hpp"
#include "mirrorchain/encoder.hpp"

using namespace mirrorchain;
using namespace mirrorchain::testing;

namespace {

// Region operators rebuilt from dense JW matrices on D sites.
CMatrix region_mode(const CVector& coeffs, int d) {
    CMatrix out = CMatrix::Zero(Eigen::Index{1} << d, Eigen::Index{1} << d);
    for (int j = 1; j <= d; ++j) out += coeffs(j - 1) * dense_annihilator(d, j);
    return out;
}

CMatrix region_encoded_creation(const EncodingMode& m, int d, double phi) {
    CMatrix out = CMatrix::Zero(Eigen::Index{1} << d, Eigen::Index{1} << d);
    for (int i = 1; i <= d; ++i) {
        out += std::exp(kI * phi) * m.epsilon(i - 1) * dense_creator(d, d - i + 1);
        out += std::exp(-kI * phi) * m.eta(i - 1) * dense_annihilator(d, d - i + 1);
    }
    return out;
}

CMatrix anticommutator(const CMatrix& a, const CMatrix& b) { return a * b + b * a; }

}  // namespace

TEST_CASE("Z error at site 5 on N = 10: constraints are mirrored decoding coefficients") {
    const ChainSpec spec = build_uniform_pst(10);
    const std::vector<SystematicError> errors{make_pauli_z_error(5, spec.transfer_time() / 3)};
    const ConstraintSet c = assemble_constraints(spec, errors, 3, false);
    const ModeRestriction m = heisenberg_mode(spec, 5, spec.transfer_time() / 3, 3);
    REQUIRE(c.epsilon_rows.rows() == 1);
    CHECK(c.eta_rows.rows() == 0);
    for (int i = 0; i < 3; ++i) CHECK(std::abs(c.epsilon_rows(0, i) - m.decoding(2 - i)) < 1e-14);
}

TEST_CASE("solved pair anticommutes with the error modes as dense operators") {
    const ChainSpec spec = build_uniform_pst(10);
    const double t = spec.transfer_time() / 3;
    const std::vector<SystematicError> errors{make_pauli_z_error(5, t)};
    const EncodingPair pair = solve_encoding(assemble_constraints(spec, errors, 3, false));
    CHECK_FALSE(pair.has_eta(0.0));
    const PairResiduals r = pair_residuals(pair);
    CHECK(r.normalization < 1e-12);
    CHECK(r.isotropy < 1e-12);

    const double phi = mode_transfer_phase(spec);
    const CMatrix f = region_mode(heisenberg_mode(spec, 5, t, 3).decoding, 3);
    for (int a = 0; a < 2; ++a) {
        const CMatrix q = region_encoded_creation(pair.mode(a), 3, phi);
        CHECK(max_abs(anticommutator(q, f)) < 1e-10);
        CHECK(max_abs(anticommutator(q, f.adjoint())) < 1e-10);
        CHECK((q - DecodingRegion(spec, 3).encoded_creation(pair.mode(a))).norm() < 1e-13);
    }
    const CMatrix q0 = region_encoded_creation(pair.q0, 3, phi);
    const CMatrix q1 = region_encoded_creation(pair.q1, 3, phi);
    CHECK(max_abs(anticommutator(q0, q1.adjoint())) < 1e-12);
    CHECK(max_abs(anticommutator(q0, q1)) < 1e-12);
}

TEST_CASE("transfer maps the encoding mode onto its mirror image") {
    const int n = 7;
    const ChainSpec spec = build_uniform_pst(n);
    const EncodingPair pair = solve_encoding(ConstraintSet::empty(3));
    const CMatrix u = oracle::dense_unitary(oracle::dense_hamiltonian(spec), spec.transfer_time());
    const double phi = mode_transfer_phase(spec);
    for (int a = 0; a < 2; ++a) {
        CMatrix q = CMatrix::Zero(u.rows(), u.cols()), mirrored = q;
        for (int i = 1; i <= 3; ++i) {
            q += pair.mode(a).epsilon(i - 1) * dense_creator(n, i);
            mirrored += std::exp(kI * phi) * pair.mode(a).epsilon(i - 1) * dense_creator(n, n - i + 1);
        }
        CHECK(max_abs(u * q * u.adjoint() - mirrored) < 1e-11);
    }
}

TEST_CASE("a region too small for the error is reported") {
    const ChainSpec spec = build_uniform_pst(10);
    const std::vector<SystematicError> errors{make_pauli_z_error(5, 0.4)};
    const ConstraintSet c = assemble_constraints(spec, errors, 2, false);
    CHECK_THROWS_AS(solve_encoding(c), InsufficientRegion);
    try {
        solve_encoding(c);
    } catch (const InsufficientRegion& e) {
        CHECK(e.region_size() == 2);
        CHECK(e.null_dimension() == 1);
    }
}

TEST_CASE("automatic sizing starts at the affected count plus two") {
    const ChainSpec spec = build_uniform_pst(10);
    const std::vector<SystematicError> errors{make_phase_error(4, M_PI / 3, 0.5), make_phase_error(7, M_PI, 0.5)};
    const SizedEncoding s = solve_auto(spec, errors, {}, 5);
    CHECK(s.pair.region_size == 4);
    CHECK(s.attempts == std::vector<int>{4});
    CHECK(constraint_residual(s.constraints, s.pair) < 1e-10);

    const std::vector<SystematicError> crowded{make_pauli_z_error(2, 0.3), make_pauli_z_error(3, 0.3),
                                               make_pauli_z_error(4, 0.3), make_pauli_z_error(5, 0.3)};
    CHECK_THROWS_AS(solve_auto(spec, crowded, {}, 5), InsufficientRegion);
}

TEST_CASE("eta-allowed solutions are isotropic orthonormal pairs") {
    const ChainSpec spec = build_uniform_pst(10);
    const std::vector<SystematicError> errors{make_hop_error({4, 5}, 0.7, 0.6)};
    const ConstraintSet c = assemble_constraints(spec, errors, 4, true);
    const EncodingPair pair = solve_encoding(c, SolveOptions{true, 1e-10});
    const PairResiduals r = pair_residuals(pair);
    CHECK(r.normalization < 1e-10);
    CHECK(r.isotropy < 1e-10);
    CHECK(constraint_residual(c, pair) < 1e-9);
    const double phi = mode_transfer_phase(spec);
    const CMatrix q0 = region_encoded_creation(pair.q0, 4, phi);
    const CMatrix q1 = region_encoded_creation(pair.q1, 4, phi);
    const CMatrix id = CMatrix::Identity(16, 16);
    CHECK(max_abs(anticommutator(q0, q0.adjoint()) - id) < 1e-10);
    CHECK(max_abs(anticommutator(q0, q1.adjoint())) < 1e-10);
    CHECK(max_abs(anticommutator(q0, q1)) < 1e-10);
    CHECK(max_abs(anticommutator(q0, q0)) < 1e-10);
}

TEST_CASE("vacuum kernel has dimension 2^(D-2)") {
    const ChainSpec spec = build_uniform_pst(10);
    for (int d = 2; d <= 5; ++d) {
        const EncodingPair pair = solve_encoding(ConstraintSet::empty(d));
        const VacuumResult v = vacuum_state(pair, spec);
        CHECK(v.kernel_dimension == (1 << (d - 2)));
        const DecodingRegion region(spec, d);
        for (int a = 0; a < 2; ++a) {
            const CMatrix q = region.encoded_creation(pair.mode(a));
            CHECK((q.adjoint() * v.state.amplitudes()).norm() < 1e-12);
        }
    }
}

TEST_CASE("initial state is normalized and carries the requested amplitudes") {
    const ChainSpec spec = build_uniform_pst(8);
    const std::vector<SystematicError> errors{make_pauli_z_error(4, 0.5)};
    const EncodingPair pair = solve_encoding(assemble_constraints(spec, errors, 3, false));
    const Evolver ev(spec);
    const VacuumResult vac = vacuum_state(pair, spec);
    const Amplitudes amps{Complex(0.6, 0.0), Complex(0.0, 0.8)};
    const PureState psi = build_initial_state(amps, pair, ev, vac.state);
    CHECK(psi.norm() == doctest::Approx(1.0).epsilon(1e-12));
    // Q_0 psi = alpha psi_0 and Q_1 psi = beta psi_0 with orthonormal modes.
    const PureState a0 = apply_encoding_annihilation(psi, pair.q0);
    const PureState a1 = apply_encoding_annihilation(psi, pair.q1);
    CHECK(a0.norm() == doctest::Approx(0.6).epsilon(1e-12));
    CHECK(a1.norm() == doctest::Approx(0.8).epsilon(1e-12));

    std::mt19937_64 rng(3);
    const PureState complement = random_state(5, rng);
    const PureState other = build_initial_state(amps, pair, ev, vac.state, complement);
    CHECK(other.norm() == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("mirror branch signs") {
    for (int w = 0; w <= 8; ++w) {
        const double expect = std::pow(-1.0, w + w * (w - 1) / 2);
        CHECK(mirror_branch_sign(w) == expect);
    }
}

TEST_CASE("two-qubit mirror encoding transfers with an arbitrary interior") {
    std::mt19937_64 rng(8);
    const ChainSpec spec = build_uniform_pst(7);
    for (int trial = 0; trial < 5; ++trial) {
        const PureState interior = random_state(5, rng);
        const CVector ab = random_vector(2, rng);
        const MirrorTransfer m = mirror_two_qubit_encode(Amplitudes{ab(0), ab(1)}, spec, interior);
        CHECK(m.fidelity > 1 - 1e-10);
        CHECK(m.separability < 1e-10);
        CHECK(m.prediction_deviation < 1e-10);
    }
}
