#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <random>

#include "helpers.hpp"
#include "mirrorchain/decoder.hpp"
#include "mirrorchain/linalg.hpp"
#include "mirrorchain/probe.hpp"

using namespace mirrorchain;
using namespace mirrorchain::testing;

namespace {

CMatrix column(const CVector& v) {
    CMatrix m(v.size(), 1);
    m.col(0) = v.normalized();
    return m;
}

}  // namespace

TEST_CASE("Z error: filled probe recovers the Heisenberg mode, vacuum probe sees nothing") {
    const ChainSpec spec = build_uniform_pst(10);
    const double t = spec.transfer_time() / 3;
    const std::vector<SystematicError> errors{make_pauli_z_error(5, t)};
    const ProbeReport vac = probe_with_vacuum(spec, errors, 3);
    const ProbeReport fil = probe_with_filled(spec, errors, 3);
    // Z acting on the vacuum is the identity: no excitation reaches the region.
    CHECK(vac.post_selection_weight < 1e-13);
    CHECK(vac.span.cols() == 0);
    REQUIRE(fil.span.cols() == 1);
    CHECK(fil.sector == 2);
    const CVector mode = heisenberg_mode(spec, 5, t, 3).decoding;
    CHECK(largest_principal_angle(fil.span, column(mode)) < 1e-6);
}

TEST_CASE("Majorana error: vacuum probe recovers the conjugate mode") {
    const ChainSpec spec = build_uniform_pst(10);
    const double t = 0.4 * spec.transfer_time();
    const std::vector<SystematicError> errors{make_majorana_error(5, t)};
    const ProbeReport vac = probe_with_vacuum(spec, errors, 3);
    REQUIRE(vac.span.cols() == 1);
    const CVector mode = heisenberg_mode(spec, 5, t, 3).decoding;
    CHECK(largest_principal_angle(vac.span, column(mode.conjugate())) < 1e-6);
    const ConstraintSet c = spans_to_constraints(vac, probe_with_filled(spec, errors, 3));
    const CMatrix rows = orthonormal_span(c.epsilon_rows.transpose(), 1e-10);
    const ConstraintSet analytic = assemble_constraints(spec, errors, 3, false);
    CHECK(max_relative_residual(rows, analytic.epsilon_rows.transpose()) < 1e-8);
}

TEST_CASE("probe-derived encoding protects as well as the analytic one") {
    const ChainSpec spec = build_uniform_pst(10);
    const std::vector<SystematicError> errors{make_pauli_z_error(5, spec.transfer_time() / 3)};
    const ConstraintSet c =
        spans_to_constraints(probe_with_vacuum(spec, errors, 3), probe_with_filled(spec, errors, 3));
    const EncodingPair pair = solve_encoding(c);
    const ProtectedCode code = build_protected_code(pair, errors, spec);
    std::mt19937_64 rng(12);
    const Evolver ev(spec);
    for (int trial = 0; trial < 5; ++trial) {
        const CVector ab = random_vector(2, rng);
        CHECK(run_protocol(Amplitudes{ab(0), ab(1)}, ev, code, errors).fidelity >= 1 - 1e-8);
    }
}

TEST_CASE("span dimension is stable across eigenvalue thresholds") {
    const ChainSpec spec = build_uniform_pst(10);
    const double tf = spec.transfer_time();
    const std::vector<std::vector<SystematicError>> cases{
        {make_pauli_z_error(5, tf / 3)},
        {make_phase_error(6, M_PI / 3, tf / 2)},
        {make_phase_error(4, M_PI / 3, tf / 2), make_phase_error(7, M_PI, tf / 2)},
        {make_hop_error({4, 5}, 0.7, 0.6)},
    };
    for (const auto& errors : cases) {
        const int d = affected_count(errors) + 2;
        long previous = -1;
        for (double tol : {1e-10, 1e-9, 1e-8, 1e-7, 1e-6}) {
            ProbeOptions options;
            options.eigen_tol = tol;
            const long dim = probe_with_filled(spec, errors, d, options).span.cols() +
                             probe_with_vacuum(spec, errors, d, options).span.cols();
            if (previous >= 0) CHECK(dim == previous);
            previous = dim;
        }
    }
}

TEST_CASE("no errors: empty spans") {
    const ChainSpec spec = build_uniform_pst(8);
    CHECK(probe_with_vacuum(spec, {}, 2).span.cols() == 0);
    CHECK(probe_with_filled(spec, {}, 2).span.cols() == 0);
}

TEST_CASE("duplicate modes collapse to one constraint") {
    ProbeReport a;
    a.region_size = 3;
    a.kind = ProbeKind::Vacuum;
    a.span = CMatrix::Zero(3, 1);
    a.span(0, 0) = kI;
    ProbeReport b = a;
    b.kind = ProbeKind::Filled;
    b.span(0, 0) = 1.0;  // conj(i) = -i is the same line as 1
    CHECK(spans_to_constraints(a, b).epsilon_rows.rows() == 1);
}

TEST_CASE("projection onto density matrices") {
    CMatrix h(2, 2);
    h << 1.2, 0, 0, -0.2;
    const CMatrix p = project_to_density(h);
    CHECK(std::abs(p.trace() - 1.0) < 1e-14);
    CHECK(std::abs(p(0, 0) - 1.0) < 1e-14);
    CHECK(std::abs(p(1, 1)) < 1e-14);
    CMatrix psd(2, 2);
    psd << 0.7, 0.1, 0.1, 0.3;
    CHECK((project_to_density(psd) - psd).norm() < 1e-14);
}

TEST_CASE("sampled tomography: determinism and accuracy") {
    std::mt19937_64 rng(13);
    const PureState psi = random_state(2, rng);
    const DensityMatrix truth{{1, 2}, psi.amplitudes() * psi.amplitudes().adjoint()};

    const TomographyOptions opts{100000, 77};
    const TomographyResult a = sampled_tomography(truth, opts);
    const TomographyResult b = sampled_tomography(truth, opts);
    CHECK(a.estimate.entries == b.estimate.entries);

    int good = 0;
    const int trials = 20;
    for (int seed = 0; seed < trials; ++seed) {
        const TomographyResult r = sampled_tomography(truth, TomographyOptions{100000, static_cast<std::uint64_t>(seed)});
        if (trace_distance(r.estimate.entries, truth.entries) < 0.02) ++good;
        CHECK(std::abs(r.estimate.trace() - 1.0) < 1e-12);
    }
    CHECK(good >= 19);

    const TomographyResult exact = sampled_tomography(truth, TomographyOptions{});
    CHECK(exact.estimate.entries == truth.entries);
}

TEST_CASE("trace distance of orthogonal pure states is one") {
    CMatrix a = CMatrix::Zero(2, 2), b = CMatrix::Zero(2, 2);
    a(0, 0) = 1;
    b(1, 1) = 1;
    CHECK(trace_distance(a, b) == doctest::Approx(1.0));
}
