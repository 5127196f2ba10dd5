#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "mirrorchain/encoder.hpp"
#include "mirrorchain/errmodel.hpp"
#include "mirrorchain/fock.hpp"

namespace mirrorchain {

enum class ProbeKind { Vacuum, Filled };

/// Finite-shot Pauli tomography. `shots` counts samples per measurement
/// setting; std::nullopt means exact (no sampling).
struct TomographyOptions {
    std::optional<long> shots;
    std::uint64_t seed = 0;
};

struct ProbeOptions {
    double eigen_tol = 1e-9;   // relative to the largest eigenvalue in the sector
    double min_weight = 1e-13; // post-selection weight below which the span is empty
    TomographyOptions tomography;
};

/// Outcome of one probe run. `span` holds mode coefficients over the local
/// decoding sites: for the vacuum probe column v means sum_j v_j f_j^dag |0>,
/// for the filled probe sum_j v_j f_j |1...1>.
struct ProbeReport {
    ProbeKind kind = ProbeKind::Vacuum;
    int region_size = 0;
    int sector = 0;
    DensityMatrix rho;
    RVector sector_weights;       // diagonal weight of rho per excitation number
    double post_selection_weight = 0.0;
    RVector eigenvalues;          // of the post-selected block, normalized, descending
    CMatrix span;                 // D x r, orthonormal
    double tomography_residual = 0.0;
};

ProbeReport probe_with_vacuum(const ChainSpec& spec, std::span<const SystematicError> errors, int region_size,
                              const ProbeOptions& options = {});
ProbeReport probe_with_filled(const ChainSpec& spec, std::span<const SystematicError> errors, int region_size,
                              const ProbeOptions& options = {});

/// Builds the report from a given reduced state of the decoding region.
ProbeReport analyze_probe(ProbeKind kind, const DensityMatrix& rho, const ProbeOptions& options = {});

/// Epsilon-only constraint rows from both probe spans, duplicates removed.
ConstraintSet spans_to_constraints(const ProbeReport& vacuum, const ProbeReport& filled);

struct TomographyResult {
    DensityMatrix estimate;
    double inversion_residual = 0.0;  // Frobenius distance removed by the PSD projection
};

/// Simulated measurement in every {X,Y,Z}^n setting followed by linear
/// inversion and projection onto the nearest density matrix.
TomographyResult sampled_tomography(const DensityMatrix& truth, const TomographyOptions& options);

/// Nearest (Frobenius) unit-trace positive semidefinite matrix.
CMatrix project_to_density(const CMatrix& hermitian);

double trace_distance(const CMatrix& a, const CMatrix& b);

}  // namespace mirrorchain
