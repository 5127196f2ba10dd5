#pragma once

#include <vector>

#include <Eigen/Eigenvalues>
#include <Eigen/SVD>

#include "mirrorchain/types.hpp"

namespace mirrorchain {

/// Eigensystem of a Hermitian matrix, kept around so exp(-iHt) can be
/// evaluated cheaply for many t.
template <typename Scalar>
class HermitianExponential {
public:
    HermitianExponential() = default;

    template <typename Derived>
    explicit HermitianExponential(const Eigen::MatrixBase<Derived>& hermitian) {
        Eigen::SelfAdjointEigenSolver<Matrix<Scalar>> solver(hermitian.eval());
        energies_ = solver.eigenvalues();
        modes_ = solver.eigenvectors().template cast<Complex>();
    }

    Eigen::Index size() const { return energies_.size(); }
    const RVector& energies() const { return energies_; }
    const CMatrix& modes() const { return modes_; }

    /// exp(-i H t)
    CMatrix propagator(double t) const {
        const CVector phases = (-kI * t * energies_.template cast<Complex>()).array().exp();
        return modes_ * phases.asDiagonal() * modes_.adjoint();
    }

    /// exp(-i H t) v without forming the full matrix.
    template <typename Derived>
    CVector apply(const Eigen::MatrixBase<Derived>& v, double t) const {
        const CVector phases = (-kI * t * energies_.template cast<Complex>()).array().exp();
        CVector coords = modes_.adjoint() * v;
        coords.array() *= phases.array();
        return modes_ * coords;
    }

private:
    RVector energies_;
    CMatrix modes_;
};

/// Orthonormal basis of the right null space of `a`: singular values below
/// rel_tol * sigma_max count as zero (absolute rel_tol when a is all zeros).
template <typename Derived>
Matrix<typename Derived::Scalar> null_space(const Eigen::MatrixBase<Derived>& a, double rel_tol) {
    using Scalar = typename Derived::Scalar;
    const Eigen::Index cols = a.cols();
    if (a.rows() == 0) return Matrix<Scalar>::Identity(cols, cols);
    Eigen::JacobiSVD<Matrix<Scalar>> svd(a.eval(), Eigen::ComputeFullV);
    const auto& sv = svd.singularValues();
    const double largest = sv.size() > 0 ? sv(0) : 0.0;
    const double cutoff = largest > 0.0 ? rel_tol * largest : rel_tol;
    Eigen::Index rank = 0;
    while (rank < sv.size() && sv(rank) > cutoff) ++rank;
    return svd.matrixV().rightCols(cols - rank);
}

template <typename Derived>
Eigen::Index numerical_rank(const Eigen::MatrixBase<Derived>& a, double rel_tol) {
    return a.cols() - null_space(a, rel_tol).cols();
}

/// Result of a Gram-Schmidt pass. `basis = inputs * coefficients`, so the same
/// elimination can be replayed on a second family of vectors.
struct GramSchmidtResult {
    CMatrix basis;
    CMatrix coefficients;
    std::vector<int> retained;  // input column that produced each basis vector
    std::vector<int> dropped;   // inputs judged dependent
};

/// Modified Gram-Schmidt with one re-orthogonalization pass. A vector whose
/// residual norm falls below tol * (largest input norm) is dropped.
GramSchmidtResult gram_schmidt(const CMatrix& vectors, double tol);

/// Replays the recorded elimination on another family of vectors.
inline CMatrix replay_gram_schmidt(const GramSchmidtResult& record, const CMatrix& vectors) {
    return vectors * record.coefficients;
}

/// Extends the orthonormal columns of `partial` to a full orthonormal basis by
/// sweeping the computational basis in index order. The returned matrix holds
/// only the new columns.
CMatrix orthonormal_completion(const CMatrix& partial);

/// Cosines of the principal angles between the column spans of a and b
/// (both assumed orthonormal), in descending order.
RVector principal_cosines(const CMatrix& a, const CMatrix& b);

/// Largest principal angle between the spans; pi/2 if dimensions differ.
double largest_principal_angle(const CMatrix& a, const CMatrix& b);

/// Orthonormal basis of the column span of `a` via SVD thresholding.
CMatrix orthonormal_span(const CMatrix& a, double rel_tol);

/// Distance of each column of `vectors` from span(basis), relative to the
/// column norm. Basis must be orthonormal.
double max_relative_residual(const CMatrix& basis, const CMatrix& vectors);

}  // namespace mirrorchain
