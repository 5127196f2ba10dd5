#include "mirrorchain/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace mirrorchain {

GramSchmidtResult gram_schmidt(const CMatrix& vectors, double tol) {
    const Eigen::Index dim = vectors.rows();
    const Eigen::Index count = vectors.cols();

    GramSchmidtResult out;
    out.basis.resize(dim, 0);
    out.coefficients.resize(count, 0);

    double largest = 0.0;
    for (Eigen::Index j = 0; j < count; ++j) largest = std::max(largest, vectors.col(j).norm());
    const double cutoff = tol * largest;

    std::vector<CVector> basis;
    std::vector<CVector> coeffs;
    for (Eigen::Index j = 0; j < count; ++j) {
        CVector u = vectors.col(j);
        CVector c = CVector::Zero(count);
        c(j) = 1.0;
        for (int pass = 0; pass < 2; ++pass) {
            for (std::size_t s = 0; s < basis.size(); ++s) {
                const Complex h = basis[s].dot(u);
                u -= h * basis[s];
                c -= h * coeffs[s];
            }
        }
        const double norm = u.norm();
        if (largest == 0.0 || norm <= cutoff) {
            out.dropped.push_back(static_cast<int>(j));
            continue;
        }
        basis.push_back(u / norm);
        coeffs.push_back(c / norm);
        out.retained.push_back(static_cast<int>(j));
    }

    out.basis.resize(dim, static_cast<Eigen::Index>(basis.size()));
    out.coefficients.resize(count, static_cast<Eigen::Index>(basis.size()));
    for (std::size_t s = 0; s < basis.size(); ++s) {
        out.basis.col(static_cast<Eigen::Index>(s)) = basis[s];
        out.coefficients.col(static_cast<Eigen::Index>(s)) = coeffs[s];
    }
    return out;
}

CMatrix orthonormal_completion(const CMatrix& partial) {
    const Eigen::Index dim = partial.rows();
    std::vector<CVector> basis;
    basis.reserve(static_cast<std::size_t>(dim));
    for (Eigen::Index c = 0; c < partial.cols(); ++c) basis.emplace_back(partial.col(c));

    std::vector<CVector> added;
    for (Eigen::Index e = 0; e < dim && static_cast<Eigen::Index>(basis.size()) < dim; ++e) {
        CVector u = CVector::Unit(dim, e);
        for (int pass = 0; pass < 2; ++pass) {
            for (const auto& b : basis) u -= b.dot(u) * b;
        }
        const double norm = u.norm();
        // A fresh unit vector keeps at least 1/sqrt(dim) of its norm against
        // some basis direction; anything far below that is dependent.
        if (norm < 1e-6) continue;
        u /= norm;
        basis.push_back(u);
        added.push_back(u);
    }

    CMatrix out(dim, static_cast<Eigen::Index>(added.size()));
    for (std::size_t i = 0; i < added.size(); ++i) out.col(static_cast<Eigen::Index>(i)) = added[i];
    return out;
}

RVector principal_cosines(const CMatrix& a, const CMatrix& b) {
    if (a.cols() == 0 || b.cols() == 0) return RVector{};
    const CMatrix overlap = a.adjoint() * b;
    Eigen::JacobiSVD<CMatrix> svd(overlap);
    RVector s = svd.singularValues();
    for (Eigen::Index i = 0; i < s.size(); ++i) s(i) = std::clamp(s(i), 0.0, 1.0);
    return s;
}

double largest_principal_angle(const CMatrix& a, const CMatrix& b) {
    if (a.cols() != b.cols()) return std::numbers::pi / 2;
    if (a.cols() == 0) return 0.0;
    // Sines come from the part of b outside span(a); this stays accurate for
    // tiny angles where 1 - cos^2 cancels.
    const CMatrix outside = b - a * (a.adjoint() * b);
    Eigen::JacobiSVD<CMatrix> svd(outside);
    return std::asin(std::clamp(svd.singularValues()(0), 0.0, 1.0));
}

CMatrix orthonormal_span(const CMatrix& a, double rel_tol) {
    if (a.cols() == 0) return CMatrix(a.rows(), 0);
    Eigen::JacobiSVD<CMatrix> svd(a, Eigen::ComputeThinU);
    const auto& sv = svd.singularValues();
    if (sv.size() == 0 || sv(0) == 0.0) return CMatrix(a.rows(), 0);
    Eigen::Index rank = 0;
    while (rank < sv.size() && sv(rank) > rel_tol * sv(0)) ++rank;
    return svd.matrixU().leftCols(rank);
}

double max_relative_residual(const CMatrix& basis, const CMatrix& vectors) {
    double worst = 0.0;
    for (Eigen::Index c = 0; c < vectors.cols(); ++c) {
        const double norm = vectors.col(c).norm();
        if (norm == 0.0) continue;
        CVector residual = vectors.col(c);
        if (basis.cols() > 0) residual -= basis * (basis.adjoint() * vectors.col(c));
        worst = std::max(worst, residual.norm() / norm);
    }
    return worst;
}

}  // namespace mirrorchain
