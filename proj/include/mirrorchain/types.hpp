#pragma once

#include <complex>
#include <cstdint>
#include <stdexcept>
#include <string>

#include <Eigen/Dense>

namespace mirrorchain {

using Complex = std::complex<double>;

template <typename Scalar>
using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;
template <typename Scalar>
using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;

using CVector = Vector<Complex>;
using CMatrix = Matrix<Complex>;
using RVector = Vector<double>;
using RMatrix = Matrix<double>;

/// Sites are 1-based everywhere in the public API. Site n lives on bit n-1 of a
/// basis index, so site 1 is the least-significant bit.
using Site = int;

inline constexpr std::uint64_t site_bit(Site site) { return std::uint64_t{1} << (site - 1); }

inline constexpr Complex kI{0.0, 1.0};

// Error taxonomy. Everything derives from std::runtime_error or
// std::invalid_argument so callers can catch broadly.

class InvalidArgument : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

class ResourceLimit : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class UnsupportedError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class NotPstError : public std::runtime_error {
public:
    NotPstError(const std::string& what, int worst_site, double deviation)
        : std::runtime_error(what), worst_site_(worst_site), deviation_(deviation) {}
    int worst_site() const noexcept { return worst_site_; }
    double deviation() const noexcept { return deviation_; }

private:
    int worst_site_;
    double deviation_;
};

class InsufficientRegion : public std::runtime_error {
public:
    InsufficientRegion(const std::string& what, int region_size, int null_dimension)
        : std::runtime_error(what), region_size_(region_size), null_dimension_(null_dimension) {}
    int region_size() const noexcept { return region_size_; }
    int null_dimension() const noexcept { return null_dimension_; }

private:
    int region_size_;
    int null_dimension_;
};

class InconsistentPair : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class DecoderConstructionError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

}  // namespace mirrorchain
