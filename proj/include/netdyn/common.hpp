#pragma once

#include <cmath>
#include <complex>
#include <cstdint>
#include <stdexcept>
#include <string>

#include <Eigen/Dense>
#include <Eigen/Sparse>

namespace netdyn {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;
using SpMat = Eigen::SparseMatrix<double>;
using AdjMat = Eigen::MatrixXi;
using Complex = std::complex<double>;

inline constexpr double kTwoPi = 6.283185307179586476925286766559;

/// Thrown when an algorithm fails numerically (non-finite state, singular
/// system, non-converging iteration). Invalid arguments use
/// std::invalid_argument instead.
struct NumericalError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

inline void require(bool cond, const std::string& msg) {
    if (!cond) throw std::invalid_argument(msg);
}

/// Derive an independent stream seed from a master seed. splitmix64
/// finalizer over a golden-ratio-stepped state, so consecutive stream ids
/// give well-separated generator states.
inline std::uint64_t derive_seed(std::uint64_t master, std::uint64_t stream) {
    std::uint64_t z = master + 0x9E3779B97F4A7C15ULL * (stream + 1);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

/// Reduce a phase angle into [0, 2*pi).
inline double wrap_phase(double theta) {
    double w = std::fmod(theta, kTwoPi);
    return w < 0.0 ? w + kTwoPi : w;
}

}  // namespace netdyn
