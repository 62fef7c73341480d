#pragma once

#include <algorithm>
#include <random>

#include <Eigen/Eigenvalues>

#include "netdyn/common.hpp"

namespace netdyn {

/// Largest eigenvalue magnitude of a dense matrix (full eigensolve).
inline double dense_spectral_radius(const Mat& a) {
    require(a.rows() == a.cols(), "dense_spectral_radius: matrix must be square");
    if (a.rows() == 0) return 0.0;
    Eigen::EigenSolver<Mat> es(a, /*computeEigenvectors=*/false);
    return es.eigenvalues().cwiseAbs().maxCoeff();
}

namespace detail {

// One Arnoldi factorization of length m starting from q. Returns the Ritz
// value of largest magnitude, its Ritz vector mapped back to R^n (real +
// imaginary part summed, which stays inside the dominant invariant subspace
// for conjugate pairs), and whether the Krylov space became invariant.
struct ArnoldiResult {
    double rho = 0.0;
    Vec restart;
    bool invariant = false;
};

inline ArnoldiResult arnoldi_dominant(const SpMat& a, const Vec& q, int m) {
    const auto n = a.rows();
    Mat v(n, m + 1);
    Mat h = Mat::Zero(m + 1, m);
    v.col(0) = q / q.norm();

    int m_eff = m;
    bool invariant = false;
    for (int j = 0; j < m; ++j) {
        Vec w = a * v.col(j);
        for (int i = 0; i <= j; ++i) {
            h(i, j) = v.col(i).dot(w);
            w -= h(i, j) * v.col(i);
        }
        // second Gram-Schmidt pass; plain MGS loses orthogonality for
        // clustered spectra and the re-projection is cheap at these m
        for (int i = 0; i <= j; ++i) {
            const double c = v.col(i).dot(w);
            h(i, j) += c;
            w -= c * v.col(i);
        }
        h(j + 1, j) = w.norm();
        if (h(j + 1, j) < 1e-14 * std::max(1.0, h.cwiseAbs().maxCoeff())) {
            m_eff = j + 1;
            invariant = true;
            break;
        }
        v.col(j + 1) = w / h(j + 1, j);
    }

    Eigen::EigenSolver<Mat> es(h.topLeftCorner(m_eff, m_eff));
    Eigen::Index k;
    es.eigenvalues().cwiseAbs().maxCoeff(&k);

    ArnoldiResult out;
    out.rho = std::abs(es.eigenvalues()(k));
    out.invariant = invariant;
    Eigen::VectorXcd y = es.eigenvectors().col(k);
    Vec dir = v.leftCols(m_eff) * y.real() + v.leftCols(m_eff) * y.imag();
    if (dir.norm() < 1e-300) dir = v.col(0);
    out.restart = dir;
    return out;
}

}  // namespace detail

/// Spectral radius of a sparse matrix via restarted Arnoldi iteration.
/// Dominant eigenvalues of real matrices may form complex conjugate pairs,
/// which plain power iteration cannot resolve; the Arnoldi Ritz values
/// handle that case. Falls back to a dense solve for small matrices.
inline double spectral_radius(const SpMat& a, double tol = 1e-10,
                              int subspace_dim = 64, int max_restarts = 400) {
    require(a.rows() == a.cols(), "spectral_radius: matrix must be square");
    const auto n = a.rows();
    if (n == 0) return 0.0;
    if (a.nonZeros() == 0) return 0.0;
    if (n <= 512) return dense_spectral_radius(Mat(a));

    const int m = static_cast<int>(std::min<Eigen::Index>(subspace_dim, n));
    std::mt19937_64 rng(0x5eedu);
    std::normal_distribution<double> gauss(0.0, 1.0);
    Vec q(n);
    for (Eigen::Index i = 0; i < n; ++i) q(i) = gauss(rng);

    double prev = -1.0;
    int stable = 0;
    for (int r = 0; r < max_restarts; ++r) {
        auto res = detail::arnoldi_dominant(a, q, m);
        if (res.invariant) return res.rho;
        if (prev >= 0.0 && std::abs(res.rho - prev) <= tol * std::max(res.rho, 1e-300)) {
            if (++stable >= 2) return res.rho;
        } else {
            stable = 0;
        }
        prev = res.rho;
        q = res.restart;
    }
    throw NumericalError("spectral_radius: Arnoldi iteration did not converge");
}

/// Solve W (G + beta I) = C for W, where G is symmetric positive
/// semi-definite (the state Gram matrix) and C collects target/state
/// cross-products. This is the ridge-regression readout solution
/// W = C (G + beta I)^-1.
///
/// With beta = 0 a singular G is diagnosed and reported; any positive
/// beta makes the system positive definite.
inline Mat ridge_solve(const Mat& g, const Mat& c, double beta) {
    require(g.rows() == g.cols(), "ridge_solve: G must be square");
    require(c.cols() == g.rows(), "ridge_solve: C column count must match G");
    require(beta >= 0.0, "ridge_solve: beta must be nonnegative");

    Mat reg = g;
    reg.diagonal().array() += beta;
    Eigen::LDLT<Mat> ldlt(reg);
    Mat w = ldlt.solve(c.transpose()).transpose();

    if (!w.allFinite()) {
        throw NumericalError(
            "ridge_solve: normal matrix is singular; set ridge_param > 0");
    }
    if (beta == 0.0) {
        const double cn = std::max(c.norm(), 1e-300);
        if ((w * reg - c).norm() > 1e-6 * cn) {
            throw NumericalError(
                "ridge_solve: normal matrix is singular; set ridge_param > 0");
        }
    }
    return w;
}

/// Ridge training on explicitly collected state/target matrices:
/// W_out = U R^T (R R^T + beta I)^-1 with states R (n_state x T) and
/// targets U (n_out x T) stacked column-wise.
inline Mat train_ridge(const Mat& states, const Mat& targets, double beta) {
    require(states.cols() == targets.cols(),
            "train_ridge: states and targets must have equal sample counts");
    require(states.cols() >= 1, "train_ridge: at least one sample required");
    Mat g = states * states.transpose();
    Mat c = targets * states.transpose();
    return ridge_solve(g, c, beta);
}

/// Streaming accumulator for the ridge normal equations. Buffers samples
/// into chunks so the Gram update runs as a matrix product instead of T
/// rank-1 updates; memory stays O(n_state^2) independent of series length.
class RidgeAccumulator {
  public:
    RidgeAccumulator(int n_state, int n_target, int chunk = 256)
        : g_(Mat::Zero(n_state, n_state)),
          c_(Mat::Zero(n_target, n_state)),
          sbuf_(n_state, chunk),
          tbuf_(n_target, chunk) {}

    void add(const Vec& state, const Vec& target) {
        sbuf_.col(fill_) = state;
        tbuf_.col(fill_) = target;
        if (++fill_ == sbuf_.cols()) flush();
        ++count_;
    }

    void flush() {
        if (fill_ == 0) return;
        auto s = sbuf_.leftCols(fill_);
        g_.selfadjointView<Eigen::Lower>().rankUpdate(s);
        c_.noalias() += tbuf_.leftCols(fill_) * s.transpose();
        fill_ = 0;
    }

    long long count() const { return count_; }

    Mat solve(double beta) {
        flush();
        require(count_ >= 1, "RidgeAccumulator: no samples accumulated");
        Mat g = g_.selfadjointView<Eigen::Lower>();
        return ridge_solve(g, c_, beta);
    }

  private:
    Mat g_, c_;
    Mat sbuf_, tbuf_;
    Eigen::Index fill_ = 0;
    long long count_ = 0;
};

}  // namespace netdyn
