#pragma once

#include <functional>
#include <limits>
#include <unordered_map>
#include <vector>

#include "netdyn/common.hpp"
#include "netdyn/dynamics.hpp"
#include "netdyn/metrics.hpp"
#include "netdyn/parallel.hpp"
#include "netdyn/thread_pool.hpp"

namespace netdyn {

struct TEConfig {
    enum class Transform { PhaseBins, SinBins };

    int history_len = 1;  ///< L, past samples conditioned on
    int n_bins = 8;       ///< discretization alphabet size
    Transform transform = Transform::PhaseBins;

    void validate() const {
        require(history_len >= 1, "TEConfig: history_len must be >= 1");
        require(n_bins >= 2, "TEConfig: n_bins must be >= 2");
    }
};

namespace detail {

// Map a series to bin symbols in [0, n_bins). PhaseBins wraps values mod
// 2*pi into equal-width bins; SinBins bins sin(x) over [-1, 1].
inline std::vector<int> discretize(const Vec& series, const TEConfig& cfg) {
    std::vector<int> out(series.size());
    const int b = cfg.n_bins;
    for (Eigen::Index k = 0; k < series.size(); ++k) {
        double v;
        if (cfg.transform == TEConfig::Transform::PhaseBins) {
            v = wrap_phase(series(k)) / kTwoPi;
        } else {
            v = (std::sin(series(k)) + 1.0) / 2.0;
        }
        int bin = static_cast<int>(v * b);
        out[k] = std::min(std::max(bin, 0), b - 1);
    }
    return out;
}

// Plug-in conditional mutual information I(Y_t; X_past | Y_past) in bits,
// from joint histograms over (y_t, y_past, x_past) tuples. Past tuples are
// encoded radix-B; counts go through hash maps so memory scales with the
// number of occupied cells rather than B^(2L+1).
inline double te_from_symbols(const std::vector<int>& x, const std::vector<int>& y,
                              const TEConfig& cfg) {
    const int l = cfg.history_len;
    const int b = cfg.n_bins;
    const auto t_len = static_cast<long long>(y.size());
    const long long n = t_len - l;
    require(n >= 1, "transfer_entropy: series too short for the history length");

    std::uint64_t pow_l = 1;
    for (int k = 0; k < l; ++k) pow_l *= static_cast<std::uint64_t>(b);

    std::unordered_map<std::uint64_t, int> joint;   // (y_t, y_past, x_past)
    std::unordered_map<std::uint64_t, int> yy;      // (y_t, y_past)
    std::unordered_map<std::uint64_t, int> yx;      // (y_past, x_past)
    std::unordered_map<std::uint64_t, int> yp;      // (y_past)
    joint.reserve(static_cast<std::size_t>(std::min<long long>(n, 1 << 14)));

    for (long long t = l; t < t_len; ++t) {
        std::uint64_t xp = 0, ypast = 0;
        for (int k = 1; k <= l; ++k) {
            xp = xp * b + x[t - k];
            ypast = ypast * b + y[t - k];
        }
        const std::uint64_t key_yy = y[t] * pow_l + ypast;
        ++joint[key_yy * pow_l + xp];
        ++yy[key_yy];
        ++yx[ypast * pow_l + xp];
        ++yp[ypast];
    }

    const double dn = static_cast<double>(n);
    double te = 0.0;
    for (const auto& [key, c_joint] : joint) {
        const std::uint64_t key_yy = key / pow_l;
        const std::uint64_t xp = key % pow_l;
        const std::uint64_t ypast = key_yy % pow_l;
        const int c_yy = yy.at(key_yy);
        const int c_yx = yx.at(ypast * pow_l + xp);
        const int c_yp = yp.at(ypast);
        const double p = c_joint / dn;
        te += p * std::log2((static_cast<double>(c_joint) * c_yp) /
                            (static_cast<double>(c_yy) * c_yx));
    }
    return std::max(0.0, te);  // clamp roundoff below the exact >= 0 bound
}

}  // namespace detail

/// Transfer entropy T_{X->Y} = I(Y_t; X_past | Y_past) in bits, estimated
/// by plug-in conditional mutual information over discretized symbols.
inline double transfer_entropy(const Vec& x, const Vec& y, const TEConfig& cfg) {
    cfg.validate();
    require(x.size() == y.size(), "transfer_entropy: series lengths must match");
    require(x.size() >= cfg.history_len + 1,
            "transfer_entropy: series too short for the history length");
    return detail::te_from_symbols(detail::discretize(x, cfg),
                                   detail::discretize(y, cfg), cfg);
}

/// Pairwise transfer entropies of all ordered node pairs of a trajectory.
struct TEMatrix {
    Mat directed;  ///< directed(i, j) = T_{i->j}, diagonal zero

    /// Symmetric link statistic for undirected inference:
    /// max(T_{i->j}, T_{j->i}).
    Mat summary() const {
        return directed.cwiseMax(directed.transpose());
    }
};

inline TEMatrix te_matrix(const Trajectory& traj, const TEConfig& cfg,
                          int n_threads = 1) {
    cfg.validate();
    const int n = traj.n_nodes();
    require(traj.n_samples() >= cfg.history_len + 1,
            "te_matrix: trajectory too short for the history length");

    std::vector<std::vector<int>> symbols(n);
    for (int i = 0; i < n; ++i)
        symbols[i] = detail::discretize(traj.phases.col(i), cfg);

    TEMatrix out;
    out.directed = Mat::Zero(n, n);
    parallel_for(n, n_threads, [&](int i) {
        for (int j = 0; j < n; ++j) {
            if (i == j) continue;
            out.directed(i, j) = detail::te_from_symbols(symbols[i], symbols[j], cfg);
        }
    });
    return out;
}

/// Threshold the symmetric TE summary into an undirected adjacency:
/// edge (i, j) iff summary(i, j) > threshold. Lower thresholds give
/// supersets of edges.
inline AdjMat infer_links(const Mat& te_summary, double threshold) {
    require(te_summary.rows() == te_summary.cols(), "infer_links: matrix must be square");
    require(std::isfinite(threshold), "infer_links: threshold must be finite");
    const int n = static_cast<int>(te_summary.rows());
    AdjMat adj = AdjMat::Zero(n, n);
    for (int i = 0; i < n; ++i) {
        for (int j = i + 1; j < n; ++j) {
            if (te_summary(i, j) > threshold) adj(i, j) = adj(j, i) = 1;
        }
    }
    return adj;
}

struct LinkScore {
    double true_positive_rate = 0.0;
    double false_discovery_rate = 0.0;
    double threshold = 0.0;
};

/// TPR = |inferred intersect true| / |true|,
/// FDR = |inferred minus true| / |inferred| (0 when nothing inferred).
inline LinkScore score_links(const AdjMat& inferred, const AdjMat& truth,
                             double threshold = 0.0) {
    require(inferred.rows() == truth.rows() && inferred.cols() == truth.cols(),
            "score_links: node counts must match");
    const int n = static_cast<int>(truth.rows());
    long long n_true = 0, n_inferred = 0, n_hit = 0;
    for (int i = 0; i < n; ++i) {
        for (int j = i + 1; j < n; ++j) {
            const bool t = truth(i, j) != 0;
            const bool p = inferred(i, j) != 0;
            n_true += t;
            n_inferred += p;
            n_hit += (t && p);
        }
    }
    LinkScore s;
    s.threshold = threshold;
    s.true_positive_rate = n_true == 0 ? 0.0 : static_cast<double>(n_hit) / n_true;
    s.false_discovery_rate =
        n_inferred == 0 ? 0.0 : static_cast<double>(n_inferred - n_hit) / n_inferred;
    return s;
}

using ForecasterFactory = std::function<ParallelForecaster(const AdjMat&)>;

struct ThresholdTuneOptions {
    double f = 0.1;                    ///< NRMSE threshold defining valid time
    double validation_fraction = 0.2;  ///< trajectory tail held out
    int n_threads = 1;
};

struct ThresholdTuneResult {
    double threshold = 0.0;
    std::vector<double> valid_time_per_candidate;  ///< raw time units
    bool degenerate = false;  ///< no candidate predicted even one step
};

/// Pick the link threshold that maximizes closed-loop valid prediction
/// time on a held-out tail of the trajectory, treating the threshold as a
/// prediction hyperparameter. Ties prefer the larger threshold (fewer
/// edges). Valid time is measured on the full encoded network state, which
/// needs no knowledge of the true adjacency.
inline ThresholdTuneResult tune_threshold(const Trajectory& traj, const TEMatrix& tem,
                                          const std::vector<double>& candidates,
                                          const ForecasterFactory& make_forecaster,
                                          const ThresholdTuneOptions& opt = {}) {
    require(!candidates.empty(), "tune_threshold: no candidate thresholds");
    require(opt.validation_fraction > 0.0 && opt.validation_fraction < 1.0,
            "tune_threshold: validation_fraction must lie in (0, 1)");

    const int t_total = traj.n_samples();
    const int t_val = std::max(1, static_cast<int>(t_total * opt.validation_fraction));
    const int t_train = t_total - t_val;
    require(t_train >= 2, "tune_threshold: trajectory too short to split");

    const Trajectory train_part = traj.slice(0, t_train);
    const Trajectory val_part = traj.slice(t_train, t_val);
    const Mat te_summary = tem.summary();

    // truth for validation, as the encoded full state (2N x t_val)
    const int n = traj.n_nodes();
    Mat val_truth(2 * n, t_val);
    val_truth.topRows(n) = val_part.phases.array().sin().transpose();
    val_truth.bottomRows(n) = val_part.phases.array().cos().transpose();

    ThresholdTuneResult result;
    result.valid_time_per_candidate.assign(candidates.size(), 0.0);
    std::vector<double> first_step_error(candidates.size(),
                                         std::numeric_limits<double>::infinity());

    for (std::size_t c = 0; c < candidates.size(); ++c) {
        const AdjMat adj = infer_links(te_summary, candidates[c]);
        ParallelForecaster pf = make_forecaster(adj);
        pf.train(train_part, opt.n_threads);
        Trajectory pred = pf.predict(t_val, val_part.t0, traj.dt_sample);

        Mat pred_state(2 * n, t_val);
        pred_state.topRows(n) = pred.phases.array().sin().transpose();
        pred_state.bottomRows(n) = pred.phases.array().cos().transpose();

        const Vec e = nrmse_series(val_truth, pred_state);
        first_step_error[c] = e(0);
        int k = 0;
        while (k < e.size() && e(k) <= opt.f) ++k;
        result.valid_time_per_candidate[c] = k * traj.dt_sample;
    }

    // argmax valid time; ties go to the larger threshold (sparser graph)
    std::size_t best = 0;
    for (std::size_t c = 1; c < candidates.size(); ++c) {
        const double vt = result.valid_time_per_candidate[c];
        const double vb = result.valid_time_per_candidate[best];
        if (vt > vb || (vt == vb && candidates[c] > candidates[best])) best = c;
    }

    if (result.valid_time_per_candidate[best] <= 0.0) {
        // nothing predicted even one step: fall back to the smallest
        // first-step validation error
        result.degenerate = true;
        best = 0;
        for (std::size_t c = 1; c < candidates.size(); ++c)
            if (first_step_error[c] < first_step_error[best]) best = c;
    }
    result.threshold = candidates[best];
    return result;
}

}  // namespace netdyn
