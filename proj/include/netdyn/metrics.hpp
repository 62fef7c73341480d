#pragma once

#include "netdyn/common.hpp"

namespace netdyn {

/// Normalized root mean squared error per time step:
/// E(t) = ||u(t) - u~(t)|| / <||u(t)||^2>^(1/2), with the normalization
/// averaged over the provided truth series. Columns are time steps.
inline Vec nrmse_series(const Mat& truth, const Mat& pred) {
    require(truth.rows() == pred.rows() && truth.cols() == pred.cols(),
            "nrmse_series: truth and prediction shapes must match");
    require(truth.cols() >= 1, "nrmse_series: empty series");
    const double norm2 = truth.colwise().squaredNorm().mean();
    require(norm2 > 0.0, "nrmse_series: truth series has zero norm");
    const double scale = std::sqrt(norm2);
    return (truth - pred).colwise().norm().transpose() / scale;
}

/// Scalar-series overload (||.|| is the absolute value).
inline Vec nrmse_series(const Vec& truth, const Vec& pred) {
    return nrmse_series(Mat(truth.transpose()), Mat(pred.transpose()));
}

struct ValidTime {
    double t_lyapunov = 0.0;  ///< lambda_max * t_valid
    double t_raw = 0.0;       ///< in the time units of the series
    bool censored = false;    ///< error never exceeded f over the horizon
    int first_exceed_index = -1;
};

/// First time the error series exceeds f, in Lyapunov-time units.
/// If the error never exceeds f the full horizon is reported with the
/// censored flag set.
inline ValidTime valid_time(const Vec& error_series, double f, double dt_sample,
                            double lambda_max) {
    require(f > 0.0 && f < 1.0, "valid_time: f must lie in (0, 1)");
    require(dt_sample > 0.0, "valid_time: dt_sample must be positive");
    require(lambda_max > 0.0, "valid_time: lambda_max must be positive");

    ValidTime out;
    for (int k = 0; k < error_series.size(); ++k) {
        if (error_series(k) > f) {
            out.first_exceed_index = k;
            out.t_raw = dt_sample * k;
            out.t_lyapunov = lambda_max * out.t_raw;
            return out;
        }
    }
    out.censored = true;
    out.t_raw = dt_sample * static_cast<double>(error_series.size());
    out.t_lyapunov = lambda_max * out.t_raw;
    return out;
}

/// A prediction run scored against its ground truth.
struct ForecastResult {
    Vec truth;       ///< evaluated series (|R(t)| or stacked state norm path)
    Vec predicted;
    Vec nrmse;       ///< E(t)
    ValidTime valid;
    double f_threshold = 0.1;
    double lambda_max = 0.0;
};

inline ForecastResult score_forecast(const Vec& truth, const Vec& predicted,
                                     double f, double dt_sample, double lambda_max) {
    ForecastResult r;
    r.truth = truth;
    r.predicted = predicted;
    r.nrmse = nrmse_series(truth, predicted);
    r.valid = valid_time(r.nrmse, f, dt_sample, lambda_max);
    r.f_threshold = f;
    r.lambda_max = lambda_max;
    return r;
}

}  // namespace netdyn
