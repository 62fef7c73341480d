#pragma once

#include <random>
#include <unordered_set>
#include <vector>

#include "netdyn/common.hpp"
#include "netdyn/linalg.hpp"

namespace netdyn {

struct ReservoirConfig {
    int n_reservoir = 200;         ///< N_r (may be adjusted upward, see InputPartition)
    double spectral_radius = 0.9;  ///< rho of the recurrent matrix
    double input_scaling = 0.6;    ///< sigma, input weight range
    double leak_rate = 0.1;        ///< alpha in [0, 1]
    double ridge_param = 1e-9;     ///< Tikhonov regularizer of the readout fit
    double avg_in_degree = 3.0;    ///< kappa of the recurrent matrix
    int washout = 100;             ///< training samples discarded before regression
    int sync_len = 100;            ///< true inputs used to resynchronize the state
    bool literal_closed_loop = false;  ///< drop the leak term in closed loop

    void validate() const {
        require(n_reservoir >= 2, "ReservoirConfig: n_reservoir must be >= 2");
        require(spectral_radius > 0.0, "ReservoirConfig: spectral_radius must be positive");
        require(input_scaling > 0.0, "ReservoirConfig: input_scaling must be positive");
        require(leak_rate >= 0.0 && leak_rate <= 1.0,
                "ReservoirConfig: leak_rate must lie in [0, 1]");
        require(ridge_param >= 0.0, "ReservoirConfig: ridge_param must be nonnegative");
        require(avg_in_degree > 0.0, "ReservoirConfig: avg_in_degree must be positive");
        require(washout >= 0, "ReservoirConfig: washout must be nonnegative");
        require(sync_len >= 1, "ReservoirConfig: sync_len must be >= 1");
    }
};

/// How reservoir nodes are divided among the input components.
///
/// KnownEqual: every input feeds N_r / N_in_tot nodes (requires exact
/// divisibility). UnknownReserved: the two inputs of the assigned
/// oscillator feed n_assign/2 nodes each and the remaining inputs split
/// the rest evenly, growing N_r to the next feasible size. AllToAll:
/// dense input matrix, every input reaches every node.
enum class PartitionMode { KnownEqual, UnknownReserved, AllToAll };

struct InputPartition {
    PartitionMode mode = PartitionMode::KnownEqual;
    int n_assign = 50;  ///< reservoir nodes reserved for the assigned oscillator
};

/// Sparse random recurrent matrix: zero diagonal, expected in-degree
/// avg_in_degree, entries uniform before a global rescale that pins the
/// spectral radius.
inline SpMat build_reservoir_matrix(int n_reservoir, double avg_in_degree,
                                    double target_radius, std::uint64_t seed) {
    require(n_reservoir >= 2, "build_reservoir_matrix: n_reservoir must be >= 2");
    require(target_radius > 0.0,
            "build_reservoir_matrix: cannot rescale to zero spectral radius");
    require(avg_in_degree > 0.0 && avg_in_degree < n_reservoir,
            "build_reservoir_matrix: avg_in_degree must lie in (0, n_reservoir)");

    constexpr int kMaxRetries = 10;
    for (int attempt = 0; attempt < kMaxRetries; ++attempt) {
        std::mt19937_64 rng(derive_seed(seed, static_cast<std::uint64_t>(attempt)));
        std::uniform_real_distribution<double> value(-1.0, 1.0);
        std::uniform_int_distribution<int> column(0, n_reservoir - 1);
        std::binomial_distribution<int> per_row(
            n_reservoir - 1, avg_in_degree / (n_reservoir - 1));

        std::vector<Eigen::Triplet<double>> trip;
        trip.reserve(static_cast<std::size_t>(n_reservoir * avg_in_degree * 1.3));
        std::unordered_set<int> used;
        for (int k = 0; k < n_reservoir; ++k) {
            const int m = per_row(rng);
            used.clear();
            while (static_cast<int>(used.size()) < m) {
                const int l = column(rng);
                if (l == k || used.count(l)) continue;
                used.insert(l);
                trip.emplace_back(k, l, value(rng));
            }
        }

        SpMat b(n_reservoir, n_reservoir);
        b.setFromTriplets(trip.begin(), trip.end());
        const double realized = spectral_radius(b);
        if (realized <= 1e-12) continue;  // pathological realization, retry
        b *= target_radius / realized;
        b.makeCompressed();
        return b;
    }
    throw NumericalError(
        "build_reservoir_matrix: repeated zero-spectral-radius realizations");
}

struct InputMatrix {
    SpMat w;            ///< n_reservoir x n_in_tot
    int n_reservoir;    ///< effective row count (UnknownReserved may grow it)
};

/// Input weight matrix. Every reservoir node receives exactly one input
/// except in AllToAll mode; nonzeros are uniform on [-sigma, sigma].
inline InputMatrix build_input_matrix(int n_reservoir, int n_in_tot,
                                      double input_scaling,
                                      const InputPartition& partition,
                                      std::uint64_t seed) {
    require(n_reservoir >= 1, "build_input_matrix: n_reservoir must be >= 1");
    require(n_in_tot >= 1, "build_input_matrix: n_in_tot must be >= 1");
    require(input_scaling > 0.0, "build_input_matrix: input_scaling must be positive");

    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> value(-input_scaling, input_scaling);

    // rows_per_input[c] = number of reservoir nodes wired to input c
    std::vector<int> rows_per_input(n_in_tot, 0);
    int n_rows = n_reservoir;

    switch (partition.mode) {
        case PartitionMode::AllToAll: {
            Mat dense(n_reservoir, n_in_tot);
            for (int r = 0; r < n_reservoir; ++r)
                for (int c = 0; c < n_in_tot; ++c) dense(r, c) = value(rng);
            return InputMatrix{dense.sparseView(), n_reservoir};
        }
        case PartitionMode::KnownEqual: {
            require(n_reservoir % n_in_tot == 0,
                    "build_input_matrix: KnownEqual requires n_reservoir divisible "
                    "by n_in_tot");
            const int q = n_reservoir / n_in_tot;
            for (int c = 0; c < n_in_tot; ++c) rows_per_input[c] = q;
            break;
        }
        case PartitionMode::UnknownReserved: {
            const int n_assign = partition.n_assign;
            require(n_assign >= 2 && n_assign % 2 == 0,
                    "build_input_matrix: n_assign must be even and >= 2");
            if (n_in_tot == 2) {
                // degenerate self-only reservoir: the whole state is "assigned"
                require(n_reservoir % 2 == 0,
                        "build_input_matrix: self-only reservoir needs even n_reservoir");
                rows_per_input[0] = rows_per_input[1] = n_reservoir / 2;
                break;
            }
            require(n_in_tot % 2 == 0, "build_input_matrix: n_in_tot must be even");
            const int rest_inputs = n_in_tot - 2;
            require(n_reservoir > n_assign,
                    "build_input_matrix: n_reservoir must exceed n_assign");
            // round the per-input share up so every non-assigned input gets an
            // equal integer block; the reservoir grows to the matching size
            const int share = (n_reservoir - n_assign + rest_inputs - 1) / rest_inputs;
            n_rows = n_assign + share * rest_inputs;
            rows_per_input[0] = rows_per_input[n_in_tot / 2] = n_assign / 2;
            for (int c = 0; c < n_in_tot; ++c)
                if (rows_per_input[c] == 0) rows_per_input[c] = share;
            break;
        }
    }

    // contiguous row blocks per input, in input order
    std::vector<Eigen::Triplet<double>> trip;
    trip.reserve(static_cast<std::size_t>(n_rows));
    int row = 0;
    for (int c = 0; c < n_in_tot; ++c)
        for (int k = 0; k < rows_per_input[c]; ++k) trip.emplace_back(row++, c, value(rng));
    require(row == n_rows, "build_input_matrix: internal row accounting failure");

    SpMat w(n_rows, n_in_tot);
    w.setFromTriplets(trip.begin(), trip.end());
    w.makeCompressed();
    return InputMatrix{std::move(w), n_rows};
}

/// Oscillator states enter the reservoir as [sin theta..., cos theta...]:
/// a block of sines followed by a block of cosines in matching order.
inline Vec encode_oscillator_state(const Vec& phases) {
    const auto n = phases.size();
    Vec u(2 * n);
    for (Eigen::Index i = 0; i < n; ++i) {
        u(i) = std::sin(phases(i));
        u(n + i) = std::cos(phases(i));
    }
    return u;
}

/// Inverse of encode_oscillator_state via atan2 on the (sin, cos) blocks;
/// total for any input, phases land in [0, 2*pi).
inline Vec decode_oscillator_state(const Vec& u) {
    require(u.size() % 2 == 0, "decode_oscillator_state: input length must be even");
    const auto n = u.size() / 2;
    Vec phases(n);
    for (Eigen::Index i = 0; i < n; ++i)
        phases(i) = wrap_phase(std::atan2(u(i), u(n + i)));
    return phases;
}

/// One reservoir computer: fixed random recurrent matrix B and input map
/// W_in, a trainable linear readout W_out, and the running state r.
///
/// State update (leaky echo-state form, tanh componentwise):
///   r <- alpha * r + (1 - alpha) * tanh(B r + W_in u)
class Reservoir {
  public:
    Reservoir(const ReservoirConfig& cfg, int n_in_tot, const InputPartition& partition,
              std::uint64_t seed)
        : cfg_(cfg), partition_(partition), seed_(seed) {
        cfg_.validate();
        auto in = build_input_matrix(cfg.n_reservoir, n_in_tot, cfg.input_scaling,
                                     partition, derive_seed(seed, 0));
        w_in_ = std::move(in.w);
        n_state_ = in.n_reservoir;
        b_ = build_reservoir_matrix(n_state_, cfg.avg_in_degree, cfg.spectral_radius,
                                    derive_seed(seed, 1));
        state_ = Vec::Zero(n_state_);
    }

    int n_state() const { return n_state_; }
    int n_inputs() const { return static_cast<int>(w_in_.cols()); }
    int n_outputs() const { return static_cast<int>(w_out_.rows()); }
    bool trained() const { return w_out_.size() > 0; }

    const SpMat& b_matrix() const { return b_; }
    const SpMat& w_in() const { return w_in_; }
    const Mat& w_out() const { return w_out_; }
    const ReservoirConfig& config() const { return cfg_; }
    const InputPartition& partition() const { return partition_; }
    std::uint64_t seed() const { return seed_; }

    const Vec& state() const { return state_; }
    void set_state(Vec s) {
        require(s.size() == n_state_, "Reservoir::set_state: dimension mismatch");
        state_ = std::move(s);
    }
    void reset_state() { state_.setZero(); }

    /// The state update applied to an explicit state (pure).
    Vec next_state(const Vec& r, const Vec& u) const {
        require(u.size() == w_in_.cols(), "Reservoir: input dimension mismatch");
        require(r.size() == n_state_, "Reservoir: state dimension mismatch");
        if (!u.allFinite()) throw NumericalError("Reservoir: non-finite input");
        const double a = cfg_.leak_rate;
        return a * r + (1.0 - a) * (b_ * r + w_in_ * u).array().tanh().matrix();
    }

    void advance(const Vec& u) { state_ = next_state(state_, u); }

    Vec readout() const {
        require(trained(), "Reservoir: readout requested before training");
        return w_out_ * state_;
    }

    /// Drive with a teacher series (inputs column-wise) and ridge-train the
    /// readout one step ahead: the state after absorbing column k is paired
    /// with column k+1 restricted to target_rows. The first `washout` pairs
    /// are discarded; afterwards the state is left synchronized with the
    /// series end.
    void train_on_series(const Mat& inputs, const std::vector<int>& target_rows) {
        require(!target_rows.empty(), "Reservoir: no target rows given");
        const auto t_total = inputs.cols();
        require(t_total > cfg_.washout + 1,
                "Reservoir: series too short for the configured washout");

        RidgeAccumulator acc(n_state_, static_cast<int>(target_rows.size()));
        Vec target(target_rows.size());
        reset_state();
        for (Eigen::Index k = 0; k + 1 < t_total; ++k) {
            advance(inputs.col(k));
            if (k >= cfg_.washout) {
                for (std::size_t t = 0; t < target_rows.size(); ++t)
                    target(t) = inputs(target_rows[t], k + 1);
                acc.add(state_, target);
            }
        }
        w_out_ = acc.solve(cfg_.ridge_param);
        advance(inputs.col(t_total - 1));  // leave the state at the series end
    }

    /// Reset and re-drive the state open-loop with true inputs
    /// (column-wise); used before prediction when the state does not
    /// already continue from training.
    void synchronize(const Mat& inputs) {
        require(inputs.cols() >= 1, "Reservoir: synchronize needs at least one input");
        reset_state();
        for (Eigen::Index k = 0; k < inputs.cols(); ++k) advance(inputs.col(k));
    }

    /// Closed-loop autonomous prediction: emit u~ = W_out r, feed it back
    /// as the next input. Requires a readout that reproduces the full
    /// input vector. Returns outputs column-wise (n_in x n_steps).
    Mat predict_closed_loop(int n_steps) {
        require(trained(), "Reservoir: predict before training");
        require(n_outputs() == n_inputs(),
                "Reservoir: closed loop needs output dimension equal to input "
                "dimension");
        require(n_steps >= 0, "Reservoir: negative step count");

        Mat out(n_outputs(), n_steps);
        for (int k = 0; k < n_steps; ++k) {
            Vec u = w_out_ * state_;
            if (!u.allFinite())
                throw NumericalError("Reservoir: non-finite output at step " +
                                     std::to_string(k));
            out.col(k) = u;
            closed_loop_advance(u);
        }
        return out;
    }

    /// One closed-loop state update. Uses the same leaky update as
    /// training unless literal_closed_loop is set, which drops the leak
    /// term (the two coincide at leak_rate = 0).
    void closed_loop_advance(const Vec& u) {
        if (cfg_.literal_closed_loop) {
            state_ = (b_ * state_ + w_in_ * u).array().tanh().matrix();
        } else {
            advance(u);
        }
    }

    void set_w_out(Mat w) {
        require(w.cols() == n_state_, "Reservoir: W_out column count must match state");
        w_out_ = std::move(w);
    }

  private:
    ReservoirConfig cfg_;
    InputPartition partition_;
    std::uint64_t seed_ = 0;
    int n_state_ = 0;
    SpMat b_;
    SpMat w_in_;
    Mat w_out_;
    Vec state_;
};

}  // namespace netdyn
