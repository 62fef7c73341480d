#pragma once

#include <string>
#include <vector>

#include "netdyn/common.hpp"
#include "netdyn/dynamics.hpp"
#include "netdyn/reservoir.hpp"
#include "netdyn/thread_pool.hpp"

namespace netdyn {

/// Which node signals feed each reservoir: node i's list starts with i
/// itself, followed by its wired neighbors in ascending index order.
struct WiringGraph {
    enum class Source { TrueAdjacency, Inferred };

    std::vector<std::vector<int>> lists;
    Source source = Source::TrueAdjacency;

    static WiringGraph from_adjacency(const AdjMat& adj, Source source) {
        require(adj.rows() == adj.cols(), "WiringGraph: adjacency must be square");
        const int n = static_cast<int>(adj.rows());
        for (int i = 0; i < n; ++i) {
            require(adj(i, i) == 0, "WiringGraph: adjacency diagonal must be zero");
            for (int j = 0; j < i; ++j)
                require(adj(i, j) == adj(j, i), "WiringGraph: adjacency must be symmetric");
        }
        WiringGraph g;
        g.source = source;
        g.lists.resize(n);
        for (int i = 0; i < n; ++i) {
            g.lists[i].push_back(i);
            for (int j = 0; j < n; ++j)
                if (adj(i, j) != 0) g.lists[i].push_back(j);
        }
        return g;
    }

    int n_nodes() const { return static_cast<int>(lists.size()); }
};

/// One reservoir per network node, wired by the (true or inferred)
/// adjacency. Training is independent per node; prediction runs in
/// lockstep with a bulk-synchronous output exchange between steps.
class ParallelForecaster {
  public:
    ParallelForecaster(const AdjMat& adjacency, const ReservoirConfig& config,
                       const InputPartition& partition, std::uint64_t seed,
                       WiringGraph::Source source = WiringGraph::Source::TrueAdjacency)
        : wiring_(WiringGraph::from_adjacency(adjacency, source)),
          config_(config),
          partition_(partition),
          seed_(seed) {
        reservoirs_.reserve(wiring_.n_nodes());
        for (int i = 0; i < wiring_.n_nodes(); ++i) {
            const int n_in_tot = 2 * static_cast<int>(wiring_.lists[i].size());
            reservoirs_.emplace_back(config, n_in_tot, partition, derive_seed(seed, i));
        }
    }

    const WiringGraph& wiring() const { return wiring_; }
    const ReservoirConfig& config() const { return config_; }
    const InputPartition& partition() const { return partition_; }
    std::uint64_t seed() const { return seed_; }
    int n_nodes() const { return wiring_.n_nodes(); }
    Reservoir& reservoir(int i) { return reservoirs_.at(i); }
    const Reservoir& reservoir(int i) const { return reservoirs_.at(i); }

    bool trained() const {
        for (const auto& r : reservoirs_)
            if (!r.trained()) return false;
        return !reservoirs_.empty();
    }

    /// Train every node's readout on the trajectory, independently and
    /// optionally concurrently; results do not depend on the worker count.
    /// Each reservoir is left synchronized with the trajectory end.
    void train(const Trajectory& traj, int n_threads = 1) {
        require(traj.n_nodes() == n_nodes(),
                "ParallelForecaster: trajectory node count mismatch");
        require(traj.n_samples() > config_.washout + 1,
                "ParallelForecaster: trajectory too short for training");

        const Mat sines = traj.phases.array().sin().transpose();    // n x T
        const Mat cosines = traj.phases.array().cos().transpose();  // n x T

        parallel_for(n_nodes(), n_threads, [&](int i) {
            const Mat inputs = gather_inputs(sines, cosines, i);
            // self is first in the list: its sine is row 0, its cosine is
            // row L (the start of the cosine block)
            const int l = static_cast<int>(wiring_.lists[i].size());
            reservoirs_[i].train_on_series(inputs, {0, l});
        });
    }

    /// Re-drive every reservoir open-loop over the tail of a trajectory
    /// (used when prediction does not continue directly from training).
    void synchronize(const Trajectory& tail, int n_threads = 1) {
        require(tail.n_nodes() == n_nodes(),
                "ParallelForecaster: trajectory node count mismatch");
        const Mat sines = tail.phases.array().sin().transpose();
        const Mat cosines = tail.phases.array().cos().transpose();
        parallel_for(n_nodes(), n_threads, [&](int i) {
            reservoirs_[i].synchronize(gather_inputs(sines, cosines, i));
        });
    }

    /// Closed-loop lockstep prediction. Per step: every reservoir emits its
    /// (sin, cos) output, a global exchange assembles each node's input
    /// vector from its own and its neighbors' outputs, then every
    /// reservoir advances. Returns the predicted phase trajectory starting
    /// at t_start.
    Trajectory predict(int n_steps, double t_start, double dt_sample) {
        require(trained(), "ParallelForecaster: predict before training");
        require(n_steps >= 0, "ParallelForecaster: negative step count");

        const int n = n_nodes();
        Trajectory out;
        out.t0 = t_start;
        out.dt_sample = dt_sample;
        out.phases.resize(n_steps, n);

        Mat outputs(2, n);  // row 0: sin, row 1: cos, one column per node
        for (int step = 0; step < n_steps; ++step) {
            // emit phase
            for (int i = 0; i < n; ++i) {
                Vec y = reservoirs_[i].readout();
                if (!y.allFinite())
                    throw NumericalError("ParallelForecaster: non-finite output at node " +
                                         std::to_string(i) + ", step " +
                                         std::to_string(step));
                outputs.col(i) = y;
                out.phases(step, i) = std::atan2(y(0), y(1));
            }
            // exchange + advance phase
            for (int i = 0; i < n; ++i) {
                const auto& list = wiring_.lists[i];
                const int l = static_cast<int>(list.size());
                Vec u(2 * l);
                for (int a = 0; a < l; ++a) {
                    u(a) = outputs(0, list[a]);
                    u(l + a) = outputs(1, list[a]);
                }
                reservoirs_[i].closed_loop_advance(u);
            }
        }
        return out;
    }

  private:
    // Input series for node i (2L x T): sine block of [self, neighbors...]
    // stacked over the cosine block.
    Mat gather_inputs(const Mat& sines, const Mat& cosines, int i) const {
        const auto& list = wiring_.lists[i];
        const int l = static_cast<int>(list.size());
        Mat inputs(2 * l, sines.cols());
        for (int a = 0; a < l; ++a) {
            inputs.row(a) = sines.row(list[a]);
            inputs.row(l + a) = cosines.row(list[a]);
        }
        return inputs;
    }

    WiringGraph wiring_;
    ReservoirConfig config_;
    InputPartition partition_;
    std::uint64_t seed_ = 0;
    std::vector<Reservoir> reservoirs_;
};

/// Single (non-parallel) reservoir over the whole network: all 2N encoded
/// signals in, all 2N out.
inline Reservoir train_single_reservoir(const Trajectory& traj,
                                        const ReservoirConfig& config,
                                        std::uint64_t seed) {
    require(traj.n_samples() > config.washout + 1,
            "train_single_reservoir: trajectory too short for training");
    const int n = traj.n_nodes();
    Mat inputs(2 * n, traj.n_samples());
    inputs.topRows(n) = traj.phases.array().sin().transpose();
    inputs.bottomRows(n) = traj.phases.array().cos().transpose();

    Reservoir res(config, 2 * n, InputPartition{PartitionMode::KnownEqual},
                  seed);
    std::vector<int> all_rows(2 * n);
    for (int i = 0; i < 2 * n; ++i) all_rows[i] = i;
    res.train_on_series(inputs, all_rows);
    return res;
}

/// Closed-loop prediction with a single whole-network reservoir, decoded
/// back to a phase trajectory.
inline Trajectory predict_single_reservoir(Reservoir& res, int n_steps,
                                           double t_start, double dt_sample) {
    const Mat outputs = res.predict_closed_loop(n_steps);
    const int n = static_cast<int>(outputs.rows()) / 2;
    Trajectory out;
    out.t0 = t_start;
    out.dt_sample = dt_sample;
    out.phases.resize(n_steps, n);
    for (int k = 0; k < n_steps; ++k)
        out.phases.row(k) = decode_oscillator_state(outputs.col(k)).transpose();
    return out;
}

}  // namespace netdyn
