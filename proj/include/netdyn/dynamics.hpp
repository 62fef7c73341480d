#pragma once

#include <random>
#include <string>
#include <vector>

#include "netdyn/common.hpp"
#include "netdyn/network.hpp"

namespace netdyn {

struct PhaseState {
    Vec phases;  ///< unwrapped; reduce mod 2*pi only on output
    double time = 0.0;
};

/// Phase samples at uniform spacing. Row k holds the state at
/// t0 + k * dt_sample; phases are kept unwrapped internally.
struct Trajectory {
    double t0 = 0.0;
    double dt_sample = 0.0;
    Mat phases;  ///< n_samples x n_nodes
    std::string network_ref;

    int n_samples() const { return static_cast<int>(phases.rows()); }
    int n_nodes() const { return static_cast<int>(phases.cols()); }
    double time_at(int k) const { return t0 + k * dt_sample; }

    PhaseState sample(int k) const {
        return PhaseState{phases.row(k).transpose(), time_at(k)};
    }

    /// Contiguous sub-trajectory of `count` samples starting at `start`.
    Trajectory slice(int start, int count) const {
        require(start >= 0 && count >= 0 && start + count <= n_samples(),
                "Trajectory::slice: range out of bounds");
        Trajectory out;
        out.t0 = time_at(start);
        out.dt_sample = dt_sample;
        out.phases = phases.middleRows(start, count);
        out.network_ref = network_ref;
        return out;
    }
};

namespace detail {

// Kuramoto right-hand side with neighbor lists and the expansion
// sin(a - b) = sin a cos b - cos a sin b, so trig evaluations scale with
// the node count rather than the edge count.
class KuramotoSystem {
  public:
    explicit KuramotoSystem(const OscillatorNetwork& net)
        : net_(net),
          nbrs_(net.neighbor_lists()),
          sin_(net.n_nodes),
          cos_(net.n_nodes) {}

    void rhs(const Vec& theta, Vec& dtheta) const {
        const int n = net_.n_nodes;
        for (int i = 0; i < n; ++i) {
            sin_(i) = std::sin(theta(i));
            cos_(i) = std::cos(theta(i));
        }
        for (int i = 0; i < n; ++i) {
            double acc = 0.0;
            for (int j : nbrs_[i])
                acc += sin_(j) * cos_(i) - cos_(j) * sin_(i);
            dtheta(i) = net_.frequencies(i) + net_.coupling * acc;
        }
    }

    // Classical RK4 step in place.
    void step(Vec& theta, double dt) const {
        const auto n = theta.size();
        if (k1_.size() != n) {
            k1_.resize(n); k2_.resize(n); k3_.resize(n); k4_.resize(n);
            tmp_.resize(n);
        }
        rhs(theta, k1_);
        tmp_ = theta + (dt / 2.0) * k1_;
        rhs(tmp_, k2_);
        tmp_ = theta + (dt / 2.0) * k2_;
        rhs(tmp_, k3_);
        tmp_ = theta + dt * k3_;
        rhs(tmp_, k4_);
        theta += (dt / 6.0) * (k1_ + 2.0 * k2_ + 2.0 * k3_ + k4_);
    }

  private:
    const OscillatorNetwork& net_;
    std::vector<std::vector<int>> nbrs_;
    mutable Vec sin_, cos_;
    mutable Vec k1_, k2_, k3_, k4_, tmp_;
};

}  // namespace detail

/// Instantaneous phase velocities: component i is
/// w_i + K * sum_j A_ij sin(theta_j - theta_i).
inline Vec kuramoto_rhs(const PhaseState& state, const OscillatorNetwork& net) {
    require(state.phases.size() == net.n_nodes,
            "kuramoto_rhs: state dimension does not match network");
    detail::KuramotoSystem sys(net);
    Vec out(net.n_nodes);
    sys.rhs(state.phases, out);
    return out;
}

/// Advance a state by `duration` with fixed-step RK4, returning only the
/// final state (used for transients and between-sample stepping).
inline PhaseState integrate_to(const OscillatorNetwork& net, const PhaseState& initial,
                               double dt_step, double duration) {
    require(initial.phases.size() == net.n_nodes,
            "integrate_to: state dimension does not match network");
    require(dt_step > 0.0, "integrate_to: dt_step must be positive");
    require(duration >= 0.0, "integrate_to: duration must be nonnegative");
    const long long n_steps = std::llround(duration / dt_step);
    require(std::abs(n_steps * dt_step - duration) <= 1e-9 * std::max(1.0, duration),
            "integrate_to: duration must be an integer multiple of dt_step");

    detail::KuramotoSystem sys(net);
    PhaseState s = initial;
    for (long long k = 0; k < n_steps; ++k) sys.step(s.phases, dt_step);
    s.time = initial.time + duration;
    return s;
}

/// Integrate the network with RK4 at dt_step, sampling every dt_sample
/// (which must be an integer multiple of dt_step), over `duration` time
/// units. The initial state is included as the first sample.
inline Trajectory integrate(const OscillatorNetwork& net, const PhaseState& initial,
                            double dt_step, double dt_sample, double duration) {
    require(initial.phases.size() == net.n_nodes,
            "integrate: state dimension does not match network");
    require(dt_step > 0.0 && dt_sample > 0.0,
            "integrate: step sizes must be positive");
    require(duration > 0.0, "integrate: duration must be positive");
    const long long per_sample = std::llround(dt_sample / dt_step);
    require(per_sample >= 1 &&
                std::abs(per_sample * dt_step - dt_sample) <= 1e-9 * dt_sample,
            "integrate: dt_sample must be an integer multiple of dt_step");

    const long long n_samples = 1 + static_cast<long long>(duration / dt_sample + 1e-9);
    detail::KuramotoSystem sys(net);

    Trajectory traj;
    traj.t0 = initial.time;
    traj.dt_sample = dt_sample;
    traj.phases.resize(n_samples, net.n_nodes);
    traj.phases.row(0) = initial.phases.transpose();

    Vec theta = initial.phases;
    for (long long s = 1; s < n_samples; ++s) {
        for (long long k = 0; k < per_sample; ++k) sys.step(theta, dt_step);
        if (!theta.allFinite())
            throw NumericalError("integrate: non-finite state at sample " +
                                 std::to_string(s));
        traj.phases.row(s) = theta.transpose();
    }
    return traj;
}

/// Uniformly random phases on [0, 2*pi), deterministic in the seed.
inline PhaseState random_phase_state(int n, std::uint64_t seed) {
    require(n >= 1, "random_phase_state: n must be >= 1");
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> dist(0.0, kTwoPi);
    PhaseState s;
    s.phases.resize(n);
    for (int i = 0; i < n; ++i) s.phases(i) = dist(rng);
    return s;
}

/// Adjacency-weighted global order parameter
/// R = sum_i sum_j A_ij exp(i * theta_j). For an undirected network this
/// reduces to sum_j deg(j) exp(i * theta_j).
inline Complex order_parameter(const Vec& phases, const OscillatorNetwork& net) {
    require(phases.size() == net.n_nodes,
            "order_parameter: state dimension does not match network");
    Complex r{0.0, 0.0};
    for (int j = 0; j < net.n_nodes; ++j) {
        const double deg = net.adjacency.col(j).sum();
        r += deg * Complex{std::cos(phases(j)), std::sin(phases(j))};
    }
    return r;
}

/// |R(t)| evaluated at every sample of a trajectory.
inline Vec order_parameter_magnitude(const Trajectory& traj, const OscillatorNetwork& net) {
    Vec out(traj.n_samples());
    for (int k = 0; k < traj.n_samples(); ++k)
        out(k) = std::abs(order_parameter(traj.phases.row(k).transpose(), net));
    return out;
}

struct LyapunovSettings {
    double dt_step = 0.01;
    double perturbation = 1e-8;     ///< renormalized separation epsilon
    double renorm_interval = 1.0;   ///< tau_r
    double transient = 200.0;       ///< attractor settling time, discarded
    double total_time = 5000.0;     ///< averaging time after the transient
};

struct LyapunovEstimate {
    double lambda_max = 0.0;
    double stderr_est = 0.0;
    LyapunovSettings settings;
};

/// Benettin two-trajectory estimate of the largest Lyapunov exponent:
/// evolve a reference and a perturbed copy, renormalize the separation to
/// epsilon every renorm_interval, and average the log stretch factors.
inline LyapunovEstimate largest_lyapunov(const OscillatorNetwork& net,
                                         const LyapunovSettings& s,
                                         std::uint64_t seed) {
    require(s.perturbation > 0.0 && s.renorm_interval > 0.0 && s.total_time > 0.0,
            "largest_lyapunov: settings must be positive");

    PhaseState ref = random_phase_state(net.n_nodes, seed);
    ref = integrate_to(net, ref, s.dt_step, s.transient);

    std::mt19937_64 rng(derive_seed(seed, 1));
    std::normal_distribution<double> gauss(0.0, 1.0);
    Vec dir(net.n_nodes);
    for (int i = 0; i < net.n_nodes; ++i) dir(i) = gauss(rng);
    dir.normalize();

    PhaseState pert = ref;
    pert.phases += s.perturbation * dir;

    const int n_intervals =
        static_cast<int>(std::llround(s.total_time / s.renorm_interval));
    std::vector<double> exponents;
    exponents.reserve(n_intervals);

    double log_sum = 0.0;
    for (int k = 0; k < n_intervals; ++k) {
        ref = integrate_to(net, ref, s.dt_step, s.renorm_interval);
        pert = integrate_to(net, pert, s.dt_step, s.renorm_interval);
        Vec diff = pert.phases - ref.phases;
        const double d = diff.norm();
        if (!std::isfinite(d) || d <= 0.0)
            throw NumericalError("largest_lyapunov: separation underflow/overflow");
        const double stretch = std::log(d / s.perturbation);
        log_sum += stretch;
        exponents.push_back(stretch / s.renorm_interval);
        pert.phases = ref.phases + (s.perturbation / d) * diff;
    }

    LyapunovEstimate est;
    est.settings = s;
    est.lambda_max = log_sum / (n_intervals * s.renorm_interval);
    double var = 0.0;
    for (double e : exponents) {
        const double d = e - est.lambda_max;
        var += d * d;
    }
    var /= std::max(1, n_intervals - 1);
    est.stderr_est = std::sqrt(var / n_intervals);
    return est;
}

}  // namespace netdyn
