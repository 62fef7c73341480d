#pragma once

#include <optional>
#include <random>
#include <utility>
#include <vector>

#include "netdyn/common.hpp"

namespace netdyn {

/// Parameters of the frequency-assortative link rule: a candidate pair
/// (i, j) is linked with probability delta^gamma /
/// (delta^gamma + |w_i - w_j|^gamma).
struct AssortativityParams {
    double delta = 0.8;
    double gamma = 5.0;
    int degree = 3;
};

/// An undirected network of phase oscillators: symmetric 0/1 adjacency,
/// per-node natural frequencies and a global coupling constant.
struct OscillatorNetwork {
    int n_nodes = 0;
    int degree = -1;  ///< common nodal degree; -1 when not degree-regular
    double coupling = 0.0;
    Vec frequencies;
    AdjMat adjacency;

    std::vector<int> neighbors(int i) const {
        std::vector<int> out;
        for (int j = 0; j < n_nodes; ++j)
            if (adjacency(i, j) != 0) out.push_back(j);
        return out;
    }

    std::vector<std::vector<int>> neighbor_lists() const {
        std::vector<std::vector<int>> out(n_nodes);
        for (int i = 0; i < n_nodes; ++i) out[i] = neighbors(i);
        return out;
    }

    std::vector<std::pair<int, int>> edges() const {
        std::vector<std::pair<int, int>> out;
        for (int i = 0; i < n_nodes; ++i)
            for (int j = i + 1; j < n_nodes; ++j)
                if (adjacency(i, j) != 0) out.emplace_back(i, j);
        return out;
    }

    int edge_count() const { return static_cast<int>(edges().size()); }
};

/// Natural frequencies drawn uniformly from [-pi/2, pi/2].
inline Vec sample_frequencies(int n, std::uint64_t seed) {
    require(n >= 1, "sample_frequencies: n must be >= 1");
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> dist(-kTwoPi / 4.0, kTwoPi / 4.0);
    Vec out(n);
    for (int i = 0; i < n; ++i) out(i) = dist(rng);
    return out;
}

/// Acceptance probability of the assortative link rule.
inline double link_probability(double delta, double gamma, double freq_gap) {
    const double dg = std::pow(delta, gamma);
    return dg / (dg + std::pow(std::abs(freq_gap), gamma));
}

namespace detail {

// One stub-matching attempt. Repeatedly: pick an unsaturated node i
// uniformly, pick j uniformly among unsaturated nodes not equal and not
// already adjacent to i, link with the assortative acceptance probability.
// Returns nothing if the attempt deadlocks (some unsaturated node has no
// legal partner left, which later links can never repair).
inline std::optional<AdjMat> try_build_assortative(const Vec& freqs,
                                                   const AssortativityParams& p,
                                                   std::mt19937_64& rng) {
    const int n = static_cast<int>(freqs.size());
    AdjMat adj = AdjMat::Zero(n, n);
    std::vector<int> residual(n, p.degree);
    std::vector<int> unsaturated(n);
    for (int i = 0; i < n; ++i) unsaturated[i] = i;

    std::uniform_real_distribution<double> unit(0.0, 1.0);
    std::vector<int> candidates;
    candidates.reserve(n);

    // Acceptance probabilities are bounded away from zero (|freq gap| <= pi),
    // so this loop terminates unless the attempt structurally deadlocks.
    long long guard = 0;
    const long long max_iter = 10'000'000LL;
    while (!unsaturated.empty()) {
        if (++guard > max_iter) return std::nullopt;

        std::uniform_int_distribution<std::size_t> pick_i(0, unsaturated.size() - 1);
        const std::size_t ii = pick_i(rng);
        const int i = unsaturated[ii];

        candidates.clear();
        for (int j : unsaturated)
            if (j != i && adj(i, j) == 0) candidates.push_back(j);
        if (candidates.empty()) return std::nullopt;  // i can never saturate

        std::uniform_int_distribution<std::size_t> pick_j(0, candidates.size() - 1);
        const int j = candidates[pick_j(rng)];

        if (unit(rng) >= link_probability(p.delta, p.gamma, freqs(i) - freqs(j)))
            continue;

        adj(i, j) = adj(j, i) = 1;
        --residual[i];
        --residual[j];
        if (residual[i] == 0 || residual[j] == 0) {
            std::erase_if(unsaturated,
                          [&](int k) { return residual[k] == 0; });
        }
    }
    return adj;
}

}  // namespace detail

/// Build a frequency-assortative, degree-regular, undirected oscillator
/// network by successive stub matching. Deadlocked attempts are discarded
/// and rebuilt from the next derived seed, up to 100 restarts.
inline OscillatorNetwork build_assortative_network(const Vec& frequencies,
                                                   const AssortativityParams& p,
                                                   double coupling,
                                                   std::uint64_t seed) {
    const int n = static_cast<int>(frequencies.size());
    require(n >= 2, "build_assortative_network: need at least 2 nodes");
    require(p.degree >= 1 && p.degree < n,
            "build_assortative_network: degree must satisfy 1 <= degree < n");
    require((static_cast<long long>(n) * p.degree) % 2 == 0,
            "build_assortative_network: n * degree must be even");
    require(p.delta > 0.0, "build_assortative_network: delta must be positive");
    require(p.gamma >= 0.0, "build_assortative_network: gamma must be nonnegative");

    constexpr int kMaxRestarts = 100;
    for (int attempt = 0; attempt < kMaxRestarts; ++attempt) {
        std::mt19937_64 rng(derive_seed(seed, static_cast<std::uint64_t>(attempt)));
        if (auto adj = detail::try_build_assortative(frequencies, p, rng)) {
            OscillatorNetwork net;
            net.n_nodes = n;
            net.degree = p.degree;
            net.coupling = coupling;
            net.frequencies = frequencies;
            net.adjacency = std::move(*adj);
            return net;
        }
    }
    throw NumericalError(
        "build_assortative_network: construction deadlocked in 100 consecutive attempts");
}

/// Mean |w_i - w_j| over linked pairs. Small values mean similar
/// frequencies were preferentially connected.
inline double assortativity_score(const OscillatorNetwork& net) {
    double sum = 0.0;
    long long count = 0;
    for (int i = 0; i < net.n_nodes; ++i) {
        for (int j = i + 1; j < net.n_nodes; ++j) {
            if (net.adjacency(i, j) != 0) {
                sum += std::abs(net.frequencies(i) - net.frequencies(j));
                ++count;
            }
        }
    }
    require(count > 0, "assortativity_score: network has no edges");
    return sum / static_cast<double>(count);
}

}  // namespace netdyn
