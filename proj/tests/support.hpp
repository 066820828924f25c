#pragma once

// Shared helpers for the test suites: pattern samplers and random stable
// model draws, kept independent of the bench module where a test needs an
// oracle-grade source of parameters.

#include "ivproc/ivproc.hpp"

#include <utility>
#include <vector>

namespace ivproc::testing {

// six-process pattern with a two-process instrument block (internal
// 2-cycle), a two-process treatment block (2-cycle plus feedback from the
// outcome), one outcome, and one confounder feeding treatments and outcome
inline const std::vector<std::pair<int, int>>& two_instrument_edges() {
    static const std::vector<std::pair<int, int>> edges = {
        {1, 2}, {2, 1}, {1, 3}, {2, 3}, {1, 4}, {2, 4}, {4, 3},
        {3, 4}, {3, 5}, {4, 5}, {6, 5}, {6, 3}, {6, 4}, {5, 3}};
    return edges;
}

/// VAR(1) draw on an arbitrary edge pattern with the usual experiment
/// intervals (edge magnitudes in [0.2, 1] with random sign, nonzero
/// diagonals in [-0.5, 0.5]); rejection-sampled until stable.
inline VarParams sample_pattern_var(int n, const std::vector<std::pair<int, int>>& edges, Rng& rng,
                                    bool random_diag_theta = false) {
    for (int attempt = 0; attempt < 100000; ++attempt) {
        Eigen::MatrixXd phi = Eigen::MatrixXd::Zero(n, n);
        for (auto [from, to] : edges) {
            const double magnitude = rng.uniform(0.2, 1.0);
            phi(to - 1, from - 1) = rng.uniform() < 0.5 ? -magnitude : magnitude;
        }
        for (int i = 0; i < n; ++i) {
            double d = 0.0;
            do {
                d = rng.uniform(-0.5, 0.5);
            } while (std::abs(d) <= 1e-3);
            phi(i, i) = d;
        }
        Eigen::MatrixXd theta = Eigen::MatrixXd::Identity(n, n);
        if (random_diag_theta)
            for (int i = 0; i < n; ++i) theta(i, i) = rng.uniform(0.5, 2.0);
        VarParams params{{std::move(phi)}, std::move(theta)};
        if (check_stability(params).stable) return params;
    }
    throw resource_error("pattern sampler failed to find a stable draw");
}

/// Dense random stable model of the given dimension and order.
inline VarParams random_stable_var(int n, int p, Rng& rng) {
    for (int attempt = 0; attempt < 100000; ++attempt) {
        std::vector<Eigen::MatrixXd> phis;
        for (int k = 0; k < p; ++k) {
            Eigen::MatrixXd phi(n, n);
            for (int i = 0; i < n; ++i)
                for (int j = 0; j < n; ++j) phi(i, j) = rng.uniform(-0.6, 0.6) / p;
            phis.push_back(std::move(phi));
        }
        VarParams params{std::move(phis), Eigen::MatrixXd::Identity(n, n)};
        if (check_stability(params).stable) return params;
    }
    throw resource_error("dense sampler failed to find a stable draw");
}

inline Eigen::MatrixXd random_spd(int k, Rng& rng) {
    Eigen::MatrixXd a(k, k);
    for (int i = 0; i < k; ++i)
        for (int j = 0; j < k; ++j) a(i, j) = rng.uniform(-1.0, 1.0);
    return a.transpose() * a + 0.2 * Eigen::MatrixXd::Identity(k, k);
}

} // namespace ivproc::testing
