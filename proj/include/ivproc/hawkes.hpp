#pragma once

#include "ivproc/errors.hpp"
#include "ivproc/linalg.hpp"
#include "ivproc/rng.hpp"
#include "ivproc/series.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <utility>
#include <vector>

namespace ivproc {

/// Linear Hawkes model with exponential kernels: the conditional intensity
/// of process j is mu(j) plus, for every past event of process i at time s,
/// a contribution alpha(j, i) * exp(-beta(j, i) * (t - s)). The kernel
/// integral matrix phi(j, i) = alpha(j, i) / beta(j, i) is the expected
/// number of direct j-children of an i-event and is all the identification
/// formulas need.
struct HawkesParams {
    Eigen::VectorXd mu;
    Eigen::MatrixXd alpha;
    Eigen::MatrixXd beta;

    [[nodiscard]] int dim() const { return static_cast<int>(mu.size()); }

    [[nodiscard]] Eigen::MatrixXd kernel_integral() const {
        const int n = dim();
        Eigen::MatrixXd phi = Eigen::MatrixXd::Zero(n, n);
        for (int j = 0; j < n; ++j)
            for (int i = 0; i < n; ++i)
                if (alpha(j, i) > 0.0) phi(j, i) = alpha(j, i) / beta(j, i);
        return phi;
    }
};

inline HawkesParams make_hawkes_params(Eigen::VectorXd mu, Eigen::MatrixXd alpha,
                                       Eigen::MatrixXd beta) {
    const auto n = mu.size();
    if (n < 1) throw argument_error("model must have at least one coordinate process");
    if (alpha.rows() != n || alpha.cols() != n || beta.rows() != n || beta.cols() != n)
        throw argument_error("alpha and beta must be n x n for an n-dimensional model");
    if ((mu.array() <= 0.0).any()) throw argument_error("baseline rates must be positive");
    if ((alpha.array() < 0.0).any()) throw argument_error("excitation amplitudes must be nonnegative");
    if ((beta.array() < 0.0).any()) throw argument_error("decay rates must be nonnegative");
    for (Eigen::Index j = 0; j < n; ++j)
        for (Eigen::Index i = 0; i < n; ++i)
            if (alpha(j, i) > 0.0 && beta(j, i) <= 0.0)
                throw argument_error("decay rate must be positive wherever the amplitude is positive");
    return HawkesParams{std::move(mu), std::move(alpha), std::move(beta)};
}

/// Event times per coordinate process on the observation window [0, T].
struct EventLog {
    double horizon = 0.0;
    std::vector<std::vector<double>> events;

    [[nodiscard]] int dim() const { return static_cast<int>(events.size()); }
    [[nodiscard]] std::size_t total_events() const {
        std::size_t total = 0;
        for (const auto& p : events) total += p.size();
        return total;
    }
};

namespace detail {

inline void require_subcritical(const HawkesParams& m) {
    const double rho = spectral_radius(m.kernel_integral());
    if (rho >= 1.0)
        throw instability_error("kernel-integral spectral radius " + std::to_string(rho) +
                                " is not below 1");
}

} // namespace detail

/// Stationary intensity vector (I - phi)^(-1) mu.
inline Eigen::VectorXd hawkes_stationary_rates(const HawkesParams& m) {
    detail::require_subcritical(m);
    const int n = m.dim();
    const Eigen::MatrixXd gap = Eigen::MatrixXd::Identity(n, n) - m.kernel_integral();
    return guarded_solve(gap, m.mu, "I - phi");
}

/// Theoretical integrated covariance (I - phi)^(-1) diag(rate) (I - phi)^(-T);
/// same closed form as the discrete-time model with theta = diag(rate).
inline IntCov hawkes_integrated_cov(const HawkesParams& m) {
    const Eigen::VectorXd rates = hawkes_stationary_rates(m);
    const Eigen::MatrixXd theta = rates.asDiagonal();
    return make_intcov(integrated_cov_closed_form(m.kernel_integral(), theta),
                       CovProvenance::theoretical);
}

/// Expected number of generation-k offspring per type: phi^k (k = 0 is the
/// root itself).
inline Eigen::MatrixXd expected_offspring(const HawkesParams& m, int generation) {
    if (generation < 0) throw argument_error("generation must be nonnegative");
    const int n = m.dim();
    Eigen::MatrixXd power = Eigen::MatrixXd::Identity(n, n);
    const Eigen::MatrixXd phi = m.kernel_integral();
    for (int k = 0; k < generation; ++k) power = power * phi;
    return power;
}

/// Expected total descendants across all generations, R = (I - phi)^(-1).
inline Eigen::MatrixXd expected_total_offspring(const HawkesParams& m) {
    detail::require_subcritical(m);
    const int n = m.dim();
    const Eigen::MatrixXd gap = Eigen::MatrixXd::Identity(n, n) - m.kernel_integral();
    return guarded_solve(gap, Eigen::MatrixXd::Identity(n, n), "I - phi");
}

/// Ogata thinning with O(1) state updates per candidate. Between events
/// the intensity only decays, so the total intensity at the current time
/// bounds it until the next event. The process starts from an empty
/// history at time 0 (transient start); use discard_prefix to trim the
/// transient before computing statistics.
inline EventLog simulate_hawkes(const HawkesParams& m, double horizon, std::uint64_t seed,
                                std::uint64_t max_events = 50'000'000) {
    if (horizon <= 0.0) throw argument_error("horizon must be positive");
    detail::require_subcritical(m);

    const int n = m.dim();
    Rng rng(seed);
    // excitation(j, i): current contribution to process j's intensity from
    // past i-events; decays by exp(-beta(j, i) dt) between events
    Eigen::MatrixXd excitation = Eigen::MatrixXd::Zero(n, n);
    EventLog log;
    log.horizon = horizon;
    log.events.assign(static_cast<std::size_t>(n), {});

    const double base_rate = m.mu.sum();
    double t = 0.0;
    std::uint64_t count = 0;
    while (true) {
        const double bound = base_rate + excitation.sum();
        const double wait = rng.exponential(bound);
        if (t + wait >= horizon) break;
        t += wait;
        excitation.array() *= (-m.beta.array() * wait).exp();
        const Eigen::VectorXd intensity = m.mu + excitation.rowwise().sum();
        const double total = intensity.sum();
        if (rng.uniform() * bound <= total) {
            double pick = rng.uniform() * total;
            int j = 0;
            for (; j < n - 1; ++j) {
                pick -= intensity(j);
                if (pick <= 0.0) break;
            }
            log.events[static_cast<std::size_t>(j)].push_back(t);
            if (++count > max_events)
                throw resource_error("event cap of " + std::to_string(max_events) +
                                     " exceeded at t = " + std::to_string(t));
            excitation.col(j) += m.alpha.col(j);
        }
    }
    return log;
}

/// Drop all events at or before `prefix` and shift the remaining times so
/// the log starts at 0 again. Used to discard the transient of a
/// simulation started from an empty history.
inline EventLog discard_prefix(const EventLog& log, double prefix) {
    if (prefix < 0.0 || prefix >= log.horizon)
        throw argument_error("prefix must lie in [0, horizon)");
    EventLog out;
    out.horizon = log.horizon - prefix;
    out.events.reserve(log.events.size());
    for (const auto& times : log.events) {
        std::vector<double> shifted;
        for (double s : times)
            if (s > prefix) shifted.push_back(s - prefix);
        out.events.push_back(std::move(shifted));
    }
    return out;
}

/// First- and second-order cumulant estimates from an event log: the rate
/// vector and the windowed integrated-covariance estimate with half-width H.
struct CumulantEstimates {
    Eigen::VectorXd lambda_hat;
    Eigen::MatrixXd c_hat;
    double half_width = 0.0;
    double horizon = 0.0;
    std::vector<int> empty_processes; // 1-based indices with no events
};

/// rate(i) = m_i / T and, for each event of process i, the count of
/// j-events within (t - H, t + H] minus the expected 2 H rate(j), summed
/// and divided by T. The raw second-order formula is asymmetric in finite
/// samples; the estimate is symmetrized since the estimand is symmetric.
/// Window truncation introduces a bias that vanishes for H large relative
/// to the kernel support.
inline CumulantEstimates estimate_hawkes_cumulants(const EventLog& log, double half_width) {
    const double horizon = log.horizon;
    if (!(half_width > 0.0) || !(half_width < horizon / 2.0))
        throw argument_error("window half-width must lie in (0, T/2)");
    const int n = log.dim();
    CumulantEstimates est;
    est.half_width = half_width;
    est.horizon = horizon;
    est.lambda_hat = Eigen::VectorXd::Zero(n);
    for (int i = 0; i < n; ++i) {
        est.lambda_hat(i) =
            static_cast<double>(log.events[static_cast<std::size_t>(i)].size()) / horizon;
        if (log.events[static_cast<std::size_t>(i)].empty()) est.empty_processes.push_back(i + 1);
    }

    Eigen::MatrixXd c = Eigen::MatrixXd::Zero(n, n);
    for (int i = 0; i < n; ++i) {
        for (int j = 0; j < n; ++j) {
            const auto& centers = log.events[static_cast<std::size_t>(i)];
            const auto& counted = log.events[static_cast<std::size_t>(j)];
            const double expected = 2.0 * half_width * est.lambda_hat(j);
            double sum = 0.0;
            for (double t : centers) {
                const auto lo = std::upper_bound(counted.begin(), counted.end(), t - half_width);
                const auto hi = std::upper_bound(counted.begin(), counted.end(), t + half_width);
                sum += static_cast<double>(hi - lo) - expected;
            }
            c(i, j) = sum / horizon;
        }
    }
    est.c_hat = 0.5 * (c + c.transpose());
    return est;
}

/// Default window half-width: T^0.4, enlarged if needed so a window is
/// expected to hold at least 50 events of the slowest process, and kept
/// inside the admissible range (0, T/2). This is the consistency-regime
/// rule (window growing with T, squared window negligible against T); when
/// the kernel decay rates are known, a window of a few kernel time
/// constants has far lower variance at moderate horizons.
inline double default_window_half_width(double horizon, const Eigen::VectorXd& rates) {
    double h = std::pow(horizon, 0.4);
    const double min_rate = rates.size() > 0 ? rates.minCoeff() : 0.0;
    if (min_rate > 0.0) h = std::max(h, 25.0 / min_rate);
    return std::min(h, 0.49 * horizon);
}

/// Slowest decay rate among entries with positive excitation; +infinity
/// for a model with no excitation at all.
inline double min_active_decay(const HawkesParams& m) {
    double slowest = std::numeric_limits<double>::infinity();
    for (Eigen::Index j = 0; j < m.alpha.rows(); ++j)
        for (Eigen::Index i = 0; i < m.alpha.cols(); ++i)
            if (m.alpha(j, i) > 0.0) slowest = std::min(slowest, m.beta(j, i));
    return slowest;
}

} // namespace ivproc
