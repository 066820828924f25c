#pragma once

#include "ivproc/errors.hpp"
#include "ivproc/graph.hpp"
#include "ivproc/linalg.hpp"
#include "ivproc/rng.hpp"
#include "ivproc/series.hpp"

#include <Eigen/Dense>

#include <cmath>
#include <cstdint>
#include <utility>
#include <vector>

namespace ivproc {

inline constexpr double kStabilityMargin = 1e-9;
inline constexpr double kEdgeThreshold = 1e-12;

enum class Innovations { gaussian };

/// Autoregressive model of order p: X_t = sum_k phi[k] X_{t-k} + eps_t with
/// innovation covariance theta. Construction validates shapes and that
/// theta is symmetric PSD; stability is reported separately by
/// check_stability so that unstable parameter sets remain representable.
struct VarParams {
    std::vector<Eigen::MatrixXd> phis;
    Eigen::MatrixXd theta;

    [[nodiscard]] int dim() const { return static_cast<int>(theta.rows()); }
    [[nodiscard]] int order() const { return static_cast<int>(phis.size()); }

    /// Total direct effect across lags, phi = sum_k phi[k].
    [[nodiscard]] Eigen::MatrixXd phi_total() const {
        Eigen::MatrixXd total = Eigen::MatrixXd::Zero(dim(), dim());
        for (const auto& p : phis) total += p;
        return total;
    }
};

inline VarParams make_var_params(std::vector<Eigen::MatrixXd> phis, Eigen::MatrixXd theta) {
    if (phis.empty()) throw argument_error("a VAR model needs at least one lag matrix");
    const auto n = theta.rows();
    if (n < 1 || theta.cols() != n) throw argument_error("theta must be square and non-empty");
    for (const auto& p : phis)
        if (p.rows() != n || p.cols() != n)
            throw argument_error("all lag matrices must match theta's dimension");
    if (!is_psd(theta, -1e-10))
        throw argument_error("theta must be symmetric positive semidefinite");
    return VarParams{std::move(phis), std::move(theta)};
}

/// Block companion matrix stacking the lag matrices in the first block row
/// with identity blocks on the subdiagonal.
inline Eigen::MatrixXd companion_matrix(const VarParams& m) {
    const int n = m.dim();
    const int p = m.order();
    Eigen::MatrixXd comp = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(n) * p,
                                                 static_cast<Eigen::Index>(n) * p);
    for (int k = 0; k < p; ++k) comp.block(0, static_cast<Eigen::Index>(k) * n, n, n) = m.phis[static_cast<std::size_t>(k)];
    for (int k = 1; k < p; ++k)
        comp.block(static_cast<Eigen::Index>(k) * n, static_cast<Eigen::Index>(k - 1) * n, n, n) =
            Eigen::MatrixXd::Identity(n, n);
    return comp;
}

struct StabilityReport {
    double spectral_radius = 0.0;
    bool stable = false;
};

inline StabilityReport check_stability(const VarParams& m) {
    const double rho = spectral_radius(companion_matrix(m));
    return StabilityReport{rho, rho < 1.0 - kStabilityMargin};
}

/// Order-1 embedding of an order-p model: dimension n*p, lag matrices in
/// the first block row, theta in the top-left block and zeros elsewhere.
inline VarParams companion_embed(const VarParams& m) {
    if (m.order() == 1) return m;
    const int n = m.dim();
    const int np = n * m.order();
    Eigen::MatrixXd theta_embedded = Eigen::MatrixXd::Zero(np, np);
    theta_embedded.topLeftCorner(n, n) = m.theta;
    return VarParams{{companion_matrix(m)}, std::move(theta_embedded)};
}

/// Theoretical integrated covariance C = (I - phi)^(-1) theta (I - phi)^(-T)
/// with phi the sum of the lag matrices. Requires a stable model.
inline IntCov var_integrated_cov(const VarParams& m) {
    const auto stability = check_stability(m);
    if (!stability.stable)
        throw instability_error("integrated covariance requires a stable model (spectral radius " +
                                std::to_string(stability.spectral_radius) + ")");
    return make_intcov(integrated_cov_closed_form(m.phi_total(), m.theta),
                       CovProvenance::theoretical);
}

/// Simulate the recursion with independent mean-zero innovations of
/// covariance theta. The first `burn_in` points after a zero initial state
/// are discarded. Deterministic given the seed.
inline SeriesData simulate_var(const VarParams& m, long len, long burn_in, std::uint64_t seed,
                               Innovations innovations = Innovations::gaussian) {
    if (len < 1) throw argument_error("series length must be at least 1");
    if (burn_in < 0) throw argument_error("burn-in must be nonnegative");
    const auto stability = check_stability(m);
    if (!stability.stable)
        throw instability_error("refusing to simulate an unstable model (spectral radius " +
                                std::to_string(stability.spectral_radius) + ")");
    (void)innovations; // gaussian is the only implemented tag

    const int n = m.dim();
    const int p = m.order();
    const Eigen::MatrixXd noise_transform = psd_sqrt(m.theta);
    Rng rng(seed);

    // ring buffer of the last p states, all-zero start
    std::vector<Eigen::VectorXd> history(static_cast<std::size_t>(p), Eigen::VectorXd::Zero(n));
    const auto slot = [p](long t) { return static_cast<std::size_t>(((t % p) + p) % p); };
    Eigen::MatrixXd out(len, n);
    Eigen::VectorXd z(n);
    long written = 0;
    for (long t = 0; t < burn_in + len; ++t) {
        Eigen::VectorXd x = Eigen::VectorXd::Zero(n);
        for (int k = 1; k <= p; ++k)
            x += m.phis[static_cast<std::size_t>(k - 1)] * history[slot(t - k)];
        for (int i = 0; i < n; ++i) z(i) = rng.normal();
        x += noise_transform * z;
        history[slot(t)] = x;
        if (t >= burn_in) out.row(written++) = x.transpose();
    }
    return SeriesData{std::move(out)};
}

/// Rescale a solution pair of the integrated covariance equation by a
/// diagonal matrix d: phi_bar = I - d (I - phi), theta_bar = d theta d.
/// The pair (phi_bar, theta_bar) solves the same equation, which is the
/// source of the non-identifiability of unnormalized direct effects.
inline std::pair<Eigen::MatrixXd, Eigen::MatrixXd> rescale(const Eigen::MatrixXd& phi,
                                                           const Eigen::MatrixXd& theta,
                                                           const Eigen::MatrixXd& d) {
    const auto n = phi.rows();
    if (phi.cols() != n || theta.rows() != n || theta.cols() != n || d.rows() != n || d.cols() != n)
        throw argument_error("phi, theta, and d must be square matrices of equal dimension");
    for (Eigen::Index i = 0; i < n; ++i)
        for (Eigen::Index j = 0; j < n; ++j)
            if (i != j && d(i, j) != 0.0) throw argument_error("d must be diagonal");
    for (Eigen::Index i = 0; i < n; ++i)
        if (d(i, i) == 0.0) throw argument_error("diagonal entries of d must be nonzero");

    Eigen::MatrixXd phi_bar =
        Eigen::MatrixXd::Identity(n, n) - d * (Eigen::MatrixXd::Identity(n, n) - phi);
    Eigen::MatrixXd theta_bar = d * theta * d;
    return {std::move(phi_bar), std::move(theta_bar)};
}

/// Normalize a solution pair so that phi has a zero diagonal:
/// phi_bar(j, i) = phi(j, i) / (1 - phi(j, j)) for j != i.
inline std::pair<Eigen::MatrixXd, Eigen::MatrixXd> normalize(const Eigen::MatrixXd& phi,
                                                             const Eigen::MatrixXd& theta) {
    const auto n = phi.rows();
    if (phi.cols() != n || theta.rows() != n || theta.cols() != n)
        throw argument_error("phi and theta must be square matrices of equal dimension");
    Eigen::MatrixXd d = Eigen::MatrixXd::Zero(n, n);
    for (Eigen::Index i = 0; i < n; ++i) {
        const double gap = 1.0 - phi(i, i);
        if (std::abs(gap) <= 1e-10)
            throw singularity_error("cannot normalize: phi(" + std::to_string(i + 1) + ", " +
                                    std::to_string(i + 1) + ") equals 1");
        d(i, i) = 1.0 / gap;
    }
    auto [phi_bar, theta_bar] = rescale(phi, theta, d);
    phi_bar.diagonal().setZero(); // exact by construction up to round-off
    return {std::move(phi_bar), std::move(theta_bar)};
}

/// (I_b - phi_BB)^(-1) phi_BA for a total-effect matrix phi: the direct
/// effect of the treatment processes on the entire future of the outcome
/// processes, counting outcome self-effects.
inline Eigen::MatrixXd normalized_effect(const Eigen::MatrixXd& phi, const NodeSet& treatments,
                                         const NodeSet& outcomes) {
    if (treatments.empty() || outcomes.empty())
        throw argument_error("treatment and outcome sets must be non-empty");
    const Eigen::MatrixXd phi_bb = submatrix(phi, outcomes, outcomes);
    const Eigen::MatrixXd phi_ba = submatrix(phi, outcomes, treatments);
    const Eigen::MatrixXd gap =
        Eigen::MatrixXd::Identity(phi_bb.rows(), phi_bb.cols()) - phi_bb;
    return guarded_solve(gap, phi_ba, "I - phi_BB");
}

/// Ground-truth estimand of a model, with phi the summed lag matrices.
inline Eigen::MatrixXd normalized_effect(const VarParams& m, const NodeSet& treatments,
                                         const NodeSet& outcomes) {
    return normalized_effect(m.phi_total(), treatments, outcomes);
}

/// Causal graph of the model: i -> j iff some lag matrix has a nonzero
/// (j, i) entry, with |entry| > 1e-12 counting as nonzero.
inline CausalGraph build_graph(const VarParams& m) {
    std::vector<std::pair<int, int>> edges;
    const int n = m.dim();
    for (int i = 1; i <= n; ++i)
        for (int j = 1; j <= n; ++j) {
            if (i == j) continue;
            for (const auto& phi : m.phis)
                if (std::abs(phi(j - 1, i - 1)) > kEdgeThreshold) {
                    edges.emplace_back(i, j);
                    break;
                }
        }
    return CausalGraph(n, std::move(edges));
}

} // namespace ivproc
