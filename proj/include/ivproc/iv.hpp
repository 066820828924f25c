#pragma once

#include "ivproc/errors.hpp"
#include "ivproc/graph.hpp"
#include "ivproc/hawkes.hpp"
#include "ivproc/lrcov.hpp"
#include "ivproc/series.hpp"

#include <Eigen/Dense>

#include <cmath>
#include <optional>
#include <string>
#include <utility>

namespace ivproc {

inline constexpr double kDefaultRankTolScale = 1e-8;

/// An instrumental-process estimation problem: disjoint non-empty process
/// sets I (instruments), A (treatments), B (outcomes), an optional
/// symmetric positive-definite weight for the overidentified case, and the
/// singular-value threshold for the rank condition on C_AI. When rank_tol
/// is empty the threshold is relative: 1e-8 times the largest singular
/// value of C_AI.
struct IvProblem {
    NodeSet instruments;
    NodeSet treatments;
    NodeSet outcomes;
    std::optional<Eigen::MatrixXd> weight;
    std::optional<double> rank_tol;
};

inline void validate_problem(const IvProblem& prob) {
    if (prob.instruments.empty() || prob.treatments.empty() || prob.outcomes.empty())
        throw argument_error("instrument, treatment, and outcome sets must be non-empty");
    if (!prob.instruments.disjoint_with(prob.treatments) ||
        !prob.instruments.disjoint_with(prob.outcomes) ||
        !prob.treatments.disjoint_with(prob.outcomes))
        throw argument_error("instrument, treatment, and outcome sets must be pairwise disjoint");
    if (prob.instruments.size() < prob.treatments.size())
        throw argument_error("need at least as many instruments as treatments");
    if (prob.weight) {
        const auto k = static_cast<Eigen::Index>(prob.instruments.size());
        if (prob.weight->rows() != k || prob.weight->cols() != k)
            throw argument_error("weight must be |I| x |I|");
        if (!is_symmetric(*prob.weight, 1e-10))
            throw argument_error("weight must be symmetric");
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(*prob.weight);
        if (solver.eigenvalues().minCoeff() <= 0.0)
            throw argument_error("weight must be positive definite");
    }
}

enum class IvMethod { ratio, just_identified, overidentified };

inline const char* to_string(IvMethod m) {
    switch (m) {
    case IvMethod::ratio: return "ratio";
    case IvMethod::just_identified: return "just_identified";
    case IvMethod::overidentified: return "overidentified";
    }
    return "unknown";
}

struct IvDiagnostics {
    double smallest_singular_value = 0.0;
    double largest_singular_value = 0.0;
    double rank_tol_used = 0.0;
    bool rank_ok = false;
};

struct EstimationResult {
    Eigen::MatrixXd estimate; // |B| x |A|
    IvMethod method = IvMethod::just_identified;
    IvDiagnostics diagnostics;
};

namespace detail {

inline IvDiagnostics instrument_block_diagnostics(const Eigen::MatrixXd& c_ai,
                                                  std::optional<double> rank_tol) {
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(c_ai);
    IvDiagnostics diag;
    diag.largest_singular_value = svd.singularValues().size() > 0 ? svd.singularValues()(0) : 0.0;
    diag.smallest_singular_value =
        svd.singularValues().size() > 0 ? svd.singularValues()(svd.singularValues().size() - 1) : 0.0;
    diag.rank_tol_used = rank_tol.value_or(kDefaultRankTolScale * diag.largest_singular_value);
    diag.rank_ok = diag.smallest_singular_value > diag.rank_tol_used;
    return diag;
}

[[noreturn]] inline void throw_rank_failure(const IvDiagnostics& diag) {
    throw weak_instrument_error(
        "C_AI fails the rank condition: smallest singular value " +
        std::to_string(diag.smallest_singular_value) + " <= tolerance " +
        std::to_string(diag.rank_tol_used));
}

} // namespace detail

/// Single-instrument identification: C(outcome, instrument) divided by
/// C(treatment, instrument). Under the instrumental-process conditions
/// this equals the normalized effect phi_ba / (1 - phi_bb).
inline double iv_ratio(const IntCov& c, int instrument, int treatment, int outcome,
                       std::optional<double> rank_tol = {}) {
    if (instrument == treatment || instrument == outcome || treatment == outcome)
        throw argument_error("instrument, treatment, and outcome must be distinct");
    const double c_ai = c.entry(treatment, instrument);
    const double c_bi = c.entry(outcome, instrument);
    // relative default, scaled by the larger of the two entries so an
    // exactly uninformative instrument (both entries zero) still trips it
    const double tol =
        rank_tol.value_or(kDefaultRankTolScale * std::max(std::abs(c_ai), std::abs(c_bi)));
    if (std::abs(c_ai) <= tol)
        throw weak_instrument_error("C(treatment, instrument) = " + std::to_string(c_ai) +
                                    " is within tolerance " + std::to_string(tol) + " of zero");
    return c_bi / c_ai;
}

/// Just-identified multivariate case (|I| = |A|): C_BI (C_AI)^(-1).
inline EstimationResult iv_just_identified(const IntCov& c, const IvProblem& prob) {
    validate_problem(prob);
    if (prob.instruments.size() != prob.treatments.size())
        throw argument_error("just-identified estimation needs |I| = |A|");
    const Eigen::MatrixXd c_ai = c.block(prob.treatments, prob.instruments);
    const Eigen::MatrixXd c_bi = c.block(prob.outcomes, prob.instruments);

    EstimationResult result;
    result.method = IvMethod::just_identified;
    result.diagnostics = detail::instrument_block_diagnostics(c_ai, prob.rank_tol);
    if (!result.diagnostics.rank_ok) detail::throw_rank_failure(result.diagnostics);
    // estimate = C_BI C_AI^{-1}, computed as a solve on the transposed system
    result.estimate = c_ai.transpose().partialPivLu().solve(c_bi.transpose()).transpose();
    return result;
}

/// Overidentified case (|I| >= |A|) with a positive-definite weight W:
/// C_BI W C_AI^T (C_AI W C_AI^T)^(-1). Any choice of W (equivalently, any
/// right inverse of C_AI) identifies the same matrix on a valid problem.
inline EstimationResult iv_overidentified(const IntCov& c, const IvProblem& prob) {
    validate_problem(prob);
    const Eigen::MatrixXd c_ai = c.block(prob.treatments, prob.instruments);
    const Eigen::MatrixXd c_bi = c.block(prob.outcomes, prob.instruments);
    const auto k = static_cast<Eigen::Index>(prob.instruments.size());
    const Eigen::MatrixXd w =
        prob.weight ? *prob.weight : Eigen::MatrixXd::Identity(k, k);

    EstimationResult result;
    result.method = IvMethod::overidentified;
    result.diagnostics = detail::instrument_block_diagnostics(c_ai, prob.rank_tol);
    if (!result.diagnostics.rank_ok) detail::throw_rank_failure(result.diagnostics);
    const Eigen::MatrixXd gram = c_ai * w * c_ai.transpose();
    result.estimate =
        gram.transpose().partialPivLu().solve((c_bi * w * c_ai.transpose()).transpose()).transpose();
    return result;
}

/// Dispatch on the instrument count: square problems without an explicit
/// weight use the plain inverse, everything else the weighted right inverse.
inline EstimationResult iv_estimate(const IntCov& c, const IvProblem& prob) {
    validate_problem(prob);
    if (prob.instruments.size() == prob.treatments.size() && !prob.weight)
        return iv_just_identified(c, prob);
    return iv_overidentified(c, prob);
}

/// Series pipeline: long-run covariance first, then the covariance-level
/// formulas. The estimated covariance carries process labels 1..n, so the
/// problem's index sets address series columns directly.
inline EstimationResult iv_estimate_series(const SeriesData& x, const IvProblem& prob,
                                           const LrcovConfig& cfg = {},
                                           LrcovDiagnostics* lrcov_diag = nullptr) {
    validate_problem(prob);
    const NodeSet used = prob.instruments.unite(prob.treatments).unite(prob.outcomes);
    for (int node : used)
        if (node < 1 || node > x.dim())
            throw domain_error("series has no coordinate " + std::to_string(node));
    const IntCov c = long_run_cov(x, cfg, lrcov_diag);
    return iv_estimate(c, prob);
}

/// Event-log pipeline: windowed cumulant estimates first, then the same
/// covariance-level formulas as the series path.
inline EstimationResult iv_estimate_events(const EventLog& log, const IvProblem& prob,
                                           double half_width) {
    validate_problem(prob);
    const NodeSet used = prob.instruments.unite(prob.treatments).unite(prob.outcomes);
    for (int node : used)
        if (node < 1 || node > log.dim())
            throw domain_error("event log has no process " + std::to_string(node));
    const CumulantEstimates cumulants = estimate_hawkes_cumulants(log, half_width);
    IntCov c;
    c.c = cumulants.c_hat;
    c.provenance = CovProvenance::estimated;
    c.labels = default_labels(log.dim());
    return iv_estimate(c, prob);
}

} // namespace ivproc
