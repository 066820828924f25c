#pragma once

#include "ivproc/errors.hpp"
#include "ivproc/series.hpp"

#include <Eigen/Dense>

#include <cmath>
#include <numbers>
#include <optional>

namespace ivproc {

enum class Kernel { bartlett, truncated, quadratic_spectral };

/// Settings for the kernel-weighted long-run covariance estimator. With no
/// explicit bandwidth, an AR(1) plug-in rule picks one from the data. With
/// prewhiten set (the default, as in the usual estimator implementations),
/// a first-order autoregression is fitted and removed first, the kernel
/// estimator runs on the residuals, and the result is recolored through
/// (I - A)^(-1). Beyond reducing variance for persistent series, the
/// first-order filter also captures pure cross-lag covariance that the
/// per-coordinate bandwidth rule cannot see.
struct LrcovConfig {
    Kernel kernel = Kernel::bartlett;
    std::optional<double> bandwidth; // empty = automatic
    bool demean = true;
    bool prewhiten = true;
};

struct LrcovDiagnostics {
    double bandwidth = 0.0;
    long max_lag = 0;
    bool bandwidth_fallback = false;
    bool prewhitened = false;
};

inline double kernel_weight(Kernel kernel, double x) {
    const double ax = std::abs(x);
    switch (kernel) {
    case Kernel::bartlett:
        return ax < 1.0 ? 1.0 - ax : 0.0;
    case Kernel::truncated:
        return ax <= 1.0 ? 1.0 : 0.0;
    case Kernel::quadratic_spectral: {
        if (ax < 1e-12) return 1.0;
        const double z = 6.0 * std::numbers::pi * x / 5.0;
        return 25.0 / (12.0 * std::numbers::pi * std::numbers::pi * x * x) *
               (std::sin(z) / z - std::cos(z));
    }
    }
    return 0.0;
}

namespace detail {

/// Sample autocovariance of a (possibly centered) data matrix at lag k >= 0
/// with the 1/len divisor: G(k)(i, j) = (1/len) sum_t y(t, i) y(t + k, j).
inline Eigen::MatrixXd autocov_of(const Eigen::MatrixXd& y, long k) {
    const long len = y.rows();
    const Eigen::Index used = static_cast<Eigen::Index>(len - k);
    return y.topRows(used).transpose() * y.bottomRows(used) / static_cast<double>(len);
}

/// Andrews-style AR(1) plug-in bandwidth. Fits an AR(1) per coordinate,
/// combines them into the alpha(q) curvature summary for the kernel's
/// characteristic exponent, and returns c_k (alpha(q) len)^(1/(2q+1)).
/// Degenerate fits (near unit root, zero variance, non-finite summaries)
/// report failure so the caller can fall back.
inline bool andrews_bandwidth(const Eigen::MatrixXd& y, Kernel kernel, double& bandwidth) {
    const long len = y.rows();
    const int n = static_cast<int>(y.cols());
    double num1 = 0.0, num2 = 0.0, den = 0.0;
    for (int a = 0; a < n; ++a) {
        double cross = 0.0, lagsq = 0.0;
        for (long t = 1; t < len; ++t) {
            cross += y(t, a) * y(t - 1, a);
            lagsq += y(t - 1, a) * y(t - 1, a);
        }
        if (lagsq <= 0.0) return false;
        const double rho = cross / lagsq;
        double rss = 0.0;
        for (long t = 1; t < len; ++t) {
            const double resid = y(t, a) - rho * y(t - 1, a);
            rss += resid * resid;
        }
        const double sigma2 = rss / static_cast<double>(len - 1);
        if (!std::isfinite(rho) || std::abs(rho) >= 0.9999 || sigma2 <= 0.0) return false;
        const double s4 = sigma2 * sigma2;
        const double omr = 1.0 - rho;
        const double opr = 1.0 + rho;
        num1 += 4.0 * rho * rho * s4 / (std::pow(omr, 6) * opr * opr);
        num2 += 4.0 * rho * rho * s4 / std::pow(omr, 8);
        den += s4 / std::pow(omr, 4);
    }
    if (den <= 0.0) return false;
    double alpha = 0.0, constant = 0.0, exponent = 0.0;
    switch (kernel) {
    case Kernel::bartlett:
        alpha = num1 / den;
        constant = 1.1447;
        exponent = 1.0 / 3.0;
        break;
    case Kernel::truncated:
        alpha = num2 / den;
        constant = 0.6611;
        exponent = 1.0 / 5.0;
        break;
    case Kernel::quadratic_spectral:
        alpha = num2 / den;
        constant = 1.3221;
        exponent = 1.0 / 5.0;
        break;
    }
    if (!std::isfinite(alpha) || alpha < 0.0) return false;
    bandwidth = constant * std::pow(alpha * static_cast<double>(len), exponent);
    return std::isfinite(bandwidth);
}

} // namespace detail

/// Sample autocovariance at a signed lag, demeaned, with the 1/len divisor;
/// G(-k) = G(k)^T.
inline Eigen::MatrixXd autocovariance(const SeriesData& x, long lag) {
    const long len = x.len();
    if (std::abs(lag) >= len)
        throw argument_error("lag magnitude must be smaller than the series length");
    Eigen::MatrixXd y = x.values.rowwise() - x.values.colwise().mean();
    if (lag >= 0) return detail::autocov_of(y, lag);
    return detail::autocov_of(y, -lag).transpose();
}

namespace detail {

/// Kernel sum on an already-centered data matrix.
inline Eigen::MatrixXd kernel_sum(const Eigen::MatrixXd& y, const LrcovConfig& cfg,
                                  LrcovDiagnostics& diag) {
    const long len = y.rows();
    if (cfg.bandwidth) {
        if (*cfg.bandwidth <= 0.0) throw argument_error("bandwidth must be positive");
        if (*cfg.bandwidth >= static_cast<double>(len))
            throw argument_error("bandwidth must be smaller than the series length");
        diag.bandwidth = *cfg.bandwidth;
    } else {
        if (len < 50) throw argument_error("automatic bandwidth needs at least 50 observations");
        if (!andrews_bandwidth(y, cfg.kernel, diag.bandwidth)) {
            diag.bandwidth = std::cbrt(static_cast<double>(len));
            diag.bandwidth_fallback = true;
        }
    }
    diag.max_lag = std::min<long>(len - 1, static_cast<long>(std::floor(diag.bandwidth)));
    Eigen::MatrixXd c = autocov_of(y, 0);
    for (long k = 1; k <= diag.max_lag; ++k) {
        const double w = kernel_weight(cfg.kernel, static_cast<double>(k) / diag.bandwidth);
        if (w == 0.0) continue;
        const Eigen::MatrixXd g = autocov_of(y, k);
        c += w * (g + g.transpose());
    }
    return 0.5 * (c + c.transpose());
}

/// Least-squares first-order autoregression with the usual 0.97 cap on the
/// singular values so that I - A stays well away from singular. Returns a
/// zero matrix when the lag Gram matrix is degenerate, which turns the
/// prewhitened estimator back into the plain one.
inline Eigen::MatrixXd prewhitening_coefficient(const Eigen::MatrixXd& y) {
    const long len = y.rows();
    const auto n = y.cols();
    Eigen::MatrixXd cross = Eigen::MatrixXd::Zero(n, n);
    Eigen::MatrixXd gram = Eigen::MatrixXd::Zero(n, n);
    for (long t = 1; t < len; ++t) {
        cross += y.row(t).transpose() * y.row(t - 1);
        gram += y.row(t - 1).transpose() * y.row(t - 1);
    }
    Eigen::JacobiSVD<Eigen::MatrixXd> gram_svd(gram);
    const auto& sv = gram_svd.singularValues();
    if (sv(0) <= 0.0 || sv(sv.size() - 1) / sv(0) < 1e-12) return Eigen::MatrixXd::Zero(n, n);
    Eigen::MatrixXd a = gram.ldlt().solve(cross.transpose()).transpose();
    if (!a.allFinite()) return Eigen::MatrixXd::Zero(n, n);
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(a, Eigen::ComputeFullU | Eigen::ComputeFullV);
    if (svd.singularValues()(0) > 0.97) {
        const Eigen::VectorXd capped = svd.singularValues().cwiseMin(0.97);
        a = svd.matrixU() * capped.asDiagonal() * svd.matrixV().transpose();
    }
    return a;
}

} // namespace detail

/// Kernel-weighted sum of sample autocovariances estimating the integrated
/// covariance: C = sum_{|k| <= b} w(k / b) G(k). The 1/len divisor keeps
/// the Bartlett-weighted sum positive semidefinite. With cfg.prewhiten the
/// sum runs on first-order autoregression residuals and is recolored.
inline IntCov long_run_cov(const SeriesData& x, const LrcovConfig& cfg,
                           LrcovDiagnostics* diagnostics = nullptr) {
    const long len = x.len();
    const int n = x.dim();

    Eigen::MatrixXd y = x.values;
    if (cfg.demean) y = y.rowwise() - y.colwise().mean();

    LrcovDiagnostics diag;
    Eigen::MatrixXd c;
    if (cfg.prewhiten && len >= 3) {
        const Eigen::MatrixXd a = detail::prewhitening_coefficient(y);
        Eigen::MatrixXd resid(len - 1, n);
        for (long t = 1; t < len; ++t)
            resid.row(t - 1) = y.row(t) - y.row(t - 1) * a.transpose();
        const Eigen::MatrixXd inner = detail::kernel_sum(resid, cfg, diag);
        const Eigen::MatrixXd gap = Eigen::MatrixXd::Identity(n, n) - a;
        const Eigen::MatrixXd left = gap.partialPivLu().solve(inner);
        c = gap.partialPivLu().solve(left.transpose()).transpose();
        c = 0.5 * (c + c.transpose());
        diag.prewhitened = true;
    } else {
        c = detail::kernel_sum(y, cfg, diag);
    }
    if (diagnostics) *diagnostics = diag;

    IntCov out;
    out.c = std::move(c);
    out.provenance = CovProvenance::estimated;
    out.labels = default_labels(n);
    return out;
}

} // namespace ivproc
