#pragma once

#include "ivproc/errors.hpp"
#include "ivproc/graph.hpp"

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>

#include <string>

namespace ivproc {

inline constexpr double kMaxConditionNumber = 1e12;

/// Largest absolute eigenvalue of a square real matrix.
inline double spectral_radius(const Eigen::MatrixXd& m) {
    if (m.rows() != m.cols()) throw argument_error("spectral radius needs a square matrix");
    if (m.rows() == 0) return 0.0;
    Eigen::EigenSolver<Eigen::MatrixXd> solver(m, /*computeEigenvectors=*/false);
    return solver.eigenvalues().cwiseAbs().maxCoeff();
}

namespace detail {

inline Eigen::JacobiSVD<Eigen::MatrixXd> guarded_svd(const Eigen::MatrixXd& a,
                                                     const std::string& what) {
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(a);
    const auto& sv = svd.singularValues();
    const double smax = sv.size() > 0 ? sv(0) : 0.0;
    const double smin = sv.size() > 0 ? sv(sv.size() - 1) : 0.0;
    if (smin <= 0.0 || smax / smin > kMaxConditionNumber)
        throw singularity_error(what + " is singular or ill-conditioned (cond > 1e12)");
    return svd;
}

} // namespace detail

/// Solve A X = B with a condition-number guard on A.
inline Eigen::MatrixXd guarded_solve(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b,
                                     const std::string& what) {
    if (a.rows() != a.cols()) throw argument_error(what + " must be square");
    detail::guarded_svd(a, what);
    return a.partialPivLu().solve(b);
}

/// C = (I - phi)^{-1} theta (I - phi)^{-T}, the closed form shared by the
/// discrete-time and point-process models. Result is symmetrized to remove
/// solver round-off.
inline Eigen::MatrixXd integrated_cov_closed_form(const Eigen::MatrixXd& phi,
                                                  const Eigen::MatrixXd& theta) {
    const auto n = phi.rows();
    if (phi.cols() != n || theta.rows() != n || theta.cols() != n)
        throw argument_error("phi and theta must be square matrices of equal dimension");
    const Eigen::MatrixXd a = Eigen::MatrixXd::Identity(n, n) - phi;
    const Eigen::MatrixXd left = guarded_solve(a, theta, "I - phi");
    Eigen::MatrixXd c = guarded_solve(a, left.transpose(), "I - phi").transpose();
    return 0.5 * (c + c.transpose());
}

/// Rows/columns of `m` selected by 1-based node sets, in ascending order.
inline Eigen::MatrixXd submatrix(const Eigen::MatrixXd& m, const NodeSet& rows,
                                 const NodeSet& cols) {
    Eigen::MatrixXd out(static_cast<Eigen::Index>(rows.size()),
                        static_cast<Eigen::Index>(cols.size()));
    Eigen::Index r = 0;
    for (int i : rows) {
        if (i < 1 || i > m.rows()) throw domain_error("row index " + std::to_string(i) + " out of range");
        Eigen::Index c = 0;
        for (int j : cols) {
            if (j < 1 || j > m.cols())
                throw domain_error("column index " + std::to_string(j) + " out of range");
            out(r, c) = m(i - 1, j - 1);
            ++c;
        }
        ++r;
    }
    return out;
}

inline bool is_symmetric(const Eigen::MatrixXd& m, double rel_tol) {
    const double scale = std::max(1.0, m.cwiseAbs().maxCoeff());
    return (m - m.transpose()).cwiseAbs().maxCoeff() <= rel_tol * scale;
}

/// Symmetric positive semidefinite check with an absolute eigenvalue floor.
inline bool is_psd(const Eigen::MatrixXd& m, double eig_floor = -1e-10) {
    if (!is_symmetric(m, 1e-8)) return false;
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(0.5 * (m + m.transpose()));
    return solver.eigenvalues().minCoeff() >= eig_floor;
}

/// Symmetric square root of a PSD matrix; small negative eigenvalues are
/// clamped to zero.
inline Eigen::MatrixXd psd_sqrt(const Eigen::MatrixXd& m) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(0.5 * (m + m.transpose()));
    Eigen::VectorXd eigs = solver.eigenvalues().cwiseMax(0.0).cwiseSqrt();
    return solver.eigenvectors() * eigs.asDiagonal() * solver.eigenvectors().transpose();
}

} // namespace ivproc
