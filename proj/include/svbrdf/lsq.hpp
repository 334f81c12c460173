#pragma once

#include <cmath>
#include <limits>
#include <vector>

#include <Eigen/Dense>

#include "brdf.hpp"

namespace svbrdf {

/// Accumulated linear least-squares problem  min ||A x - y||^2  with a small
/// number of unknowns. Rows are appended one observation at a time.
class LinearSystem {
public:
    explicit LinearSystem(std::size_t n_unknowns) : n_(n_unknowns) {}

    void add(const Coeffs& row, double target) {
        if (row.size() != n_) throw Error(ErrorKind::model_arity, "observation row has wrong length");
        for (std::size_t j = 0; j < n_; ++j) rows_.push_back(row[j]);
        targets_.push_back(target);
    }

    std::size_t n_unknowns() const { return n_; }
    std::size_t n_rows() const { return targets_.size(); }

    Eigen::MatrixXd matrix() const {
        Eigen::MatrixXd a(static_cast<Eigen::Index>(n_rows()), static_cast<Eigen::Index>(n_));
        for (std::size_t i = 0; i < n_rows(); ++i)
            for (std::size_t j = 0; j < n_; ++j)
                a(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = rows_[i * n_ + j];
        return a;
    }
    Eigen::VectorXd rhs() const {
        return Eigen::Map<const Eigen::VectorXd>(targets_.data(), static_cast<Eigen::Index>(targets_.size()));
    }

private:
    std::size_t n_;
    std::vector<double> rows_;
    std::vector<double> targets_;
};

struct LsqSolution {
    Coeffs coeffs;
    double residual_rmse = 0;
    double sum_sq = 0;
    /// 2-norm condition number of the design matrix.
    double condition = 0;
    std::size_t rank = 0;
    bool used_qr = false;
};

inline constexpr double kQrFallbackCondition = 1e8;
inline constexpr double kRankTolerance = 1e-13;

/// Ordinary least squares via the normal equations, switching to a pivoted QR
/// solve when cond(A) exceeds 1e8. Throws UnderObservedError when there are
/// fewer rows than unknowns or the numerical rank is deficient.
inline LsqSolution solve_least_squares(const LinearSystem& sys) {
    const std::size_t n = sys.n_unknowns();
    if (sys.n_rows() < n)
        throw UnderObservedError(sys.n_rows(), n,
                                 std::to_string(sys.n_rows()) + " observations for " + std::to_string(n) + " unknowns");
    const Eigen::MatrixXd a = sys.matrix();
    const Eigen::VectorXd y = sys.rhs();

    Eigen::JacobiSVD<Eigen::MatrixXd> svd(a);
    const auto& sv = svd.singularValues();
    const double smax = sv(0);
    std::size_t rank = 0;
    for (Eigen::Index i = 0; i < sv.size(); ++i)
        if (sv(i) > kRankTolerance * smax) ++rank;
    if (smax == 0 || rank < n)
        throw UnderObservedError(rank, n, "design matrix has rank " + std::to_string(rank) + " < " + std::to_string(n));

    LsqSolution sol;
    sol.rank = rank;
    sol.condition = smax / sv(sv.size() - 1);
    Eigen::VectorXd x;
    if (sol.condition > kQrFallbackCondition) {
        x = a.colPivHouseholderQr().solve(y);
        sol.used_qr = true;
    } else {
        const Eigen::MatrixXd ata = a.transpose() * a;
        const auto llt = ata.llt();
        x = llt.solve(a.transpose() * y);
        x += llt.solve(a.transpose() * (y - a * x));  // one refinement step
    }
    sol.coeffs = Coeffs::zeros(n);
    for (std::size_t j = 0; j < n; ++j) sol.coeffs[j] = x(static_cast<Eigen::Index>(j));
    const Eigen::VectorXd r = a * x - y;
    sol.sum_sq = r.squaredNorm();
    sol.residual_rmse = std::sqrt(sol.sum_sq / static_cast<double>(sys.n_rows()));
    return sol;
}

} // namespace svbrdf
