#pragma once

#include <Eigen/Core>
#include <Eigen/SparseCore>
#include <Eigen/SparseLU>

namespace gdm {

/// Sparse LU of the bordered saddle-point matrix
///
///     [ K   B^T  0 ]
///     [ B   0    c ]
///     [ 0   c^T  0 ]
///
/// where the last row fixes c . p = 0 (zero-mean pressure) through one scalar multiplier.
class SaddlePointSolver {
public:
    SaddlePointSolver(const Eigen::SparseMatrix<double>& k, const Eigen::SparseMatrix<double>& b, const Eigen::VectorXd& c);

    [[nodiscard]] Eigen::Index size() const noexcept { return size_; }
    /// Throws Error{LinearSolverFailure} if the solve fails.
    [[nodiscard]] Eigen::VectorXd solve(const Eigen::VectorXd& rhs) const;

    static Eigen::SparseMatrix<double> assemble(const Eigen::SparseMatrix<double>& k, const Eigen::SparseMatrix<double>& b,
                                                const Eigen::VectorXd& c);

private:
    Eigen::Index size_ = 0;
    Eigen::SparseLU<Eigen::SparseMatrix<double>, Eigen::COLAMDOrdering<int>> lu_;
};

/// Sparse LU for general square systems; throws Error{LinearSolverFailure}.
Eigen::VectorXd sparse_solve(const Eigen::SparseMatrix<double>& a, const Eigen::VectorXd& rhs, const char* what);

} // namespace gdm
