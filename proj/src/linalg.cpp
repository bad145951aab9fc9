#include "gdm/linalg.hpp"

#include "gdm/errors.hpp"

#include <string>
#include <vector>

namespace gdm {

Eigen::SparseMatrix<double> SaddlePointSolver::assemble(const Eigen::SparseMatrix<double>& k,
                                                        const Eigen::SparseMatrix<double>& b, const Eigen::VectorXd& c)
{
    const Eigen::Index nu = k.rows();
    const Eigen::Index np = b.rows();
    std::vector<Eigen::Triplet<double>> t;
    t.reserve(static_cast<std::size_t>(k.nonZeros() + 2 * b.nonZeros() + 2 * np));
    for (int col = 0; col < k.outerSize(); ++col)
        for (Eigen::SparseMatrix<double>::InnerIterator it(k, col); it; ++it)
            t.emplace_back(it.row(), it.col(), it.value());
    for (int col = 0; col < b.outerSize(); ++col) {
        for (Eigen::SparseMatrix<double>::InnerIterator it(b, col); it; ++it) {
            t.emplace_back(nu + it.row(), it.col(), it.value());
            t.emplace_back(it.col(), nu + it.row(), it.value());
        }
    }
    for (Eigen::Index q = 0; q < np; ++q) {
        if (c[q] == 0.0)
            continue;
        t.emplace_back(nu + q, nu + np, c[q]);
        t.emplace_back(nu + np, nu + q, c[q]);
    }
    Eigen::SparseMatrix<double> m(nu + np + 1, nu + np + 1);
    m.setFromTriplets(t.begin(), t.end());
    return m;
}

SaddlePointSolver::SaddlePointSolver(const Eigen::SparseMatrix<double>& k, const Eigen::SparseMatrix<double>& b,
                                     const Eigen::VectorXd& c)
{
    const Eigen::SparseMatrix<double> m = assemble(k, b, c);
    size_ = m.rows();
    lu_.analyzePattern(m);
    lu_.factorize(m);
    if (lu_.info() != Eigen::Success)
        throw Error(ErrorKind::LinearSolverFailure, "saddle-point factorisation failed: " + lu_.lastErrorMessage());
}

Eigen::VectorXd SaddlePointSolver::solve(const Eigen::VectorXd& rhs) const
{
    Eigen::VectorXd x = lu_.solve(rhs);
    if (lu_.info() != Eigen::Success || !x.allFinite())
        throw Error(ErrorKind::LinearSolverFailure, "saddle-point solve failed");
    return x;
}

Eigen::VectorXd sparse_solve(const Eigen::SparseMatrix<double>& a, const Eigen::VectorXd& rhs, const char* what)
{
    Eigen::SparseLU<Eigen::SparseMatrix<double>, Eigen::COLAMDOrdering<int>> lu;
    lu.analyzePattern(a);
    lu.factorize(a);
    if (lu.info() != Eigen::Success)
        throw Error(ErrorKind::LinearSolverFailure, std::string(what) + ": factorisation failed: " + lu.lastErrorMessage());
    Eigen::VectorXd x = lu.solve(rhs);
    if (lu.info() != Eigen::Success || !x.allFinite())
        throw Error(ErrorKind::LinearSolverFailure, std::string(what) + ": solve failed");
    return x;
}

} // namespace gdm
