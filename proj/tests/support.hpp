#pragma once

#include "gdm/gd_core.hpp"
#include "gdm/mesh.hpp"

#include <Eigen/Dense>

#include <random>

namespace gdm::testing {

inline Vector random_vector(std::mt19937_64& rng, Index size)
{
    std::uniform_real_distribution<double> dist(-1.0, 1.0);
    Vector v(size);
    for (Index i = 0; i < size; ++i)
        v[i] = dist(rng);
    return v;
}

/// Random full-layout vector vanishing on the boundary DOFs.
inline Vector random_homogeneous(std::mt19937_64& rng, const DofLayout& layout)
{
    Vector v = Vector::Zero(layout.size());
    for (Index i : layout.interior)
        v[i] = std::uniform_real_distribution<double>(-1.0, 1.0)(rng);
    return v;
}

inline Eigen::MatrixXd dense(const SparseMatrix& m) { return Eigen::MatrixXd(m); }

/// Orthonormal basis of the null space of a dense matrix.
inline Eigen::MatrixXd null_space(const Eigen::MatrixXd& a, double tol = 1e-10)
{
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(a, Eigen::ComputeFullV);
    const auto& s = svd.singularValues();
    Index rank = 0;
    for (Index i = 0; i < s.size(); ++i)
        if (s[i] > tol * std::max(1.0, s[0]))
            ++rank;
    return svd.matrixV().rightCols(a.cols() - rank);
}

} // namespace gdm::testing
