#pragma once

#include "gdm/mesh.hpp"

#include <Eigen/Core>
#include <Eigen/SparseCore>

#include <array>
#include <functional>
#include <memory>
#include <vector>

namespace gdm {

using Vector = Eigen::VectorXd;
using SparseMatrix = Eigen::SparseMatrix<double>;
using VectorFunction = std::function<Point(const Point&)>;
using ScalarFunction = std::function<double(const Point&)>;

/// A linear reconstruction sampled at quadrature points: values = matrix * dofs,
/// one quadrature weight per row, so that the L2 product is a^T M^T W M b.
struct Reconstruction {
    SparseMatrix matrix;
    Vector weights;

    [[nodiscard]] Vector apply(const Vector& dofs) const { return matrix * dofs; }
    [[nodiscard]] SparseMatrix gram() const;
    [[nodiscard]] SparseMatrix weighted_gram(const Vector& row_factor) const;
    [[nodiscard]] double inner(const Vector& a, const Vector& b) const;
    [[nodiscard]] double norm(const Vector& a) const;
};

/// Discrete convection forms. Velocity vectors are full-layout (boundary DOFs included).
class ConvectionForms {
public:
    virtual ~ConvectionForms() = default;

    /// A_D(w; u, v): linear in u and v. The two-argument form is A_D(u; u, v).
    [[nodiscard]] virtual double velocity_form(const Vector& w, const Vector& u, const Vector& v) const = 0;
    /// Matrix M(w) with v^T M u = A_D(w; u, v).
    [[nodiscard]] virtual SparseMatrix velocity_matrix(const Vector& w) const = 0;

    /// B_D(u, s, r): linear in s and r.
    [[nodiscard]] virtual double scalar_form(const Vector& u, const Vector& s, const Vector& r) const = 0;
    /// Matrix M(u) with r^T M s = B_D(u, s, r).
    [[nodiscard]] virtual SparseMatrix scalar_matrix(const Vector& u) const = 0;
};

/// Unknowns located at nodes; a vector DOF is node * components + component.
struct DofLayout {
    std::vector<Point> nodes;
    std::vector<bool> on_boundary;
    int components = 1;
    std::vector<Index> interior; // DOF indices
    std::vector<Index> boundary; // DOF indices

    void finalize();
    [[nodiscard]] Index size() const noexcept { return static_cast<Index>(nodes.size()) * components; }
    [[nodiscard]] Index interior_size() const noexcept { return static_cast<Index>(interior.size()); }
    /// Selection matrix (size x interior_size) embedding interior DOFs into the full layout.
    [[nodiscard]] SparseMatrix interior_embedding() const;
    [[nodiscard]] SparseMatrix boundary_embedding() const;
};

/// Gradient discretisation: DOF spaces plus matrix realisations of the
/// reconstruction operators. Immutable after assembly.
struct GradientDiscretisation {
    int dimension = 2;
    DofLayout velocity;
    DofLayout scalar;
    Index pressure_size = 0;

    Reconstruction velocity_value;    // Pi_D
    Reconstruction velocity_gradient; // nabla_D, d*d rows per gradient point
    Reconstruction divergence;        // div_D
    Reconstruction pressure_value;    // chi_D
    Reconstruction scalar_value;      // tilde Pi_D
    Reconstruction scalar_gradient;   // tilde nabla_D, d rows per gradient point

    /// Quadrature point of each scalar_value row (rows d*i .. d*i+d-1 of velocity_value).
    std::vector<Point> value_points;

    /// Row of scalar_value that a gradient point reads the viscosity argument from.
    std::vector<Index> gradient_point_value_row;

    std::shared_ptr<const ConvectionForms> convection;

    [[nodiscard]] Index num_gradient_points() const noexcept { return static_cast<Index>(gradient_point_value_row.size()); }
    /// B with B(q, v) = int chi_D q div_D v.
    [[nodiscard]] SparseMatrix coupling() const;
    /// c with c . q = int chi_D q.
    [[nodiscard]] Vector pressure_mean_weights() const;
    [[nodiscard]] double domain_measure() const;
    /// Orthogonal (w.r.t. integral) projection onto zero-mean pressures.
    [[nodiscard]] Vector project_zero_mean(const Vector& q) const;
};

/// Time nodes 0 = t0 < t1 < ... < tN = T.
class TimeGrid {
public:
    explicit TimeGrid(std::vector<double> nodes);
    static TimeGrid uniform(double final_time, int steps);

    [[nodiscard]] int num_steps() const noexcept { return static_cast<int>(nodes_.size()) - 1; }
    [[nodiscard]] double time(int n) const { return nodes_[static_cast<std::size_t>(n)]; }
    [[nodiscard]] double step(int n) const { return nodes_[static_cast<std::size_t>(n) + 1] - nodes_[static_cast<std::size_t>(n)]; }
    [[nodiscard]] double final_time() const { return nodes_.back(); }
    [[nodiscard]] const std::vector<double>& nodes() const noexcept { return nodes_; }

private:
    std::vector<double> nodes_;
};

struct DiscreteConstants {
    double poincare = 0.0; // C_D
    double inf_sup = 0.0;  // B_D
};

// Point-value interpolants at the DOF nodes (boundary DOFs included).
Vector interpolate_velocity(const GradientDiscretisation& gd, const VectorFunction& f);
Vector interpolate_scalar(const GradientDiscretisation& gd, const ScalarFunction& f);

Vector restrict_to(const Vector& full, const std::vector<Index>& dofs);
void scatter_into(Vector& full, const std::vector<Index>& dofs, const Vector& values);

/// The three ratios summed into C_D: ||Pi v||/||grad v||, ||tPi r||/||tgrad r||,
/// ||div v||/||grad v||, each maximised over the homogeneous space.
std::array<double, 3> poincare_ratios(const GradientDiscretisation& gd);
double compute_CD(const GradientDiscretisation& gd);

/// Discrete inf-sup constant over zero-mean pressures. Throws SingularGram when
/// there are no nonzero zero-mean pressures.
double compute_BD(const GradientDiscretisation& gd);

/// Dual seminorms of a piecewise field given by its samples at the rows of
/// velocity_value (resp. scalar_value).
double dual_seminorm_velocity(const GradientDiscretisation& gd, const Vector& w);
double dual_seminorm_scalar(const GradientDiscretisation& gd, const Vector& w);

/// Cached factorisations for repeated dual-seminorm evaluations on one discretisation.
class DualSeminorm {
public:
    explicit DualSeminorm(const GradientDiscretisation& gd);
    ~DualSeminorm();
    DualSeminorm(const DualSeminorm&) = delete;
    DualSeminorm& operator=(const DualSeminorm&) = delete;

    [[nodiscard]] double velocity(const Vector& w) const;
    [[nodiscard]] double scalar(const Vector& w) const;

private:
    struct Impl;
    std::unique_ptr<Impl> impl_;
};

namespace detail {

struct EigenResult {
    double value = 0.0;
    int iterations = 0;
};

/// Largest lambda with A x = lambda G x, G SPD, A symmetric PSD.
EigenResult largest_generalized_eigenvalue(const SparseMatrix& a, const SparseMatrix& g, double tol = 1e-8,
                                           int max_iterations = 10000);

} // namespace detail

} // namespace gdm
