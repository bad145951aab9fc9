#include "gdm/gd_core.hpp"

#include "gdm/errors.hpp"
#include "gdm/linalg.hpp"

#include <Eigen/SparseCholesky>
#include <Eigen/SparseLU>

#include <cmath>
#include <random>
#include <string>

namespace gdm {

SparseMatrix Reconstruction::gram() const
{
    SparseMatrix m = matrix.transpose() * weights.asDiagonal() * matrix;
    m.prune(0.0);
    return m;
}

SparseMatrix Reconstruction::weighted_gram(const Vector& row_factor) const
{
    const Vector w = weights.cwiseProduct(row_factor);
    SparseMatrix m = matrix.transpose() * w.asDiagonal() * matrix;
    m.prune(0.0);
    return m;
}

double Reconstruction::inner(const Vector& a, const Vector& b) const
{
    return (matrix * a).cwiseProduct(weights).dot(matrix * b);
}

double Reconstruction::norm(const Vector& a) const
{
    const Vector v = matrix * a;
    return std::sqrt(v.cwiseProduct(weights).dot(v));
}

void DofLayout::finalize()
{
    interior.clear();
    boundary.clear();
    for (std::size_t node = 0; node < nodes.size(); ++node) {
        auto& target = on_boundary[node] ? boundary : interior;
        for (int c = 0; c < components; ++c)
            target.push_back(static_cast<Index>(node) * components + c);
    }
}

namespace {

SparseMatrix selection(Index rows, const std::vector<Index>& dofs)
{
    SparseMatrix s(rows, static_cast<Index>(dofs.size()));
    std::vector<Eigen::Triplet<double>> t;
    t.reserve(dofs.size());
    for (std::size_t k = 0; k < dofs.size(); ++k)
        t.emplace_back(dofs[k], static_cast<Index>(k), 1.0);
    s.setFromTriplets(t.begin(), t.end());
    return s;
}

Vector seeded_vector(Index n, unsigned seed)
{
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> dist(-1.0, 1.0);
    Vector x(n);
    for (Index i = 0; i < n; ++i)
        x[i] = dist(rng);
    return x;
}

} // namespace

SparseMatrix DofLayout::interior_embedding() const { return selection(size(), interior); }
SparseMatrix DofLayout::boundary_embedding() const { return selection(size(), boundary); }

SparseMatrix GradientDiscretisation::coupling() const
{
    SparseMatrix b = pressure_value.matrix.transpose() * divergence.weights.asDiagonal() * divergence.matrix;
    b.prune(0.0);
    return b;
}

Vector GradientDiscretisation::pressure_mean_weights() const
{
    return pressure_value.matrix.transpose() * pressure_value.weights;
}

double GradientDiscretisation::domain_measure() const { return pressure_value.weights.sum(); }

Vector GradientDiscretisation::project_zero_mean(const Vector& q) const
{
    const Vector c = pressure_mean_weights();
    const Vector ones = Vector::Ones(pressure_size);
    return q - (c.dot(q) / c.dot(ones)) * ones;
}

TimeGrid::TimeGrid(std::vector<double> nodes) : nodes_(std::move(nodes))
{
    if (nodes_.size() < 2 || nodes_.front() != 0.0)
        throw std::invalid_argument("time grid needs at least two nodes starting at 0");
    for (std::size_t n = 1; n < nodes_.size(); ++n)
        if (!(nodes_[n] > nodes_[n - 1]))
            throw std::invalid_argument("time grid must be strictly increasing");
}

TimeGrid TimeGrid::uniform(double final_time, int steps)
{
    if (!(final_time > 0.0) || steps < 1)
        throw std::invalid_argument("uniform time grid needs T > 0 and at least one step");
    std::vector<double> nodes(static_cast<std::size_t>(steps) + 1);
    for (int n = 0; n <= steps; ++n)
        nodes[static_cast<std::size_t>(n)] = final_time * n / steps;
    nodes.back() = final_time;
    return TimeGrid(std::move(nodes));
}

Vector interpolate_velocity(const GradientDiscretisation& gd, const VectorFunction& f)
{
    const int d = gd.velocity.components;
    Vector v(gd.velocity.size());
    for (std::size_t node = 0; node < gd.velocity.nodes.size(); ++node) {
        const Point value = f(gd.velocity.nodes[node]);
        for (int c = 0; c < d; ++c)
            v[static_cast<Index>(node) * d + c] = value[c];
    }
    return v;
}

Vector interpolate_scalar(const GradientDiscretisation& gd, const ScalarFunction& f)
{
    Vector v(gd.scalar.size());
    for (std::size_t node = 0; node < gd.scalar.nodes.size(); ++node)
        v[static_cast<Index>(node)] = f(gd.scalar.nodes[node]);
    return v;
}

Vector restrict_to(const Vector& full, const std::vector<Index>& dofs)
{
    Vector out(static_cast<Index>(dofs.size()));
    for (std::size_t k = 0; k < dofs.size(); ++k)
        out[static_cast<Index>(k)] = full[dofs[k]];
    return out;
}

void scatter_into(Vector& full, const std::vector<Index>& dofs, const Vector& values)
{
    for (std::size_t k = 0; k < dofs.size(); ++k)
        full[dofs[k]] = values[static_cast<Index>(k)];
}

namespace detail {

EigenResult largest_generalized_eigenvalue(const SparseMatrix& a, const SparseMatrix& g, double tol, int max_iterations)
{
    Eigen::SimplicialLDLT<SparseMatrix> chol(g);
    if (chol.info() != Eigen::Success)
        throw Error(ErrorKind::SingularGram, "gradient Gram matrix is not positive definite");

    Vector x = seeded_vector(g.rows(), 0x5eedU);
    x /= std::sqrt(x.dot(g * x));
    double lambda = x.dot(a * x);
    for (int it = 1; it <= max_iterations; ++it) {
        Vector y = chol.solve(a * x);
        const double gy = y.dot(g * y);
        if (!(gy > 0.0))
            return {0.0, it}; // a x == 0: the operator vanishes on this subspace
        x = y / std::sqrt(gy);
        const double next = x.dot(a * x);
        if (std::abs(next - lambda) <= tol * std::abs(next))
            return {next, it};
        lambda = next;
    }
    throw Error(ErrorKind::EigSolverFailure,
                "power iteration did not converge in " + std::to_string(max_iterations) + " iterations");
}

} // namespace detail

std::array<double, 3> poincare_ratios(const GradientDiscretisation& gd)
{
    const SparseMatrix ev = gd.velocity.interior_embedding();
    const SparseMatrix es = gd.scalar.interior_embedding();
    const SparseMatrix gu = ev.transpose() * gd.velocity_gradient.gram() * ev;
    const SparseMatrix gs = es.transpose() * gd.scalar_gradient.gram() * es;
    const SparseMatrix mu = ev.transpose() * gd.velocity_value.gram() * ev;
    const SparseMatrix ms = es.transpose() * gd.scalar_value.gram() * es;
    const SparseMatrix md = ev.transpose() * gd.divergence.gram() * ev;

    return {std::sqrt(detail::largest_generalized_eigenvalue(mu, gu).value),
            std::sqrt(detail::largest_generalized_eigenvalue(ms, gs).value),
            std::sqrt(detail::largest_generalized_eigenvalue(md, gu).value)};
}

double compute_CD(const GradientDiscretisation& gd)
{
    const auto r = poincare_ratios(gd);
    return r[0] + r[1] + r[2];
}

double compute_BD(const GradientDiscretisation& gd)
{
    if (gd.pressure_size <= 1)
        throw Error(ErrorKind::SingularGram, "zero-mean pressure space is trivial");

    const SparseMatrix mp = gd.pressure_value.gram();
    {
        Eigen::SimplicialLDLT<SparseMatrix> check(mp);
        if (check.info() != Eigen::Success || (check.vectorD().array() <= 0.0).any())
            throw Error(ErrorKind::SingularGram, "pressure Gram matrix is singular");
    }
    const SparseMatrix ev = gd.velocity.interior_embedding();
    const SparseMatrix g = ev.transpose() * gd.velocity_gradient.gram() * ev;
    const SparseMatrix b = gd.coupling() * ev;
    const Vector c = gd.pressure_mean_weights();

    // Inverse iteration on (B G^-1 B^T) q = lambda Mp q over zero-mean q; each
    // application of the inverse Schur complement is one saddle-point solve.
    SaddlePointSolver saddle(g, b, c);
    const Index nu = g.rows();
    const Index np = gd.pressure_size;

    Vector q = gd.project_zero_mean(seeded_vector(np, 0xb0dU));
    q /= std::sqrt(q.dot(mp * q));
    double mu = 0.0;
    constexpr int max_iterations = 10000;
    for (int it = 1; it <= max_iterations; ++it) {
        Vector rhs = Vector::Zero(nu + np + 1);
        rhs.segment(nu, np) = -(mp * q);
        const Vector sol = saddle.solve(rhs);
        Vector y = sol.segment(nu, np);
        const double next = q.dot(mp * y); // Rayleigh quotient of the inverse operator
        const double norm = std::sqrt(y.dot(mp * y));
        if (!(next > 0.0) || !(norm > 0.0))
            throw Error(ErrorKind::EigSolverFailure, "inf-sup iteration lost positivity");
        q = y / norm;
        if (it > 1 && std::abs(next - mu) <= 1e-8 * std::abs(next))
            return std::sqrt(1.0 / next);
        mu = next;
    }
    throw Error(ErrorKind::EigSolverFailure, "inf-sup inverse iteration did not converge");
}

struct DualSeminorm::Impl {
    const GradientDiscretisation& gd;
    SparseMatrix ev;
    SparseMatrix es;
    SaddlePointSolver velocity;
    Eigen::SimplicialLDLT<SparseMatrix> scalar;

    explicit Impl(const GradientDiscretisation& g)
        : gd(g),
          ev(g.velocity.interior_embedding()),
          es(g.scalar.interior_embedding()),
          velocity(SparseMatrix(ev.transpose() * g.velocity_gradient.gram() * ev), SparseMatrix(g.coupling() * ev),
                   g.pressure_mean_weights())
    {
        scalar.compute(es.transpose() * g.scalar_gradient.gram() * es);
        if (scalar.info() != Eigen::Success)
            throw Error(ErrorKind::LinearSolverFailure, "scalar gradient Gram factorisation failed");
    }
};

DualSeminorm::DualSeminorm(const GradientDiscretisation& gd) : impl_(std::make_unique<Impl>(gd)) {}
DualSeminorm::~DualSeminorm() = default;

double DualSeminorm::velocity(const Vector& w) const
{
    const auto& gd = impl_->gd;
    const Vector f = impl_->ev.transpose() * (gd.velocity_value.matrix.transpose() * w.cwiseProduct(gd.velocity_value.weights));
    Vector rhs = Vector::Zero(impl_->velocity.size());
    rhs.head(f.size()) = f;
    const Vector z = impl_->velocity.solve(rhs).head(f.size());
    return std::sqrt(std::max(f.dot(z), 0.0));
}

double DualSeminorm::scalar(const Vector& w) const
{
    const auto& gd = impl_->gd;
    const Vector f = impl_->es.transpose() * (gd.scalar_value.matrix.transpose() * w.cwiseProduct(gd.scalar_value.weights));
    const Vector z = impl_->scalar.solve(f);
    if (impl_->scalar.info() != Eigen::Success)
        throw Error(ErrorKind::LinearSolverFailure, "scalar Riesz solve failed");
    return std::sqrt(std::max(f.dot(z), 0.0));
}

double dual_seminorm_velocity(const GradientDiscretisation& gd, const Vector& w) { return DualSeminorm(gd).velocity(w); }
double dual_seminorm_scalar(const GradientDiscretisation& gd, const Vector& w) { return DualSeminorm(gd).scalar(w); }

} // namespace gdm
