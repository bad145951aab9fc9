#include "gdm/errors.hpp"
#include "gdm/hfv.hpp"
#include "gdm/mms.hpp"
#include "pde_oracle.hpp"
#include "support.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <random>

namespace gdm::mms {
namespace {

using std::numbers::pi;
using testing::d4;
using testing::heat_by_finite_differences;
using testing::momentum_by_finite_differences;

TEST(TaylorGreen, InitialValues)
{
    const ExactSolution sol = taylor_green_solution();
    const Point x(0.3, -0.7);
    const Point u = sol.velocity(x, 0.0);
    EXPECT_NEAR(u.x(), std::sin(pi * x.y()) * std::cos(pi * x.x()), 1e-15);
    EXPECT_NEAR(u.y(), -std::cos(pi * x.y()) * std::sin(pi * x.x()), 1e-15);
    EXPECT_EQ(sol.temperature(x, 0.0), 0.0);
}

TEST(TaylorGreen, VelocityIsDivergenceFree)
{
    const ExactSolution sol = taylor_green_solution();
    const Point x0(0.3, -0.7);
    const double t = 0.05;
    const double fd = d4([&](double h) { return sol.velocity(x0 + Point(h, 0), t).x(); }, 1e-4) +
                      d4([&](double h) { return sol.velocity(x0 + Point(0, h), t).y(); }, 1e-4);
    EXPECT_NEAR(fd, 0.0, 1e-10);
    for (int i = 0; i < 50; ++i)
        for (int j = 0; j < 50; ++j) {
            const Point x(-1.0 + 2.0 * i / 49.0, -1.0 + 2.0 * j / 49.0);
            EXPECT_NEAR(sol.velocity_gradient(x, t).trace(), 0.0, 1e-12);
        }
}

TEST(TaylorGreen, DerivativesMatchFiniteDifferences)
{
    const ExactSolution sol = taylor_green_solution();
    std::mt19937_64 rng(21);
    std::uniform_real_distribution<double> pos(-1.0, 1.0), time(0.0, 0.1);
    for (int trial = 0; trial < 20; ++trial) {
        const Point x(pos(rng), pos(rng));
        const double t = time(rng);
        const double h = 1e-3;
        Eigen::Matrix2d grad;
        for (int i = 0; i < 2; ++i) {
            const Point e = Point::Unit(i);
            const Point du = d4([&](double s) { return Point(sol.velocity(x + s * e, t)); }, h);
            grad.col(i) = du;
            EXPECT_NEAR(sol.pressure_gradient(x, t)[i], d4([&](double s) { return sol.pressure(x + s * e, t); }, h), 1e-9);
            EXPECT_NEAR(sol.temperature_gradient(x, t)[i], d4([&](double s) { return sol.temperature(x + s * e, t); }, h), 1e-9);
        }
        EXPECT_LT((sol.velocity_gradient(x, t) - grad).cwiseAbs().maxCoeff(), 1e-8);
        const Point dt = d4([&](double s) { return Point(sol.velocity(x, t + s)); }, h);
        EXPECT_LT((sol.velocity_time_derivative(x, t) - dt).cwiseAbs().maxCoeff(), 1e-9);
    }
}

TEST(TaylorGreen, PressureHasZeroMean)
{
    const Mesh mesh = build_triangular(32);
    const auto q = CellQuadrature::subtriangle(mesh, compute_geometry(mesh));
    const ExactSolution sol = taylor_green_solution();
    for (double t : {0.0, 0.05, 0.1, 0.7}) {
        double mean = 0.0;
        for (const auto& cell : q.cells)
            for (const auto& node : cell)
                mean += node.weight * sol.pressure(node.x, t);
        EXPECT_NEAR(mean, 0.0, 1e-10);
    }
}

TEST(Forcing, MatchesFiniteDifferencePdeOracle)
{
    const ExactSolution sol = taylor_green_solution();
    const double mu = 0.7;
    std::mt19937_64 rng(23);
    std::uniform_real_distribution<double> pos(-1.0, 1.0), time(0.0, 1.0);
    for (const auto& v : {ViscosityModel::constant(), ViscosityModel::sqrt_coupled()}) {
        const Forcing f = forcing_from_exact(sol, v, mu);
        for (int trial = 0; trial < 100; ++trial) {
            const Point x(pos(rng), pos(rng));
            const double t = time(rng);
            EXPECT_LT((f.momentum(x, t) - momentum_by_finite_differences(sol, v, x, t)).cwiseAbs().maxCoeff(), 1e-6)
                << v.name;
            EXPECT_NEAR(f.heat(x, t), heat_by_finite_differences(sol, mu, x, t), 1e-6);
        }
    }
}

TEST(Forcing, HeatSourceAtInitialTime)
{
    const Forcing f = forcing_from_exact(taylor_green_solution(), ViscosityModel::constant(), 1.0);
    for (const Point& x : {Point(0.1, 0.2), Point(-0.9, 0.5), Point(0.0, 0.0)})
        EXPECT_NEAR(f.heat(x, 0.0), std::sin(x.x() + x.y()), 1e-15);
}

State interpolated_state(const GradientDiscretisation& gd, const ExactSolution& sol, double t)
{
    State s;
    s.u = interpolate_velocity(gd, [&](const Point& x) { return sol.velocity(x, t); });
    s.S = interpolate_scalar(gd, [&](const Point& x) { return sol.temperature(x, t); });
    s.p = Vector(gd.pressure_size);
    for (Index c = 0; c < gd.pressure_size; ++c)
        s.p[c] = sol.pressure(gd.value_points[static_cast<std::size_t>(c)], t);
    s.t = t;
    return s;
}

TEST(Errors, InterpolantHasSmallCentroidError)
{
    const ExactSolution sol = taylor_green_solution();
    std::vector<double> e1;
    for (int n : {8, 16}) {
        const auto gd = hfv::build_hfv(build_triangular(n));
        const ErrorSet e = compute_errors(gd, interpolated_state(gd, sol, 0.1), sol, 0.1);
        EXPECT_LT(e.velocity, 1e-12);
        EXPECT_LT(e.pressure, 1e-12);
        EXPECT_LT(e.temperature, 1e-12);
        // With the accurate rule only the piecewise-constant projection error remains: O(h).
        const Mesh mesh = build_triangular(n);
        e1.push_back(compute_errors(gd, interpolated_state(gd, sol, 0.1), sol, 0.1,
                                    CellQuadrature::subtriangle(mesh, compute_geometry(mesh)))
                         .velocity);
    }
    EXPECT_NEAR(e1[0] / e1[1], 2.0, 0.1);
}

TEST(Errors, RelativeToTheExactNorm)
{
    const ExactSolution sol = taylor_green_solution();
    ExactSolution doubled = sol;
    doubled.velocity = [&](const Point& x, double t) { return Point(2.0 * sol.velocity(x, t)); };
    const auto gd = hfv::build_hfv(build_triangular(4));
    const State s = interpolated_state(gd, sol, 0.1);
    const ErrorSet e = compute_errors(gd, s, doubled, 0.1);
    EXPECT_NEAR(e.velocity, 0.5, 1e-12);
    EXPECT_NEAR(e.velocity_x, 0.5, 1e-12);
    EXPECT_NEAR(e.velocity_y, 0.5, 1e-12);
}

TEST(Errors, ComponentsCombineIntoTheVelocityError)
{
    const ExactSolution sol = taylor_green_solution();
    const auto gd = hfv::build_hfv(build_distorted(4, 0.3));
    State s = interpolated_state(gd, sol, 0.1);
    s.u *= 0.9;
    const ErrorSet e = compute_errors(gd, s, sol, 0.1);
    EXPECT_NEAR(e.velocity, 0.1, 1e-12);
}

TEST(Errors, ZeroExactTemperatureIsReported)
{
    const ExactSolution sol = taylor_green_solution();
    const auto gd = hfv::build_hfv(build_triangular(4));
    try {
        (void)compute_errors(gd, interpolated_state(gd, sol, 0.0), sol, 0.0);
        FAIL() << "expected ZeroNorm";
    } catch (const Error& e) {
        EXPECT_EQ(e.kind(), ErrorKind::ZeroNorm);
    }
}

TEST(Quadrature, SubtriangleRuleIntegratesQuarticsExactly)
{
    const Mesh mesh = build_distorted(3, 0.4);
    const auto q = CellQuadrature::subtriangle(mesh, compute_geometry(mesh));
    double integral = 0.0;
    for (const auto& cell : q.cells)
        for (const auto& node : cell)
            integral += node.weight * (std::pow(node.x.x(), 4) + std::pow(node.x.x() * node.x.y(), 2) + std::pow(node.x.x(), 3) * node.x.y() * node.x.y());
    // (2/5)(2) + (2/3)(2/3) + 0
    EXPECT_NEAR(integral, 0.8 + 4.0 / 9.0, 1e-13);
}

TEST(RateFit, ExactLines)
{
    const RateFit one = fit_rate({1.0, 0.5, 0.25}, {1.0, 0.5, 0.25});
    EXPECT_NEAR(one.slope, 1.0, 1e-14);
    EXPECT_NEAR(one.intercept, 0.0, 1e-14);
    EXPECT_NEAR(one.residual, 0.0, 1e-14);
    const RateFit two = fit_rate({1.0, 0.5, 0.25}, {1.0, 0.25, 1.0 / 16.0});
    EXPECT_NEAR(two.slope, 2.0, 1e-14);
    EXPECT_NEAR(two.residual, 0.0, 1e-14);
}

TEST(RateFit, ScalingTheErrorsShiftsOnlyTheIntercept)
{
    const std::vector<double> hs{0.8, 0.4, 0.2, 0.1};
    const std::vector<double> es{0.31, 0.17, 0.074, 0.041};
    std::vector<double> scaled;
    for (double e : es)
        scaled.push_back(7.0 * e);
    const RateFit a = fit_rate(hs, es), b = fit_rate(hs, scaled);
    EXPECT_NEAR(a.slope, b.slope, 1e-13);
    EXPECT_NEAR(b.intercept - a.intercept, std::log(7.0), 1e-13);
    EXPECT_NEAR(a.residual, b.residual, 1e-13);
    EXPECT_GT(a.residual, 0.0);
}

TEST(RateFit, RejectsDegenerateInput)
{
    auto kind = [](const std::vector<double>& h, const std::vector<double>& e) {
        try {
            (void)fit_rate(h, e);
        } catch (const Error& err) {
            return err.kind();
        }
        return ErrorKind::Config;
    };
    EXPECT_EQ(kind({1.0, 0.5}, {1.0, 0.5}), ErrorKind::InsufficientLevels);
    EXPECT_EQ(kind({0.5, 0.5, 0.5}, {1.0, 0.9, 0.8}), ErrorKind::InsufficientLevels);
    EXPECT_EQ(kind({1.0, 0.5, 0.25}, {1.0, 0.0, 0.2}), ErrorKind::NonpositiveValue);
}

TEST(Study, StepCount)
{
    EXPECT_EQ(steps_for(0.1, 0.1), 1);
    EXPECT_EQ(steps_for(0.1, 0.05), 2);
    EXPECT_EQ(steps_for(0.1, 0.03), 4);
    EXPECT_EQ(steps_for(0.1, 1.0), 1);
}

TEST(Study, RepeatedLevelsAreInsufficient)
{
    try {
        (void)convergence_study(triangular_family({4, 4, 8}), {}, {});
        FAIL() << "expected InsufficientLevels";
    } catch (const Error& e) {
        EXPECT_EQ(e.kind(), ErrorKind::InsufficientLevels);
    }
}

TEST(Study, SmallStudyProducesSortedLevelsAndFiniteFits)
{
    StudyConfig config;
    config.threads = 2;
    const ConvergenceReport report = convergence_study(triangular_family({2, 4, 8}), {}, config);
    ASSERT_EQ(report.levels.size(), 3u);
    for (std::size_t i = 0; i + 1 < report.levels.size(); ++i)
        EXPECT_GT(report.levels[i].h, report.levels[i + 1].h);
    for (const auto& fit : report.fits) {
        EXPECT_TRUE(std::isfinite(fit.slope));
        EXPECT_TRUE(std::isfinite(fit.residual));
    }
    EXPECT_EQ(report.levels[2].steps, 4);
}

TEST(Study, ThreadCountDoesNotChangeResults)
{
    StudyConfig serial, parallel;
    parallel.threads = 3;
    const auto a = convergence_study(distorted_family({2, 3, 4}), {}, serial);
    const auto b = convergence_study(distorted_family({2, 3, 4}), {}, parallel);
    for (std::size_t i = 0; i < a.levels.size(); ++i) {
        EXPECT_EQ(a.levels[i].errors.velocity, b.levels[i].errors.velocity);
        EXPECT_EQ(a.levels[i].errors.pressure, b.levels[i].errors.pressure);
    }
}

/// Dual norm sqrt(r^T G^{-1} r) of a residual functional on interior DOFs.
double dual_norm(const SparseMatrix& g, const Vector& r)
{
    Eigen::SimplicialLDLT<SparseMatrix> ldlt(g);
    return std::sqrt(r.dot(ldlt.solve(r)));
}

TEST(Consistency, InterpolatedExactSolutionHasVanishingResidual)
{
    const ExactSolution sol = taylor_green_solution();
    const ViscosityModel v = ViscosityModel::sqrt_coupled();
    const ProblemSpec spec = manufactured_problem(sol, v, 1.0, 0.1);
    std::vector<double> hs, momentum, heat;
    for (int n : {8, 16, 32}) {
        const Mesh mesh = build_triangular(n);
        const MeshGeometry geometry = compute_geometry(mesh);
        const auto gd = hfv::build_hfv(mesh, geometry);
        const GradientScheme scheme(gd, spec);
        const double t1 = 0.05, dt = 0.0125 * geometry.h;
        const State a = interpolated_state(gd, sol, t1 - dt);
        const State b = interpolated_state(gd, sol, t1);
        const SparseMatrix ev = gd.velocity.interior_embedding();
        const SparseMatrix es = gd.scalar.interior_embedding();

        Vector ru = gd.velocity_value.gram() * (b.u - a.u) / dt - scheme.momentum_load(t1) +
                    hfv::assemble_viscous(gd, b.S, v) * b.u + gd.convection->velocity_matrix(b.u) * b.u -
                    gd.coupling().transpose() * b.p;
        Vector rs = gd.scalar_value.gram() * (b.S - a.S) / dt - scheme.heat_load(t1) + gd.scalar_gradient.gram() * b.S +
                    gd.convection->scalar_matrix(b.u) * b.S;
        hs.push_back(geometry.h);
        momentum.push_back(dual_norm(SparseMatrix(ev.transpose() * gd.velocity_gradient.gram() * ev), ev.transpose() * ru));
        heat.push_back(dual_norm(SparseMatrix(es.transpose() * gd.scalar_gradient.gram() * es), es.transpose() * rs));
    }
    // First-order residuals; the heat rate increases towards one under refinement.
    EXPECT_GE(fit_rate(hs, momentum).slope, 0.95);
    EXPECT_GE(fit_rate(hs, heat).slope, 0.95);
    EXPECT_GT(std::log(heat[1] / heat[2]) / std::log(hs[1] / hs[2]), std::log(heat[0] / heat[1]) / std::log(hs[0] / hs[1]));
}

} // namespace
} // namespace gdm::mms
