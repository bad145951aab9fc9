#include "gdm/scheme.hpp"

#include "gdm/errors.hpp"
#include "gdm/hfv.hpp"
#include "gdm/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <initializer_list>
#include <sstream>
#include <stdexcept>
#include <string>

namespace gdm {

void ProblemSpec::validate() const
{
    if (!(diffusivity > 0.0))
        throw std::invalid_argument("thermal diffusivity must be positive");
    if (!(final_time > 0.0))
        throw std::invalid_argument("final time must be positive");
    if (!viscosity.value)
        throw std::invalid_argument("viscosity model has no value function");
    if (!(viscosity.lower > 0.0) || !(viscosity.upper >= viscosity.lower))
        throw std::invalid_argument("viscosity bounds must satisfy 0 < a1 <= a2");
    constexpr int samples = 201;
    for (int k = 0; k < samples; ++k) {
        const double xi = -viscosity_sample_range + 2.0 * viscosity_sample_range * k / (samples - 1);
        const double v = viscosity(xi);
        if (!(v >= viscosity.lower && v <= viscosity.upper))
            throw std::invalid_argument("viscosity violates its declared bounds at S = " + std::to_string(xi));
    }
}

void SolverConfig::validate() const
{
    if (!(picard_tolerance > 0.0))
        throw std::invalid_argument("Picard tolerance must be positive");
    if (picard_max_iterations < 1)
        throw std::invalid_argument("Picard iteration cap must be at least 1");
}

namespace {

SparseMatrix sandwich(const SparseMatrix& left, const SparseMatrix& a, const SparseMatrix& right)
{
    SparseMatrix m = left.transpose() * a * right;
    return m;
}

double max_abs(std::initializer_list<double> values)
{
    double m = 0.0;
    for (double v : values)
        m = std::max(m, std::abs(v));
    return m;
}

} // namespace

GradientScheme::GradientScheme(const GradientDiscretisation& gd, ProblemSpec problem, SolverConfig config)
    : gd_(gd), problem_(std::move(problem)), config_(config)
{
    problem_.validate();
    config_.validate();
    ev_ = gd_.velocity.interior_embedding();
    eb_ = gd_.velocity.boundary_embedding();
    es_ = gd_.scalar.interior_embedding();
    esb_ = gd_.scalar.boundary_embedding();
    velocity_mass_ = gd_.velocity_value.gram();
    scalar_mass_ = gd_.scalar_value.gram();
    scalar_stiffness_ = gd_.scalar_gradient.gram();
    coupling_ = gd_.coupling();
    mean_weights_ = gd_.pressure_mean_weights();
    pressure_gram_.compute(gd_.pressure_value.gram());
    if (pressure_gram_.info() != Eigen::Success)
        throw Error(ErrorKind::SingularGram, "pressure Gram matrix is singular");
}

State GradientScheme::initial_state() const
{
    State s;
    s.u = problem_.initial_velocity ? interpolate_velocity(gd_, problem_.initial_velocity) : Vector::Zero(gd_.velocity.size());
    s.S = problem_.initial_temperature ? interpolate_scalar(gd_, problem_.initial_temperature)
                                       : Vector::Zero(gd_.scalar.size());
    s.p = Vector::Zero(gd_.pressure_size);
    s.t = 0.0;
    return s;
}

Vector GradientScheme::boundary_velocity(double t) const
{
    Vector ub = Vector::Zero(gd_.velocity.size());
    if (!problem_.boundary_velocity)
        return ub;
    const int d = gd_.velocity.components;
    for (std::size_t node = 0; node < gd_.velocity.nodes.size(); ++node) {
        if (!gd_.velocity.on_boundary[node])
            continue;
        const Point value = problem_.boundary_velocity(gd_.velocity.nodes[node], t);
        for (int c = 0; c < d; ++c)
            ub[static_cast<Index>(node) * d + c] = value[c];
    }
    // The mass equation tested with constant pressure reads flux . u_B = 0.
    const Vector flux = eb_.transpose() * (coupling_.transpose() * Vector::Ones(gd_.pressure_size));
    const double flux_norm2 = flux.squaredNorm();
    if (flux_norm2 > 0.0) {
        Vector boundary = eb_.transpose() * ub;
        boundary -= (flux.dot(boundary) / flux_norm2) * flux;
        ub = eb_ * boundary;
    }
    return ub;
}

Vector GradientScheme::boundary_temperature(double t) const
{
    Vector sb = Vector::Zero(gd_.scalar.size());
    if (!problem_.boundary_temperature)
        return sb;
    for (std::size_t node = 0; node < gd_.scalar.nodes.size(); ++node)
        if (gd_.scalar.on_boundary[node])
            sb[static_cast<Index>(node)] = problem_.boundary_temperature(gd_.scalar.nodes[node], t);
    return sb;
}

Vector GradientScheme::momentum_load(double t) const
{
    const int d = gd_.dimension;
    Vector samples = Vector::Zero(gd_.velocity_value.matrix.rows());
    if (problem_.momentum_source) {
        for (std::size_t q = 0; q < gd_.value_points.size(); ++q) {
            const Point g = problem_.momentum_source(gd_.value_points[q], t);
            for (int c = 0; c < d; ++c)
                samples[static_cast<Index>(q) * d + c] = g[c];
        }
    }
    return gd_.velocity_value.matrix.transpose() * samples.cwiseProduct(gd_.velocity_value.weights);
}

Vector GradientScheme::heat_load(double t) const
{
    Vector samples = Vector::Zero(gd_.scalar_value.matrix.rows());
    if (problem_.heat_source)
        for (std::size_t q = 0; q < gd_.value_points.size(); ++q)
            samples[static_cast<Index>(q)] = problem_.heat_source(gd_.value_points[q], t);
    return gd_.scalar_value.matrix.transpose() * samples.cwiseProduct(gd_.scalar_value.weights);
}

double GradientScheme::incompressibility_residual(const Vector& u) const
{
    const Vector b = coupling_ * u;
    const Vector y = pressure_gram_.solve(b);
    return std::sqrt(std::max(b.dot(y), 0.0));
}

std::pair<State, StepDiagnostics> GradientScheme::step(const State& previous, double dt) const
{
    if (!(dt > 0.0))
        throw std::invalid_argument("time step must be positive");
    const double t = previous.t + dt;
    const Vector ub = boundary_velocity(t);
    const Vector sb = boundary_temperature(t);
    const Vector ub_b = eb_.transpose() * ub;
    const Vector sb_b = esb_.transpose() * sb;

    const Vector momentum_rhs = velocity_mass_ * previous.u / dt + momentum_load(t);
    const Vector heat_rhs = scalar_mass_ * previous.S / dt + heat_load(t);
    const SparseMatrix velocity_base = velocity_mass_ / dt;
    const SparseMatrix heat_base = scalar_mass_ / dt + problem_.diffusivity * scalar_stiffness_;
    const SparseMatrix coupling_i = -(coupling_ * ev_);
    const Vector mass_rhs = coupling_ * ub;

    const Index nu = ev_.cols();
    const Index np = gd_.pressure_size;

    // Picard iterate, boundary DOFs pinned to the new boundary data.
    Vector u = ev_ * (ev_.transpose() * previous.u) + ub;
    Vector s = es_ * (es_.transpose() * previous.S) + sb;
    Vector p = previous.p;

    for (int it = 1; it <= config_.picard_max_iterations; ++it) {
        const SparseMatrix heat = heat_base + gd_.convection->scalar_matrix(u);
        const Vector hs = sparse_solve(sandwich(es_, heat, es_), es_.transpose() * heat_rhs - sandwich(es_, heat, esb_) * sb_b,
                                       "heat system");
        const Vector s_next = es_ * hs + sb;

        const SparseMatrix flow =
            velocity_base + hfv::assemble_viscous(gd_, s_next, problem_.viscosity) + gd_.convection->velocity_matrix(u);
        const SaddlePointSolver saddle(sandwich(ev_, flow, ev_), coupling_i, mean_weights_);
        Vector rhs(nu + np + 1);
        rhs.head(nu) = ev_.transpose() * momentum_rhs - sandwich(ev_, flow, eb_) * ub_b;
        rhs.segment(nu, np) = mass_rhs;
        rhs[nu + np] = 0.0;
        const Vector sol = saddle.solve(rhs);
        const Vector u_next = ev_ * sol.head(nu) + ub;
        p = sol.segment(nu, np);

        const double change = (u_next - u).squaredNorm() + (s_next - s).squaredNorm();
        const double size = u_next.squaredNorm() + s_next.squaredNorm();
        u = u_next;
        s = s_next;
        if (std::sqrt(change) <= config_.picard_tolerance * std::sqrt(size)) {
            State next{u, p, s, t};
            StepDiagnostics diag = diagnose(previous, next, dt, it);
            return {std::move(next), diag};
        }
    }
    throw Error(ErrorKind::PicardDivergence,
                "no convergence in " + std::to_string(config_.picard_max_iterations) + " Picard iterations");
}

StepDiagnostics GradientScheme::diagnose(const State& previous, const State& next, double dt, int iterations) const
{
    StepDiagnostics diag;
    diag.picard_iterations = iterations;
    diag.incompressibility = incompressibility_residual(next.u);
    diag.pressure_mean = mean_weights_.dot(next.p);

    // Test the momentum equation with the homogeneous part u0 of u; lift = u - u0
    // carries the boundary data and vanishes for homogeneous problems.
    {
        const Vector u0 = ev_ * (ev_.transpose() * next.u);
        const Vector lift = next.u - u0;
        const SparseMatrix visc = hfv::assemble_viscous(gd_, next.S, problem_.viscosity);
        const auto& pi = gd_.velocity_value;
        const double kinetic_new = 0.5 * pi.inner(next.u, next.u);
        const double kinetic_old = 0.5 * pi.inner(previous.u, previous.u);
        const double dissipation = problem_.viscosity.lower * dt * gd_.velocity_gradient.inner(u0, u0);
        const double forcing = dt * momentum_load(next.t).dot(u0);
        const double lift_time = pi.inner(next.u - previous.u, lift);
        const double lift_visc = -dt * lift.dot(visc * u0);
        const double lift_conv = dt * gd_.convection->velocity_form(next.u, next.u, lift);
        const double lift_pressure = -dt * next.p.dot(coupling_ * lift);
        const double lhs = kinetic_new - kinetic_old + dissipation;
        const double rhs = forcing + lift_time + lift_visc + lift_conv + lift_pressure;
        diag.velocity_energy = {lhs - rhs, max_abs({kinetic_new, kinetic_old, dissipation, forcing, lift_time, lift_visc,
                                                    lift_conv, lift_pressure})};
    }
    {
        const Vector s0 = es_ * (es_.transpose() * next.S);
        const Vector lift = next.S - s0;
        const auto& pi = gd_.scalar_value;
        const double kinetic_new = 0.5 * pi.inner(next.S, next.S);
        const double kinetic_old = 0.5 * pi.inner(previous.S, previous.S);
        const double dissipation = problem_.diffusivity * dt * gd_.scalar_gradient.inner(s0, s0);
        const double forcing = dt * heat_load(next.t).dot(s0);
        const double lift_time = pi.inner(next.S - previous.S, lift);
        const double lift_diff = -problem_.diffusivity * dt * gd_.scalar_gradient.inner(lift, s0);
        const double lift_conv = dt * gd_.convection->scalar_form(next.u, next.S, lift);
        const double lhs = kinetic_new - kinetic_old + dissipation;
        const double rhs = forcing + lift_time + lift_diff + lift_conv;
        diag.temperature_energy = {lhs - rhs,
                                   max_abs({kinetic_new, kinetic_old, dissipation, forcing, lift_time, lift_diff, lift_conv})};
    }
    return diag;
}

Trajectory GradientScheme::solve(const TimeGrid& grid) const
{
    Trajectory out;
    out.states.reserve(static_cast<std::size_t>(grid.num_steps()) + 1);
    out.diagnostics.reserve(static_cast<std::size_t>(grid.num_steps()));
    out.states.push_back(initial_state());
    for (int n = 0; n < grid.num_steps(); ++n) {
        try {
            auto [next, diag] = step(out.states.back(), grid.step(n));
            next.t = grid.time(n + 1);
            out.states.push_back(std::move(next));
            out.diagnostics.push_back(diag);
        } catch (const Error& e) {
            std::ostringstream where;
            where << "time step " << n << " (t = " << grid.time(n + 1) << ")";
            throw e.with_context(where.str());
        }
    }
    return out;
}

State initial_state(const GradientDiscretisation& gd, const ProblemSpec& problem)
{
    return GradientScheme(gd, problem).initial_state();
}

std::pair<State, StepDiagnostics> step(const GradientDiscretisation& gd, const ProblemSpec& problem, const State& state,
                                       double dt, const SolverConfig& config)
{
    return GradientScheme(gd, problem, config).step(state, dt);
}

Trajectory solve_transient(const GradientDiscretisation& gd, const ProblemSpec& problem, const TimeGrid& grid,
                           const SolverConfig& config)
{
    return GradientScheme(gd, problem, config).solve(grid);
}

std::pair<double, double> time_derivative_dual_norms(const GradientDiscretisation& gd, const Trajectory& trajectory)
{
    const DualSeminorm dual(gd);
    double velocity = 0.0;
    double scalar = 0.0;
    for (std::size_t n = 0; n + 1 < trajectory.states.size(); ++n) {
        const State& a = trajectory.states[n];
        const State& b = trajectory.states[n + 1];
        // dt * |(Pi u^{n+1} - Pi u^n) / dt|_* = |Pi u^{n+1} - Pi u^n|_*
        velocity += dual.velocity(gd.velocity_value.apply(b.u - a.u));
        scalar += dual.scalar(gd.scalar_value.apply(b.S - a.S));
    }
    return {velocity, scalar};
}

} // namespace gdm
