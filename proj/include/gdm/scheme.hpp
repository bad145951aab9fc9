#pragma once

#include "gdm/gd_core.hpp"
#include "gdm/viscosity.hpp"

#include <Eigen/SparseCholesky>

#include <functional>
#include <memory>
#include <utility>
#include <vector>

namespace gdm {

using SpaceTimeVector = std::function<Point(const Point&, double)>;
using SpaceTimeScalar = std::function<double(const Point&, double)>;

/// Coupled Navier-Stokes/heat problem data. Empty callables mean zero.
struct ProblemSpec {
    ViscosityModel viscosity = ViscosityModel::constant(1.0);
    double diffusivity = 1.0; // mu
    SpaceTimeVector momentum_source;
    SpaceTimeScalar heat_source;
    VectorFunction initial_velocity;
    ScalarFunction initial_temperature;
    SpaceTimeVector boundary_velocity;
    SpaceTimeScalar boundary_temperature;
    double final_time = 0.1;
    /// V is checked against its declared bounds on [-range, range].
    double viscosity_sample_range = 10.0;

    /// Throws std::invalid_argument on mu <= 0, T <= 0 or a bound violation.
    void validate() const;
};

/// One time level. Velocity and temperature are full-layout (boundary DOFs pinned).
struct State {
    Vector u;
    Vector p;
    Vector S;
    double t = 0.0;
};

struct SolverConfig {
    double picard_tolerance = 1e-9;
    int picard_max_iterations = 50;

    void validate() const;
};

/// Per-step discrete energy inequality: lhs <= rhs. residual = lhs - rhs, scale is
/// the magnitude of the largest term.
struct EnergyBalance {
    double residual = 0.0;
    double scale = 0.0;

    [[nodiscard]] double relative() const { return scale > 0.0 ? residual / scale : residual; }
    [[nodiscard]] bool holds(double slack) const { return residual <= slack * scale; }
};

struct StepDiagnostics {
    int picard_iterations = 0;
    EnergyBalance velocity_energy;
    EnergyBalance temperature_energy;
    double incompressibility = 0.0; // sup_q |int chi q div u| / ||chi q||
    double pressure_mean = 0.0;     // int chi p
};

struct Trajectory {
    std::vector<State> states;
    std::vector<StepDiagnostics> diagnostics;
};

/// Backward-Euler gradient scheme with a heat-then-Oseen Picard loop per step.
/// Holds the time-independent matrices of one discretisation.
class GradientScheme {
public:
    GradientScheme(const GradientDiscretisation& gd, ProblemSpec problem, SolverConfig config = {});

    [[nodiscard]] State initial_state() const;
    [[nodiscard]] std::pair<State, StepDiagnostics> step(const State& previous, double dt) const;
    [[nodiscard]] Trajectory solve(const TimeGrid& grid) const;

    /// Boundary values at time t, zero on interior DOFs. The velocity is corrected
    /// along the boundary flux functional so that its discrete net flux vanishes.
    [[nodiscard]] Vector boundary_velocity(double t) const;
    [[nodiscard]] Vector boundary_temperature(double t) const;
    /// int g(., t) . Pi_D v and int h(., t) tPi_D r with one-point quadrature per row.
    [[nodiscard]] Vector momentum_load(double t) const;
    [[nodiscard]] Vector heat_load(double t) const;

    [[nodiscard]] double incompressibility_residual(const Vector& u) const;
    [[nodiscard]] const GradientDiscretisation& discretisation() const noexcept { return gd_; }
    [[nodiscard]] const ProblemSpec& problem() const noexcept { return problem_; }

private:
    [[nodiscard]] StepDiagnostics diagnose(const State& previous, const State& next, double dt, int iterations) const;

    const GradientDiscretisation& gd_;
    ProblemSpec problem_;
    SolverConfig config_;

    SparseMatrix ev_, eb_, es_, esb_;
    SparseMatrix velocity_mass_;
    SparseMatrix scalar_mass_;
    SparseMatrix scalar_stiffness_;
    SparseMatrix coupling_;
    Vector mean_weights_;
    Eigen::SimplicialLDLT<SparseMatrix> pressure_gram_;
};

State initial_state(const GradientDiscretisation& gd, const ProblemSpec& problem);
std::pair<State, StepDiagnostics> step(const GradientDiscretisation& gd, const ProblemSpec& problem, const State& state,
                                       double dt, const SolverConfig& config = {});
/// Errors are rethrown with the failing time index prepended.
Trajectory solve_transient(const GradientDiscretisation& gd, const ProblemSpec& problem, const TimeGrid& grid,
                           const SolverConfig& config = {});

/// sum_n dt |delta u|_{*,D} and sum_n dt |delta S|_{*,D~} over a trajectory.
std::pair<double, double> time_derivative_dual_norms(const GradientDiscretisation& gd, const Trajectory& trajectory);

} // namespace gdm
