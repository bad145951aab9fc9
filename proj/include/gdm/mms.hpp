#pragma once

#include "gdm/errors.hpp"
#include "gdm/gd_core.hpp"
#include "gdm/mesh.hpp"
#include "gdm/scheme.hpp"
#include "gdm/viscosity.hpp"

#include <Eigen/Core>

#include <array>
#include <functional>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace gdm::mms {

using SpaceTimeMatrix = std::function<Eigen::Matrix2d(const Point&, double)>;

/// Exact fields with the analytic derivatives needed to derive forcings.
/// velocity_gradient(x, t) has rows grad u_j.
struct ExactSolution {
    SpaceTimeVector velocity;
    SpaceTimeMatrix velocity_gradient;
    SpaceTimeVector velocity_time_derivative;
    SpaceTimeVector velocity_laplacian;
    SpaceTimeScalar pressure; // zero mean over the domain at every t
    SpaceTimeVector pressure_gradient;
    SpaceTimeScalar temperature;
    SpaceTimeVector temperature_gradient;
    SpaceTimeScalar temperature_time_derivative;
    SpaceTimeScalar temperature_laplacian;
};

/// On [-1,1]^2 with k = pi + t:
///   u = (sin(k y) cos(k x), -cos(k y) sin(k x)),  p = sin(k x) cos(k y) - mean,  S = t sin(x + y).
ExactSolution taylor_green_solution();

/// Spatial mean of sin(k x) cos(k y) over [-1,1]^2 (zero: the x factor is odd).
double taylor_green_pressure_mean(double t);

struct Forcing {
    SpaceTimeVector momentum;
    SpaceTimeScalar heat;
};

/// g = du/dt - div(V(S) grad u) + (u . grad) u + grad p,  h = dS/dt - mu lap S + u . grad S.
Forcing forcing_from_exact(const ExactSolution& solution, const ViscosityModel& viscosity, double diffusivity);

/// Problem whose exact solution is `solution`: forcings, initial and boundary data from it.
ProblemSpec manufactured_problem(const ExactSolution& solution, const ViscosityModel& viscosity, double diffusivity,
                                 double final_time);

struct ErrorSet {
    double velocity_x = 0.0; // E_u1
    double velocity_y = 0.0; // E_u2
    double velocity = 0.0;   // E1
    double pressure = 0.0;   // E2
    double temperature = 0.0; // E3
};

/// Quadrature nodes and weights attached to each value row (cell) of a discretisation.
struct CellQuadrature {
    struct Node {
        Point x;
        double weight;
    };
    std::vector<std::vector<Node>> cells;

    /// One point per cell at the value point, weighted by the cell measure.
    static CellQuadrature centroid(const GradientDiscretisation& gd);
    /// Degree-5 rule (7 points) on each triangle (x_K, a, b) of every cell.
    static CellQuadrature subtriangle(const Mesh& mesh, const MeshGeometry& geometry);
};

/// Relative L2 errors ||exact - reconstruction|| / ||exact|| at time t. Throws
/// Error{ZeroNorm} when an exact norm is below 1e-14.
ErrorSet compute_errors(const GradientDiscretisation& gd, const State& state, const ExactSolution& solution, double t,
                        const CellQuadrature& quadrature);
/// Centroid-quadrature variant.
ErrorSet compute_errors(const GradientDiscretisation& gd, const State& state, const ExactSolution& solution, double t);

struct RateFit {
    double slope = 0.0;     // r
    double intercept = 0.0; // log C
    double residual = 0.0;  // sqrt of the sum of squared log residuals
};

/// Least squares on log E = log C + r log h. Needs at least three pairs with
/// distinct h; throws InsufficientLevels / NonpositiveValue.
RateFit fit_rate(const std::vector<double>& hs, const std::vector<double>& errors);

struct MeshFamily {
    std::string name;
    std::function<Mesh(int)> build;
    std::vector<int> levels;
};

MeshFamily triangular_family(std::vector<int> levels);
MeshFamily distorted_family(std::vector<int> levels, double amplitude = 0.3);

struct ManufacturedCase {
    ExactSolution solution = taylor_green_solution();
    ViscosityModel viscosity = ViscosityModel::constant(1.0);
    double diffusivity = 1.0;
};

struct StudyConfig {
    SolverConfig solver;
    double final_time = 0.1;
    /// dt = dt_factor * h / h_coarsest, rounded down to divide T.
    double dt_factor = 0.1;
    /// Overrides dt_factor when set.
    std::optional<double> fixed_dt;
    int threads = 1;
};

struct LevelResult {
    int n = 0;
    double h = 0.0;
    Index dofs_u = 0;
    Index dofs_p = 0;
    Index dofs_S = 0;
    double dt = 0.0;
    int steps = 0;
    ErrorSet errors;
    std::vector<StepDiagnostics> diagnostics;
};

/// Outcome of one level: a result, or the error that stopped it.
struct LevelOutcome {
    std::optional<LevelResult> result;
    std::optional<Error> error;
};

inline constexpr std::array<std::string_view, 5> error_names{"E_u1", "E_u2", "E1", "E2", "E3"};

struct ConvergenceReport {
    std::vector<LevelResult> levels; // decreasing h
    std::array<RateFit, 5> fits;     // in error_names order
};

/// Number of uniform steps covering [0, T] with step at most `dt`.
int steps_for(double final_time, double dt);

/// Runs one manufactured solve on a given mesh.
LevelResult run_level(const Mesh& mesh, int n, const ManufacturedCase& problem, const StudyConfig& config, double dt);

/// Runs every level (possibly concurrently); never throws for a failing level.
std::vector<LevelOutcome> run_levels(const MeshFamily& family, const ManufacturedCase& problem, const StudyConfig& config);

std::array<RateFit, 5> fit_all(const std::vector<LevelResult>& levels);

/// Throws the first level error with "level i (n = ...)" context.
ConvergenceReport convergence_study(const MeshFamily& family, const ManufacturedCase& problem, const StudyConfig& config);

} // namespace gdm::mms
