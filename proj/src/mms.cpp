#include "gdm/mms.hpp"

#include "gdm/errors.hpp"
#include "gdm/hfv.hpp"

#include <algorithm>
#include <cmath>
#include <future>
#include <numbers>
#include <set>
#include <string>

namespace gdm::mms {

namespace {

double wave(double t) { return std::numbers::pi + t; }

} // namespace

double taylor_green_pressure_mean(double t)
{
    const double k = wave(t);
    const double int_sin = 0.0; // int_{-1}^{1} sin(k x) dx, odd integrand
    const double int_cos = 2.0 * std::sin(k) / k;
    return int_sin * int_cos / 4.0;
}

ExactSolution taylor_green_solution()
{
    ExactSolution s;
    s.velocity = [](const Point& x, double t) {
        const double k = wave(t);
        return Point(std::sin(k * x.y()) * std::cos(k * x.x()), -std::cos(k * x.y()) * std::sin(k * x.x()));
    };
    s.velocity_gradient = [](const Point& x, double t) {
        const double k = wave(t);
        const double sx = std::sin(k * x.x()), cx = std::cos(k * x.x());
        const double sy = std::sin(k * x.y()), cy = std::cos(k * x.y());
        Eigen::Matrix2d g;
        g << -k * sy * sx, k * cy * cx, //
            -k * cy * cx, k * sy * sx;
        return g;
    };
    // dk/dt = 1, so d/dt f(k x) = x f'(k x).
    s.velocity_time_derivative = [](const Point& x, double t) {
        const double k = wave(t);
        const double sx = std::sin(k * x.x()), cx = std::cos(k * x.x());
        const double sy = std::sin(k * x.y()), cy = std::cos(k * x.y());
        return Point(x.y() * cy * cx - x.x() * sy * sx, x.y() * sy * sx - x.x() * cy * cx);
    };
    s.velocity_laplacian = [u = s.velocity](const Point& x, double t) {
        const double k = wave(t);
        return Point(-2.0 * k * k * u(x, t));
    };
    s.pressure = [](const Point& x, double t) {
        const double k = wave(t);
        return std::sin(k * x.x()) * std::cos(k * x.y()) - taylor_green_pressure_mean(t);
    };
    s.pressure_gradient = [](const Point& x, double t) {
        const double k = wave(t);
        return Point(k * std::cos(k * x.x()) * std::cos(k * x.y()), -k * std::sin(k * x.x()) * std::sin(k * x.y()));
    };
    s.temperature = [](const Point& x, double t) { return t * std::sin(x.x() + x.y()); };
    s.temperature_gradient = [](const Point& x, double t) {
        const double c = t * std::cos(x.x() + x.y());
        return Point(c, c);
    };
    s.temperature_time_derivative = [](const Point& x, double) { return std::sin(x.x() + x.y()); };
    s.temperature_laplacian = [](const Point& x, double t) { return -2.0 * t * std::sin(x.x() + x.y()); };
    return s;
}

Forcing forcing_from_exact(const ExactSolution& sol, const ViscosityModel& viscosity, double diffusivity)
{
    Forcing f;
    f.momentum = [sol, viscosity](const Point& x, double t) -> Point {
        const Point u = sol.velocity(x, t);
        const Eigen::Matrix2d grad_u = sol.velocity_gradient(x, t);
        const double s = sol.temperature(x, t);
        // div(V(S) grad u_j) = V(S) lap u_j + V'(S) grad S . grad u_j
        const Point diffusion =
            viscosity(s) * sol.velocity_laplacian(x, t) + viscosity.derivative(s) * (grad_u * sol.temperature_gradient(x, t));
        return sol.velocity_time_derivative(x, t) - diffusion + grad_u * u + sol.pressure_gradient(x, t);
    };
    f.heat = [sol, diffusivity](const Point& x, double t) {
        return sol.temperature_time_derivative(x, t) - diffusivity * sol.temperature_laplacian(x, t) +
               sol.velocity(x, t).dot(sol.temperature_gradient(x, t));
    };
    return f;
}

ProblemSpec manufactured_problem(const ExactSolution& sol, const ViscosityModel& viscosity, double diffusivity,
                                 double final_time)
{
    const Forcing forcing = forcing_from_exact(sol, viscosity, diffusivity);
    ProblemSpec p;
    p.viscosity = viscosity;
    p.diffusivity = diffusivity;
    p.momentum_source = forcing.momentum;
    p.heat_source = forcing.heat;
    p.initial_velocity = [v = sol.velocity](const Point& x) { return v(x, 0.0); };
    p.initial_temperature = [s = sol.temperature](const Point& x) { return s(x, 0.0); };
    p.boundary_velocity = sol.velocity;
    p.boundary_temperature = sol.temperature;
    p.final_time = final_time;
    return p;
}

CellQuadrature CellQuadrature::centroid(const GradientDiscretisation& gd)
{
    CellQuadrature q;
    q.cells.reserve(gd.value_points.size());
    for (std::size_t c = 0; c < gd.value_points.size(); ++c)
        q.cells.push_back({{gd.value_points[c], gd.scalar_value.weights[static_cast<Index>(c)]}});
    return q;
}

CellQuadrature CellQuadrature::subtriangle(const Mesh& mesh, const MeshGeometry& geometry)
{
    // Dunavant degree-5 rule: (barycentric a, b, b) orbits with weights summing to 1.
    struct Orbit {
        double a, b, w;
    };
    static constexpr std::array<Orbit, 3> orbits{{
        {1.0 / 3.0, 1.0 / 3.0, 0.225},
        {0.059715871789769820, 0.470142064105115090, 0.132394152788506181},
        {0.797426985353087322, 0.101286507323456339, 0.125939180544827153},
    }};

    CellQuadrature q;
    q.cells.resize(static_cast<std::size_t>(mesh.num_cells()));
    for (Index c = 0; c < mesh.num_cells(); ++c) {
        const Point& xk = geometry.cell_center[static_cast<std::size_t>(c)];
        const auto& cell = mesh.cells()[static_cast<std::size_t>(c)];
        auto& nodes = q.cells[static_cast<std::size_t>(c)];
        for (std::size_t k = 0; k < cell.size(); ++k) {
            const Point& p1 = mesh.vertices()[static_cast<std::size_t>(cell[k])];
            const Point& p2 = mesh.vertices()[static_cast<std::size_t>(cell[(k + 1) % cell.size()])];
            const Point e1 = p1 - xk, e2 = p2 - xk;
            const double area = 0.5 * (e1.x() * e2.y() - e1.y() * e2.x());
            const std::array<Point, 3> v{xk, p1, p2};
            for (const auto& o : orbits) {
                if (o.a == o.b) {
                    nodes.push_back({(v[0] + v[1] + v[2]) / 3.0, o.w * area});
                    continue;
                }
                for (int r = 0; r < 3; ++r) {
                    const Point x = o.a * v[static_cast<std::size_t>(r)] + o.b * v[static_cast<std::size_t>((r + 1) % 3)] +
                                    o.b * v[static_cast<std::size_t>((r + 2) % 3)];
                    nodes.push_back({x, o.w * area});
                }
            }
        }
    }
    return q;
}

ErrorSet compute_errors(const GradientDiscretisation& gd, const State& state, const ExactSolution& sol, double t,
                        const CellQuadrature& quadrature)
{
    const Vector u = gd.velocity_value.apply(state.u);
    const Vector p = gd.pressure_value.apply(state.p);
    const Vector s = gd.scalar_value.apply(state.S);
    if (quadrature.cells.size() != gd.value_points.size())
        throw std::invalid_argument("quadrature does not match the discretisation");

    std::array<double, 5> err{}, ref{};
    for (std::size_t c = 0; c < quadrature.cells.size(); ++c) {
        const auto i = static_cast<Index>(c);
        for (const auto& node : quadrature.cells[c]) {
            const Point ue = sol.velocity(node.x, t);
            const double pe = sol.pressure(node.x, t);
            const double se = sol.temperature(node.x, t);
            for (int k = 0; k < 2; ++k) {
                err[static_cast<std::size_t>(k)] += node.weight * std::pow(ue[k] - u[2 * i + k], 2);
                ref[static_cast<std::size_t>(k)] += node.weight * ue[k] * ue[k];
            }
            err[3] += node.weight * std::pow(pe - p[i], 2);
            ref[3] += node.weight * pe * pe;
            err[4] += node.weight * std::pow(se - s[i], 2);
            ref[4] += node.weight * se * se;
        }
    }
    err[2] = err[0] + err[1];
    ref[2] = ref[0] + ref[1];

    static constexpr std::array<const char*, 5> names{"u1", "u2", "u", "p", "S"};
    std::array<double, 5> rel{};
    for (std::size_t k = 0; k < 5; ++k) {
        const double norm = std::sqrt(ref[k]);
        if (norm < 1e-14)
            throw Error(ErrorKind::ZeroNorm, std::string("exact ") + names[k] + " has zero norm at t = " + std::to_string(t));
        rel[k] = std::sqrt(err[k]) / norm;
    }
    return {rel[0], rel[1], rel[2], rel[3], rel[4]};
}

ErrorSet compute_errors(const GradientDiscretisation& gd, const State& state, const ExactSolution& sol, double t)
{
    return compute_errors(gd, state, sol, t, CellQuadrature::centroid(gd));
}

RateFit fit_rate(const std::vector<double>& hs, const std::vector<double>& errors)
{
    if (hs.size() != errors.size())
        throw std::invalid_argument("fit_rate: h and error lists differ in length");
    if (hs.size() < 3)
        throw Error(ErrorKind::InsufficientLevels, "rate fit needs at least 3 levels, got " + std::to_string(hs.size()));
    const auto n = static_cast<double>(hs.size());
    double mx = 0.0, my = 0.0;
    std::vector<double> x(hs.size()), y(hs.size());
    for (std::size_t i = 0; i < hs.size(); ++i) {
        if (!(hs[i] > 0.0) || !(errors[i] > 0.0))
            throw Error(ErrorKind::NonpositiveValue, "rate fit needs positive h and errors (level " + std::to_string(i) + ")");
        x[i] = std::log(hs[i]);
        y[i] = std::log(errors[i]);
        mx += x[i];
        my += y[i];
    }
    mx /= n;
    my /= n;
    double sxx = 0.0, sxy = 0.0;
    for (std::size_t i = 0; i < hs.size(); ++i) {
        sxx += (x[i] - mx) * (x[i] - mx);
        sxy += (x[i] - mx) * (y[i] - my);
    }
    if (!(sxx > 0.0))
        throw Error(ErrorKind::InsufficientLevels, "rate fit needs at least two distinct mesh sizes");
    RateFit fit;
    fit.slope = sxy / sxx;
    fit.intercept = my - fit.slope * mx;
    double ss = 0.0;
    for (std::size_t i = 0; i < hs.size(); ++i)
        ss += std::pow(y[i] - fit.intercept - fit.slope * x[i], 2);
    fit.residual = std::sqrt(ss);
    return fit;
}

MeshFamily triangular_family(std::vector<int> levels)
{
    return {"triangular", [](int n) { return build_triangular(n); }, std::move(levels)};
}

MeshFamily distorted_family(std::vector<int> levels, double amplitude)
{
    return {"distorted", [amplitude](int n) { return build_distorted(n, amplitude); }, std::move(levels)};
}

int steps_for(double final_time, double dt)
{
    if (!(dt > 0.0) || !(final_time > 0.0))
        throw std::invalid_argument("time step and final time must be positive");
    return std::max(1, static_cast<int>(std::ceil(final_time / dt - 1e-9)));
}

LevelResult run_level(const Mesh& mesh, int n, const ManufacturedCase& problem, const StudyConfig& config, double dt)
{
    const MeshGeometry geometry = compute_geometry(mesh);
    const GradientDiscretisation gd = hfv::build_hfv(mesh, geometry);
    const ProblemSpec spec =
        manufactured_problem(problem.solution, problem.viscosity, problem.diffusivity, config.final_time);
    const int steps = steps_for(config.final_time, dt);
    const TimeGrid grid = TimeGrid::uniform(config.final_time, steps);
    Trajectory trajectory = solve_transient(gd, spec, grid, config.solver);

    LevelResult r;
    r.n = n;
    r.h = geometry.h;
    r.dofs_u = gd.velocity.interior_size();
    r.dofs_p = gd.pressure_size;
    r.dofs_S = gd.scalar.interior_size();
    r.dt = grid.step(0);
    r.steps = steps;
    r.errors = compute_errors(gd, trajectory.states.back(), problem.solution, config.final_time,
                              CellQuadrature::subtriangle(mesh, geometry));
    r.diagnostics = std::move(trajectory.diagnostics);
    return r;
}

std::vector<LevelOutcome> run_levels(const MeshFamily& family, const ManufacturedCase& problem, const StudyConfig& config)
{
    const std::size_t count = family.levels.size();
    std::vector<LevelOutcome> out(count);
    std::vector<std::optional<Mesh>> meshes(count);
    std::vector<double> hs(count, 0.0);
    for (std::size_t i = 0; i < count; ++i) {
        try {
            meshes[i] = family.build(family.levels[i]);
            hs[i] = compute_geometry(*meshes[i]).h;
        } catch (const Error& e) {
            out[i].error = e;
        }
    }
    const double h0 = *std::max_element(hs.begin(), hs.end());

    auto work = [&](std::size_t i) {
        if (out[i].error)
            return;
        try {
            const double dt = config.fixed_dt ? *config.fixed_dt : config.dt_factor * hs[i] / h0;
            out[i].result = run_level(*meshes[i], family.levels[i], problem, config, dt);
        } catch (const Error& e) {
            out[i].error = e;
        }
    };

    const auto threads = static_cast<std::size_t>(std::max(1, config.threads));
    if (threads == 1) {
        for (std::size_t i = 0; i < count; ++i)
            work(i);
        return out;
    }
    // Finest levels first so the longest jobs start early; results land in their own slots.
    std::vector<std::size_t> order(count);
    for (std::size_t i = 0; i < count; ++i)
        order[i] = i;
    std::sort(order.begin(), order.end(), [&hs](std::size_t a, std::size_t b) { return hs[a] < hs[b]; });
    for (std::size_t start = 0; start < count; start += threads) {
        std::vector<std::future<void>> batch;
        for (std::size_t k = start; k < std::min(count, start + threads); ++k)
            batch.push_back(std::async(std::launch::async, work, order[k]));
        for (auto& f : batch)
            f.get();
    }
    return out;
}

std::array<RateFit, 5> fit_all(const std::vector<LevelResult>& levels)
{
    std::vector<double> hs;
    std::array<std::vector<double>, 5> e;
    for (const auto& l : levels) {
        hs.push_back(l.h);
        e[0].push_back(l.errors.velocity_x);
        e[1].push_back(l.errors.velocity_y);
        e[2].push_back(l.errors.velocity);
        e[3].push_back(l.errors.pressure);
        e[4].push_back(l.errors.temperature);
    }
    std::array<RateFit, 5> fits;
    for (std::size_t k = 0; k < 5; ++k)
        fits[k] = fit_rate(hs, e[k]);
    return fits;
}

ConvergenceReport convergence_study(const MeshFamily& family, const ManufacturedCase& problem, const StudyConfig& config)
{
    const std::set<int> distinct(family.levels.begin(), family.levels.end());
    if (distinct.size() < 3)
        throw Error(ErrorKind::InsufficientLevels,
                    "convergence study needs at least 3 distinct levels, got " + std::to_string(distinct.size()));

    auto outcomes = run_levels(family, problem, config);
    ConvergenceReport report;
    for (std::size_t i = 0; i < outcomes.size(); ++i) {
        if (outcomes[i].error)
            throw outcomes[i].error->with_context("level " + std::to_string(i) + " (n = " + std::to_string(family.levels[i]) + ")");
        report.levels.push_back(std::move(*outcomes[i].result));
    }
    std::stable_sort(report.levels.begin(), report.levels.end(),
                     [](const LevelResult& a, const LevelResult& b) { return a.h > b.h; });
    report.fits = fit_all(report.levels);
    return report;
}

} // namespace gdm::mms
