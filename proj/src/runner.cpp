#include "gdm/cli.hpp"

#include "gdm/errors.hpp"
#include "gdm/hfv.hpp"
#include "gdm/mms.hpp"
#include "gdm/scheme.hpp"

#include <algorithm>
#include <cstdlib>
#include <fstream>
#include <iomanip>
#include <limits>
#include <ostream>
#include <thread>

namespace gdm::cli {

namespace {

constexpr const char* incomplete_marker = "# INCOMPLETE";

class CsvFile {
public:
    CsvFile(const std::filesystem::path& path, const std::string& header) : out_(path)
    {
        if (!out_)
            throw std::runtime_error("cannot write '" + path.string() + "'");
        out_ << std::setprecision(std::numeric_limits<double>::max_digits10);
        out_ << header << '\n';
    }

    std::ofstream& stream() { return out_; }
    void mark_incomplete() { out_ << incomplete_marker << '\n'; }

private:
    std::ofstream out_;
};

ViscosityModel viscosity_for(const RunConfig& cfg)
{
    return cfg.viscosity_model == "sqrt_coupled" ? ViscosityModel::sqrt_coupled(cfg.viscosity_range)
                                                 : ViscosityModel::constant(1.0);
}

mms::StudyConfig study_config(const RunConfig& cfg, int threads)
{
    mms::StudyConfig sc;
    sc.solver.picard_tolerance = cfg.picard_tol;
    sc.solver.picard_max_iterations = cfg.picard_max_iter;
    sc.final_time = cfg.final_time;
    sc.dt_factor = cfg.dt_factor;
    sc.fixed_dt = cfg.dt;
    sc.threads = threads;
    return sc;
}

const char* errors_header = "level,h,dofs_u,dofs_p,dofs_S,E_u1,E_u2,E1,E2,E3";
const char* diagnostics_header =
    "level,step,t,picard_iters,energy_residual_u,energy_residual_S,incompressibility_residual";

void write_error_row(std::ostream& out, const mms::LevelResult& r)
{
    out << r.n << ',' << r.h << ',' << r.dofs_u << ',' << r.dofs_p << ',' << r.dofs_S << ',' << r.errors.velocity_x << ','
        << r.errors.velocity_y << ',' << r.errors.velocity << ',' << r.errors.pressure << ',' << r.errors.temperature << '\n';
}

void write_diagnostic_rows(std::ostream& out, int level, double dt, const std::vector<StepDiagnostics>& diags)
{
    for (std::size_t k = 0; k < diags.size(); ++k) {
        const auto& d = diags[k];
        out << level << ',' << k + 1 << ',' << dt * static_cast<double>(k + 1) << ',' << d.picard_iterations << ','
            << d.velocity_energy.relative() << ',' << d.temperature_energy.relative() << ',' << d.incompressibility << '\n';
    }
}

int exit_code_for(ErrorKind kind)
{
    switch (kind) {
    case ErrorKind::Config:
    case ErrorKind::InsufficientLevels:
        return exit_config;
    case ErrorKind::Parse:
    case ErrorKind::Topology:
    case ErrorKind::DegenerateCell:
        return exit_mesh;
    default:
        return exit_solver;
    }
}

int run_study(const RunConfig& cfg, const std::filesystem::path& dir, const RunOptions& opt, std::ostream& log)
{
    const mms::MeshFamily family = cfg.mesh_family == "triangular" ? mms::triangular_family(cfg.levels)
                                                                   : mms::distorted_family(cfg.levels, cfg.amplitude);
    const mms::ManufacturedCase problem{mms::taylor_green_solution(), viscosity_for(cfg), cfg.mu};
    const auto outcomes = mms::run_levels(family, problem, study_config(cfg, opt.threads));

    CsvFile errors(dir / "errors.csv", errors_header);
    CsvFile diagnostics(dir / "diagnostics.csv", diagnostics_header);
    std::vector<mms::LevelResult> done;
    std::optional<Error> failure;
    for (std::size_t i = 0; i < outcomes.size(); ++i) {
        if (outcomes[i].error) {
            if (!failure)
                failure = outcomes[i].error->with_context("level " + std::to_string(i) + " (n = " +
                                                          std::to_string(cfg.levels[i]) + ")");
            continue;
        }
        const auto& r = *outcomes[i].result;
        write_error_row(errors.stream(), r);
        write_diagnostic_rows(diagnostics.stream(), r.n, r.dt, r.diagnostics);
        done.push_back(r);
        if (!opt.quiet)
            log << "level n=" << r.n << " h=" << r.h << " steps=" << r.steps << " E1=" << r.errors.velocity
                << " E2=" << r.errors.pressure << " E3=" << r.errors.temperature << '\n';
    }
    if (failure) {
        errors.mark_incomplete();
        diagnostics.mark_incomplete();
        log << "error: " << failure->what() << '\n';
        return exit_code_for(failure->kind());
    }

    std::stable_sort(done.begin(), done.end(), [](const auto& a, const auto& b) { return a.h > b.h; });
    std::array<mms::RateFit, 5> fits;
    try {
        fits = mms::fit_all(done);
    } catch (const Error& e) {
        log << "error: " << e.what() << '\n';
        return exit_code_for(e.kind());
    }
    std::ofstream rates(dir / "rates.txt");
    rates << std::setprecision(std::numeric_limits<double>::max_digits10);
    rates << "# quantity slope log_C residual\n";
    for (std::size_t k = 0; k < fits.size(); ++k)
        rates << mms::error_names[k] << ' ' << fits[k].slope << ' ' << fits[k].intercept << ' ' << fits[k].residual << '\n';
    if (!opt.quiet) {
        log << std::setprecision(4);
        for (std::size_t k = 0; k < fits.size(); ++k)
            log << mms::error_names[k] << ": slope " << fits[k].slope << ", residual " << fits[k].residual << '\n';
    }
    return exit_ok;
}

int run_single(const RunConfig& cfg, const std::filesystem::path& dir, const RunOptions& opt, std::ostream& log)
{
    const int n = cfg.uses_mesh_file() ? 0 : cfg.levels.front();
    const Mesh mesh = cfg.mesh_family == "triangular" ? build_triangular(n)
                      : cfg.mesh_family == "distorted" ? build_distorted(n, cfg.amplitude)
                                                       : load_mesh(cfg.mesh_family);
    const MeshGeometry geometry = compute_geometry(mesh);
    const GradientDiscretisation gd = hfv::build_hfv(mesh, geometry);

    const mms::ExactSolution exact = mms::taylor_green_solution();
    ProblemSpec spec;
    if (cfg.problem == ProblemKind::Manufactured) {
        spec = mms::manufactured_problem(exact, viscosity_for(cfg), cfg.mu, cfg.final_time);
    } else {
        spec.viscosity = viscosity_for(cfg);
        spec.diffusivity = cfg.mu;
        spec.final_time = cfg.final_time;
    }
    spec.viscosity_sample_range = cfg.viscosity_range;

    const double dt = cfg.dt ? *cfg.dt : cfg.dt_factor;
    const TimeGrid grid = TimeGrid::uniform(cfg.final_time, mms::steps_for(cfg.final_time, dt));
    const GradientScheme scheme(gd, spec, {cfg.picard_tol, cfg.picard_max_iter});

    CsvFile diagnostics(dir / "diagnostics.csv", diagnostics_header);
    State state = scheme.initial_state();
    for (int k = 0; k < grid.num_steps(); ++k) {
        try {
            auto [next, diag] = scheme.step(state, grid.step(k));
            next.t = grid.time(k + 1);
            state = std::move(next);
            diagnostics.stream() << n << ',' << k + 1 << ',' << state.t << ',' << diag.picard_iterations << ','
                                 << diag.velocity_energy.relative() << ',' << diag.temperature_energy.relative() << ','
                                 << diag.incompressibility << '\n';
        } catch (const Error& e) {
            diagnostics.mark_incomplete();
            log << "error: time step " << k << ": " << e.what() << '\n';
            return exit_code_for(e.kind());
        }
    }

    CsvFile state_csv(dir / "state.csv", "field,dof,value");
    for (Index i = 0; i < state.u.size(); ++i)
        state_csv.stream() << "u," << i << ',' << state.u[i] << '\n';
    for (Index i = 0; i < state.p.size(); ++i)
        state_csv.stream() << "p," << i << ',' << state.p[i] << '\n';
    for (Index i = 0; i < state.S.size(); ++i)
        state_csv.stream() << "S," << i << ',' << state.S[i] << '\n';

    if (cfg.problem == ProblemKind::Manufactured) {
        mms::LevelResult r;
        r.n = n;
        r.h = geometry.h;
        r.dofs_u = gd.velocity.interior_size();
        r.dofs_p = gd.pressure_size;
        r.dofs_S = gd.scalar.interior_size();
        r.errors = mms::compute_errors(gd, state, exact, cfg.final_time, mms::CellQuadrature::subtriangle(mesh, geometry));
        CsvFile errors(dir / "errors.csv", errors_header);
        write_error_row(errors.stream(), r);
        if (!opt.quiet)
            log << "E1=" << r.errors.velocity << " E2=" << r.errors.pressure << " E3=" << r.errors.temperature << '\n';
    }
    if (!opt.quiet)
        log << "single run finished: " << grid.num_steps() << " steps\n";
    return exit_ok;
}

} // namespace

int threads_from_environment()
{
    if (const char* env = std::getenv("GDM_THREADS")) {
        const int n = std::atoi(env);
        if (n >= 1)
            return n;
    }
    return std::max(1u, std::thread::hardware_concurrency());
}

int run(const RunConfig& config, const RunOptions& options, std::ostream& log)
{
    const std::filesystem::path dir = options.output_dir ? *options.output_dir : config.output_dir;
    try {
        std::filesystem::create_directories(dir);
        return config.mode == Mode::Study ? run_study(config, dir, options, log) : run_single(config, dir, options, log);
    } catch (const Error& e) {
        log << "error: " << e.what() << '\n';
        return exit_code_for(e.kind());
    } catch (const std::exception& e) {
        log << "error: " << e.what() << '\n';
        return exit_failure;
    }
}

} // namespace gdm::cli
