#pragma once

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace gdm::cli {

enum class Mode { Study, Single };
enum class ProblemKind { Manufactured, Zero };

/// Experiment description read from a `key = value` file.
struct RunConfig {
    Mode mode = Mode::Study;
    std::string mesh_family;   // triangular | distorted | path to a mesh file
    std::vector<int> levels;
    double amplitude = 0.3;
    std::string viscosity_model = "constant"; // constant | sqrt_coupled
    double viscosity_range = 10.0;
    double mu = 1.0;
    double final_time = 0.1;
    double dt_factor = 0.1;
    std::optional<double> dt;
    double picard_tol = 1e-9;
    int picard_max_iter = 50;
    ProblemKind problem = ProblemKind::Manufactured;
    std::filesystem::path output_dir = ".";

    [[nodiscard]] bool uses_mesh_file() const { return mesh_family != "triangular" && mesh_family != "distorted"; }
};

/// Parses and validates; throws Error{Config} with the line number and key.
RunConfig parse_config(std::istream& in);
RunConfig parse_config(const std::filesystem::path& path);

struct RunOptions {
    std::optional<std::filesystem::path> output_dir; // overrides the config
    bool quiet = false;
    int threads = 1;
};

enum ExitCode : int {
    exit_ok = 0,
    exit_failure = 1,
    exit_config = 2,
    exit_mesh = 3,
    exit_solver = 4,
};

/// Executes the run and writes errors.csv, rates.txt, diagnostics.csv (and state.csv
/// in single mode). Returns an ExitCode; progress and errors go to `log`.
int run(const RunConfig& config, const RunOptions& options, std::ostream& log);

/// Worker cap from GDM_THREADS, defaulting to the hardware concurrency.
int threads_from_environment();

} // namespace gdm::cli
