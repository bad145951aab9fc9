#include "gdm/cli.hpp"

#include "gdm/errors.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>
#include <string_view>

namespace gdm::cli {

namespace {

std::string trim(std::string_view s)
{
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string_view::npos)
        return {};
    const auto e = s.find_last_not_of(" \t\r");
    return std::string(s.substr(b, e - b + 1));
}

class LineError {
public:
    LineError(int line, std::string key) : line_(line), key_(std::move(key)) {}
    [[nodiscard]] Error operator()(const std::string& what) const
    {
        return Error(ErrorKind::Config, "line " + std::to_string(line_) + ", key '" + key_ + "': " + what);
    }

private:
    int line_;
    std::string key_;
};

double to_double(const std::string& v, const LineError& fail)
{
    double out = 0.0;
    std::istringstream in(v);
    in >> out;
    if (in.fail() || !in.eof() || !std::isfinite(out))
        throw fail("expected a real number, got '" + v + "'");
    return out;
}

int to_int(const std::string& v, const LineError& fail)
{
    int out = 0;
    const auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
    if (ec != std::errc() || ptr != v.data() + v.size())
        throw fail("expected an integer, got '" + v + "'");
    return out;
}

} // namespace

RunConfig parse_config(std::istream& in)
{
    RunConfig cfg;
    std::set<std::string> seen;
    std::string raw;
    int line_no = 0;
    int levels_line = 0;
    bool have_dt_factor = false;

    while (std::getline(in, raw)) {
        ++line_no;
        if (auto hash = raw.find('#'); hash != std::string::npos)
            raw.erase(hash);
        if (trim(raw).empty())
            continue;
        const auto eq = raw.find('=');
        if (eq == std::string::npos)
            throw Error(ErrorKind::Config, "line " + std::to_string(line_no) + ": expected 'key = value'");
        const std::string key = trim(std::string_view(raw).substr(0, eq));
        const std::string value = trim(std::string_view(raw).substr(eq + 1));
        const LineError fail(line_no, key);
        if (key.empty())
            throw fail("empty key");
        if (value.empty())
            throw fail("empty value");
        if (!seen.insert(key).second)
            throw fail("duplicate key");

        if (key == "mode") {
            if (value == "study")
                cfg.mode = Mode::Study;
            else if (value == "single")
                cfg.mode = Mode::Single;
            else
                throw fail("expected 'study' or 'single'");
        } else if (key == "mesh_family") {
            cfg.mesh_family = value;
        } else if (key == "levels") {
            levels_line = line_no;
            std::stringstream ss(value);
            std::string item;
            while (std::getline(ss, item, ',')) {
                const int n = to_int(trim(item), fail);
                if (n < 1)
                    throw fail("levels must be positive integers");
                cfg.levels.push_back(n);
            }
        } else if (key == "amplitude") {
            cfg.amplitude = to_double(value, fail);
            if (!(cfg.amplitude >= 0.0 && cfg.amplitude < 0.45))
                throw fail("amplitude must lie in [0, 0.45)");
        } else if (key == "viscosity_model") {
            if (value != "constant" && value != "sqrt_coupled")
                throw fail("expected 'constant' or 'sqrt_coupled'");
            cfg.viscosity_model = value;
        } else if (key == "viscosity_range") {
            cfg.viscosity_range = to_double(value, fail);
            if (!(cfg.viscosity_range > 0.0))
                throw fail("must be positive");
        } else if (key == "mu") {
            cfg.mu = to_double(value, fail);
            if (!(cfg.mu > 0.0))
                throw fail("must be positive");
        } else if (key == "T") {
            cfg.final_time = to_double(value, fail);
            if (!(cfg.final_time > 0.0))
                throw fail("must be positive");
        } else if (key == "dt_factor") {
            cfg.dt_factor = to_double(value, fail);
            have_dt_factor = true;
            if (!(cfg.dt_factor > 0.0))
                throw fail("must be positive");
        } else if (key == "dt") {
            cfg.dt = to_double(value, fail);
            if (!(*cfg.dt > 0.0))
                throw fail("must be positive");
        } else if (key == "picard_tol") {
            cfg.picard_tol = to_double(value, fail);
            if (!(cfg.picard_tol > 0.0))
                throw fail("must be positive");
        } else if (key == "picard_max_iter") {
            cfg.picard_max_iter = to_int(value, fail);
            if (cfg.picard_max_iter < 1)
                throw fail("must be at least 1");
        } else if (key == "problem") {
            if (value == "manufactured")
                cfg.problem = ProblemKind::Manufactured;
            else if (value == "zero")
                cfg.problem = ProblemKind::Zero;
            else
                throw fail("expected 'manufactured' or 'zero'");
        } else if (key == "output") {
            cfg.output_dir = value;
        } else {
            throw fail("unknown key");
        }
    }

    auto global = [](const std::string& what) { return Error(ErrorKind::Config, what); };
    if (cfg.mesh_family.empty())
        throw global("missing required key 'mesh_family'");
    if (have_dt_factor && cfg.dt)
        throw global("'dt' and 'dt_factor' are mutually exclusive");

    if (cfg.mode == Mode::Study) {
        if (cfg.uses_mesh_file())
            throw global("study mode needs a generated mesh family (triangular or distorted)");
        if (cfg.problem != ProblemKind::Manufactured)
            throw global("study mode needs problem = manufactured");
        const std::set<int> distinct(cfg.levels.begin(), cfg.levels.end());
        if (distinct.size() < 3)
            throw Error(ErrorKind::Config, "line " + std::to_string(levels_line) +
                                               ", key 'levels': InsufficientLevels: study needs at least 3 distinct levels");
    } else if (!cfg.uses_mesh_file() && cfg.levels.size() != 1) {
        throw Error(ErrorKind::Config, "line " + std::to_string(levels_line) +
                                           ", key 'levels': single mode needs exactly one level");
    }
    return cfg;
}

RunConfig parse_config(const std::filesystem::path& path)
{
    std::ifstream in(path);
    if (!in)
        throw Error(ErrorKind::Config, "cannot open config file '" + path.string() + "'");
    return parse_config(in);
}

} // namespace gdm::cli
