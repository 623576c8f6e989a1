// config.hpp - JSON run configuration and the command-line runner.
//
// The config is a flat JSON object. Every key is optional except where the
// experiment needs it; omitted numeric settings take the defaults below.
// Unknown keys are rejected by name.

#pragma once

#include "qfc/experiments.hpp"

#include <filesystem>
#include <string>
#include <vector>

namespace qfc {

class ConfigError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

enum class Experiment { sweep, schmidt, cascade, design, oracle_check };

std::string_view to_string(Experiment experiment) noexcept;
Experiment experiment_from_string(std::string_view name);

struct RunConfig {
    Experiment experiment = Experiment::sweep;

    // device
    double s_a = 0.5;
    double s_b = 3.0;
    double s_p = 1.0;
    double tau = 1.0;
    double gamma = 0.193;
    PmfKind pmf_kind = PmfKind::gaussian;

    // strength grid r~0 eps; epsilon_max in the input is converted to strength_max
    double strength_min = 0.0;
    double strength_max = 3.25;
    int strength_points = 65;

    int top_k = 4;
    int input_order = 0;
    TocModel toc_model = TocModel::exact;

    // frequency grids
    int n_points = 128;
    double half_width_factor = 6.0;

    // oracle
    int n_steps = 512;
    Integrator integrator = Integrator::cf4_triple_jump;
    double convergence_tolerance = 1e-8;
    double unitarity_tolerance = 1e-10;
    bool time_reversal = true;
    double time_window_factor = 8.0;

    // Magnus quadrature
    int magnus_panels = 24;
    int magnus_nodes = 16;
    double magnus_tolerance = 1e-10;

    // cascade
    double cascade_strength = 1.5707963267948966;
    std::vector<int> stages{1, 2, 4, 10};

    // output file stem inside the output directory; defaults to the experiment name
    std::string output_prefix;

    DeviceParams device() const;
    Numerics numerics() const;
    std::vector<double> strengths() const;

    bool operator==(const RunConfig&) const = default;
};

// Throws ConfigError on malformed JSON, unknown keys, wrong types or values
// outside the documented ranges.
RunConfig parse_config(std::string_view text);

// Canonical form: every key, sorted, with resolved values.
std::string serialize_config(const RunConfig& config);

std::string format_number(double value);
// Header: strength,eff_toc,eff_no_toc,r1,r2,r3,r4,c0_sq,c1_sq
std::string sweep_csv(const SweepResult& result);
// Header: stages,strength,eff_toc,eff_no_toc,rotation_norm
std::string cascade_csv(const std::vector<CascadePoint>& points);

struct RunOptions {
    std::filesystem::path out_dir = "out";
    int threads = 0;
    std::uint64_t seed = 0;  // reserved
};

enum ExitCode : int {
    exit_ok = 0,
    exit_failure = 1,
    exit_config = 2,
    exit_convergence = 3,
    exit_infeasible = 4,
};

// Runs the configured experiment and writes <prefix>.csv / <prefix>.json
// into out_dir. On failure writes nothing, prints an error JSON to `err` and
// returns the matching exit code.
int run(const RunConfig& config, const RunOptions& options, std::ostream& log, std::ostream& err);

// Reads and parses a config file, then runs it; config errors map to exit_config.
int run_file(const std::filesystem::path& config_path, std::string_view subcommand,
             const RunOptions& options, std::ostream& log, std::ostream& err);

inline constexpr std::string_view tool_version = "1.0.0";

}  // namespace qfc
