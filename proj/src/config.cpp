#include "qfc/config.hpp"

#include "qfc/errors.hpp"

#include <json.hpp>

#include <chrono>
#include <cstdio>
#include <fstream>
#include <functional>
#include <map>
#include <numbers>
#include <sstream>

namespace qfc {

using nlohmann::json;

namespace {

[[noreturn]] void config_fail(const std::string& key, const std::string& message) {
    throw ConfigError("config key '" + key + "': " + message);
}

double get_number(const std::string& key, const json& v) {
    if (!v.is_number()) config_fail(key, "expected a number");
    return v.get<double>();
}

int get_int(const std::string& key, const json& v) {
    if (!v.is_number_integer()) config_fail(key, "expected an integer");
    const auto x = v.get<long long>();
    if (x < std::numeric_limits<int>::min() || x > std::numeric_limits<int>::max()) config_fail(key, "out of range");
    return static_cast<int>(x);
}

std::string get_string(const std::string& key, const json& v) {
    if (!v.is_string()) config_fail(key, "expected a string");
    return v.get<std::string>();
}

template <class T>
void require_range(const std::string& key, T value, T lo, T hi) {
    if (!(value >= lo && value <= hi)) {
        std::ostringstream os;
        os << "value " << value << " outside the permitted range [" << lo << ", " << hi << "]";
        config_fail(key, os.str());
    }
}

void require_positive(const std::string& key, double value, double hi) {
    if (!(value > 0.0 && value <= hi)) {
        std::ostringstream os;
        os << "value " << value << " outside the permitted range (0, " << hi << "]";
        config_fail(key, os.str());
    }
}

using Setter = std::function<void(RunConfig&, const std::string&, const json&)>;

const std::map<std::string, Setter>& setters() {
    static const std::map<std::string, Setter> table = [] {
        std::map<std::string, Setter> t;
        auto number = [&t](const char* name, double RunConfig::*field, double lo, double hi) {
            t[name] = [=](RunConfig& c, const std::string& k, const json& v) {
                const double x = get_number(k, v);
                require_range(k, x, lo, hi);
                c.*field = x;
            };
        };
        auto positive = [&t](const char* name, double RunConfig::*field, double hi) {
            t[name] = [=](RunConfig& c, const std::string& k, const json& v) {
                const double x = get_number(k, v);
                require_positive(k, x, hi);
                c.*field = x;
            };
        };
        auto integer = [&t](const char* name, int RunConfig::*field, int lo, int hi) {
            t[name] = [=](RunConfig& c, const std::string& k, const json& v) {
                const int x = get_int(k, v);
                require_range(k, x, lo, hi);
                c.*field = x;
            };
        };

        t["experiment"] = [](RunConfig& c, const std::string& k, const json& v) {
            try {
                c.experiment = experiment_from_string(get_string(k, v));
            } catch (const std::invalid_argument& e) {
                config_fail(k, e.what());
            }
        };
        number("s_a", &RunConfig::s_a, -1e3, 1e3);
        number("s_b", &RunConfig::s_b, -1e3, 1e3);
        number("s_p", &RunConfig::s_p, -1e3, 1e3);
        positive("tau", &RunConfig::tau, 1e3);
        positive("gamma", &RunConfig::gamma, 1e3);
        t["pmf"] = [](RunConfig& c, const std::string& k, const json& v) {
            try {
                c.pmf_kind = pmf_kind_from_string(get_string(k, v));
            } catch (const std::invalid_argument& e) {
                config_fail(k, e.what());
            }
        };
        number("strength_min", &RunConfig::strength_min, 0.0, 100.0);
        number("strength_max", &RunConfig::strength_max, 0.0, 100.0);
        integer("strength_points", &RunConfig::strength_points, 1, 10001);
        integer("top_k", &RunConfig::top_k, 1, 64);
        integer("input_order", &RunConfig::input_order, 0, 50);
        t["toc_model"] = [](RunConfig& c, const std::string& k, const json& v) {
            try {
                c.toc_model = toc_model_from_string(get_string(k, v));
            } catch (const std::invalid_argument& e) {
                config_fail(k, e.what());
            }
        };
        integer("n_points", &RunConfig::n_points, 8, 512);
        number("half_width_factor", &RunConfig::half_width_factor, 2.0, 20.0);
        t["n_steps"] = [](RunConfig& c, const std::string& k, const json& v) {
            const int x = get_int(k, v);
            require_range(k, x, 64, 65536);
            if (x % 2 != 0) config_fail(k, "must be even");
            c.n_steps = x;
        };
        t["integrator"] = [](RunConfig& c, const std::string& k, const json& v) {
            try {
                c.integrator = integrator_from_string(get_string(k, v));
            } catch (const std::invalid_argument& e) {
                config_fail(k, e.what());
            }
        };
        positive("convergence_tolerance", &RunConfig::convergence_tolerance, 1e-2);
        positive("unitarity_tolerance", &RunConfig::unitarity_tolerance, 1e-2);
        t["time_reversal"] = [](RunConfig& c, const std::string& k, const json& v) {
            if (!v.is_boolean()) config_fail(k, "expected true or false");
            c.time_reversal = v.get<bool>();
        };
        number("time_window_factor", &RunConfig::time_window_factor, 2.0, 50.0);
        integer("magnus_panels", &RunConfig::magnus_panels, 1, 4096);
        integer("magnus_nodes", &RunConfig::magnus_nodes, 2, 64);
        positive("magnus_tolerance", &RunConfig::magnus_tolerance, 1e-2);
        number("cascade_strength", &RunConfig::cascade_strength, 0.0, 100.0);
        t["stages"] = [](RunConfig& c, const std::string& k, const json& v) {
            if (!v.is_array() || v.empty()) config_fail(k, "expected a non-empty array of integers");
            std::vector<int> stages;
            for (const auto& e : v) {
                const int n = get_int(k, e);
                require_range(k, n, 1, 1000);
                stages.push_back(n);
            }
            c.stages = std::move(stages);
        };
        t["output_prefix"] = [](RunConfig& c, const std::string& k, const json& v) {
            const std::string s = get_string(k, v);
            if (s.empty() || s.find_first_of("/\\") != std::string::npos || s == "." || s == "..") {
                config_fail(k, "must be a plain, non-empty file stem");
            }
            c.output_prefix = s;
        };
        return t;
    }();
    return table;
}

json to_json(const RunConfig& c) {
    return json{
        {"experiment", std::string(to_string(c.experiment))},
        {"s_a", c.s_a},
        {"s_b", c.s_b},
        {"s_p", c.s_p},
        {"tau", c.tau},
        {"gamma", c.gamma},
        {"pmf", std::string(to_string(c.pmf_kind))},
        {"strength_min", c.strength_min},
        {"strength_max", c.strength_max},
        {"strength_points", c.strength_points},
        {"top_k", c.top_k},
        {"input_order", c.input_order},
        {"toc_model", std::string(to_string(c.toc_model))},
        {"n_points", c.n_points},
        {"half_width_factor", c.half_width_factor},
        {"n_steps", c.n_steps},
        {"integrator", std::string(to_string(c.integrator))},
        {"convergence_tolerance", c.convergence_tolerance},
        {"unitarity_tolerance", c.unitarity_tolerance},
        {"time_reversal", c.time_reversal},
        {"time_window_factor", c.time_window_factor},
        {"magnus_panels", c.magnus_panels},
        {"magnus_nodes", c.magnus_nodes},
        {"magnus_tolerance", c.magnus_tolerance},
        {"cascade_strength", c.cascade_strength},
        {"stages", c.stages},
        {"output_prefix", c.output_prefix},
    };
}

}  // namespace

std::string_view to_string(Experiment experiment) noexcept {
    switch (experiment) {
        case Experiment::sweep: return "sweep";
        case Experiment::schmidt: return "schmidt";
        case Experiment::cascade: return "cascade";
        case Experiment::design: return "design";
        case Experiment::oracle_check: return "oracle-check";
    }
    return "?";
}

Experiment experiment_from_string(std::string_view name) {
    if (name == "sweep") return Experiment::sweep;
    if (name == "schmidt") return Experiment::schmidt;
    if (name == "cascade") return Experiment::cascade;
    if (name == "design") return Experiment::design;
    if (name == "oracle-check" || name == "oracle_check") return Experiment::oracle_check;
    throw std::invalid_argument("unknown experiment '" + std::string(name) +
                                "' (expected sweep, schmidt, cascade, design or oracle-check)");
}

DeviceParams RunConfig::device() const {
    DeviceParams p;
    p.s_a = s_a;
    p.s_b = s_b;
    p.s_p = s_p;
    p.tau = tau;
    p.gamma = gamma;
    p.pmf_kind = pmf_kind;
    return p;
}

Numerics RunConfig::numerics() const {
    Numerics n;
    n.grid = {n_points, half_width_factor};
    const TimeWindow window = default_time_window(device(), time_window_factor);
    n.oracle.window = window;
    n.oracle.n_steps = n_steps;
    n.oracle.integrator = integrator;
    n.oracle.convergence_tolerance = convergence_tolerance;
    n.oracle.unitarity_tolerance = unitarity_tolerance;
    n.oracle.use_time_reversal = time_reversal;
    n.magnus.window = window;
    n.magnus.panels = magnus_panels;
    n.magnus.nodes_per_panel = magnus_nodes;
    n.magnus.tolerance = magnus_tolerance;
    n.toc_model = toc_model;
    return n;
}

std::vector<double> RunConfig::strengths() const {
    std::vector<double> grid(strength_points);
    if (strength_points == 1) {
        grid[0] = strength_max;
        return grid;
    }
    for (int i = 0; i < strength_points; ++i) {
        grid[i] = strength_min + (strength_max - strength_min) * i / (strength_points - 1);
    }
    return grid;
}

RunConfig parse_config(std::string_view text) {
    json doc;
    try {
        doc = json::parse(text);
    } catch (const json::parse_error& e) {
        throw ConfigError(std::string("malformed JSON: ") + e.what());
    }
    if (!doc.is_object()) throw ConfigError("config must be a JSON object");

    RunConfig c;
    std::optional<double> epsilon_max;
    bool has_strength_max = false;
    for (const auto& [key, value] : doc.items()) {
        if (key == "epsilon_max") {
            epsilon_max = get_number(key, value);
            require_range(key, *epsilon_max, 0.0, 1e3);
            continue;
        }
        const auto it = setters().find(key);
        if (it == setters().end()) throw ConfigError("unknown config key '" + key + "'");
        it->second(c, key, value);
        if (key == "strength_max") has_strength_max = true;
    }

    try {
        c.device().validate();
    } catch (const std::invalid_argument& e) {
        throw ConfigError(e.what());
    }
    if (epsilon_max) {
        if (has_strength_max) throw ConfigError("config keys 'epsilon_max' and 'strength_max' are mutually exclusive");
        c.strength_max = *epsilon_max * mu_parameters(c.device()).r0_tilde;
        require_range("epsilon_max", c.strength_max, 0.0, 100.0);
    }
    if (c.strength_max < c.strength_min) throw ConfigError("config key 'strength_max': must be >= strength_min");
    if (c.output_prefix.empty()) {
        c.output_prefix = c.experiment == Experiment::oracle_check ? "oracle_check" : std::string(to_string(c.experiment));
    }
    return c;
}

std::string serialize_config(const RunConfig& config) { return to_json(config).dump(2) + "\n"; }

std::string format_number(double value) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.11e", value == 0.0 ? 0.0 : value);
    return buf;
}

std::string sweep_csv(const SweepResult& result) {
    std::string out = "strength,eff_toc,eff_no_toc,r1,r2,r3,r4,c0_sq,c1_sq\n";
    for (const auto& p : result.points) {
        auto at = [](const Eigen::VectorXd& v, int i) { return i < v.size() ? v(i) : 0.0; };
        const double row[] = {p.strength,    p.eff_toc,     p.eff_no_toc,  at(p.r, 0),
                              at(p.r, 1),    at(p.r, 2),    at(p.r, 3),    at(p.overlaps_sq, 0),
                              at(p.overlaps_sq, 1)};
        for (std::size_t i = 0; i < std::size(row); ++i) {
            if (i) out += ',';
            out += format_number(row[i]);
        }
        out += '\n';
    }
    return out;
}

std::string cascade_csv(const std::vector<CascadePoint>& points) {
    std::string out = "stages,strength,eff_toc,eff_no_toc,rotation_norm\n";
    for (const auto& p : points) {
        out += std::to_string(p.stages);
        for (double v : {p.strength, p.eff_toc, p.eff_no_toc, p.rotation_norm}) out += ',' + format_number(v);
        out += '\n';
    }
    return out;
}

namespace {

class OutputSet {
public:
    explicit OutputSet(std::filesystem::path dir) : dir_(std::move(dir)) {}
    ~OutputSet() {
        if (committed_) return;
        std::error_code ec;
        for (const auto& [tmp, final] : files_) std::filesystem::remove(tmp, ec);
    }

    void add(const std::string& name, const std::string& body) {
        std::filesystem::create_directories(dir_);
        const auto final = dir_ / name;
        auto tmp = final;
        tmp += ".partial";
        std::ofstream os(tmp, std::ios::binary | std::ios::trunc);
        os << body;
        os.close();
        if (!os) throw std::runtime_error("cannot write " + tmp.string());
        files_.emplace_back(tmp, final);
    }

    void commit() {
        for (const auto& [tmp, final] : files_) std::filesystem::rename(tmp, final);
        committed_ = true;
    }

private:
    std::filesystem::path dir_;
    std::vector<std::pair<std::filesystem::path, std::filesystem::path>> files_;
    bool committed_ = false;
};

json mu_json(const MuParameters& mu) {
    json j{{"mu_sq", mu.mu_sq}, {"mu_a", mu.mu_a}, {"mu_b", mu.mu_b}, {"r0_tilde", mu.r0_tilde}};
    if (mu.schmidt_count_infinite) {
        j["schmidt_count"] = "infinite";
    } else {
        j["schmidt_count"] = mu.schmidt_count;
    }
    return j;
}

json provenance(const RunConfig& config, const RunOptions& options) {
    const DeviceParams device = config.device();
    const DeviceGrids grids = default_grids(device, config.numerics().grid);
    return json{
        {"tool", "qfc"},
        {"version", std::string(tool_version)},
        {"experiment", std::string(to_string(config.experiment))},
        {"config", to_json(config)},
        {"derived",
         {{"mu", mu_json(mu_parameters(device))},
          {"time_window_half_width", default_time_window(device, config.time_window_factor).half_width},
          {"grid_a_half_width", grids.a.half_width()},
          {"grid_b_half_width", grids.b.half_width()},
          {"integrator_order", integrator_order(config.integrator)}}},
        {"threads", options.threads},
        {"seed", options.seed},
    };
}

struct CheckResult {
    std::string name;
    double value;
    double tolerance;
    bool pass() const { return value < tolerance; }
};

// Cross-validation of independent computational paths on the configured device.
std::vector<CheckResult> oracle_checks(const RunConfig& config) {
    constexpr double check_strength = 0.5;
    const DeviceParams base = config.device();
    const MuParameters mu = mu_parameters(base);
    const DeviceParams p = base.with_epsilon(check_strength / mu.r0_tilde);
    const Numerics numerics = config.numerics();
    const DeviceGrids grids = default_grids(p, numerics.grid);
    std::vector<CheckResult> out;

    double coupling_err = 0.0;
    const CouplingModel model(p, grids.a, grids.b);
    for (double t : {-3.0, 0.0, 1.7, 5.0}) {
        const Eigen::MatrixXcd closed = model.evaluate(t);
        const Eigen::MatrixXcd quad = coupling_at_time_quadrature(p, grids.a, grids.b, t).values;
        coupling_err = std::max(coupling_err, (closed - quad).cwiseAbs().maxCoeff() / quad.cwiseAbs().maxCoeff());
    }
    out.push_back({"coupling_closed_form_vs_quadrature", coupling_err, 1e-9});

    CoverageCheck coverage;
    if (p.pmf_kind != PmfKind::gaussian) coverage.max_edge_to_peak.reset();
    const JcaMatrix j1 = build_j1(p, grids.a, grids.b, coverage);
    const Eigen::MatrixXcd integral = integrate_coupling(p, grids.a, grids.b, *numerics.oracle.window);
    const Eigen::MatrixXcd expected = 2.0 * std::numbers::pi * j1.values;
    out.push_back({"integrate_coupling_vs_build_j1",
                   (integral - expected).cwiseAbs().maxCoeff() / expected.cwiseAbs().maxCoeff(), 1e-6});

    const OneParticleUnitary U = time_ordered_unitary(p, grids.a, grids.b, numerics.oracle);
    out.push_back({"oracle_unitarity", U.unitarity_defect(), config.unitarity_tolerance});

    MagnusOptions mo = numerics.magnus;
    const MagnusGenerators gens = magnus_generators(p, grids.a, grids.b, mo);
    const Eigen::MatrixXcd expsum = expm_antihermitian(gens.sum());
    out.push_back({"magnus3_vs_oracle", (expsum - U.matrix()).cwiseAbs().maxCoeff(), 1e-3});

    const Eigen::MatrixXcd first = expm_antihermitian(gens.omega1);
    const Eigen::VectorXd s_block =
        Eigen::BDCSVD<Eigen::MatrixXcd>(first.bottomLeftCorner(grids.b.size(), grids.a.size())).singularValues();
    const SchmidtData sd = schmidt_decompose(j1, {0.0});
    double sv_err = 0.0;
    for (Eigen::Index i = 0; i < std::min(s_block.size(), sd.r.size()); ++i) {
        sv_err = std::max(sv_err, std::abs(s_block(i) - std::sin(sd.r(i))));
    }
    out.push_back({"exp_omega1_vs_first_order_schmidt", sv_err, 1e-8});
    return out;
}

void print_error(std::ostream& err, const char* kind, const std::string& message, int code) {
    err << json{{"error", kind}, {"message", message}, {"exit_code", code}}.dump() << "\n";
}

}  // namespace

int run(const RunConfig& config, const RunOptions& options, std::ostream& log, std::ostream& err) {
    const auto start = std::chrono::steady_clock::now();
    auto elapsed = [&] { return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count(); };
    try {
        OutputSet outputs(options.out_dir);
        json meta = provenance(config, options);
        Numerics numerics = config.numerics();
        numerics.threads = options.threads;
        const std::string csv_name = config.output_prefix + ".csv";
        const std::string json_name = config.output_prefix + ".json";

        switch (config.experiment) {
            case Experiment::sweep:
            case Experiment::schmidt: {
                const auto strengths = config.strengths();
                const SweepResult result =
                    config.experiment == Experiment::sweep
                        ? sweep_efficiency(config.device(), strengths, numerics, config.input_order, config.top_k)
                        : sweep_schmidt(config.device(), strengths, config.top_k, numerics, config.input_order);
                double worst = 0.0;
                for (const auto& p : result.points) worst = std::max(worst, p.convergence_estimate);
                for (const auto& w : result.warnings) log << "warning: " << w << "\n";
                meta["warnings"] = result.warnings;
                meta["max_convergence_estimate"] = worst;
                meta["csv"] = csv_name;
                outputs.add(csv_name, sweep_csv(result));
                break;
            }
            case Experiment::cascade: {
                const auto points =
                    cascade_sweep(config.device(), config.cascade_strength, config.stages, numerics, config.input_order);
                meta["csv"] = csv_name;
                outputs.add(csv_name, cascade_csv(points));
                break;
            }
            case Experiment::design: {
                const double tau = design_mu_zero(config.s_a, config.s_b, config.s_p);
                DeviceParams designed = config.device();
                designed.tau = tau;
                meta["result"] = {{"tau", tau}, {"mu", mu_json(mu_parameters(designed))}};
                break;
            }
            case Experiment::oracle_check: {
                const auto checks = oracle_checks(config);
                json list = json::array();
                bool all = true;
                std::string failed;
                for (const auto& c : checks) {
                    list.push_back({{"name", c.name}, {"value", c.value}, {"tolerance", c.tolerance}, {"pass", c.pass()}});
                    log << (c.pass() ? "PASS " : "FAIL ") << c.name << " " << c.value << " (tol " << c.tolerance << ")\n";
                    if (!c.pass()) {
                        all = false;
                        failed += (failed.empty() ? "" : ", ") + c.name;
                    }
                }
                if (!all) {
                    print_error(err, "convergence", "cross-validation failed: " + failed, exit_convergence);
                    return exit_convergence;
                }
                meta["checks"] = list;
                break;
            }
        }
        meta["wall_time_s"] = elapsed();
        outputs.add(json_name, meta.dump(2) + "\n");
        outputs.commit();
        log << "wrote " << (options.out_dir / json_name).string() << "\n";
        return exit_ok;
    } catch (const InfeasibleDesign& e) {
        print_error(err, "infeasible", e.what(), exit_infeasible);
        return exit_infeasible;
    } catch (const ConvergenceError& e) {
        print_error(err, "convergence", e.what(), exit_convergence);
        return exit_convergence;
    } catch (const UnitarityError& e) {
        print_error(err, "convergence", e.what(), exit_convergence);
        return exit_convergence;
    } catch (const ConfigError& e) {
        print_error(err, "config", e.what(), exit_config);
        return exit_config;
    } catch (const std::exception& e) {
        print_error(err, "failure", e.what(), exit_failure);
        return exit_failure;
    }
}

int run_file(const std::filesystem::path& config_path, std::string_view subcommand, const RunOptions& options,
             std::ostream& log, std::ostream& err) {
    RunConfig config;
    try {
        std::ifstream in(config_path, std::ios::binary);
        if (!in) throw ConfigError("cannot read config file " + config_path.string());
        std::stringstream ss;
        ss << in.rdbuf();
        const std::string text = ss.str();
        const Experiment wanted = experiment_from_string(subcommand);
        const json raw = json::parse(text, nullptr, false);
        const bool explicit_experiment = raw.is_object() && raw.contains("experiment");
        config = parse_config(text);
        if (explicit_experiment && config.experiment != wanted) {
            throw ConfigError("config experiment '" + std::string(to_string(config.experiment)) +
                              "' does not match subcommand '" + std::string(subcommand) + "'");
        }
        if (!explicit_experiment) {
            const bool default_prefix = config.output_prefix == to_string(config.experiment);
            config.experiment = wanted;
            if (default_prefix) {
                config.output_prefix = wanted == Experiment::oracle_check ? "oracle_check" : std::string(to_string(wanted));
            }
        }
    } catch (const std::invalid_argument& e) {
        print_error(err, "config", e.what(), exit_config);
        return exit_config;
    }
    return run(config, options, log, err);
}

}  // namespace qfc
