#include "experiment.hpp"

#include "tnrl/contraction.hpp"
#include "tnrl/decomposer.hpp"

#include <chrono>
#include <fmt/chrono.h>
#include <fmt/format.h>
#include <fstream>
#include <set>
#include <sstream>

namespace tnrl::cli {

namespace {

constexpr const char* kVersion = "0.1.0";
// Joint transition tensors beyond this many entries are refused.
constexpr double kMaxJointEntries = 5e7;

void write_file(const std::filesystem::path& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError(fmt::format("cannot open {} for writing", path.string()));
    out << content;
    if (!out) throw IoError(fmt::format("failed writing {}", path.string()));
}

template <typename Writer>
void write_csv(const std::filesystem::path& path, Writer&& writer) {
    std::ostringstream buf;
    writer(buf);
    write_file(path, buf.str());
}

std::string sarl_policy_csv(const FmdpSpec& spec, const PolicySet& policy) {
    std::string out = "t,s,p_up\n";
    for (std::size_t t = 1; t <= spec.horizon; ++t) {
        const auto& site = policy.at(t);
        for (std::size_t s = 0; s < spec.n_states; ++s) {
            out += fmt::format("{},{},{:.17g}\n", t - 1, spec.state_value(s), site({1, s}));
        }
    }
    return out;
}

std::string marl_policy_csv(const FmdpSpec& spec, const PolicySet& policy) {
    std::string out = "t,agent,s1,s2,p_up\n";
    for (std::size_t t = 1; t <= spec.horizon; ++t) {
        const DenseTensor site = joint_policy_site(policy, t);
        for (std::size_t agent = 0; agent < 2; ++agent) {
            for (std::size_t s1 = 0; s1 < spec.n_states; ++s1) {
                for (std::size_t s2 = 0; s2 < spec.n_states; ++s2) {
                    double p_up = 0.0;
                    for (std::size_t other = 0; other < spec.n_actions; ++other) {
                        p_up += agent == 0 ? site({1, other, s1, s2}) : site({other, 1, s1, s2});
                    }
                    out += fmt::format("{},{},{},{},{:.17g}\n", t - 1, agent + 1, spec.state_value(s1),
                                       spec.state_value(s2), p_up);
                }
            }
        }
    }
    return out;
}

std::size_t distinct_trajectories(const std::vector<TrajectoryRecord>& records) {
    std::set<std::vector<std::vector<int>>> seen;
    for (const auto& r : records) seen.insert(r.states);
    return seen.size();
}

Json run_sarl_walk(const ExperimentConfig& cfg) {
    const FmdpInstance inst = build_sarl_walker(cfg.walker);
    require_valid(inst.model);
    const PolicySet initial = uniform_policy(inst.spec, PolicyKind::single);
    const double before = expected_return(inst.spec, inst.model, initial, inst.p0);
    const auto traj_before = sample_trajectories(inst.spec, inst.model, initial, inst.p0, cfg.n_sample, 0.0,
                                                 cfg.walker.seed, sarl_walker_objective);
    const auto [policy, report] = optimize_sarl(inst.spec, inst.model, initial, inst.p0);
    const double after = expected_return(inst.spec, inst.model, policy, inst.p0);
    const auto traj_after = sample_trajectories(inst.spec, inst.model, policy, inst.p0, cfg.n_sample, 0.0,
                                                cfg.walker.seed, sarl_walker_objective);

    write_csv(cfg.output_dir / "trajectories_initial.csv",
              [&](std::ostream& o) { write_trajectories_csv(o, traj_before); });
    write_csv(cfg.output_dir / "trajectories.csv", [&](std::ostream& o) { write_trajectories_csv(o, traj_after); });
    write_file(cfg.output_dir / "policy.csv", sarl_policy_csv(inst.spec, policy));

    const std::size_t t_last = std::min<std::size_t>(16, inst.spec.horizon);
    return Json{{"e_return_before", before},
                {"e_return_after", after},
                {"objective_fraction_before", objective_fraction(traj_before)},
                {"objective_fraction", objective_fraction(traj_after)},
                {"mean_state_t2_t16", mean_state(traj_after, 2, t_last)},
                {"n_sample", cfg.n_sample},
                {"sweep_columns_changed", report.columns_changed}};
}

Json run_marl_walk(const ExperimentConfig& cfg) {
    const FmdpInstance inst = build_marl_walker(cfg.walker);
    require_valid(inst.model);
    const PolicyKind kind = cfg.marl_mode == MarlMode::joint ? PolicyKind::joint : PolicyKind::per_agent;
    const PolicySet initial = uniform_policy(inst.spec, kind);
    const double before = expected_return(inst.spec, inst.model, initial, inst.p0);
    const auto traj_before = sample_trajectories(inst.spec, inst.model, initial, inst.p0, cfg.n_sample, 0.0,
                                                 cfg.walker.seed, marl_walker_objective);
    const auto [policy, report] = optimize_marl(inst.spec, inst.model, initial, inst.p0, cfg.marl_mode);
    const double after = expected_return(inst.spec, inst.model, policy, inst.p0);
    const auto traj_after = sample_trajectories(inst.spec, inst.model, policy, inst.p0, cfg.n_sample, 0.0,
                                                cfg.walker.seed, marl_walker_objective);

    write_csv(cfg.output_dir / "trajectories_initial.csv",
              [&](std::ostream& o) { write_trajectories_csv(o, traj_before); });
    write_csv(cfg.output_dir / "trajectories.csv", [&](std::ostream& o) { write_trajectories_csv(o, traj_after); });
    write_file(cfg.output_dir / "policy.csv", marl_policy_csv(inst.spec, policy));

    return Json{{"e_return_before", before},
                {"e_return_after", after},
                {"mode", cfg.marl_mode == MarlMode::joint ? "joint" : "per-agent"},
                {"objective_fraction", objective_fraction(traj_after)},
                {"distinct_trajectory_pairs", distinct_trajectories(traj_after)},
                {"mean_return", trajectory_summary(traj_after)["mean_return"]},
                {"n_sample", cfg.n_sample},
                {"converged", report.converged}};
}

Json run_plan(const ExperimentConfig& cfg) {
    const FmdpInstance inst = build_sarl_walker(cfg.walker);
    require_valid(inst.model);
    const PlanResult result = plan(inst.spec, inst.model, inst.p0, cfg.plan);
    write_csv(cfg.output_dir / "plan.csv", [&](std::ostream& o) { write_plan_csv(o, result.log); });

    Json summary{{"epochs", result.log}};
    summary["e_model_initial"] = result.log.front().e_return_model;
    summary["e_true_final"] = result.log.back().e_return_true;
    Json first_optimal = nullptr;
    for (const auto& e : result.log) {
        if (e.epoch > 0 && std::abs(e.e_return_true - 1.0) <= 1e-9) {
            first_optimal = e.epoch;
            break;
        }
    }
    summary["first_epoch_true_return_one"] = first_optimal;
    return summary;
}

Json run_svd_scan(const ExperimentConfig& cfg) {
    WalkerConfig walker = cfg.walker;
    walker.n_agents = 2;
    const FmdpInstance inst = build_marl_walker(walker);
    require_valid(inst.model);
    std::vector<std::size_t> chis = cfg.chi_values;
    if (chis.empty()) {
        for (std::size_t c = 1; c <= 30; ++c) chis.push_back(c);
    }
    // The tensor shared by all timesteps before the last.
    const DenseTensor& mj = inst.model.at(1);
    const auto records = svd_scan(mj, chis);
    write_csv(cfg.output_dir / "svd.csv", [&](std::ostream& o) { write_scan_csv(o, records); });

    Json first_exact = nullptr;
    for (const auto& r : records) {
        if (r.alpha <= 1e-8 && (first_exact.is_null() || r.chi < first_exact.get<std::size_t>())) first_exact = r.chi;
    }
    return Json{{"scan", records},
                {"first_chi_alpha_below_1e-8", first_exact},
                {"full_elements", mj.size()},
                {"flattened_side", static_cast<std::size_t>(std::llround(std::sqrt(static_cast<double>(mj.size()))))}};
}

} // namespace

std::string experiment_name(Experiment e) {
    switch (e) {
    case Experiment::sarl_walk:
        return "sarl-walk";
    case Experiment::marl_walk:
        return "marl-walk";
    case Experiment::plan:
        return "plan";
    case Experiment::svd_scan:
        return "svd-scan";
    }
    return "unknown";
}

std::optional<Experiment> parse_experiment(const std::string& name) {
    for (auto e : {Experiment::sarl_walk, Experiment::marl_walk, Experiment::plan, Experiment::svd_scan}) {
        if (experiment_name(e) == name) return e;
    }
    return std::nullopt;
}

ExperimentConfig default_config(Experiment e) {
    ExperimentConfig cfg;
    cfg.experiment = e;
    if (e == Experiment::marl_walk || e == Experiment::svd_scan) {
        cfg.walker.horizon = 6;
        cfg.walker.n_agents = 2;
    }
    return cfg;
}

void ExperimentConfig::check() const {
    if (walker.horizon < 1) throw ConfigError("T", "must be at least 1");
    if (!(walker.sigma >= 0.0) || !std::isfinite(walker.sigma)) throw ConfigError("sigma", "must be finite and >= 0");
    if (!(plan.alpha >= 0.0 && plan.alpha <= 1.0)) throw ConfigError("alpha", "must lie in [0, 1]");
    if (!(plan.epsilon >= 0.0 && plan.epsilon <= 1.0)) throw ConfigError("epsilon", "must lie in [0, 1]");
    if (experiment == Experiment::plan && plan.n_traj < 1) throw ConfigError("n_traj", "must be at least 1");
    if (std::find(chi_values.begin(), chi_values.end(), 0) != chi_values.end()) {
        throw ConfigError("chi", "values must be at least 1");
    }
    if (experiment == Experiment::marl_walk || experiment == Experiment::svd_scan) {
        const double side = static_cast<double>(2 * walker.horizon + 1);
        const double entries = side * side * side * side * 36.0 * 4.0;
        if (entries > kMaxJointEntries) {
            throw ConfigError("T", fmt::format("joint transition tensor would hold {:.3g} entries", entries));
        }
    }
    if (output_dir.empty()) throw ConfigError("out", "must not be empty");
}

std::vector<std::size_t> parse_chi(const std::string& text) {
    auto to_size = [&](const std::string& s) -> std::size_t {
        std::size_t pos = 0;
        unsigned long long v = 0;
        try {
            v = std::stoull(s, &pos);
        } catch (const std::exception&) {
            throw ConfigError("chi", fmt::format("cannot parse '{}'", text));
        }
        if (pos != s.size() || v == 0) throw ConfigError("chi", fmt::format("cannot parse '{}'", text));
        return static_cast<std::size_t>(v);
    };
    std::vector<std::size_t> out;
    const auto dots = text.find("..");
    if (dots != std::string::npos) {
        const std::size_t lo = to_size(text.substr(0, dots));
        const std::size_t hi = to_size(text.substr(dots + 2));
        if (hi < lo) throw ConfigError("chi", fmt::format("empty range '{}'", text));
        for (std::size_t c = lo; c <= hi; ++c) out.push_back(c);
        return out;
    }
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) out.push_back(to_size(item));
    if (out.empty()) throw ConfigError("chi", "no values given");
    return out;
}

void apply_json(ExperimentConfig& cfg, const Json& j) {
    if (!j.is_object()) throw ConfigError("config", "must be a JSON object");
    auto get = [&](const char* key, auto& target) {
        if (!j.contains(key)) return;
        try {
            j.at(key).get_to(target);
        } catch (const nlohmann::json::exception& e) {
            throw ConfigError(key, e.what());
        }
    };
    if (j.contains("experiment")) {
        std::string name;
        get("experiment", name);
        const auto e = parse_experiment(name);
        if (!e) throw ConfigError("experiment", fmt::format("unknown experiment '{}'", name));
        if (*e != cfg.experiment) throw ConfigError("experiment", "does not match the subcommand");
    }
    get("T", cfg.walker.horizon);
    get("sigma", cfg.walker.sigma);
    get("seed", cfg.walker.seed);
    cfg.plan.seed = cfg.walker.seed;
    get("alpha", cfg.plan.alpha);
    get("epsilon", cfg.plan.epsilon);
    get("n_traj", cfg.plan.n_traj);
    get("epochs", cfg.plan.n_epochs);
    get("n_sample", cfg.n_sample);
    if (j.contains("out")) {
        std::string out;
        get("out", out);
        cfg.output_dir = out;
    }
    if (j.contains("chi")) {
        if (j["chi"].is_string()) {
            cfg.chi_values = parse_chi(j["chi"].get<std::string>());
        } else {
            get("chi", cfg.chi_values);
        }
    }
    if (j.contains("mode")) {
        std::string mode;
        get("mode", mode);
        if (mode == "joint") {
            cfg.marl_mode = MarlMode::joint;
        } else if (mode == "per-agent") {
            cfg.marl_mode = MarlMode::per_agent;
        } else {
            throw ConfigError("mode", fmt::format("unknown mode '{}'", mode));
        }
    }
}

Json config_json(const ExperimentConfig& cfg) {
    Json j{{"experiment", experiment_name(cfg.experiment)},
           {"T", cfg.walker.horizon},
           {"sigma", cfg.walker.sigma},
           {"seed", cfg.walker.seed},
           {"out", cfg.output_dir.string()},
           {"n_sample", cfg.n_sample}};
    if (cfg.experiment == Experiment::plan) {
        j["alpha"] = cfg.plan.alpha;
        j["epsilon"] = cfg.plan.epsilon;
        j["n_traj"] = cfg.plan.n_traj;
        j["epochs"] = cfg.plan.n_epochs;
    }
    if (cfg.experiment == Experiment::svd_scan) j["chi"] = cfg.chi_values;
    if (cfg.experiment == Experiment::marl_walk) j["mode"] = cfg.marl_mode == MarlMode::joint ? "joint" : "per-agent";
    return j;
}

Json run_experiment(const ExperimentConfig& cfg) {
    cfg.check();
    std::error_code ec;
    std::filesystem::create_directories(cfg.output_dir, ec);
    if (ec) throw IoError(fmt::format("cannot create {}: {}", cfg.output_dir.string(), ec.message()));

    ExperimentConfig run = cfg;
    run.walker.n_agents =
        (cfg.experiment == Experiment::marl_walk || cfg.experiment == Experiment::svd_scan) ? 2 : 1;
    run.plan.seed = cfg.walker.seed;

    Json summary;
    std::vector<std::string> files;
    switch (run.experiment) {
    case Experiment::sarl_walk:
        summary = run_sarl_walk(run);
        files = {"trajectories_initial.csv", "trajectories.csv", "policy.csv"};
        break;
    case Experiment::marl_walk:
        summary = run_marl_walk(run);
        files = {"trajectories_initial.csv", "trajectories.csv", "policy.csv"};
        break;
    case Experiment::plan:
        summary = run_plan(run);
        files = {"plan.csv"};
        break;
    case Experiment::svd_scan:
        summary = run_svd_scan(run);
        files = {"svd.csv"};
        break;
    }
    summary["experiment"] = experiment_name(run.experiment);
    files.push_back("summary.json");
    write_file(run.output_dir / "summary.json", summary.dump(2) + "\n");

    const auto now = std::chrono::system_clock::now();
    const Json manifest{{"config", config_json(run)},
                        {"seed", run.walker.seed},
                        {"version", kVersion},
                        {"files", files},
                        {"created_utc", fmt::format("{:%Y-%m-%dT%H:%M:%SZ}", fmt::gmtime(std::chrono::system_clock::to_time_t(now)))}};
    write_file(run.output_dir / "manifest.json", manifest.dump(2) + "\n");
    return summary;
}

} // namespace tnrl::cli
