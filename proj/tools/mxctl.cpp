// mxctl: exact-controllability solver for the discrete stochastic Maxwell system.
//
//   mxctl solve     [--config c.json] [--seed s] [--out dir] [--allow-singular] [--frozen-path]
//   mxctl ablate    --drop f1,g3 [--semantics reoptimize|truncate] ...
//   mxctl replay    --controls controls.csv ...
//   mxctl check-operators
//   mxctl report    [--out dir] [--json]
//
// Every flag can also come from the environment as MXC_<FLAG>.
// Exit codes: 0 success, 2 config error, 3 singular / infeasible, 4 I/O error.

#include <cstdio>
#include <iostream>
#include <random>

#include "CLI11.hpp"

#include "mxc/mxc.hpp"

namespace {

using namespace mxc;

constexpr int kExitConfig = 2;
constexpr int kExitSingular = 3;
constexpr int kExitIo = 4;

struct CommonOptions {
    std::string config;
    std::uint64_t seed = 0;
    bool seed_set = false;
    std::string out;
    bool allow_singular = false;
    bool frozen_path = false;
};

void add_common(CLI::App* cmd, CommonOptions& o)
{
    cmd->add_option("--config", o.config, "experiment config (JSON)")->envname("MXC_CONFIG");
    cmd->add_option_function<std::uint64_t>(
           "--seed", [&o](const std::uint64_t& s) { o.seed = s, o.seed_set = true; }, "Brownian path seed")
        ->envname("MXC_SEED");
    cmd->add_option("--out", o.out, "output directory")->envname("MXC_OUT");
    cmd->add_flag("--allow-singular", o.allow_singular, "report an unreachable target instead of failing")
        ->envname("MXC_ALLOW_SINGULAR");
    cmd->add_flag("--frozen-path", o.frozen_path, "use dW = 0 (deterministic Maxwell)")->envname("MXC_FROZEN_PATH");
}

ExperimentConfig resolve(const CommonOptions& o)
{
    ExperimentConfig c = o.config.empty() ? ExperimentConfig{} : load_config(o.config);
    if (o.seed_set) c.seed = o.seed;
    if (!o.out.empty()) c.output_dir = o.out;
    c.allow_singular = c.allow_singular || o.allow_singular;
    c.frozen_path = c.frozen_path || o.frozen_path;
    return c;
}

void print_summary(const EvaluationReport& r)
{
    std::printf("%s  %s\n", r.label.c_str(), r.status.c_str());
    for (const auto& [comp, v] : r.mse) std::printf("  MSE_%-3s %.3e\n", comp.c_str(), v);
    std::printf("  J %.6e  relative residual %.3e  effective rank %ld/%ld  condition %.3e\n", r.objective,
                r.relative_terminal_residual, r.effective_rank, r.schur_dimension, r.schur_condition);
    std::printf("  terminal defect %.3e  max div E %.3e  initial energy %.6g\n", r.terminal_defect, r.max_e_divergence,
                r.initial_energy);
}

void warn_critical_time(const ExperimentConfig& c)
{
    const double t_star = critical_time(c.grid);
    if (c.grid.t_final < t_star)
        std::fprintf(stderr, "warning: T = %g is below the critical time T* = %g; continuing\n", c.grid.t_final, t_star);
}

int run_and_write(const ExperimentConfig& c)
{
    warn_critical_time(c);
    const ExperimentRun run = run_experiment(c);
    write_artifacts(run, c.output_dir);
    print_summary(run.report);
    std::fflush(stdout);
    check_outcome(run);
    return 0;
}

int cmd_replay(const ExperimentConfig& c, const std::string& controls_path)
{
    c.validate();
    const OperatorSet ops = assemble_operators(c.grid);
    const SchemeMatrices scheme = assemble_scheme(ops, c.grid.dt(), c.dense_cap);
    const StateLayout& L = scheme.layout;
    const VectorXd phi0 = initial_state(c, L);
    const VectorXd target = target_state(c, L);
    const BrownianPath path = sample_path(c.seed, c.grid, c.frozen_path);
    const ControlVectors controls = read_controls_csv(controls_path, L, c.grid.n_steps);
    const Trajectory traj = replay(scheme, phi0, controls, path);

    json j;
    j["controls"] = controls_path;
    j["mse"] = compute_mse(L, traj.terminal(), target);
    j["terminal_defect"] = (traj.terminal() - target).cwiseAbs().maxCoeff();
    double max_div = 0.0;
    for (const auto& d : traj.divergence) max_div = std::max(max_div, d.e);
    j["max_e_divergence"] = max_div;
    j["objective"] = controls.objective();
    j["config"] = c.to_json();
    std::error_code ec;
    fs::create_directories(c.output_dir, ec);
    write_text(fs::path(c.output_dir) / "replay.json", dump_json(j));
    export_snapshots(traj, L, c.snapshot_times, fs::path(c.output_dir) / "snapshots");
    std::cout << dump_json(j);
    return 0;
}

// Transpose identities and div(curl) on the reference grids.
int cmd_check_operators()
{
    bool ok = true;
    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> unif(-1.0, 1.0);
    auto mimetic = [&](const OperatorSet& ops) {
        double worst = 0.0;
        for (int t = 0; t < 200; ++t) {
            VectorXd w(ops.A.cols());
            for (Index i = 0; i < w.size(); ++i) w[i] = unif(rng);
            worst = std::max(worst, (ops.V0 * (ops.A * w)).cwiseAbs().maxCoeff() / w.cwiseAbs().maxCoeff());
        }
        return worst;
    };
    const std::array<std::pair<const char*, const char*>, 6> pairs{
        {{"F1", "A6"}, {"F2", "A3"}, {"F3", "A2"}, {"F4", "A5"}, {"F5", "A4"}, {"F6", "A1"}}};
    for (const auto& n : std::vector<std::array<int, 3>>{{2, 2, 2}, {3, 3, 3}, {2, 3, 4}}) {
        GridSpec s;
        s.n_cells = n;
        const OperatorSet ops = assemble_operator_set(s);
        double transpose_err = 0.0;
        for (const auto& [f, a] : pairs)
            transpose_err = std::max(transpose_err, sparse::max_abs(ops.sub_blocks.at(f) + SpMat(ops.sub_blocks.at(a).transpose())));
        const double m = mimetic(ops);
        const bool pass = transpose_err == 0.0 && m <= 1e-13;
        ok &= pass;
        std::printf("%s full3d N=(%d,%d,%d): transpose %.1e, div curl %.3e\n", pass ? "ok  " : "FAIL", n[0], n[1], n[2],
                    transpose_err, m);
    }
    for (int n : {2, 4, 16}) {
        GridSpec s;
        s.dim_mode = DimMode::TEz2D;
        s.n_cells = {n, n, 1};
        const OperatorSet ops = assemble_operators(s);
        const double transpose_err = sparse::max_abs(ops.F + SpMat(ops.A.transpose()));
        const double m = mimetic(ops);
        const bool pass = transpose_err == 0.0 && m <= 1e-13;
        ok &= pass;
        std::printf("%s tez2d N=(%d,%d): transpose %.1e, div curl %.3e\n", pass ? "ok  " : "FAIL", n, n, transpose_err, m);
    }
    return ok ? 0 : 1;
}

int cmd_report(const std::string& dir, bool as_json)
{
    const fs::path file = fs::path(dir) / "report.json";
    std::ifstream in(file);
    if (!in) throw IoError("cannot read '" + file.string() + "'");
    json j;
    try {
        in >> j;
    } catch (const json::exception& e) {
        throw IoError(file.string() + ": " + e.what());
    }
    if (as_json)
        std::cout << dump_json(j);
    else
        print_summary(EvaluationReport::from_json(j));
    return 0;
}

std::vector<std::string> split_list(const std::vector<std::string>& items)
{
    std::vector<std::string> out;
    for (const auto& item : items) {
        std::stringstream ss(item);
        std::string tok;
        while (std::getline(ss, tok, ','))
            if (!tok.empty()) out.push_back(tok);
    }
    return out;
}

}  // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Exact controllability of the discrete stochastic Maxwell system"};
    app.require_subcommand(1);

    CommonOptions solve_opt, ablate_opt, replay_opt, report_opt;
    auto* solve = app.add_subcommand("solve", "assemble, solve the minimum-norm control problem, replay and report");
    add_common(solve, solve_opt);

    auto* ablate = app.add_subcommand("ablate", "solve with some control families removed");
    add_common(ablate, ablate_opt);
    std::vector<std::string> drop;
    std::string semantics = "reoptimize";
    ablate->add_option("--drop", drop, "families to remove: f1 f2 f3 g1 g2 g3 u E12 ...")->required()->envname("MXC_DROP");
    ablate->add_option("--semantics", semantics, "reoptimize (default) or truncate")->envname("MXC_SEMANTICS");

    auto* replay_cmd = app.add_subcommand("replay", "replay a controls.csv against the configured problem");
    add_common(replay_cmd, replay_opt);
    std::string controls_path;
    replay_cmd->add_option("--controls", controls_path, "controls CSV")->required()->envname("MXC_CONTROLS");

    auto* check = app.add_subcommand("check-operators", "transpose and div(curl) identities on reference grids");

    auto* report = app.add_subcommand("report", "print the report of a finished run");
    report->add_option("--out", report_opt.out, "run directory")->envname("MXC_OUT");
    bool report_json = false;
    report->add_flag("--json", report_json, "print the raw JSON report");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : kExitConfig;
    }

    try {
        if (*solve) return run_and_write(resolve(solve_opt));
        if (*ablate) {
            ExperimentConfig c = resolve(ablate_opt);
            c.ablation = AblationMode::drop(split_list(drop));
            c.semantics = parse_semantics(semantics);
            return run_and_write(c);
        }
        if (*replay_cmd) return cmd_replay(resolve(replay_opt), controls_path);
        if (*check) return cmd_check_operators();
        if (*report) return cmd_report(report_opt.out.empty() ? ExperimentConfig{}.output_dir : report_opt.out, report_json);
    } catch (const ConfigError& e) {
        std::fprintf(stderr, "config error: %s\n", e.what());
        return kExitConfig;
    } catch (const SchurSingular& e) {
        std::fprintf(stderr, "singular: %s\n", e.what());
        return kExitSingular;
    } catch (const IoError& e) {
        std::fprintf(stderr, "i/o error: %s\n", e.what());
        return kExitIo;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    }
    return 0;
}
