#pragma once

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "json.hpp"

#include "constraints.hpp"
#include "dynamics.hpp"
#include "grid.hpp"
#include "lagrange.hpp"
#include "tez2d.hpp"

namespace mxc {

namespace fs = std::filesystem;
using json = nlohmann::ordered_json;

enum class AblationSemantics { Reoptimize, Truncate };

inline std::string semantics_name(AblationSemantics s) { return s == AblationSemantics::Reoptimize ? "reoptimize" : "truncate"; }

inline AblationSemantics parse_semantics(const std::string& s)
{
    if (s == "reoptimize") return AblationSemantics::Reoptimize;
    if (s == "truncate") return AblationSemantics::Truncate;
    throw ConfigError("ablation_semantics must be 'reoptimize' or 'truncate', got '" + s + "'");
}

struct ExperimentConfig {
    GridSpec grid{{0.0, 0.0, 0.0}, {1.0, 1.0, 1.0}, {16, 16, 1}, 1.0, 10, DimMode::TEz2D};
    std::uint64_t seed = 42;
    AblationMode ablation;
    AblationSemantics semantics = AblationSemantics::Reoptimize;
    std::string target = "zero";
    std::string initial = "paper-tez";
    std::size_t dense_cap = 5000;
    double rank_tolerance = 0.0;
    std::string output_dir = "mxc_out";
    std::vector<int> snapshot_times;
    bool frozen_path = false;
    bool allow_singular = false;

    void validate() const
    {
        grid.validate();
        for (int t : snapshot_times)
            if (t < 0 || t > grid.n_steps)
                throw ConfigError("snapshot time " + std::to_string(t) + " outside 0.." + std::to_string(grid.n_steps));
        for (const std::string* file : {&target, &initial})
            if (*file != "zero" && *file != "paper-tez" && !fs::exists(*file))
                throw ConfigError("field file '" + *file + "' does not exist");
        if (target == "paper-tez") throw ConfigError("target must be 'zero' or a field file");
        if (initial == "paper-tez" && grid.dim_mode != DimMode::TEz2D)
            throw ConfigError("initial 'paper-tez' needs mode tez2d");
        ablation.validate(make_state_layout(grid));
    }

    json to_json() const
    {
        const int dims = grid.spatial_dims();
        json g;
        g["a"] = std::vector<double>(grid.a.begin(), grid.a.begin() + dims);
        g["b"] = std::vector<double>(grid.b.begin(), grid.b.begin() + dims);
        g["n_cells"] = std::vector<int>(grid.n_cells.begin(), grid.n_cells.begin() + dims);
        g["t_final"] = grid.t_final;
        g["n_steps"] = grid.n_steps;
        json j;
        j["mode"] = std::string(dim_mode_name(grid.dim_mode));
        j["grid"] = g;
        j["seed"] = seed;
        if (ablation.is_full())
            j["ablation"] = "full";
        else
            j["ablation"] = json{{"drop", std::vector<std::string>(ablation.dropped().begin(), ablation.dropped().end())}};
        j["ablation_semantics"] = semantics_name(semantics);
        j["target"] = target;
        j["initial"] = initial;
        j["dense_cap"] = dense_cap;
        j["rank_tolerance"] = rank_tolerance;
        j["output_dir"] = output_dir;
        j["snapshot_times"] = snapshot_times;
        j["frozen_path"] = frozen_path;
        j["allow_singular"] = allow_singular;
        return j;
    }

    static ExperimentConfig from_json(const json& j)
    {
        ExperimentConfig c;
        try {
            if (j.contains("mode")) {
                const std::string m = j.at("mode").get<std::string>();
                if (m == "tez2d")
                    c.grid.dim_mode = DimMode::TEz2D;
                else if (m == "full3d")
                    c.grid.dim_mode = DimMode::Full3D;
                else
                    throw ConfigError("mode must be 'tez2d' or 'full3d', got '" + m + "'");
            }
            const int dims = c.grid.spatial_dims();
            if (c.grid.dim_mode == DimMode::Full3D) c.grid.n_cells = {4, 4, 4};
            if (j.contains("grid")) {
                const json& g = j.at("grid");
                auto read3 = [&](const char* key, auto& dst) {
                    if (!g.contains(key)) return;
                    const auto v = g.at(key).get<std::vector<typename std::decay_t<decltype(dst)>::value_type>>();
                    if (static_cast<int>(v.size()) != dims)
                        throw ConfigError(std::string("grid.") + key + " needs " + std::to_string(dims) + " entries");
                    std::copy(v.begin(), v.end(), dst.begin());
                };
                read3("a", c.grid.a);
                read3("b", c.grid.b);
                read3("n_cells", c.grid.n_cells);
                c.grid.t_final = g.value("t_final", c.grid.t_final);
                c.grid.n_steps = g.value("n_steps", c.grid.n_steps);
            }
            if (c.grid.dim_mode == DimMode::TEz2D) c.grid.n_cells[2] = 1;
            c.seed = j.value("seed", c.seed);
            if (j.contains("ablation")) {
                const json& a = j.at("ablation");
                if (a.is_string()) {
                    if (a.get<std::string>() != "full") throw ConfigError("ablation must be 'full' or {\"drop\": [...]}");
                } else {
                    c.ablation = AblationMode::drop(a.at("drop").get<std::vector<std::string>>());
                }
            }
            if (j.contains("ablation_semantics")) c.semantics = parse_semantics(j.at("ablation_semantics").get<std::string>());
            c.target = j.value("target", c.target);
            c.initial = j.value("initial", c.initial);
            c.dense_cap = j.value("dense_cap", c.dense_cap);
            c.rank_tolerance = j.value("rank_tolerance", c.rank_tolerance);
            c.output_dir = j.value("output_dir", c.output_dir);
            c.snapshot_times = j.value("snapshot_times", c.snapshot_times);
            c.frozen_path = j.value("frozen_path", c.frozen_path);
            c.allow_singular = j.value("allow_singular", c.allow_singular);
        } catch (const json::exception& e) {
            throw ConfigError(std::string("config: ") + e.what());
        }
        return c;
    }
};

inline ExperimentConfig load_config(const fs::path& path)
{
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config '" + path.string() + "'");
    json j;
    try {
        in >> j;
    } catch (const json::exception& e) {
        throw ConfigError("config '" + path.string() + "': " + e.what());
    }
    return ExperimentConfig::from_json(j);
}

inline Family family_from_name(const std::string& name)
{
    for (int f = 0; f <= static_cast<int>(Family::RH3); ++f)
        if (family_name(static_cast<Family>(f)) == name) return static_cast<Family>(f);
    throw ConfigError("unknown family '" + name + "'");
}

// ---------------------------------------------------------------------------
// CSV field files: family,i,j,k,value (integer parts of the Yee indices).
// Samples not listed are zero.

inline std::string fmt17(double v)
{
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

inline void write_field_file(const fs::path& path, const StateLayout& L, const VectorXd& phi)
{
    std::ofstream out(path);
    if (!out) throw IoError("cannot write '" + path.string() + "'");
    out << "family,i,j,k,value\n";
    for (const auto& [fam, off] : L.state_families())
        for (std::size_t p = 0; p < fam->flat_len(); ++p) {
            const MultiIndex m = fam->multi_index(p);
            out << family_name(fam->family()) << ',' << m[0] << ',' << m[1] << ',' << m[2] << ','
                << fmt17(phi[static_cast<Index>(off + p)]) << '\n';
        }
}

inline std::vector<std::string> split_csv(const std::string& line)
{
    std::vector<std::string> out;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) out.push_back(cell);
    return out;
}

inline VectorXd read_field_file(const fs::path& path, const StateLayout& L)
{
    std::ifstream in(path);
    if (!in) throw IoError("cannot read '" + path.string() + "'");
    VectorXd phi = VectorXd::Zero(static_cast<Index>(L.state_dim()));
    std::string line;
    std::getline(in, line);
    int line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        const auto cells = split_csv(line);
        if (cells.size() != 5) throw ConfigError(path.string() + ":" + std::to_string(line_no) + ": expected 5 columns");
        try {
            const auto [fam, off] = L.locate(family_from_name(cells[0]));
            const MultiIndex m{std::stoi(cells[1]), std::stoi(cells[2]), std::stoi(cells[3])};
            phi[static_cast<Index>(off + fam->index(m))] = std::stod(cells[4]);
        } catch (const std::logic_error& e) {
            throw ConfigError(path.string() + ":" + std::to_string(line_no) + ": " + e.what());
        } catch (const IndexError& e) {
            throw ConfigError(path.string() + ":" + std::to_string(line_no) + ": " + e.what());
        }
    }
    return phi;
}

// ---------------------------------------------------------------------------
// controls.csv: step,family,index,value. `family` is the block and the family
// (f_E1, g_H3, gstar_g11, estar_E12, rstar_RE1), `index` the flat Yee index
// inside the family. f, g, gstar rows carry steps 0..N_t-1; estar and rstar
// rows carry steps 1..N_t.

namespace detail {

struct ControlBlockRef {
    const char* prefix;
    const Block* block;
    VectorXd ControlVectors::*member;
    int step_base;
};

inline std::vector<ControlBlockRef> control_blocks(const StateLayout& L)
{
    return {{"f", &L.e_h, &ControlVectors::f_s, 0},
            {"g", &L.h_h, &ControlVectors::g_s, 0},
            {"gstar", &L.g_star, &ControlVectors::gstar_s, 0},
            {"estar", &L.e_star, &ControlVectors::estar_s, 1},
            {"rstar", &L.r_star, &ControlVectors::rstar_s, 1}};
}

}  // namespace detail

inline void write_controls_csv(const fs::path& path, const StateLayout& L, const ControlVectors& c, int n_steps)
{
    std::ofstream out(path);
    if (!out) throw IoError("cannot write '" + path.string() + "'");
    out << "step,family,index,value\n";
    for (const auto& ref : detail::control_blocks(L)) {
        const VectorXd& v = c.*(ref.member);
        for (int n = 0; n < n_steps; ++n)
            for (std::size_t f = 0; f < ref.block->families.size(); ++f) {
                const auto& fam = ref.block->families[f];
                for (std::size_t p = 0; p < fam.flat_len(); ++p)
                    out << n + ref.step_base << ',' << ref.prefix << '_' << family_name(fam.family()) << ',' << p << ','
                        << fmt17(v[static_cast<Index>(n * ref.block->size + ref.block->offsets[f] + p)]) << '\n';
            }
    }
}

inline ControlVectors read_controls_csv(const fs::path& path, const StateLayout& L, int n_steps)
{
    std::ifstream in(path);
    if (!in) throw IoError("cannot read '" + path.string() + "'");
    ControlVectors c = ControlVectors::zeros(L, n_steps);
    const auto blocks = detail::control_blocks(L);
    std::string line;
    std::getline(in, line);
    int line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        const auto cells = split_csv(line);
        const std::string where = path.string() + ":" + std::to_string(line_no);
        if (cells.size() != 4) throw ConfigError(where + ": expected 4 columns");
        const auto us = cells[1].find('_');
        if (us == std::string::npos) throw ConfigError(where + ": malformed family '" + cells[1] + "'");
        const std::string prefix = cells[1].substr(0, us);
        const Family fam = family_from_name(cells[1].substr(us + 1));
        bool placed = false;
        for (const auto& ref : blocks) {
            if (prefix != ref.prefix) continue;
            const int f = ref.block->find(fam);
            if (f < 0) break;
            int step = 0;
            std::size_t idx = 0;
            double value = 0.0;
            try {
                step = std::stoi(cells[0]) - ref.step_base;
                idx = static_cast<std::size_t>(std::stoull(cells[2]));
                value = std::stod(cells[3]);
            } catch (const std::logic_error&) {
                throw ConfigError(where + ": unparsable number");
            }
            if (step < 0 || step >= n_steps || idx >= ref.block->families[static_cast<std::size_t>(f)].flat_len())
                throw ConfigError(where + ": step or index out of range");
            (c.*(ref.member))[static_cast<Index>(step * ref.block->size + ref.block->offsets[static_cast<std::size_t>(f)] + idx)] =
                value;
            placed = true;
            break;
        }
        if (!placed) throw ConfigError(where + ": family '" + cells[1] + "' does not belong to this layout");
    }
    return c;
}

inline void write_multipliers_csv(const fs::path& path, const ControlSolution& sol)
{
    std::ofstream out(path);
    if (!out) throw IoError("cannot write '" + path.string() + "'");
    out << "multiplier,index,value\n";
    const std::array<std::pair<const char*, const VectorXd*>, 3> parts{
        {{"lambda1", &sol.lambda1}, {"lambda2", &sol.lambda2}, {"lambda3", &sol.lambda3}}};
    for (const auto& [name, v] : parts)
        for (Index i = 0; i < v->size(); ++i) out << name << ',' << i << ',' << fmt17((*v)[i]) << '\n';
}

// ---------------------------------------------------------------------------

// Sum of squared differences per physical component, boundary samples included.
inline std::map<std::string, double> compute_mse(const StateLayout& L, const VectorXd& terminal, const VectorXd& target)
{
    if (terminal.size() != target.size() || terminal.size() != static_cast<Index>(L.state_dim()))
        throw DimensionMismatch("compute_mse: vector sizes do not match the layout");
    std::map<std::string, double> mse;
    for (const auto& [fam, off] : L.state_families()) {
        const std::string comp(family_name(component_of(fam->family())));
        const auto n = static_cast<Index>(fam->flat_len());
        mse[comp] += (terminal.segment(static_cast<Index>(off), n) - target.segment(static_cast<Index>(off), n)).squaredNorm();
    }
    return mse;
}

// One CSV per requested time index and physical component: x1,x2[,x3],value.
inline std::vector<fs::path> export_snapshots(const Trajectory& traj, const StateLayout& L,
                                              const std::vector<int>& times, const fs::path& dir)
{
    std::vector<fs::path> written;
    if (times.empty()) return written;
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) throw IoError("cannot create '" + dir.string() + "': " + ec.message());
    const int dims = L.spec.spatial_dims();
    std::map<Family, std::vector<std::pair<const ComponentLayout*, std::size_t>>> by_comp;
    for (const auto& entry : L.state_families()) by_comp[component_of(entry.first->family())].push_back(entry);
    for (int t : times) {
        if (t < 0 || t >= static_cast<int>(traj.states.size()))
            throw ConfigError("snapshot time " + std::to_string(t) + " outside the trajectory");
        const VectorXd& phi = traj.states[static_cast<std::size_t>(t)];
        for (const auto& [comp, fams] : by_comp) {
            char name[64];
            std::snprintf(name, sizeof name, "%s_n%04d.csv", std::string(family_name(comp)).c_str(), t);
            const fs::path file = dir / name;
            std::ofstream out(file);
            if (!out) throw IoError("cannot write '" + file.string() + "'");
            out << (dims == 3 ? "x1,x2,x3,value\n" : "x1,x2,value\n");
            for (const auto& [fam, off] : fams)
                for (std::size_t p = 0; p < fam->flat_len(); ++p) {
                    const auto x = fam->coordinates(p, L.spec);
                    for (int d = 0; d < dims; ++d) out << fmt17(x[d]) << ',';
                    out << fmt17(phi[static_cast<Index>(off + p)]) << '\n';
                }
            written.push_back(file);
        }
    }
    return written;
}

// ---------------------------------------------------------------------------

struct EvaluationReport {
    std::string label;
    std::string status;  // "solved" or "infeasible"
    std::map<std::string, double> mse;
    double initial_energy = 0.0;
    double terminal_energy = 0.0;
    double objective = 0.0;
    double schur_condition = 0.0;
    long effective_rank = 0;
    long schur_dimension = 0;
    double residual_div_e = 0.0;
    double residual_div_h = 0.0;
    double residual_terminal = 0.0;
    double relative_terminal_residual = 0.0;
    double xi_norm = 0.0;
    double terminal_defect = 0.0;      // max |Phi_{N_t} (replay) - target|
    double replay_vs_prediction = 0.0; // max |replay defect - S-matrix defect|
    double initial_field_norm = 0.0;
    double initial_e_divergence = 0.0;
    double max_e_divergence = 0.0;
    double max_h_divergence = 0.0;
    double critical_time = 0.0;
    bool critical_time_warning = false;
    bool feasible = false;
    std::uint64_t seed = 0;
    bool frozen_path = false;
    json config;

    json to_json() const
    {
        json j;
        j["label"] = label;
        j["status"] = status;
        j["feasible"] = feasible;
        j["mse"] = mse;
        j["initial_energy"] = initial_energy;
        j["terminal_energy"] = terminal_energy;
        j["objective"] = objective;
        j["schur_condition"] = schur_condition;
        j["effective_rank"] = effective_rank;
        j["schur_dimension"] = schur_dimension;
        j["residuals"] = {{"div_e", residual_div_e},
                          {"div_h", residual_div_h},
                          {"terminal", residual_terminal},
                          {"relative_terminal", relative_terminal_residual},
                          {"xi_norm", xi_norm}};
        j["terminal_defect"] = terminal_defect;
        j["replay_vs_prediction"] = replay_vs_prediction;
        j["divergence"] = {{"initial_field_norm", initial_field_norm},
                           {"initial_e", initial_e_divergence},
                           {"max_e", max_e_divergence},
                           {"max_h_closed", max_h_divergence}};
        j["critical_time"] = {{"t_star", critical_time}, {"warning", critical_time_warning}};
        j["seed"] = seed;
        j["frozen_path"] = frozen_path;
        j["config"] = config;
        return j;
    }

    static EvaluationReport from_json(const json& j)
    {
        EvaluationReport r;
        r.label = j.at("label").get<std::string>();
        r.status = j.at("status").get<std::string>();
        r.feasible = j.at("feasible").get<bool>();
        r.mse = j.at("mse").get<std::map<std::string, double>>();
        r.initial_energy = j.at("initial_energy").get<double>();
        r.terminal_energy = j.at("terminal_energy").get<double>();
        r.objective = j.at("objective").get<double>();
        r.schur_condition = j.at("schur_condition").get<double>();
        r.effective_rank = j.at("effective_rank").get<long>();
        r.schur_dimension = j.at("schur_dimension").get<long>();
        const json& res = j.at("residuals");
        r.residual_div_e = res.at("div_e").get<double>();
        r.residual_div_h = res.at("div_h").get<double>();
        r.residual_terminal = res.at("terminal").get<double>();
        r.relative_terminal_residual = res.at("relative_terminal").get<double>();
        r.xi_norm = res.at("xi_norm").get<double>();
        r.terminal_defect = j.at("terminal_defect").get<double>();
        r.replay_vs_prediction = j.at("replay_vs_prediction").get<double>();
        const json& div = j.at("divergence");
        r.initial_field_norm = div.at("initial_field_norm").get<double>();
        r.initial_e_divergence = div.at("initial_e").get<double>();
        r.max_e_divergence = div.at("max_e").get<double>();
        r.max_h_divergence = div.at("max_h_closed").get<double>();
        r.critical_time = j.at("critical_time").at("t_star").get<double>();
        r.critical_time_warning = j.at("critical_time").at("warning").get<bool>();
        r.seed = j.at("seed").get<std::uint64_t>();
        r.frozen_path = j.at("frozen_path").get<bool>();
        r.config = j.at("config");
        return r;
    }
};

// Doubles are written with 17 significant digits so the report round-trips.
inline std::string dump_json(const json& j)
{
    return j.dump(2, ' ', false, json::error_handler_t::strict) + "\n";
}

inline void write_text(const fs::path& path, const std::string& text)
{
    std::ofstream out(path, std::ios::binary);
    if (!out || !(out << text)) throw IoError("cannot write '" + path.string() + "'");
}

struct ExperimentRun {
    ExperimentConfig config;
    OperatorSet ops;
    SchemeMatrices scheme;
    BrownianPath path;
    VectorXd phi0, target;
    ConstraintSystem system;
    ControlSolution solution;
    Trajectory trajectory;
    EvaluationReport report;
    std::map<std::string, double> timings;
};

inline VectorXd initial_state(const ExperimentConfig& c, const StateLayout& L)
{
    if (c.initial == "paper-tez") return tez_initial_fields(c.grid);
    if (c.initial == "zero") return VectorXd::Zero(static_cast<Index>(L.state_dim()));
    return read_field_file(c.initial, L);
}

inline VectorXd target_state(const ExperimentConfig& c, const StateLayout& L)
{
    if (c.target == "zero") return VectorXd::Zero(static_cast<Index>(L.state_dim()));
    return read_field_file(c.target, L);
}

inline EvaluationReport evaluate(const ExperimentRun& run)
{
    const StateLayout& L = run.scheme.layout;
    EvaluationReport r;
    const ControlSolution& sol = run.solution;
    r.label = sol.label;
    r.feasible = sol.feasible;
    r.status = sol.feasible ? "solved" : "infeasible";
    const VectorXd& terminal = run.trajectory.terminal();
    r.mse = compute_mse(L, terminal, run.target);
    r.initial_energy = discrete_energy(L, run.phi0);
    r.terminal_energy = discrete_energy(L, terminal);
    r.objective = sol.objective_value;
    r.schur_condition = sol.schur_condition_estimate;
    r.effective_rank = static_cast<long>(sol.effective_rank);
    r.schur_dimension = static_cast<long>(sol.schur_dimension);
    r.residual_div_e = sol.residuals.div_e;
    r.residual_div_h = sol.residuals.div_h;
    r.residual_terminal = sol.residuals.terminal;
    r.relative_terminal_residual = sol.residuals.relative_terminal();
    r.xi_norm = sol.residuals.xi_norm;
    const VectorXd defect = terminal - run.target;
    r.terminal_defect = defect.cwiseAbs().maxCoeff();
    r.replay_vs_prediction = (defect - run.system.terminal_defect(sol.controls)).cwiseAbs().maxCoeff();
    r.initial_field_norm = run.phi0.cwiseAbs().maxCoeff();
    r.initial_e_divergence = run.trajectory.divergence.front().e;
    for (const auto& d : run.trajectory.divergence) {
        r.max_e_divergence = std::max(r.max_e_divergence, d.e);
        r.max_h_divergence = std::max(r.max_h_divergence, d.h);
    }
    r.critical_time = critical_time(L.spec);
    r.critical_time_warning = L.spec.t_final < r.critical_time;
    r.seed = run.config.seed;
    r.frozen_path = run.config.frozen_path;
    r.config = run.config.to_json();
    return r;
}

// grid -> operators -> scheme -> path -> constraints -> solve -> replay -> report.
inline ExperimentRun run_experiment(const ExperimentConfig& config)
{
    config.validate();
    ExperimentRun run;
    run.config = config;
    using clock = std::chrono::steady_clock;
    auto lap = [t = clock::now()]() mutable {
        const auto now = clock::now();
        const double s = std::chrono::duration<double>(now - t).count();
        t = now;
        return s;
    };

    run.ops = assemble_operators(config.grid);
    run.scheme = assemble_scheme(run.ops, config.grid.dt(), config.dense_cap);
    run.timings["assemble_s"] = lap();
    const StateLayout& L = run.scheme.layout;
    run.phi0 = initial_state(config, L);
    run.target = target_state(config, L);
    run.path = sample_path(config.seed, config.grid, config.frozen_path);
    run.system = assemble_constraint_system(run.ops, run.scheme, run.path, run.phi0, run.target);
    run.timings["constraints_s"] = lap();

    SolveOptions opt;
    opt.rank_tolerance = config.rank_tolerance;
    if (config.semantics == AblationSemantics::Truncate && !config.ablation.is_full())
        run.solution = truncate_solution(run.system, solve_ablated(run.system, AblationMode::full(), opt), config.ablation);
    else
        run.solution = solve_ablated(run.system, config.ablation, opt);
    run.timings["solve_s"] = lap();

    run.trajectory = replay(run.scheme, run.phi0, run.solution.controls, run.path);
    run.timings["replay_s"] = lap();
    run.report = evaluate(run);

    return run;
}

// Throws SchurSingular for a full-control run that missed the target, unless
// the config allows singular outcomes. Ablated runs only report infeasibility.
inline void check_outcome(const ExperimentRun& run)
{
    if (!run.config.ablation.is_full() || run.solution.feasible || run.config.allow_singular) return;
    throw SchurSingular("terminal target unreachable (relative residual " +
                            std::to_string(run.report.relative_terminal_residual) + ", effective rank " +
                            std::to_string(run.solution.effective_rank) + "/" +
                            std::to_string(run.solution.schur_dimension) + ")",
                        run.solution.effective_rank, run.solution.schur_dimension,
                        run.report.relative_terminal_residual);
}

// report.json, timings.json, controls.csv, multipliers.csv and snapshots/.
inline void write_artifacts(const ExperimentRun& run, const fs::path& dir)
{
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) throw IoError("cannot create '" + dir.string() + "': " + ec.message());
    const StateLayout& L = run.scheme.layout;
    write_text(dir / "report.json", dump_json(run.report.to_json()));
    write_text(dir / "timings.json", dump_json(json(run.timings)));
    write_controls_csv(dir / "controls.csv", L, run.solution.controls, run.config.grid.n_steps);
    write_multipliers_csv(dir / "multipliers.csv", run.solution);
    export_snapshots(run.trajectory, L, run.config.snapshot_times, dir / "snapshots");
}

}  // namespace mxc
