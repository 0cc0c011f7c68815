// Command-line interface: scenario validation, dynamics, reduction, and the
// perp-dimension fuzz harness. Exit codes: 0 pass, 1 validation/invariant failure,
// 2 input error, 3 numeric failure.

#include <CLI11.hpp>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <json.hpp>

#include "cosym/pipeline.hpp"
#include "cosym/scenario_file.hpp"

using namespace cosym;

namespace {

constexpr int kExitPass = 0;
constexpr int kExitCheckFailed = 1;
constexpr int kExitInputError = 2;
constexpr int kExitNumericError = 3;

struct Output {
    bool json = false;
    nlohmann::json bundle = nlohmann::json::array();

    void emit(const Report& rep) {
        if (json)
            bundle.push_back(rep.to_json());
        else
            rep.print(std::cout);
    }

    void note(const std::string& text) {
        if (json)
            bundle.push_back({{"note", text}});
        else
            std::cout << text << "\n";
    }

    void flush() {
        if (json) std::cout << bundle.dump(2) << "\n";
    }
};

std::filesystem::path report_dir() {
    std::filesystem::path dir = ".";
    if (const char* env = std::getenv("COSYM_REPORT_DIR")) dir = env;
    std::filesystem::create_directories(dir);
    return dir;
}

std::vector<double> parse_csv_doubles(const std::string& text) {
    std::vector<double> out;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) {
        if (item.empty()) continue;
        out.push_back(std::stod(item));
    }
    return out;
}

std::vector<int> parse_csv_ints(const std::string& text) {
    std::vector<int> out;
    for (double v : parse_csv_doubles(text)) out.push_back(static_cast<int>(v));
    return out;
}

int finish(Output& out, bool pass) {
    out.flush();
    return pass ? kExitPass : kExitCheckFailed;
}

void write_trajectory_csv(const std::filesystem::path& path, const Trajectory& traj,
                          const CoordinateChart& chart, int k_momentum) {
    std::ofstream os(path);
    os << "time";
    for (const auto& nm : chart.names()) os << "," << nm;
    for (int a = 1; a <= k_momentum; ++a) os << ",J" << a;
    os << ",H\n";
    os << std::setprecision(17);
    for (size_t step = 0; step < traj.states.size(); ++step) {
        os << traj.times[step];
        for (double c : traj.states[step]) os << "," << c;
        for (const auto& log : traj.invariant_log) os << "," << log[step];
        os << "\n";
    }
}

int cmd_validate(const std::string& source, const RunConfig& cfg, Output& out) {
    Scenario sc = load_scenario(source, false);
    bool pass = true;
    for (const auto& rep : validate_scenario(sc, cfg)) {
        out.emit(rep);
        pass = pass && rep.pass();
    }
    return finish(out, pass);
}

int cmd_reeb(const std::string& source, const RunConfig& cfg, Output& out) {
    Scenario sc = load_scenario(source);
    auto pts = sample_points(sc.chart, sc.sample_box, cfg.samples, cfg.seed);
    VectorField reeb = reeb_field(sc.structure, cfg.tol);
    Report rep("Reeb field conditions");
    rep.set_seed(cfg.seed);
    auto ir_omega = interior_product_2(reeb, sc.structure.omega);
    auto ir_eta = interior_product_1(reeb, sc.structure.eta);
    double worst_omega = 0.0, worst_eta = 0.0;
    for (const auto& x : pts) {
        std::span<const double> xs(x);
        for (double c : ir_omega.eval<double>(xs)) worst_omega = std::max(worst_omega, std::abs(c));
        worst_eta = std::max(worst_eta, std::abs(ir_eta(xs) - 1.0));
    }
    rep.check_below("max |i_R omega| component", worst_omega, cfg.tol.reeb_residual);
    rep.check_below("max |i_R eta - 1|", worst_eta, cfg.tol.reeb_residual);
    const Point& x0 = pts.front();
    auto r0 = reeb.eval<double>(std::span<const double>(x0));
    std::ostringstream os;
    os << "R at first sample:";
    for (double c : r0) os << " " << Report::format(c);
    rep.note(os.str());
    out.emit(rep);
    return finish(out, rep.pass());
}

int cmd_evolve(const std::string& source, const RunConfig& cfg, const std::vector<double>& x0_in,
               const std::string& out_file, Output& out) {
    Scenario sc = load_scenario(source);
    auto pts = sample_points(sc.chart, sc.sample_box, cfg.samples, cfg.seed);
    LevelSet level = make_level_set(sc, sc.mu_default, pts, cfg.seed, cfg.tol);

    Point x0 = x0_in.empty() ? pts.front() : Point(x0_in);
    if (static_cast<int>(x0.size()) != sc.chart.dim())
        throw ParseError("--x0 needs one value per coordinate");

    std::vector<ScalarField> logs = level.j.components;
    logs.push_back(sc.hamiltonian);
    Trajectory traj = rk4_integrate(level.structure.reeb, x0, cfg.step, cfg.duration, logs);

    const auto path =
        report_dir() / (out_file.empty() ? sc.name + "-trajectory.csv" : out_file);
    write_trajectory_csv(path, traj, sc.chart, level.k());

    Report rep("evolution trajectory");
    rep.info("steps", static_cast<double>(traj.states.size() - 1));
    double drift = 0.0;
    for (int a = 0; a < level.k(); ++a) {
        const double j0 = traj.invariant_log[static_cast<size_t>(a)].front();
        for (double v : traj.invariant_log[static_cast<size_t>(a)])
            drift = std::max(drift, std::abs(v - j0));
    }
    rep.check_below("max |J_H(t) - J_H(0)|", drift, cfg.tol.noether_drift);
    rep.note("trajectory written to " + path.string());
    out.emit(rep);
    return finish(out, rep.pass());
}

int cmd_noether(const std::string& source, const RunConfig& cfg, int starts, Output& out) {
    Scenario sc = load_scenario(source);
    auto pts = sample_points(sc.chart, sc.sample_box, cfg.samples, cfg.seed);
    LevelSet level = make_level_set(sc, sc.mu_default, pts, cfg.seed, cfg.tol);
    auto on_level = sample_on_level(level, sc.sample_box, starts, cfg.seed);

    Report rep("Noether drift along evolution trajectories");
    rep.set_seed(cfg.seed);
    double drift = 0.0;
    for (const auto& x0 : on_level) {
        Trajectory traj =
            rk4_integrate(level.structure.reeb, x0, cfg.step, cfg.duration, level.j.components);
        for (int a = 0; a < level.k(); ++a) {
            const double j0 = traj.invariant_log[static_cast<size_t>(a)].front();
            for (double v : traj.invariant_log[static_cast<size_t>(a)])
                drift = std::max(drift, std::abs(v - j0));
        }
    }
    rep.info("trajectories", starts);
    rep.info("duration", cfg.duration);
    rep.info("step", cfg.step);
    rep.check_below("max |J_H(t) - J_H(0)|", drift, cfg.tol.noether_drift);

    // Witnesses: J_H is a first integral of E_H, not of X_H or R.
    Cocycle c = compute_cocycle(sc.action, sc.structure, pts, cfg.tol.algebraic);
    MomentumMap jh = modify_momentum(sc.momentum, sc.hamiltonian, c, sc.action, pts, cfg.seed,
                                     cfg.tol);
    Report witness = noether_report(
        jh,
        {{"E_H", evolution_field(sc.structure, sc.hamiltonian, cfg.tol)},
         {"X_H", hamiltonian_field(sc.structure, sc.hamiltonian, cfg.tol)},
         {"R", reeb_field(sc.structure, cfg.tol)}},
        pts);
    out.emit(rep);
    out.emit(witness);
    return finish(out, rep.pass());
}

int cmd_reduce(const std::string& source, const RunConfig& cfg, std::vector<double> mu,
               Output& out) {
    Scenario sc = load_scenario(source);
    if (mu.empty()) mu = sc.mu_default;
    PipelineResult res = run_pipeline(sc, mu, cfg);
    for (const auto& rep : res.reports) out.emit(rep);
    if (res.status == PipelineStatus::EmptyLevelSet) {
        out.note("EmptyLevelSet: J_H^{-1}(mu) contains no points");
        return finish(out, true);
    }
    if (res.status == PipelineStatus::Failed) throw Error(res.failure);
    return finish(out, res.pass());
}

int cmd_compare(const std::string& source, const RunConfig& cfg, std::vector<double> mu,
                const std::vector<double>& x0_in, Output& out) {
    Scenario sc = load_scenario(source);
    if (mu.empty()) mu = sc.mu_default;
    auto pts = sample_points(sc.chart, sc.sample_box, cfg.samples, cfg.seed);
    LevelSet level = make_level_set(sc, mu, pts, cfg.seed, cfg.tol);
    SliceChart slice = sc.make_slice();
    ReducedStructure red = reduce(level, sc.action, slice, cfg.tol);

    Point x0;
    if (x0_in.empty()) {
        x0 = sample_on_level(level, sc.sample_box, 1, cfg.seed).front();
    } else {
        if (static_cast<int>(x0_in.size()) != sc.chart.dim())
            throw ParseError("--x0 needs one value per coordinate");
        x0 = project_to_level(x0_in, level);
    }
    Report rep = compare_dynamics(level, sc.action, red, x0, cfg.duration, cfg.step, cfg.tol);
    out.emit(rep);
    return finish(out, rep.pass());
}

int cmd_formalisms(const std::string& source, const RunConfig& cfg, Output& out) {
    Scenario sc = load_scenario(source);
    if (!sc.connection)
        throw ParseError("scenario has no [connection] section for the formalisms");
    const int n = (sc.chart.dim() - 1) / 2;
    HamiltonianSectionData data{n, sc.hamiltonian, sc.connection};
    auto pts = sample_points(sc.chart, sc.sample_box, cfg.samples, cfg.seed);

    Report relation = formalism_relation_check(data, pts, cfg.tol.algebraic);
    relation.set_seed(cfg.seed);
    out.emit(relation);

    // Hamilton-equation residual along an integrated Reeb trajectory.
    CosymplecticStructure reeb_side = build_reeb_formalism(data);
    VectorField reeb = reeb_field(reeb_side, cfg.tol);
    Point x0 = pts.front();
    Trajectory traj = rk4_integrate(reeb, x0, cfg.step, std::min(cfg.duration, 2.0));
    OneFormField dh = differential(sc.hamiltonian);
    double worst = 0.0;
    for (size_t k = 1; k + 1 < traj.states.size(); ++k) {
        const auto& prev = traj.states[k - 1];
        const auto& next = traj.states[k + 1];
        auto grad = dh.eval<double>(std::span<const double>(traj.states[k]));
        for (int i = 0; i < n; ++i) {
            const double dq = (next[static_cast<size_t>(i)] - prev[static_cast<size_t>(i)]) /
                              (2 * cfg.step);
            const double dp =
                (next[static_cast<size_t>(n + i)] - prev[static_cast<size_t>(n + i)]) /
                (2 * cfg.step);
            worst = std::max(worst, std::abs(dq - grad[static_cast<size_t>(n + i)]));
            worst = std::max(worst, std::abs(dp + grad[static_cast<size_t>(i)]));
        }
    }
    Report hamilton("Hamilton equations along the Reeb trajectory");
    hamilton.check_below("max centered residual", worst, 1e-6);
    out.emit(hamilton);
    return finish(out, relation.pass() && hamilton.pass());
}

int cmd_fuzz(const std::vector<int>& dims, int cases, std::uint64_t seed, Output& out) {
    std::mt19937_64 rng(seed);
    bool pass = true;
    for (int dim : dims) {
        if (dim % 2 == 0 || dim < 3) throw ParseError("fuzz dimensions must be odd and >= 3");
        auto res = fuzz_lemma45(dim, cases, rng);
        Report rep("perp-dimension fuzz in dimension " + std::to_string(dim));
        rep.set_seed(seed);
        rep.info("cases", res.cases);
        rep.info("cases with R in A", res.reeb_in_a_cases);
        rep.check("all dimension formulas and biperp identities hold", res.all_pass(),
                  static_cast<double>(res.passed));
        out.emit(rep);
        pass = pass && res.all_pass();
    }
    return finish(out, pass);
}

int cmd_levelset_cut(const std::string& source, const RunConfig& cfg, std::vector<double> mu,
                     const std::string& plane, int grid, const std::string& out_file,
                     Output& out) {
    Scenario sc = load_scenario(source);
    if (mu.empty()) mu = sc.mu_default;
    auto pts = sample_points(sc.chart, sc.sample_box, cfg.samples, cfg.seed);
    LevelSet level = make_level_set(sc, mu, pts, cfg.seed, cfg.tol);
    if (level.k() != 1) throw ParseError("levelset-cut supports one momentum component");

    // Parse the plane specification "name=value,name=value,...".
    std::map<int, double> fixed;
    std::stringstream ss(plane);
    std::string item;
    while (std::getline(ss, item, ',')) {
        const auto eq = item.find('=');
        if (eq == std::string::npos) throw ParseError("--plane entries look like name=value");
        fixed[sc.chart.index(item.substr(0, eq))] = std::stod(item.substr(eq + 1));
    }
    std::vector<int> free_idx;
    for (int i = 0; i < sc.chart.dim(); ++i)
        if (!fixed.count(i)) free_idx.push_back(i);
    if (free_idx.size() < 2) throw ParseError("--plane must leave at least two coordinates free");

    // Grid over all free coordinates but the last; solve the level equation
    // along the last one by damped Newton from several starts.
    const int solve_idx = free_idx.back();
    const std::vector<int> grid_idx(free_idx.begin(), free_idx.end() - 1);
    const ScalarField& j = level.j.components[0];
    const double target = mu[0];

    const auto path = report_dir() / (out_file.empty() ? sc.name + "-cut.dat" : out_file);
    std::ofstream os(path);
    os << "#";
    for (int idx : free_idx) os << " " << sc.chart.name(idx);
    os << "\n" << std::setprecision(17);

    long points_found = 0;
    std::vector<int> counter(grid_idx.size(), 0);
    for (;;) {
        Point x(static_cast<size_t>(sc.chart.dim()), 0.0);
        for (const auto& [idx, val] : fixed) x[static_cast<size_t>(idx)] = val;
        for (size_t g = 0; g < grid_idx.size(); ++g) {
            const int idx = grid_idx[g];
            const double c = sc.sample_box.center[static_cast<size_t>(idx)];
            const double h = sc.sample_box.halfwidth[static_cast<size_t>(idx)];
            x[static_cast<size_t>(idx)] =
                c - h + 2.0 * h * (grid > 1 ? static_cast<double>(counter[g]) / (grid - 1) : 0.5);
        }

        // Multi-start Newton along the solve coordinate.
        std::vector<double> solutions;
        const double c0 = sc.sample_box.center[static_cast<size_t>(solve_idx)];
        const double hw = sc.sample_box.halfwidth[static_cast<size_t>(solve_idx)];
        for (int s = 0; s < 9; ++s) {
            double v = c0 - hw + 2.0 * hw * s / 8.0;
            bool ok = false;
            for (int it = 0; it < 60; ++it) {
                x[static_cast<size_t>(solve_idx)] = v;
                if (!sc.chart.inside(x)) break;
                auto lifted = lift_point<S1>(std::span<const double>(x));
                lifted[static_cast<size_t>(solve_idx)].d = 1.0;
                S1 val = j.eval<S1>(std::span<const S1>(lifted));
                const double f = val.v - target;
                if (std::abs(f) < 1e-11) {
                    ok = std::abs(val.d) > 1e-8;
                    break;
                }
                if (std::abs(val.d) < 1e-12) break;
                double step = f / val.d;
                if (std::abs(step) > hw) step = step > 0 ? hw : -hw;
                v -= step;
                if (std::abs(v - c0) > 3.0 * hw) break;
            }
            if (ok) {
                bool dup = false;
                for (double other : solutions)
                    if (std::abs(other - v) < 1e-6) dup = true;
                if (!dup) solutions.push_back(v);
            }
        }
        for (double v : solutions) {
            x[static_cast<size_t>(solve_idx)] = v;
            for (int idx : free_idx) os << x[static_cast<size_t>(idx)] << " ";
            os << "\n";
            ++points_found;
        }

        // Advance the grid counter.
        size_t g = 0;
        for (; g < counter.size(); ++g) {
            if (++counter[g] < grid) break;
            counter[g] = 0;
        }
        if (g == counter.size()) break;
    }

    Report rep("level-set cut");
    rep.info("points emitted", static_cast<double>(points_found));
    rep.check("cut is non-empty", points_found > 0);
    rep.note("gnuplot data written to " + path.string());
    out.emit(rep);
    return finish(out, rep.pass());
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"cosymplectic and mechanical presymplectic reduction toolkit"};
    app.set_help_flag("--help", "print help"); // frees -h / --h for the step size
    app.require_subcommand(1);

    RunConfig cfg;
    Output out;
    std::string source, x0_text, mu_text, plane, out_file = "";
    std::string dims_text = "3,5,7";
    int cases = 1000, starts = 10, grid = 41;

    auto add_common = [&](CLI::App* sub) {
        sub->add_flag("--json", out.json, "emit machine-readable reports");
        sub->add_option("--seed", cfg.seed, "RNG seed for sampling");
        sub->add_option("--samples", cfg.samples, "sample-point count for checks");
        sub->add_option("--h", cfg.step, "integrator step");
        sub->add_option("--T", cfg.duration, "integration duration");
    };

    auto* validate = app.add_subcommand("validate", "structure/action/momentum validity");
    validate->add_option("scenario", source)->required();
    add_common(validate);

    auto* reeb = app.add_subcommand("reeb", "solve and check the Reeb field");
    reeb->add_option("scenario", source)->required();
    add_common(reeb);

    auto* evolve = app.add_subcommand("evolve", "integrate the evolution field, write CSV");
    evolve->add_option("scenario", source)->required();
    evolve->add_option("--x0", x0_text, "start point, comma separated");
    evolve->add_option("--out", out_file, "output file name");
    add_common(evolve);

    auto* noether = app.add_subcommand("noether", "momentum drift along trajectories");
    noether->add_option("scenario", source)->required();
    noether->add_option("--starts", starts, "number of on-level start points");
    add_common(noether);

    auto* reduce_cmd = app.add_subcommand("reduce", "full reduction pipeline at mu");
    reduce_cmd->add_option("scenario", source)->required();
    reduce_cmd->add_option("--mu", mu_text, "level value(s), comma separated");
    add_common(reduce_cmd);

    auto* compare = app.add_subcommand("compare", "ambient vs reduced dynamics");
    compare->add_option("scenario", source)->required();
    compare->add_option("--mu", mu_text, "level value(s), comma separated");
    compare->add_option("--x0", x0_text, "on-level start point, comma separated");
    add_common(compare);

    auto* formalisms = app.add_subcommand("formalisms", "Reeb vs evolution formalism relation");
    formalisms->add_option("scenario", source)->required();
    add_common(formalisms);

    auto* fuzz = app.add_subcommand("fuzz-lemma45", "randomized perp-dimension checks");
    fuzz->add_option("--dims", dims_text, "odd dimensions, comma separated");
    fuzz->add_option("--cases", cases, "cases per dimension");
    add_common(fuzz);

    auto* cut = app.add_subcommand("levelset-cut", "gnuplot data for a level-set cut");
    cut->add_option("scenario", source)->required();
    cut->add_option("--mu", mu_text, "level value(s), comma separated");
    cut->add_option("--plane", plane, "fixed coordinates, e.g. p3=0,q2=0,q3=0,t=0")->required();
    cut->add_option("--grid", grid, "grid resolution per free coordinate");
    cut->add_option("--out", out_file, "output file name");
    add_common(cut);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? kExitPass : kExitInputError;
    }

    try {
        const std::vector<double> x0 = x0_text.empty() ? std::vector<double>{} : parse_csv_doubles(x0_text);
        const std::vector<double> mu = mu_text.empty() ? std::vector<double>{} : parse_csv_doubles(mu_text);

        if (validate->parsed()) return cmd_validate(source, cfg, out);
        if (reeb->parsed()) return cmd_reeb(source, cfg, out);
        if (evolve->parsed()) return cmd_evolve(source, cfg, x0, out_file, out);
        if (noether->parsed()) return cmd_noether(source, cfg, starts, out);
        if (reduce_cmd->parsed()) return cmd_reduce(source, cfg, mu, out);
        if (compare->parsed()) return cmd_compare(source, cfg, mu, x0, out);
        if (formalisms->parsed()) return cmd_formalisms(source, cfg, out);
        if (fuzz->parsed()) return cmd_fuzz(parse_csv_ints(dims_text), cases, cfg.seed, out);
        if (cut->parsed()) return cmd_levelset_cut(source, cfg, mu, plane, grid, out_file, out);
        return kExitInputError;
    } catch (const ParseError& e) {
        std::cerr << "input error: " << e.what() << "\n";
        return kExitInputError;
    } catch (const ValidationError& e) {
        std::cerr << "validation error: " << e.what() << "\n";
        return kExitInputError;
    } catch (const Error& e) {
        std::cerr << "numeric error: " << e.what() << "\n";
        return kExitNumericError;
    } catch (const std::exception& e) {
        std::cerr << "input error: " << e.what() << "\n";
        return kExitInputError;
    }
}
