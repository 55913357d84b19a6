// rlvqsd command line: training, baselines, sweeps and fixed-circuit runs.

#include <cstdio>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "rlvqsd/harness.hpp"

namespace {

using namespace rlvqsd;

constexpr int kExitConfig = 2;
constexpr int kExitRuntime = 3;

struct CommonFlags {
    std::string config;
    std::optional<std::string> problem;
    std::optional<std::uint64_t> seed;
    std::optional<std::string> out;
    std::optional<std::size_t> episodes;
    std::optional<double> zeta;
    std::optional<std::size_t> max_evals;
    bool allow_long_run = false;
};

void add_common(CLI::App* sub, CommonFlags& f) {
    sub->add_option("--config", f.config, "JSON config file");
    sub->add_option("--problem", f.problem, "ginibre:N, heisenberg:2N or file:path");
    sub->add_option("--seed", f.seed, "master seed");
    sub->add_option("--out", f.out, "output directory");
    sub->add_option("--episodes", f.episodes, "episode count");
    sub->add_option("--zeta", f.zeta, "success threshold on the cost");
    sub->add_option("--max-evals", f.max_evals, "optimizer evaluations per step");
    sub->add_flag("--allow-long-run", f.allow_long_run, "permit 4+ qubit runs");
}

ExperimentConfig build_config(const CommonFlags& f) {
    ExperimentConfig cfg = f.config.empty() ? ExperimentConfig{} : load_config_file(f.config);
    if (f.problem) cfg.problem = ProblemSpec::parse(*f.problem);
    if (f.seed) cfg.seed = *f.seed;
    if (f.out) cfg.out_dir = *f.out;
    if (f.episodes) cfg.episodes = *f.episodes;
    if (f.zeta) cfg.zeta = *f.zeta;
    if (f.max_evals) cfg.max_evals = *f.max_evals;
    cfg.allow_long_run = cfg.allow_long_run || f.allow_long_run;
    return cfg;
}

void report_progress(std::size_t done, std::size_t total, const std::vector<EpisodeRecord>& records) {
    const auto train = success_stats(records, Phase::Train);
    const auto test = success_stats(records, Phase::Test);
    double eps = 0.0;
    for (auto it = records.rbegin(); it != records.rend(); ++it)
        if (it->phase == Phase::Train) {
            eps = it->epsilon;
            break;
        }
    std::fprintf(stderr, "episode %zu/%zu  successes train %zu test %zu  epsilon %.4f\n", done, total, train.successes, test.successes,
                 eps);
}

void print_run(const RunResult& r) {
    std::cout << r.summary.dump(2) << '\n';
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Reinforcement-learned ansatz search for variational state diagonalization"};
    app.require_subcommand(1);

    CommonFlags train_flags, random_flags, lhea_flags, sweep_flags;
    auto* train = app.add_subcommand("train", "train the DDQN agent");
    add_common(train, train_flags);
    auto* random = app.add_subcommand("random-agent", "run the uniform random agent");
    add_common(random, random_flags);

    auto* lhea = app.add_subcommand("lhea-baseline", "optimize layered hardware-efficient ansatz circuits");
    add_common(lhea, lhea_flags);
    std::size_t layers = 6, trials = 50, lhea_restarts = 0;
    std::string variant = "three-param";
    bool fixed_state = false;
    lhea->add_option("--layers", layers, "largest layer count");
    lhea->add_option("--trials", trials, "trials per layer count");
    lhea->add_option("--restarts", lhea_restarts, "random restarts per trial");
    lhea->add_option("--variant", variant, "three-param or one-param")->check(CLI::IsMember({"three-param", "one-param"}));
    lhea->add_flag("--fixed-state", fixed_state, "reuse the problem state for every trial");

    auto* sweep = app.add_subcommand("threshold-sweep", "train once per threshold");
    add_common(sweep, sweep_flags);
    std::vector<double> zetas{1e-3, 1e-5, 1e-7, 1e-9};
    sweep->add_option("--zetas", zetas, "descending thresholds")->delimiter(',');

    auto* diag = app.add_subcommand("diagonalize", "re-optimize a fixed circuit on a state");
    std::string state_path, circuit_path, diag_out = "out";
    std::size_t diag_restarts = 0, transfer = 0, diag_evals = 400;
    std::uint64_t diag_seed = 1;
    diag->add_option("--state", state_path, "DensityMatrix JSON");
    diag->add_option("--circuit", circuit_path, "circuit JSON")->required();
    diag->add_option("--restarts", diag_restarts, "random restarts");
    diag->add_option("--max-evals", diag_evals, "optimizer evaluations per run");
    diag->add_option("--transfer", transfer, "diagonalize this many fresh Ginibre states instead of --state");
    diag->add_option("--seed", diag_seed, "seed");
    diag->add_option("--out", diag_out, "output directory");

    auto* gen = app.add_subcommand("gen-state", "emit a DensityMatrix JSON");
    std::string gen_problem = "ginibre:2", gen_out;
    std::uint64_t gen_seed = 1;
    gen->add_option("--problem", gen_problem, "ginibre:N or heisenberg:2N");
    gen->add_option("--seed", gen_seed, "seed");
    gen->add_option("--out", gen_out, "output file (stdout if omitted)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : kExitConfig;
    }

    try {
        if (train->parsed() || random->parsed()) {
            const bool is_train = train->parsed();
            const auto cfg = build_config(is_train ? train_flags : random_flags);
            print_run(is_train ? run_training(cfg, report_progress) : run_random_agent(cfg, report_progress));
        } else if (lhea->parsed()) {
            const auto cfg = build_config(lhea_flags);
            LheaOptions opt;
            opt.max_layers = layers;
            opt.trials = trials;
            opt.restarts = lhea_restarts;
            opt.variant = variant == "one-param" ? LheaVariant::OneParam : LheaVariant::ThreeParam;
            opt.fresh_states = !fixed_state;
            for (const auto& r : run_lhea_baseline(cfg, opt))
                std::fprintf(stderr, "layers %zu  avg error %.3e  min error %.3e  gates %zu/%zu  depth %zu\n", r.layers, r.avg_error,
                             r.min_error, r.counts.one_qubit, r.counts.two_qubit, r.counts.depth);
        } else if (sweep->parsed()) {
            const auto cfg = build_config(sweep_flags);
            for (const auto& r : run_threshold_sweep(cfg, zetas, report_progress))
                std::fprintf(stderr, "zeta %.1e  successes %zu  avg gates %.2f\n", r.zeta, r.stats.successes, r.stats.avg_total_gates);
        } else if (diag->parsed()) {
            const Circuit c = load_circuit_file(circuit_path);
            DiagonalizeOptions opt;
            opt.restarts = diag_restarts;
            opt.budget.max_evals = diag_evals;
            opt.seed = diag_seed;
            if (transfer > 0) {
                const auto s = run_transfer(c, transfer, opt, diag_out);
                std::cout << nlohmann::json{{"states", s.states}, {"in_band", s.in_band},
                                            {"in_band_fraction", static_cast<double>(s.in_band) / static_cast<double>(s.states)},
                                            {"median_delta", s.median_delta}}
                                 .dump(2)
                          << '\n';
            } else {
                if (state_path.empty()) throw ConfigError("diagonalize needs --state or --transfer");
                const auto rho = load_state_file(state_path);
                const auto o = diagonalize(rho, c, opt);
                detail::prepare_out_dir(diag_out);
                const auto j = to_json(o, rho);
                detail::write_json(fs::path(diag_out) / "result.json", j);
                std::cout << j.dump(2) << '\n';
            }
        } else if (gen->parsed()) {
            const auto p = ProblemSpec::parse(gen_problem);
            if (p.kind == ProblemKind::File) throw ConfigError("gen-state takes ginibre:N or heisenberg:2N");
            const auto j = to_json(resolve_problem(p, gen_seed).state);
            if (gen_out.empty()) {
                std::cout << j.dump(2) << '\n';
            } else {
                detail::write_json(gen_out, j);
            }
        }
    } catch (const ConfigError& e) {
        std::fprintf(stderr, "config error: %s\n", e.what());
        return kExitConfig;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return kExitRuntime;
    }
    return 0;
}
