#pragma once

// Experiment recipes: configuration, RL training with alternating test
// episodes, the random-agent and LHEA baselines, threshold sweeps and
// fixed-circuit diagonalization. All randomness derives from the config seed.

#include <chrono>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iomanip>
#include <limits>
#include <optional>
#include <random>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "rlvqsd/checkpoint.hpp"
#include "rlvqsd/circuit.hpp"
#include "rlvqsd/cobyla.hpp"
#include "rlvqsd/ddqn.hpp"
#include "rlvqsd/encoding.hpp"
#include "rlvqsd/environment.hpp"
#include "rlvqsd/qsim.hpp"
#include "rlvqsd/states.hpp"
#include "rlvqsd/vqsd.hpp"

namespace rlvqsd {

namespace fs = std::filesystem;

/// Bad user input: malformed or inconsistent configuration, unreadable input files.
struct ConfigError : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

inline constexpr const char* kEpisodeCsvHeader = "# rlvqsd-episodes v1";
inline constexpr const char* kStepCsvHeader = "# rlvqsd-steps v1";
inline constexpr const char* kLheaCsvHeader = "# rlvqsd-lhea v1";
inline constexpr const char* kSweepCsvHeader = "# rlvqsd-threshold-sweep v1";
inline constexpr const char* kTransferCsvHeader = "# rlvqsd-transfer v1";

/// Qubit counts at or above this need an explicit long-run opt-in.
inline constexpr std::size_t kLongRunQubits = 4;

// ---------------------------------------------------------------------------
// Problems

enum class ProblemKind { Ginibre, Heisenberg, File };

struct ProblemSpec {
    ProblemKind kind = ProblemKind::Ginibre;
    std::size_t size = 2;  // qubits for ginibre, total spins for heisenberg
    std::string path;

    /// "ginibre:N", "heisenberg:2N" or "file:path".
    static ProblemSpec parse(const std::string& text) {
        const auto colon = text.find(':');
        if (colon == std::string::npos) throw ConfigError("problem must look like ginibre:N, heisenberg:2N or file:path, got '" + text + "'");
        const std::string head = text.substr(0, colon), tail = text.substr(colon + 1);
        ProblemSpec p;
        if (head == "file") {
            if (tail.empty()) throw ConfigError("file problem needs a path");
            p.kind = ProblemKind::File;
            p.path = tail;
            return p;
        }
        if (head == "ginibre")
            p.kind = ProblemKind::Ginibre;
        else if (head == "heisenberg")
            p.kind = ProblemKind::Heisenberg;
        else
            throw ConfigError("unknown problem kind '" + head + "'");
        std::size_t used = 0;
        unsigned long v = 0;
        try {
            v = std::stoul(tail, &used);
        } catch (const std::exception&) {
            throw ConfigError("problem size is not a number: '" + tail + "'");
        }
        if (used != tail.size()) throw ConfigError("problem size is not a number: '" + tail + "'");
        p.size = v;
        if (p.kind == ProblemKind::Ginibre && (p.size < 1 || p.size > kMaxQubits)) throw ConfigError("ginibre qubit count out of range");
        if (p.kind == ProblemKind::Heisenberg) {
            if (p.size < 2 || p.size % 2 != 0) throw ConfigError("heisenberg needs an even number of spins >= 2");
            if (p.size > kMaxHeisenbergSpins) throw ConfigError("heisenberg ring too large for dense diagonalization");
        }
        return p;
    }

    std::string to_string() const {
        switch (kind) {
            case ProblemKind::Ginibre: return "ginibre:" + std::to_string(size);
            case ProblemKind::Heisenberg: return "heisenberg:" + std::to_string(size);
            default: return "file:" + path;
        }
    }
};

inline nlohmann::json read_json_file(const fs::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open " + path.string());
    try {
        return nlohmann::json::parse(in);
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError("cannot parse " + path.string() + ": " + e.what());
    }
}

inline DensityMatrix load_state_file(const fs::path& path) {
    try {
        return density_matrix_from_json(read_json_file(path));
    } catch (const ConfigError&) {
        throw;
    } catch (const std::exception& e) {
        throw ConfigError("invalid state file " + path.string() + ": " + e.what());
    }
}

inline Circuit load_circuit_file(const fs::path& path) {
    try {
        return circuit_from_json(read_json_file(path));
    } catch (const ConfigError&) {
        throw;
    } catch (const std::exception& e) {
        throw ConfigError("invalid circuit file " + path.string() + ": " + e.what());
    }
}

/// Independent stream `stream` derived from a master seed.
inline Rng derived_rng(std::uint64_t seed, std::uint32_t stream) {
    std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32), stream};
    return Rng(seq);
}

namespace stream {
inline constexpr std::uint32_t kState = 1, kAgent = 2, kRandomAgent = 3, kBaseline = 4, kRestarts = 5, kTransfer = 6;
}

struct ResolvedProblem {
    DensityMatrix state;
    nlohmann::json info;
};

inline ResolvedProblem resolve_problem(const ProblemSpec& p, std::uint64_t seed) {
    switch (p.kind) {
        case ProblemKind::Ginibre: {
            auto rng = derived_rng(seed, stream::kState);
            return {ginibre_density_matrix(p.size, rng), {{"problem", p.to_string()}, {"state_seed", seed}}};
        }
        case ProblemKind::Heisenberg: {
            const HeisenbergSpec spec{p.size};
            const auto eig = eig_hermitian(heisenberg_hamiltonian(spec));
            const auto last = eig.values.size() - 1;
            return {reduced_ground_state(spec),
                    {{"problem", p.to_string()},
                     {"ground_energy", eig.values(last)},
                     {"spectral_gap", eig.values(last - 1) - eig.values(last)}}};
        }
        default: return {load_state_file(p.path), {{"problem", p.to_string()}}};
    }
}

inline std::size_t problem_qubits(const ProblemSpec& p) {
    switch (p.kind) {
        case ProblemKind::Ginibre: return p.size;
        case ProblemKind::Heisenberg: return p.size / 2;
        default: return load_state_file(p.path).n_qubits();
    }
}

// ---------------------------------------------------------------------------
// Configuration

struct QubitDefaults {
    std::size_t n_steps;
    std::size_t max_evals;
    double zeta;
};

/// Per-size defaults (N_s, optimizer budget, zeta); sizes past 4 reuse the 4-qubit row.
inline QubitDefaults defaults_for(std::size_t n_qubits) {
    if (n_qubits <= 2) return {20, 400, 1e-5};
    if (n_qubits == 3) return {40, 500, 1e-4};
    return {60, 1000, 1e-3};
}

struct ExperimentConfig {
    ProblemSpec problem;
    std::optional<double> zeta;
    std::optional<std::size_t> n_steps;
    std::size_t episodes = 10000;
    std::optional<std::size_t> max_evals;
    double initial_step = 1.0;
    double final_tolerance = 1e-6;
    double success_reward = 5.0;
    AgentConfig agent;
    std::uint64_t seed = 1;
    fs::path out_dir = "out";
    bool allow_long_run = false;
    std::size_t progress_every = 100;

    std::size_t n_qubits() const { return problem_qubits(problem); }
    double resolved_zeta() const { return zeta.value_or(defaults_for(n_qubits()).zeta); }
    std::size_t resolved_n_steps() const { return n_steps.value_or(defaults_for(n_qubits()).n_steps); }

    OptimizerBudget budget() const {
        return {max_evals.value_or(defaults_for(n_qubits()).max_evals), initial_step, final_tolerance};
    }

    void validate() const {
        if (zeta && !(*zeta > 0.0)) throw ConfigError("zeta must be positive");
        if (n_steps && *n_steps < 1) throw ConfigError("n_steps must be at least 1");
        if (!(success_reward > 0.0)) throw ConfigError("success_reward must be positive");
        try {
            budget().validate();
            agent.validate();
        } catch (const std::invalid_argument& e) {
            throw ConfigError(e.what());
        }
        const std::size_t n = n_qubits();
        if (n < 2) throw ConfigError("the circuit search needs at least 2 qubits");
        if (n >= kLongRunQubits && !allow_long_run)
            throw ConfigError(std::to_string(n) + "-qubit runs take many hours; pass --allow-long-run to proceed");
    }

    /// Environment config for a given target state.
    EnvConfig env_config(DensityMatrix state) const {
        EnvConfig e;
        e.target_state = std::move(state);
        e.zeta = resolved_zeta();
        e.n_steps = resolved_n_steps();
        e.d_max = e.n_steps;
        e.optimizer_budget = budget();
        e.success_reward = success_reward;
        return e;
    }

    nlohmann::json to_json() const {
        nlohmann::json a = {{"gamma", agent.gamma},
                            {"epsilon_start", agent.epsilon_start},
                            {"epsilon_min", agent.epsilon_min},
                            {"epsilon_decay", agent.epsilon_decay},
                            {"target_sync_every", agent.target_sync_every},
                            {"replay_capacity", agent.replay_capacity},
                            {"batch_size", agent.batch_size},
                            {"learning_rate", agent.learning_rate},
                            {"hidden", agent.hidden}};
        return {{"problem", problem.to_string()},
                {"zeta", resolved_zeta()},
                {"n_steps", resolved_n_steps()},
                {"episodes", episodes},
                {"max_evals", budget().max_evals},
                {"initial_step", initial_step},
                {"final_tolerance", final_tolerance},
                {"success_reward", success_reward},
                {"seed", seed},
                {"agent", std::move(a)}};
    }
};

namespace detail {

template <class T>
void read_key(const nlohmann::json& j, const char* key, T& dst) {
    if (!j.contains(key)) return;
    try {
        dst = j.at(key).get<T>();
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError(std::string("config key '") + key + "': " + e.what());
    }
}

template <class T>
void read_key(const nlohmann::json& j, const char* key, std::optional<T>& dst) {
    if (!j.contains(key)) return;
    T v{};
    read_key(j, key, v);
    dst = v;
}

inline void reject_unknown(const nlohmann::json& j, std::initializer_list<const char*> known, const std::string& where) {
    for (const auto& [k, v] : j.items()) {
        bool ok = false;
        for (const char* name : known) ok |= k == name;
        if (!ok) throw ConfigError("unknown " + where + " key '" + k + "'");
    }
}

}  // namespace detail

/// Applies a JSON object on top of `cfg`. Unknown keys are errors.
inline void apply_config_json(const nlohmann::json& j, ExperimentConfig& cfg) {
    if (!j.is_object()) throw ConfigError("config must be a JSON object");
    detail::reject_unknown(j,
                           {"problem", "zeta", "n_steps", "episodes", "max_evals", "initial_step", "final_tolerance", "success_reward",
                            "seed", "out", "agent", "allow_long_run", "progress_every"},
                           "config");
    if (j.contains("problem")) {
        std::string p;
        detail::read_key(j, "problem", p);
        cfg.problem = ProblemSpec::parse(p);
    }
    detail::read_key(j, "zeta", cfg.zeta);
    detail::read_key(j, "n_steps", cfg.n_steps);
    detail::read_key(j, "episodes", cfg.episodes);
    detail::read_key(j, "max_evals", cfg.max_evals);
    detail::read_key(j, "initial_step", cfg.initial_step);
    detail::read_key(j, "final_tolerance", cfg.final_tolerance);
    detail::read_key(j, "success_reward", cfg.success_reward);
    detail::read_key(j, "seed", cfg.seed);
    detail::read_key(j, "allow_long_run", cfg.allow_long_run);
    detail::read_key(j, "progress_every", cfg.progress_every);
    if (j.contains("out")) {
        std::string out;
        detail::read_key(j, "out", out);
        cfg.out_dir = out;
    }
    if (j.contains("agent")) {
        const auto& a = j.at("agent");
        if (!a.is_object()) throw ConfigError("config key 'agent' must be an object");
        detail::reject_unknown(a,
                               {"gamma", "epsilon_start", "epsilon_min", "epsilon_decay", "target_sync_every", "replay_capacity",
                                "batch_size", "learning_rate", "hidden"},
                               "agent");
        detail::read_key(a, "gamma", cfg.agent.gamma);
        detail::read_key(a, "epsilon_start", cfg.agent.epsilon_start);
        detail::read_key(a, "epsilon_min", cfg.agent.epsilon_min);
        detail::read_key(a, "epsilon_decay", cfg.agent.epsilon_decay);
        detail::read_key(a, "target_sync_every", cfg.agent.target_sync_every);
        detail::read_key(a, "replay_capacity", cfg.agent.replay_capacity);
        detail::read_key(a, "batch_size", cfg.agent.batch_size);
        detail::read_key(a, "learning_rate", cfg.agent.learning_rate);
        detail::read_key(a, "hidden", cfg.agent.hidden);
    }
}

inline ExperimentConfig load_config_file(const fs::path& path) {
    ExperimentConfig cfg;
    apply_config_json(read_json_file(path), cfg);
    return cfg;
}

// ---------------------------------------------------------------------------
// Records

enum class Phase { Train, Test };

inline const char* to_string(Phase p) { return p == Phase::Train ? "train" : "test"; }

struct EpisodeRecord {
    std::size_t episode = 0;
    Phase phase = Phase::Train;
    bool success = false;
    double final_cost = 0.0;
    double delta = 0.0;
    std::size_t one_qubit = 0;
    std::size_t two_qubit = 0;
    std::size_t depth = 0;
    std::size_t steps = 0;
    double epsilon = 0.0;
    double wall_seconds = 0.0;

    std::size_t total_gates() const { return one_qubit + two_qubit; }
};

inline std::string format_double(double v) {
    std::ostringstream os;
    os << std::setprecision(17) << v;
    return os.str();
}

inline const char* episode_csv_columns() {
    return "episode,phase,success,final_cost,delta,one_qubit,two_qubit,depth,total_gates,steps,epsilon,wall_seconds";
}

inline std::string to_csv_row(const EpisodeRecord& r) {
    std::ostringstream os;
    os << r.episode << ',' << to_string(r.phase) << ',' << (r.success ? 1 : 0) << ',' << format_double(r.final_cost) << ','
       << format_double(r.delta) << ',' << r.one_qubit << ',' << r.two_qubit << ',' << r.depth << ',' << r.total_gates() << ','
       << r.steps << ',' << format_double(r.epsilon) << ',' << std::fixed << std::setprecision(6) << r.wall_seconds;
    return os.str();
}

/// Parses an episodes.csv produced by this harness.
inline std::vector<EpisodeRecord> read_episode_csv(const fs::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open " + path.string());
    std::string line;
    if (!std::getline(in, line) || line != kEpisodeCsvHeader) throw ConfigError(path.string() + " is not an episode log");
    if (!std::getline(in, line) || line != episode_csv_columns()) throw ConfigError(path.string() + " has unexpected columns");
    std::vector<EpisodeRecord> out;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::istringstream row(line);
        std::vector<std::string> f;
        for (std::string cell; std::getline(row, cell, ',');) f.push_back(cell);
        if (f.size() != 12) throw ConfigError("malformed episode row: " + line);
        EpisodeRecord r;
        r.episode = std::stoul(f[0]);
        r.phase = f[1] == "train" ? Phase::Train : Phase::Test;
        r.success = f[2] == "1";
        r.final_cost = std::stod(f[3]);
        r.delta = std::stod(f[4]);
        r.one_qubit = std::stoul(f[5]);
        r.two_qubit = std::stoul(f[6]);
        r.depth = std::stoul(f[7]);
        r.steps = std::stoul(f[9]);
        r.epsilon = std::stod(f[10]);
        r.wall_seconds = std::stod(f[11]);
        out.push_back(r);
    }
    return out;
}

struct BestCircuit {
    Circuit circuit{2};
    EpisodeRecord record;
};

/// Lexicographic (total gates, depth, delta).
inline bool better_circuit(const EpisodeRecord& a, const EpisodeRecord& b) {
    if (a.total_gates() != b.total_gates()) return a.total_gates() < b.total_gates();
    if (a.depth != b.depth) return a.depth < b.depth;
    return a.delta < b.delta;
}

/// Aggregates over successful episodes of the selected phases.
struct SuccessStats {
    std::size_t episodes = 0;
    std::size_t successes = 0;
    double avg_one_qubit = 0.0;
    double avg_two_qubit = 0.0;
    double avg_depth = 0.0;
    double avg_total_gates = 0.0;
    double avg_delta = 0.0;
    double min_delta = std::numeric_limits<double>::infinity();

    nlohmann::json to_json() const {
        nlohmann::json j = {{"episodes", episodes}, {"successes", successes}};
        if (successes > 0) {
            j["avg_one_qubit"] = avg_one_qubit;
            j["avg_two_qubit"] = avg_two_qubit;
            j["avg_depth"] = avg_depth;
            j["avg_total_gates"] = avg_total_gates;
            j["avg_delta"] = avg_delta;
            j["min_delta"] = min_delta;
        }
        return j;
    }
};

inline SuccessStats success_stats(const std::vector<EpisodeRecord>& records, std::optional<Phase> phase = std::nullopt) {
    SuccessStats s;
    for (const auto& r : records) {
        if (phase && r.phase != *phase) continue;
        ++s.episodes;
        if (!r.success) continue;
        ++s.successes;
        s.avg_one_qubit += static_cast<double>(r.one_qubit);
        s.avg_two_qubit += static_cast<double>(r.two_qubit);
        s.avg_depth += static_cast<double>(r.depth);
        s.avg_total_gates += static_cast<double>(r.total_gates());
        s.avg_delta += r.delta;
        s.min_delta = std::min(s.min_delta, r.delta);
    }
    if (s.successes > 0) {
        const double k = static_cast<double>(s.successes);
        s.avg_one_qubit /= k;
        s.avg_two_qubit /= k;
        s.avg_depth /= k;
        s.avg_total_gates /= k;
        s.avg_delta /= k;
    }
    return s;
}

struct RunResult {
    std::vector<EpisodeRecord> records;
    std::optional<BestCircuit> best;
    nlohmann::json summary;
};

/// Progress callback: (episodes finished, total episodes, records so far).
using ProgressFn = std::function<void(std::size_t, std::size_t, const std::vector<EpisodeRecord>&)>;

namespace detail {

inline std::ofstream open_output(const fs::path& path) {
    std::ofstream out(path, std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write " + path.string());
    return out;
}

inline void write_json(const fs::path& path, const nlohmann::json& j) {
    auto out = open_output(path);
    out << j.dump(2) << '\n';
    if (!out) throw std::runtime_error("failed writing " + path.string());
}

inline void prepare_out_dir(const fs::path& dir) {
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec || !fs::is_directory(dir)) throw std::runtime_error("cannot create output directory " + dir.string());
}

// Episode driver shared by the trained and random agents. `choose` picks an
// action from the flattened state; `learn` (may be empty) receives training
// transitions.
struct EpisodeDriver {
    Environment& env;
    std::vector<double> true_vals;
    std::ofstream& steps_csv;

    template <class Choose, class Learn>
    std::pair<EpisodeRecord, Circuit> run(std::size_t episode, Phase phase, double epsilon, Choose&& choose, Learn&& learn) {
        const auto start = std::chrono::steady_clock::now();
        RlStateTensor state = env.reset();
        std::vector<double> flat = flatten(state);
        for (;;) {
            const std::size_t action = choose(std::span<const double>(flat));
            StepOutcome out = env.step(action);
            const auto counts = gate_counts(out.circuit_snapshot);
            steps_csv << episode << ',' << to_string(phase) << ',' << env.steps_taken() << ',' << action << ','
                      << format_double(out.cost) << ',' << format_double(out.reward) << ',' << counts.one_qubit << ','
                      << counts.two_qubit << ',' << counts.depth << ',' << out.optimizer_evals << '\n';
            learn(Transition{state.bits(), action, out.reward, out.state.bits(), out.done});
            state = std::move(out.state);
            flat = flatten(state);
            if (out.done) break;
        }
        const Circuit& c = env.circuit();
        const auto counts = gate_counts(c);
        EpisodeRecord r;
        r.episode = episode;
        r.phase = phase;
        r.final_cost = env.current_cost();
        r.success = is_success(r.final_cost, env.config().zeta);
        r.delta = eigenvalue_error(true_vals, eigenvalue_readout(env.config().target_state, c).values());
        r.one_qubit = counts.one_qubit;
        r.two_qubit = counts.two_qubit;
        r.depth = counts.depth;
        r.steps = env.steps_taken();
        r.epsilon = epsilon;
        r.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        return {r, c};
    }
};

enum class AgentKind { Ddqn, Random };

inline RunResult run_episodes(const ExperimentConfig& cfg, AgentKind kind, const ProgressFn& progress) {
    cfg.validate();
    prepare_out_dir(cfg.out_dir);
    const auto problem = resolve_problem(cfg.problem, cfg.seed);
    Environment env(cfg.env_config(problem.state));

    auto episodes_csv = open_output(cfg.out_dir / "episodes.csv");
    auto steps_csv = open_output(cfg.out_dir / "steps.csv");
    episodes_csv << kEpisodeCsvHeader << '\n' << episode_csv_columns() << '\n';
    steps_csv << kStepCsvHeader << '\n' << "episode,phase,step,action,cost,reward,one_qubit,two_qubit,depth,optimizer_evals\n";

    AgentConfig acfg = cfg.agent;
    acfg.seed = derived_rng(cfg.seed, stream::kAgent)();
    std::optional<DdqnAgent> agent;
    if (kind == AgentKind::Ddqn) agent.emplace(env.observation_size(), env.n_actions(), acfg);
    Rng random_rng = derived_rng(cfg.seed, stream::kRandomAgent);
    const std::size_t n = env.n_qubits();

    RunResult result;
    EpisodeDriver driver{env, true_eigenvalues(problem.state), steps_csv};
    auto no_learning = [](Transition&&) {};
    auto random_choice = [&](std::span<const double>) { return random_action(n, random_rng); };
    const auto start = std::chrono::steady_clock::now();

    for (std::size_t ep = 0; ep < cfg.episodes; ++ep) {
        for (Phase phase : {Phase::Train, Phase::Test}) {
            std::pair<EpisodeRecord, Circuit> done{EpisodeRecord{}, Circuit(n)};
            if (kind == AgentKind::Random) {
                done = driver.run(ep, phase, 1.0, random_choice, no_learning);
            } else if (phase == Phase::Train) {
                done = driver.run(
                    ep, phase, agent->epsilon(), [&](std::span<const double> s) { return agent->act(s, true); },
                    [&](Transition&& t) { agent->observe(std::move(t)); });
            } else {
                done = driver.run(ep, phase, 0.0, [&](std::span<const double> s) { return agent->act(s, false); }, no_learning);
            }
            auto& [record, circuit] = done;
            episodes_csv << to_csv_row(record) << '\n';
            if (record.success && (!result.best || better_circuit(record, result.best->record)))
                result.best = BestCircuit{circuit, record};
            result.records.push_back(record);
        }
        if (progress && cfg.progress_every > 0 && ((ep + 1) % cfg.progress_every == 0 || ep + 1 == cfg.episodes))
            progress(ep + 1, cfg.episodes, result.records);
    }
    episodes_csv.flush();
    steps_csv.flush();
    if (!episodes_csv || !steps_csv) throw std::runtime_error("failed writing episode logs in " + cfg.out_dir.string());

    result.summary = {{"agent", kind == AgentKind::Ddqn ? "ddqn" : "random"},
                      {"config", cfg.to_json()},
                      {"problem_info", problem.info},
                      {"true_eigenvalues", true_eigenvalues(problem.state)},
                      {"all", success_stats(result.records).to_json()},
                      {"train", success_stats(result.records, Phase::Train).to_json()},
                      {"test", success_stats(result.records, Phase::Test).to_json()},
                      {"wall_seconds", std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count()}};
    if (result.best) {
        const auto& r = result.best->record;
        result.summary["best"] = {{"episode", r.episode},    {"phase", to_string(r.phase)},   {"total_gates", r.total_gates()},
                                  {"one_qubit", r.one_qubit}, {"two_qubit", r.two_qubit},     {"depth", r.depth},
                                  {"delta", r.delta},         {"final_cost", r.final_cost}};
        nlohmann::json bc = to_json(result.best->circuit);
        bc["episode"] = r.episode;
        bc["phase"] = to_string(r.phase);
        bc["final_cost"] = r.final_cost;
        bc["delta"] = r.delta;
        write_json(cfg.out_dir / "best_circuit.json", bc);
    }
    write_json(cfg.out_dir / "summary.json", result.summary);
    if (agent && cfg.episodes > 0) write_json(cfg.out_dir / "checkpoint.json", save_checkpoint(*agent));
    return result;
}

}  // namespace detail

/// DDQN training; every training episode is followed by a greedy test
/// episode that neither stores transitions nor learns. Writes episodes.csv,
/// steps.csv, summary.json, best_circuit.json (if any success) and
/// checkpoint.json (if any episode ran) into cfg.out_dir.
inline RunResult run_training(const ExperimentConfig& cfg, const ProgressFn& progress = {}) {
    return detail::run_episodes(cfg, detail::AgentKind::Ddqn, progress);
}

/// Same loop and outputs with uniformly random actions and no learning.
inline RunResult run_random_agent(const ExperimentConfig& cfg, const ProgressFn& progress = {}) {
    return detail::run_episodes(cfg, detail::AgentKind::Random, progress);
}

// ---------------------------------------------------------------------------
// LHEA baseline

struct LheaRow {
    std::size_t layers = 0;
    std::size_t trials = 0;
    double avg_error = 0.0;
    double min_error = 0.0;
    double avg_cost = 0.0;
    GateCounts counts;
};

struct LheaOptions {
    std::size_t max_layers = 6;
    LheaVariant variant = LheaVariant::ThreeParam;
    std::size_t trials = 50;
    std::size_t restarts = 0;
    /// Fresh random state per trial for Ginibre problems; otherwise the fixed problem state.
    bool fresh_states = true;
};

inline const char* lhea_csv_columns() {
    return "layers,variant,trials,avg_error,min_error,avg_cost,one_qubit,two_qubit,depth,total_gates";
}

/// Optimizes LHEA circuits of 1..max_layers layers from zero angles and
/// writes lhea.csv (one row per layer count) and lhea_trials.csv.
inline std::vector<LheaRow> run_lhea_baseline(const ExperimentConfig& cfg, const LheaOptions& opt) {
    if (opt.max_layers < 1 || opt.trials < 1) throw ConfigError("lhea baseline needs at least one layer and one trial");
    const std::size_t n = cfg.n_qubits();
    if (n < 2) throw ConfigError("LHEA needs at least 2 qubits");
    try {
        cfg.budget().validate();
    } catch (const std::invalid_argument& e) {
        throw ConfigError(e.what());
    }
    detail::prepare_out_dir(cfg.out_dir);

    const auto fixed = resolve_problem(cfg.problem, cfg.seed);
    const bool fresh = opt.fresh_states && cfg.problem.kind == ProblemKind::Ginibre;
    auto trials_csv = detail::open_output(cfg.out_dir / "lhea_trials.csv");
    trials_csv << kLheaCsvHeader << '\n' << "layers,trial,initial_cost,final_cost,delta,evals\n";
    const char* variant = opt.variant == LheaVariant::ThreeParam ? "three-param" : "one-param";

    std::vector<LheaRow> rows;
    for (std::size_t l = 1; l <= opt.max_layers; ++l) {
        // Every layer count sees the same state sequence.
        Rng state_rng = derived_rng(cfg.seed, stream::kBaseline);
        Rng restart_rng = derived_rng(cfg.seed + l, stream::kRestarts);
        const Circuit c = build_lhea(n, l, opt.variant);
        LheaRow row{l, opt.trials, 0.0, std::numeric_limits<double>::infinity(), 0.0, gate_counts(c)};
        for (std::size_t t = 0; t < opt.trials; ++t) {
            const DensityMatrix rho = fresh ? ginibre_density_matrix(n, state_rng) : fixed.state;
            CostFunction f(rho, c);
            const double initial = f(c.params());
            const auto best = minimize_with_restarts(f, c.params(), cfg.budget(), opt.restarts, restart_rng);
            const double delta = eigenvalue_error(true_eigenvalues(rho), eigenvalue_readout(rho, c.with_params(best.theta)).values());
            trials_csv << l << ',' << t << ',' << format_double(initial) << ',' << format_double(best.f) << ',' << format_double(delta)
                       << ',' << best.evals << '\n';
            row.avg_error += delta;
            row.avg_cost += best.f;
            row.min_error = std::min(row.min_error, delta);
        }
        row.avg_error /= static_cast<double>(opt.trials);
        row.avg_cost /= static_cast<double>(opt.trials);
        rows.push_back(row);
    }

    auto csv = detail::open_output(cfg.out_dir / "lhea.csv");
    csv << kLheaCsvHeader << '\n' << lhea_csv_columns() << '\n';
    for (const auto& r : rows)
        csv << r.layers << ',' << variant << ',' << r.trials << ',' << format_double(r.avg_error) << ',' << format_double(r.min_error)
            << ',' << format_double(r.avg_cost) << ',' << r.counts.one_qubit << ',' << r.counts.two_qubit << ',' << r.counts.depth
            << ',' << r.counts.total() << '\n';
    if (!csv || !trials_csv) throw std::runtime_error("failed writing LHEA tables in " + cfg.out_dir.string());
    return rows;
}

// ---------------------------------------------------------------------------
// Threshold sweep

struct SweepRow {
    double zeta = 0.0;
    SuccessStats stats;
    bool monotonic = true;
};

/// One training run per zeta (descending) in out/zeta_<k>; writes
/// threshold_sweep.csv with averages over successful episodes of both phases
/// and a flag telling whether average total gates is non-decreasing so far.
inline std::vector<SweepRow> run_threshold_sweep(const ExperimentConfig& cfg, const std::vector<double>& zetas,
                                                 const ProgressFn& progress = {}) {
    if (zetas.empty()) throw ConfigError("threshold sweep needs at least one zeta");
    for (std::size_t i = 0; i < zetas.size(); ++i) {
        if (!(zetas[i] > 0.0)) throw ConfigError("zeta values must be positive");
        if (i > 0 && !(zetas[i] < zetas[i - 1])) throw ConfigError("zeta values must be strictly descending");
    }
    cfg.validate();
    detail::prepare_out_dir(cfg.out_dir);
    std::vector<SweepRow> rows;
    double prev_total = -std::numeric_limits<double>::infinity();
    bool monotonic = true;
    for (std::size_t k = 0; k < zetas.size(); ++k) {
        ExperimentConfig sub = cfg;
        sub.zeta = zetas[k];
        sub.out_dir = cfg.out_dir / ("zeta_" + std::to_string(k));
        const auto run = run_training(sub, progress);
        SweepRow row{zetas[k], success_stats(run.records), true};
        if (row.stats.successes > 0) {
            monotonic = monotonic && row.stats.avg_total_gates >= prev_total;
            prev_total = row.stats.avg_total_gates;
        }
        row.monotonic = monotonic;
        rows.push_back(row);
    }
    auto csv = detail::open_output(cfg.out_dir / "threshold_sweep.csv");
    csv << kSweepCsvHeader << '\n'
        << "zeta,episodes,successes,avg_one_qubit,avg_two_qubit,avg_depth,avg_total_gates,monotonic\n";
    for (const auto& r : rows) {
        csv << format_double(r.zeta) << ',' << r.stats.episodes << ',' << r.stats.successes << ',';
        if (r.stats.successes > 0)
            csv << format_double(r.stats.avg_one_qubit) << ',' << format_double(r.stats.avg_two_qubit) << ','
                << format_double(r.stats.avg_depth) << ',' << format_double(r.stats.avg_total_gates);
        else
            csv << ",,,";
        csv << ',' << (r.monotonic ? 1 : 0) << '\n';
    }
    if (!csv) throw std::runtime_error("failed writing threshold_sweep.csv");
    return rows;
}

// ---------------------------------------------------------------------------
// Fixed-circuit diagonalization

struct DiagonalizeOptions {
    std::size_t restarts = 0;
    OptimizerBudget budget{};
    std::uint64_t seed = 1;
};

struct DiagonalizeOutcome {
    DiagonalizationResult result;
    double delta = 0.0;
    std::size_t evals = 0;
};

/// Re-optimizes the circuit's angles on `rho` starting from zero.
inline DiagonalizeOutcome diagonalize(const DensityMatrix& rho, const Circuit& structure, const DiagonalizeOptions& opt) {
    if (rho.n_qubits() != structure.n_qubits())
        throw ConfigError("state has " + std::to_string(rho.n_qubits()) + " qubits but the circuit has " +
                          std::to_string(structure.n_qubits()));
    const Circuit zero = structure.with_params(std::vector<double>(structure.params().size(), 0.0));
    CostFunction f(rho, zero);
    Rng rng = derived_rng(opt.seed, stream::kRestarts);
    const auto best = minimize_with_restarts(f, zero.params(), opt.budget, opt.restarts, rng);
    auto result = eigenvalue_readout(rho, zero.with_params(best.theta));
    const double delta = eigenvalue_error(true_eigenvalues(rho), result.values());
    return {std::move(result), delta, best.evals};
}

inline nlohmann::json to_json(const DiagonalizeOutcome& o, const DensityMatrix& rho) {
    nlohmann::json j = to_json(o.result);
    j["delta"] = o.delta;
    j["optimizer_evals"] = o.evals;
    j["true_eigenvalues"] = true_eigenvalues(rho);
    return j;
}

struct TransferSummary {
    std::size_t states = 0;
    std::size_t in_band = 0;  // 1e-4 <= delta <= 1e-3
    double median_delta = 0.0;
};

/// Diagonalizes `count` fresh Ginibre states with one circuit structure and
/// writes transfer.csv.
inline TransferSummary run_transfer(const Circuit& structure, std::size_t count, const DiagonalizeOptions& opt, const fs::path& out_dir) {
    if (count == 0) throw ConfigError("transfer needs at least one state");
    detail::prepare_out_dir(out_dir);
    auto csv = detail::open_output(out_dir / "transfer.csv");
    csv << kTransferCsvHeader << '\n' << "state,final_cost,delta\n";
    Rng rng = derived_rng(opt.seed, stream::kTransfer);
    std::vector<double> deltas;
    TransferSummary s;
    for (std::size_t k = 0; k < count; ++k) {
        const auto rho = ginibre_density_matrix(structure.n_qubits(), rng);
        DiagonalizeOptions o = opt;
        o.seed = opt.seed + k;
        const auto d = diagonalize(rho, structure, o);
        csv << k << ',' << format_double(d.result.final_cost) << ',' << format_double(d.delta) << '\n';
        deltas.push_back(d.delta);
        s.in_band += d.delta >= 1e-4 && d.delta <= 1e-3;
    }
    if (!csv) throw std::runtime_error("failed writing transfer.csv");
    std::sort(deltas.begin(), deltas.end());
    s.states = count;
    s.median_delta = deltas[deltas.size() / 2];
    return s;
}

}  // namespace rlvqsd
