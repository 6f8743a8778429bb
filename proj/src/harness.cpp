#include "avgq/harness.hpp"

#include "avgq/errors.hpp"
#include "avgq/parallel.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <ostream>
#include <random>
#include <sstream>

namespace avgq {

namespace fs = std::filesystem;

namespace {

nlohmann::json schedule_to_json(const ScheduleConfig& s) {
    nlohmann::json j;
    j["kind"] = std::string(to_string(s.kind));
    j["c_N"] = s.c_N;
    j["M"] = s.M;
    j["delta"] = s.delta;
    j["S"] = s.S;
    j["A"] = s.A;
    j["force_nk"] = s.force_nk ? nlohmann::json(*s.force_nk) : nlohmann::json(nullptr);
    j["eta_perturbation"] = s.eta_perturbation;
    return j;
}

ScheduleConfig schedule_from_json(const nlohmann::json& j) {
    ScheduleConfig s;
    s.kind = parse_schedule_kind(j.at("kind").get<std::string>());
    s.c_N = j.at("c_N").get<double>();
    s.M = j.at("M").get<int>();
    s.delta = j.at("delta").get<double>();
    s.S = j.at("S").get<int>();
    s.A = j.at("A").get<int>();
    if (!j.at("force_nk").is_null()) {
        s.force_nk = j.at("force_nk").get<long>();
    }
    s.eta_perturbation = j.value("eta_perturbation", 0.0);
    return s;
}

void write_text_atomically(const fs::path& path, const std::string& text) {
    const fs::path tmp = path.string() + ".tmp";
    {
        std::ofstream out(tmp, std::ios::trunc);
        if (!out) {
            throw ValidationError("cannot write " + tmp.string());
        }
        out << text;
    }
    fs::rename(tmp, path);
}

nlohmann::json schedule_echo(const ScheduleConfig& cfg, int K) {
    auto epochs = nlohmann::json::array();
    const SchedulePlan plan = plan_schedule(cfg, K);
    for (const auto& e : plan.epochs) {
        nlohmann::json j;
        j["k"] = e.k;
        j["N_k"] = e.N;
        j["gamma_k"] = e.gamma;
        j["g_k"] = e.g ? nlohmann::json(*e.g) : nlohmann::json(nullptr);
        j["comm_rounds"] = e.comm_set.size();
        epochs.push_back(std::move(j));
    }
    return epochs;
}

} // namespace

void validate(const ExperimentConfig& cfg) {
    if (cfg.K < 0) {
        throw ValidationError("K must be >= 0");
    }
    if (cfg.seeds_n < 1) {
        throw ValidationError("seeds must be >= 1");
    }
    if (cfg.epsilon && !(*cfg.epsilon > 0.0 && *cfg.epsilon <= 1.0)) {
        throw ValidationError("epsilon must lie in (0,1]");
    }
    if (cfg.require_target && !cfg.epsilon) {
        throw ValidationError("--require-target needs --epsilon");
    }
    if (cfg.agents < 0 || cfg.threads < 1) {
        throw ValidationError("agents and threads must be positive");
    }
    if (!cfg.generator && cfg.mdp_file.empty()) {
        throw ValidationError("either an MDP file or a generator is required");
    }
}

nlohmann::json to_json(const ExperimentConfig& cfg) {
    nlohmann::json j;
    j["mdp_file"] = cfg.mdp_file;
    j["generator"] = cfg.generator ? nlohmann::json(to_string(*cfg.generator)) : nlohmann::json(nullptr);
    j["schedule"] = schedule_to_json(cfg.schedule);
    j["cn_overridden"] = cfg.cn_overridden;
    j["K"] = cfg.K;
    j["seed"] = cfg.seed;
    j["seeds_n"] = cfg.seeds_n;
    j["epsilon"] = cfg.epsilon ? nlohmann::json(*cfg.epsilon) : nlohmann::json(nullptr);
    j["require_target"] = cfg.require_target;
    j["shared_stream"] = cfg.shared_stream;
    j["agents"] = cfg.agents;
    j["threads"] = cfg.threads;
    j["output_path"] = cfg.output_path;
    return j;
}

ExperimentConfig experiment_from_json(const nlohmann::json& j) {
    try {
        ExperimentConfig cfg;
        cfg.mdp_file = j.at("mdp_file").get<std::string>();
        if (!j.at("generator").is_null()) {
            cfg.generator = parse_generator(j.at("generator").get<std::string>());
        }
        cfg.schedule = schedule_from_json(j.at("schedule"));
        cfg.cn_overridden = j.at("cn_overridden").get<bool>();
        cfg.K = j.at("K").get<int>();
        cfg.seed = j.at("seed").get<std::uint64_t>();
        cfg.seeds_n = j.at("seeds_n").get<int>();
        if (!j.at("epsilon").is_null()) {
            cfg.epsilon = j.at("epsilon").get<double>();
        }
        cfg.require_target = j.at("require_target").get<bool>();
        cfg.shared_stream = j.at("shared_stream").get<bool>();
        cfg.agents = j.at("agents").get<int>();
        cfg.threads = j.at("threads").get<int>();
        cfg.output_path = j.at("output_path").get<std::string>();
        return cfg;
    } catch (const nlohmann::json::exception& e) {
        throw ValidationError(std::string("malformed experiment config: ") + e.what());
    }
}

Amdp resolve_mdp(ExperimentConfig& cfg) {
    Amdp mdp = cfg.generator ? generate_mdp(*cfg.generator) : load_mdp(cfg.mdp_file);
    cfg.schedule.S = mdp.S;
    cfg.schedule.A = mdp.A;
    return mdp;
}

bool ExperimentResult::target_met() const {
    return std::all_of(seeds.begin(), seeds.end(),
                       [](const SeedOutcome& o) { return o.target_samples.has_value(); });
}

double quantile(std::vector<double> xs, double p) {
    if (xs.empty()) {
        return std::nan("");
    }
    std::sort(xs.begin(), xs.end());
    const double pos = p * static_cast<double>(xs.size() - 1);
    const auto lo = static_cast<std::size_t>(std::floor(pos));
    const auto hi = std::min(lo + 1, xs.size() - 1);
    const double frac = pos - static_cast<double>(lo);
    return xs[lo] + frac * (xs[hi] - xs[lo]);
}

ExperimentResult run_experiment(ExperimentConfig cfg) {
    validate(cfg);
    const auto start = std::chrono::steady_clock::now();
    const Amdp mdp = resolve_mdp(cfg);
    const bool federated = is_federated(cfg.schedule.kind);
    validate_schedule(cfg.schedule, cfg.K);

    ExperimentResult result;
    result.oracle = solve_average(mdp);
    result.seeds.resize(static_cast<std::size_t>(cfg.seeds_n));

    const int inner_threads = cfg.seeds_n == 1 ? cfg.threads : 1;
    parallel_for(result.seeds.size(), cfg.threads, [&](std::size_t i) {
        SeedOutcome& outcome = result.seeds[i];
        outcome.seed = cfg.seed + i;
        RunOptions options;
        options.oracle_gain = result.oracle.gain;
        options.threads = inner_threads;
        options.shared_stream = cfg.shared_stream;
        options.agents = cfg.agents;
        if (federated) {
            FedRunResult run = run_fed(mdp, cfg.schedule, cfg.K, outcome.seed, options);
            const VTable gains = evaluate_policy_average(mdp, run.policy);
            const auto values = gains.values();
            outcome.policy_gap = result.oracle.gain - *std::min_element(values.begin(), values.end());
            outcome.comm_rounds = run.comm_count;
            outcome.record = std::move(run.record);
        } else {
            outcome.record = run_single(mdp, cfg.schedule, cfg.K, outcome.seed, options).record;
        }
        outcome.final_err = outcome.record.rows.back().err_inf;
        if (cfg.epsilon) {
            for (const auto& row : outcome.record.rows) {
                if (row.err_inf <= *cfg.epsilon) {
                    outcome.target_samples = row.samples;
                    break;
                }
            }
        }
        outcome.csv_file = "run_seed" + std::to_string(outcome.seed) + ".csv";
    });
    result.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();

    if (!cfg.output_path.empty()) {
        const fs::path dir(cfg.output_path);
        fs::create_directories(dir);
        nlohmann::json meta;
        meta["config"] = to_json(cfg);
        meta["theory_constants"] =
            cfg.theory_constants_enforced() ? "enforced" : "theory constants not enforced";
        meta["oracle"] = {{"gain", result.oracle.gain},
                          {"span", result.oracle.span},
                          {"residual", result.oracle.residual},
                          {"iterations", result.oracle.iterations}};
        meta["schedule_epochs"] = schedule_echo(cfg.schedule, cfg.K);
        meta["wall_seconds"] = result.wall_seconds;
        auto seeds = nlohmann::json::array();
        for (const auto& outcome : result.seeds) {
            std::ofstream csv(dir / outcome.csv_file, std::ios::trunc);
            write_csv(csv, outcome.record);
            nlohmann::json s;
            s["seed"] = outcome.seed;
            s["csv"] = outcome.csv_file;
            s["final_err_inf"] = outcome.final_err;
            s["target_samples"] =
                outcome.target_samples ? nlohmann::json(*outcome.target_samples) : nlohmann::json(nullptr);
            s["comm_rounds"] = outcome.comm_rounds;
            s["policy_gap"] = outcome.policy_gap ? nlohmann::json(*outcome.policy_gap) : nlohmann::json(nullptr);
            seeds.push_back(std::move(s));
        }
        meta["seeds"] = std::move(seeds);
        write_text_atomically(dir / "meta.json", meta.dump(2) + "\n");
    }
    return result;
}

void write_sweep_csv(std::ostream& out, const std::vector<SweepPoint>& points) {
    out << "M,median_err,iqr_err,comm_rounds\n";
    for (const auto& p : points) {
        char buf[128];
        std::snprintf(buf, sizeof buf, "%d,%.17g,%.17g,%ld\n", p.M, p.median_err, p.iqr_err, p.comm_rounds);
        out << buf;
    }
}

std::vector<SweepPoint> sweep_speedup(const ExperimentConfig& base, const std::vector<int>& m_list,
                                      const SweepOptions& options) {
    if (!is_federated(base.schedule.kind)) {
        throw ValidationError("sweep needs a federated schedule");
    }
    std::optional<long> budget;
    for (int M : m_list) {
        if (M < 1) {
            throw ValidationError("agent counts must be >= 1");
        }
        ScheduleConfig schedule = base.schedule;
        schedule.M = options.schedule_m.value_or(M);
        const SchedulePlan plan = plan_schedule(schedule, base.K);
        const long total = plan.prefix.empty() ? 0 : plan.prefix.back();
        if (budget && *budget != total) {
            throw ValidationError("per-agent iteration budget differs across M; pin N_k with --force-nk");
        }
        budget = total;
    }
    std::vector<SweepPoint> points;
    for (int M : m_list) {
        ExperimentConfig cfg = base;
        cfg.output_path.clear();
        cfg.agents = M;
        cfg.schedule.M = options.schedule_m.value_or(M);
        const ExperimentResult result = run_experiment(cfg);
        SweepPoint point;
        point.M = M;
        for (const auto& outcome : result.seeds) {
            point.errors.push_back(outcome.final_err);
        }
        point.median_err = median(point.errors);
        point.iqr_err = quantile(point.errors, 0.75) - quantile(point.errors, 0.25);
        point.comm_rounds = result.seeds.front().comm_rounds;
        point.samples_per_agent = result.seeds.front().record.rows.back().samples;
        points.push_back(std::move(point));
    }
    if (!base.output_path.empty()) {
        const fs::path dir(base.output_path);
        fs::create_directories(dir);
        std::ostringstream text;
        write_sweep_csv(text, points);
        write_text_atomically(dir / "summary.csv", text.str());
        nlohmann::json meta;
        meta["config"] = to_json(base);
        meta["m_list"] = m_list;
        meta["schedule_m"] = options.schedule_m ? nlohmann::json(*options.schedule_m) : nlohmann::json(nullptr);
        meta["theory_constants"] =
            base.theory_constants_enforced() ? "enforced" : "theory constants not enforced";
        write_text_atomically(dir / "sweep_meta.json", meta.dump(2) + "\n");
    }
    return points;
}

std::vector<Amdp> random_battery(int count, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::uniform_int_distribution<int> states(2, 8);
    std::uniform_int_distribution<int> actions(1, 4);
    std::vector<Amdp> out;
    out.reserve(static_cast<std::size_t>(count));
    for (int i = 0; i < count; ++i) {
        GeneratorSpec spec;
        spec.kind = GeneratorSpec::Kind::RandomDirichlet;
        spec.S = states(rng);
        spec.A = actions(rng);
        spec.concentration = 1.0;
        spec.seed = rng();
        out.push_back(generate_mdp(spec));
    }
    return out;
}

} // namespace avgq
