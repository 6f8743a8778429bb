// avgq: command-line front end for the average-reward Q-learning library.

#include "avgq/errors.hpp"
#include "avgq/harness.hpp"
#include "avgq/parallel.hpp"

#include <CLI11.hpp>

#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>

namespace {

enum ExitCode { kOk = 0, kConfigError = 2, kNonConvergence = 3, kTargetMissed = 4 };

struct RunFlags {
    std::string mdp_file;
    std::string generator;
    std::string schedule;
    int K = 10;
    int M = 1;
    std::optional<double> cn;
    std::optional<long> force_nk;
    double delta = 0.1;
    std::optional<double> epsilon;
    bool require_target = false;
    std::uint64_t seed = 0;
    int seeds = 1;
    bool shared_stream = false;
    std::string out;
};

void add_run_flags(CLI::App* cmd, RunFlags& f, bool schedule_flag) {
    auto* mdp = cmd->add_option("--mdp", f.mdp_file, "MDP file (JSON)");
    auto* gen = cmd->add_option("--gen", f.generator, "generator: cycle2 | ring:S,slip | dirichlet:S,A,conc[,seed]");
    mdp->excludes(gen);
    if (schedule_flag) {
        cmd->add_option("--schedule", f.schedule, "sg1 | sg2 | fg1 | fg2 | policy");
    }
    cmd->add_option("--K", f.K, "number of epochs")->check(CLI::NonNegativeNumber);
    cmd->add_option("--M", f.M, "number of agents")->check(CLI::PositiveNumber);
    cmd->add_option("--cn", f.cn, "epoch-length constant c_N (desk-scale override)");
    cmd->add_option("--force-nk", f.force_nk, "fix every epoch length (desk-scale override)");
    cmd->add_option("--delta", f.delta, "confidence parameter used by Group-2 epoch lengths");
    cmd->add_option("--epsilon", f.epsilon, "target accuracy for ||Q - J*||_inf");
    cmd->add_flag("--require-target", f.require_target, "exit 4 unless every seed reaches --epsilon");
    cmd->add_option("--seed", f.seed, "base seed");
    cmd->add_option("--seeds", f.seeds, "number of seeds")->check(CLI::PositiveNumber);
    cmd->add_flag("--shared-stream", f.shared_stream, "all agents replay agent 0's samples");
    cmd->add_option("--out", f.out, "output directory");
}

avgq::ExperimentConfig to_config(const RunFlags& f, avgq::ScheduleKind kind) {
    avgq::ExperimentConfig cfg;
    cfg.mdp_file = f.mdp_file;
    if (!f.generator.empty()) {
        cfg.generator = avgq::parse_generator(f.generator);
    }
    cfg.schedule.kind = kind;
    const bool group2 = kind == avgq::ScheduleKind::SingleGroup2 || kind == avgq::ScheduleKind::FedGroup2;
    // Group 1 needs c_N near 5000 before gamma_1 turns positive at M = 1
    const double default_cn = group2 ? 1.0 : kind == avgq::ScheduleKind::PolicyLearning ? 100.0 : 5000.0;
    cfg.schedule.c_N = f.cn.value_or(default_cn);
    cfg.cn_overridden = f.cn.has_value();
    cfg.schedule.M = avgq::is_federated(kind) ? f.M : 1;
    cfg.schedule.delta = f.delta;
    cfg.schedule.force_nk = f.force_nk;
    cfg.K = f.K;
    cfg.seed = f.seed;
    cfg.seeds_n = f.seeds;
    cfg.epsilon = f.epsilon;
    cfg.require_target = f.require_target;
    cfg.shared_stream = f.shared_stream;
    cfg.threads = avgq::threads_from_env();
    cfg.output_path = f.out;
    return cfg;
}

int report(const avgq::ExperimentConfig& cfg, const avgq::ExperimentResult& result) {
    std::printf("gain %.17g\nspan %.17g\n", result.oracle.gain, result.oracle.span);
    std::printf("theory_constants %s\n",
                cfg.theory_constants_enforced() ? "enforced" : "theory constants not enforced");
    for (const auto& s : result.seeds) {
        std::printf("seed %llu final_err_inf %.6g samples_per_agent %ld comm_rounds %ld",
                    static_cast<unsigned long long>(s.seed), s.final_err, s.record.rows.back().samples,
                    s.comm_rounds);
        if (s.target_samples) {
            std::printf(" target_samples %ld", *s.target_samples);
        }
        if (s.policy_gap) {
            std::printf(" policy_gap %.6g", *s.policy_gap);
        }
        std::printf("\n");
    }
    std::vector<double> errors;
    for (const auto& s : result.seeds) {
        errors.push_back(s.final_err);
    }
    std::printf("median_final_err_inf %.6g\nwall_seconds %.3f\n", avgq::median(errors), result.wall_seconds);
    if (cfg.require_target && !result.target_met()) {
        std::fprintf(stderr, "target epsilon not reached by every seed\n");
        return kTargetMissed;
    }
    return kOk;
}

std::vector<int> parse_int_list(const std::string& text) {
    std::vector<int> out;
    std::stringstream in(text);
    std::string item;
    while (std::getline(in, item, ',')) {
        out.push_back(std::stoi(item));
    }
    return out;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Average-reward tabular Q-learning: oracles, single-agent and federated learners"};
    app.require_subcommand(1);

    std::string solve_path;
    std::string solve_gen;
    std::optional<double> solve_gamma;
    double solve_tol = avgq::kOracleTolerance;
    auto* solve = app.add_subcommand("solve", "exact gain/bias (or discounted optimum with --gamma)");
    solve->add_option("mdp", solve_path, "MDP file (JSON)");
    solve->add_option("--gen", solve_gen, "use a generated model instead of a file");
    solve->add_option("--gamma", solve_gamma, "solve the normalized discounted problem");
    solve->add_option("--tol", solve_tol, "stopping tolerance");

    RunFlags single_flags;
    single_flags.schedule = "sg2";
    auto* run_single = app.add_subcommand("run-single", "single-agent average-reward Q-learning");
    add_run_flags(run_single, single_flags, true);

    RunFlags fed_flags;
    fed_flags.schedule = "fg2";
    auto* run_fed = app.add_subcommand("run-fed", "federated average-reward Q-learning");
    add_run_flags(run_fed, fed_flags, true);

    RunFlags policy_flags;
    auto* run_policy = app.add_subcommand("run-policy", "federated policy learning schedule");
    add_run_flags(run_policy, policy_flags, false);

    RunFlags sweep_flags;
    sweep_flags.schedule = "fg1";
    std::string m_list = "1,2,4,8";
    std::optional<int> schedule_m;
    auto* sweep = app.add_subcommand("sweep", "median final error against the number of agents");
    add_run_flags(sweep, sweep_flags, true);
    sweep->add_option("--m-list", m_list, "comma-separated agent counts");
    sweep->add_option("--schedule-m", schedule_m, "evaluate schedule formulas at this M for every point");

    double perturb = 0.0;
    auto* verify = app.add_subcommand("verify", "re-check every library invariant");
    verify->add_option("--perturb-eta", perturb, "self-test hook: shift every step size");

    std::string replay_path;
    std::string replay_out;
    auto* replay = app.add_subcommand("replay", "re-run an experiment from its meta.json");
    replay->add_option("meta", replay_path, "meta.json written by a previous run")->required();
    replay->add_option("--out", replay_out, "output directory (default: the recorded one)");

    std::string gen_spec;
    std::string gen_out;
    auto* gen = app.add_subcommand("gen", "write a generated model as an MDP file");
    gen->add_option("spec", gen_spec, "generator spec")->required();
    gen->add_option("--out", gen_out, "destination file (stdout when omitted)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return kConfigError;
    }

    try {
        if (*solve) {
            avgq::Amdp mdp;
            if (!solve_gen.empty()) {
                mdp = avgq::generate_mdp(avgq::parse_generator(solve_gen));
            } else if (!solve_path.empty()) {
                mdp = avgq::load_mdp(solve_path);
            } else {
                throw avgq::ValidationError("solve needs an MDP file or --gen");
            }
            if (solve_gamma) {
                const auto d = avgq::solve_discounted(mdp, *solve_gamma, solve_tol);
                std::printf("gamma: %.17g\nresidual: %.3e\niterations: %ld\nv: [", d.gamma, d.residual, d.iterations);
                for (int s = 0; s < mdp.S; ++s) {
                    std::printf("%s%.17g", s ? ", " : "", d.v[s]);
                }
                std::printf("]\n");
            } else {
                const auto g = avgq::solve_average(mdp, solve_tol);
                std::printf("gain: %.17g\nspan: %.17g\nresidual: %.3e\niterations: %ld\nbias: [", g.gain, g.span,
                            g.residual, g.iterations);
                for (int s = 0; s < mdp.S; ++s) {
                    std::printf("%s%.17g", s ? ", " : "", g.bias[s]);
                }
                std::printf("]\n");
            }
            return kOk;
        }
        if (*run_single || *run_fed || *run_policy) {
            const RunFlags& f = *run_single ? single_flags : *run_fed ? fed_flags : policy_flags;
            const avgq::ScheduleKind kind =
                *run_policy ? avgq::ScheduleKind::PolicyLearning : avgq::parse_schedule_kind(f.schedule);
            if (*run_single && avgq::is_federated(kind)) {
                throw avgq::ValidationError("run-single takes sg1 or sg2");
            }
            if (*run_fed && !avgq::is_federated(kind)) {
                throw avgq::ValidationError("run-fed takes fg1, fg2 or policy");
            }
            const auto cfg = to_config(f, kind);
            return report(cfg, avgq::run_experiment(cfg));
        }
        if (*sweep) {
            auto cfg = to_config(sweep_flags, avgq::parse_schedule_kind(sweep_flags.schedule));
            avgq::SweepOptions options;
            options.schedule_m = schedule_m;
            const auto points = avgq::sweep_speedup(cfg, parse_int_list(m_list), options);
            avgq::write_sweep_csv(std::cout, points);
            return kOk;
        }
        if (*verify) {
            avgq::VerifyOptions options;
            options.eta_perturbation = perturb;
            const auto results = avgq::verify_suite(std::cout, options);
            for (const auto& r : results) {
                if (!r.passed) {
                    return 1;
                }
            }
            return kOk;
        }
        if (*replay) {
            std::ifstream in(replay_path);
            if (!in) {
                throw avgq::ValidationError("cannot open " + replay_path);
            }
            const auto meta = nlohmann::json::parse(in);
            auto cfg = avgq::experiment_from_json(meta.at("config"));
            if (!replay_out.empty()) {
                cfg.output_path = replay_out;
            }
            return report(cfg, avgq::run_experiment(cfg));
        }
        if (*gen) {
            const auto mdp = avgq::generate_mdp(avgq::parse_generator(gen_spec));
            if (gen_out.empty()) {
                std::cout << avgq::dump_mdp(mdp) << '\n';
            } else {
                avgq::save_mdp(mdp, gen_out);
            }
            return kOk;
        }
    } catch (const avgq::NonConvergence& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return kNonConvergence;
    } catch (const avgq::Error& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return kConfigError;
    } catch (const nlohmann::json::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return kConfigError;
    }
    return kOk;
}
