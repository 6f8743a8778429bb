#pragma once

#include "avgq/generators.hpp"
#include "avgq/mdp.hpp"
#include "avgq/oracle.hpp"
#include "avgq/qlearn.hpp"
#include "avgq/run_record.hpp"
#include "avgq/schedules.hpp"

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

namespace avgq {

struct ExperimentConfig {
    std::string mdp_file;                    // used when no generator is given
    std::optional<GeneratorSpec> generator;
    ScheduleConfig schedule;
    bool cn_overridden = false;              // --cn given on the command line
    int K = 1;
    std::uint64_t seed = 0;
    int seeds_n = 1;
    std::optional<double> epsilon;
    bool require_target = false;
    bool shared_stream = false;
    int agents = 0;                          // 0: schedule.M
    int threads = 1;
    std::string output_path;                 // empty: nothing is written

    bool theory_constants_enforced() const { return !cn_overridden && !schedule.overrides_theory(); }
};

/// Throws ValidationError on out-of-range fields (epsilon outside (0,1], seeds_n < 1, ...).
void validate(const ExperimentConfig& cfg);

nlohmann::json to_json(const ExperimentConfig& cfg);
ExperimentConfig experiment_from_json(const nlohmann::json& doc);

/// Loads the model a config refers to and fills schedule.S / schedule.A from it.
Amdp resolve_mdp(ExperimentConfig& cfg);

struct SeedOutcome {
    std::uint64_t seed = 0;
    RunRecord record;
    double final_err = 0.0;
    std::optional<long> target_samples;  // first cumulative sample count with err <= epsilon
    long comm_rounds = 0;
    std::optional<double> policy_gap;    // J* - min_s J^pi_hat(s), federated runs only
    std::string csv_file;
};

struct ExperimentResult {
    GainBias oracle;
    std::vector<SeedOutcome> seeds;
    double wall_seconds = 0.0;

    bool target_met() const;
};

/// Solves the oracle once, runs the learner for every seed, writes run_seed<seed>.csv per seed
/// and meta.json under output_path (when set).
ExperimentResult run_experiment(ExperimentConfig cfg);

struct SweepPoint {
    int M = 1;
    double median_err = 0.0;
    double iqr_err = 0.0;
    long comm_rounds = 0;
    std::vector<double> errors;
    long samples_per_agent = 0;
};

struct SweepOptions {
    /// Evaluate the schedule formulas at this agent count for every point instead of at M.
    std::optional<int> schedule_m;
};

/// For each M runs the federated learner with M agents at the base config's per-agent
/// budget and summarizes the final errors; writes summary.csv (atomically) under output_path.
std::vector<SweepPoint> sweep_speedup(const ExperimentConfig& base, const std::vector<int>& m_list,
                                      const SweepOptions& options = {});

void write_sweep_csv(std::ostream& out, const std::vector<SweepPoint>& points);

/// Linear-interpolation quantile of an unsorted sample.
double quantile(std::vector<double> xs, double p);
inline double median(std::vector<double> xs) { return quantile(std::move(xs), 0.5); }

struct VerifyOptions {
    double eta_perturbation = 0.0;
    int battery_size = 50;
};

struct PropertyResult {
    std::string name;
    bool passed = false;
    std::string detail;
};

/// Re-runs the library's invariant checks and prints one line per property.
std::vector<PropertyResult> verify_suite(std::ostream& out, const VerifyOptions& options = {});

/// Deterministic battery of random Dirichlet models with S in [2,8], A in [1,4].
std::vector<Amdp> random_battery(int count, std::uint64_t seed = 2024);

} // namespace avgq
