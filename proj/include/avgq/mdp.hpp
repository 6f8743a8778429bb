#pragma once

#include <cstddef>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

namespace avgq {

/// Tabular average-reward MDP with deterministic rewards.
///
/// Transitions are stored densely: P[(s * A + a) * S + s'] = P(s'|s,a).
/// Rewards: r[s * A + a].
struct Amdp {
    int S = 0;
    int A = 0;
    std::vector<double> P;
    std::vector<double> r;

    Amdp() = default;
    Amdp(int states, int actions);
    Amdp(int states, int actions, std::vector<double> transitions, std::vector<double> rewards);

    std::size_t pairs() const { return static_cast<std::size_t>(S) * static_cast<std::size_t>(A); }
    std::size_t pair(int s, int a) const { return static_cast<std::size_t>(s) * A + a; }

    double& prob(int s, int a, int next) { return P[pair(s, a) * S + next]; }
    double prob(int s, int a, int next) const { return P[pair(s, a) * S + next]; }
    double& reward(int s, int a) { return r[pair(s, a)]; }
    double reward(int s, int a) const { return r[pair(s, a)]; }

    std::span<const double> row(int s, int a) const {
        return {P.data() + pair(s, a) * S, static_cast<std::size_t>(S)};
    }
};

inline constexpr double kRowSumTolerance = 1e-12;

/// Throws RowSumError / RewardRangeError / ValidationError when the model is malformed.
void validate(const Amdp& mdp);

struct DeterministicPolicy {
    std::vector<int> action;
};

class VTable {
public:
    VTable() = default;
    explicit VTable(int states, double fill = 0.0) : v_(static_cast<std::size_t>(states), fill) {}
    explicit VTable(std::vector<double> values) : v_(std::move(values)) {}

    int size() const { return static_cast<int>(v_.size()); }
    double& operator[](int s) { return v_[static_cast<std::size_t>(s)]; }
    double operator[](int s) const { return v_[static_cast<std::size_t>(s)]; }
    std::span<const double> values() const { return v_; }
    std::span<double> values() { return v_; }

    bool operator==(const VTable&) const = default;

private:
    std::vector<double> v_;
};

class QTable {
public:
    QTable() = default;
    QTable(int states, int actions, double fill = 0.0)
        : S_(states), A_(actions), q_(static_cast<std::size_t>(states) * actions, fill) {}
    QTable(int states, int actions, std::vector<double> values);

    int states() const { return S_; }
    int actions() const { return A_; }

    double& operator()(int s, int a) { return q_[static_cast<std::size_t>(s) * A_ + a]; }
    double operator()(int s, int a) const { return q_[static_cast<std::size_t>(s) * A_ + a]; }
    std::span<const double> values() const { return q_; }
    std::span<double> values() { return q_; }
    std::span<const double> row(int s) const {
        return {q_.data() + static_cast<std::size_t>(s) * A_, static_cast<std::size_t>(A_)};
    }

    bool operator==(const QTable&) const = default;

private:
    int S_ = 0;
    int A_ = 0;
    std::vector<double> q_;
};

/// argmax_a q(s,a); ties go to the lowest action index.
DeterministicPolicy greedy_policy(const QTable& q);

/// v(s) = max_a q(s,a).
VTable value_of(const QTable& q);

/// max_s x(s) - min_s x(s).
double span_norm(std::span<const double> x);
inline double span_norm(const VTable& x) { return span_norm(x.values()); }

/// max_{s,a} |q(s,a) - scalar|.
double inf_norm_gap(const QTable& q, double scalar);

struct InducedChain {
    int S = 0;
    std::vector<double> P;  // row-major S x S
    std::vector<double> r;  // length S
};

/// Markov chain and reward vector obtained by fixing the action in every state.
InducedChain induced_chain(const Amdp& mdp, const DeterministicPolicy& pi);

/// Reads `{"S":..,"A":..,"P":[[[..]]],"r":[[..]]}` and validates it.
Amdp load_mdp(const std::filesystem::path& path);
Amdp parse_mdp(const std::string& text);
std::string dump_mdp(const Amdp& mdp);
void save_mdp(const Amdp& mdp, const std::filesystem::path& path);

} // namespace avgq
