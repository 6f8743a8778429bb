#include "avgq/mdp.hpp"

#include "avgq/errors.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

namespace avgq {

Amdp::Amdp(int states, int actions)
    : S(states), A(actions),
      P(static_cast<std::size_t>(states) * actions * states, 0.0),
      r(static_cast<std::size_t>(states) * actions, 0.0) {}

Amdp::Amdp(int states, int actions, std::vector<double> transitions, std::vector<double> rewards)
    : S(states), A(actions), P(std::move(transitions)), r(std::move(rewards)) {}

void validate(const Amdp& mdp) {
    if (mdp.S <= 0 || mdp.A <= 0) {
        throw ValidationError("S and A must be positive");
    }
    if (mdp.P.size() != mdp.pairs() * mdp.S || mdp.r.size() != mdp.pairs()) {
        throw ValidationError("transition or reward array has the wrong size");
    }
    for (int s = 0; s < mdp.S; ++s) {
        for (int a = 0; a < mdp.A; ++a) {
            double sum = 0.0;
            for (double p : mdp.row(s, a)) {
                if (!(p >= 0.0 && p <= 1.0)) {
                    throw ValidationError("transition probability outside [0,1] in row (" +
                                          std::to_string(s) + "," + std::to_string(a) + ")");
                }
                sum += p;
            }
            if (std::abs(sum - 1.0) > kRowSumTolerance) {
                throw RowSumError(s, a, sum);
            }
            const double rew = mdp.reward(s, a);
            if (!(rew >= 0.0 && rew <= 1.0)) {
                throw RewardRangeError(s, a, rew);
            }
        }
    }
}

QTable::QTable(int states, int actions, std::vector<double> values)
    : S_(states), A_(actions), q_(std::move(values)) {
    if (q_.size() != static_cast<std::size_t>(states) * actions) {
        throw ValidationError("Q-table value count does not match S*A");
    }
}

DeterministicPolicy greedy_policy(const QTable& q) {
    DeterministicPolicy pi;
    pi.action.resize(static_cast<std::size_t>(q.states()));
    for (int s = 0; s < q.states(); ++s) {
        const auto row = q.row(s);
        // max_element returns the first maximum
        pi.action[static_cast<std::size_t>(s)] =
            static_cast<int>(std::max_element(row.begin(), row.end()) - row.begin());
    }
    return pi;
}

VTable value_of(const QTable& q) {
    VTable v(q.states());
    for (int s = 0; s < q.states(); ++s) {
        const auto row = q.row(s);
        v[s] = *std::max_element(row.begin(), row.end());
    }
    return v;
}

double span_norm(std::span<const double> x) {
    if (x.empty()) {
        return 0.0;
    }
    const auto [lo, hi] = std::minmax_element(x.begin(), x.end());
    return *hi - *lo;
}

double inf_norm_gap(const QTable& q, double scalar) {
    double worst = 0.0;
    for (double value : q.values()) {
        worst = std::max(worst, std::abs(value - scalar));
    }
    return worst;
}

InducedChain induced_chain(const Amdp& mdp, const DeterministicPolicy& pi) {
    InducedChain chain;
    chain.S = mdp.S;
    chain.P.resize(static_cast<std::size_t>(mdp.S) * mdp.S);
    chain.r.resize(static_cast<std::size_t>(mdp.S));
    for (int s = 0; s < mdp.S; ++s) {
        const int a = pi.action[static_cast<std::size_t>(s)];
        const auto row = mdp.row(s, a);
        std::copy(row.begin(), row.end(), chain.P.begin() + static_cast<std::ptrdiff_t>(s) * mdp.S);
        chain.r[static_cast<std::size_t>(s)] = mdp.reward(s, a);
    }
    return chain;
}

Amdp parse_mdp(const std::string& text) {
    nlohmann::json doc;
    try {
        doc = nlohmann::json::parse(text);
    } catch (const nlohmann::json::exception& e) {
        throw ValidationError(std::string("malformed MDP document: ") + e.what());
    }
    try {
        const int S = doc.at("S").get<int>();
        const int A = doc.at("A").get<int>();
        if (S <= 0 || A <= 0) {
            throw ValidationError("S and A must be positive");
        }
        Amdp mdp(S, A);
        const auto& P = doc.at("P");
        const auto& r = doc.at("r");
        if (P.size() != static_cast<std::size_t>(S) || r.size() != static_cast<std::size_t>(S)) {
            throw ValidationError("P and r must have S rows");
        }
        for (int s = 0; s < S; ++s) {
            if (P[s].size() != static_cast<std::size_t>(A) || r[s].size() != static_cast<std::size_t>(A)) {
                throw ValidationError("P[s] and r[s] must have A entries");
            }
            for (int a = 0; a < A; ++a) {
                if (P[s][a].size() != static_cast<std::size_t>(S)) {
                    throw ValidationError("P[s][a] must have S entries");
                }
                for (int next = 0; next < S; ++next) {
                    mdp.prob(s, a, next) = P[s][a][next].get<double>();
                }
                mdp.reward(s, a) = r[s][a].get<double>();
            }
        }
        validate(mdp);
        return mdp;
    } catch (const nlohmann::json::exception& e) {
        throw ValidationError(std::string("malformed MDP document: ") + e.what());
    }
}

Amdp load_mdp(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) {
        throw ValidationError("cannot open MDP file " + path.string());
    }
    std::ostringstream buffer;
    buffer << in.rdbuf();
    return parse_mdp(buffer.str());
}

std::string dump_mdp(const Amdp& mdp) {
    nlohmann::json doc;
    doc["S"] = mdp.S;
    doc["A"] = mdp.A;
    auto P = nlohmann::json::array();
    auto r = nlohmann::json::array();
    for (int s = 0; s < mdp.S; ++s) {
        auto Ps = nlohmann::json::array();
        auto rs = nlohmann::json::array();
        for (int a = 0; a < mdp.A; ++a) {
            const auto row = mdp.row(s, a);
            Ps.push_back(std::vector<double>(row.begin(), row.end()));
            rs.push_back(mdp.reward(s, a));
        }
        P.push_back(std::move(Ps));
        r.push_back(std::move(rs));
    }
    doc["P"] = std::move(P);
    doc["r"] = std::move(r);
    return doc.dump();
}

void save_mdp(const Amdp& mdp, const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out) {
        throw ValidationError("cannot write MDP file " + path.string());
    }
    out << dump_mdp(mdp) << '\n';
}

} // namespace avgq
