#include "avgq/sampler.hpp"

#include <algorithm>

namespace avgq {

namespace {

constexpr std::uint64_t mix(std::uint64_t x) {
    // splitmix64 finalizer
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

std::uint64_t iteration_hash(std::uint64_t seed, int agent, int epoch, long iteration) {
    std::uint64_t h = mix(seed);
    h = mix(h ^ static_cast<std::uint64_t>(agent));
    h = mix(h ^ static_cast<std::uint64_t>(epoch));
    return mix(h ^ static_cast<std::uint64_t>(iteration));
}

std::uint64_t cell_hash(std::uint64_t base, int state, int action) {
    const std::uint64_t cell =
        (static_cast<std::uint64_t>(static_cast<std::uint32_t>(state)) << 32) |
        static_cast<std::uint32_t>(action);
    return mix(base ^ mix(cell));
}

double to_unit(std::uint64_t bits) { return static_cast<double>(bits >> 11) * 0x1.0p-53; }

} // namespace

double keyed_uniform(const SampleKey& key) {
    return to_unit(cell_hash(iteration_hash(key.seed, key.agent, key.epoch, key.iteration), key.state,
                             key.action));
}

int inverse_cdf(std::span<const double> cdf, double u) {
    const auto it = std::upper_bound(cdf.begin(), cdf.end(), u);
    if (it != cdf.end()) {
        return static_cast<int>(it - cdf.begin());
    }
    // u beyond a row total rounded below 1: take the last state carrying mass
    for (std::size_t j = cdf.size(); j-- > 0;) {
        if (j == 0 || cdf[j] > cdf[j - 1]) {
            return static_cast<int>(j);
        }
    }
    return 0;
}

Sampler::Sampler(const Amdp& mdp, std::uint64_t seed, bool shared_stream)
    : S_(mdp.S), A_(mdp.A), seed_(seed), shared_(shared_stream) {
    cdf_.resize(mdp.P.size());
    point_mass_.assign(mdp.pairs(), -1);
    last_support_.assign(mdp.pairs(), 0);
    for (int s = 0; s < S_; ++s) {
        for (int a = 0; a < A_; ++a) {
            const auto row = mdp.row(s, a);
            const std::size_t base = mdp.pair(s, a) * static_cast<std::size_t>(S_);
            double acc = 0.0;
            int support = 0;
            int last = 0;
            for (int j = 0; j < S_; ++j) {
                acc += row[static_cast<std::size_t>(j)];
                cdf_[base + static_cast<std::size_t>(j)] = acc;
                if (row[static_cast<std::size_t>(j)] > 0.0) {
                    ++support;
                    last = j;
                }
            }
            last_support_[mdp.pair(s, a)] = last;
            if (support == 1) {
                point_mass_[mdp.pair(s, a)] = last;
            }
        }
    }
}

void Sampler::draw(int agent, int epoch, long iteration, std::span<int> out) const {
    const std::uint64_t base = iteration_hash(seed_, shared_ ? 0 : agent, epoch, iteration);
    std::size_t cell = 0;
    for (int s = 0; s < S_; ++s) {
        for (int a = 0; a < A_; ++a, ++cell) {
            // a point mass is selected by every u, so the hash can be skipped
            if (point_mass_[cell] >= 0) {
                out[cell] = point_mass_[cell];
                continue;
            }
            const double u = to_unit(cell_hash(base, s, a));
            const std::span<const double> cdf(cdf_.data() + cell * static_cast<std::size_t>(S_),
                                              static_cast<std::size_t>(S_));
            const auto it = std::upper_bound(cdf.begin(), cdf.end(), u);
            out[cell] = it != cdf.end() ? static_cast<int>(it - cdf.begin()) : last_support_[cell];
        }
    }
}

std::vector<int> Sampler::draw(int agent, int epoch, long iteration) const {
    std::vector<int> out(static_cast<std::size_t>(S_) * A_);
    draw(agent, epoch, iteration, out);
    return out;
}

std::vector<int> draw_next_states(const Amdp& mdp, std::uint64_t seed, int agent, int epoch,
                                  long iteration) {
    return Sampler(mdp, seed).draw(agent, epoch, iteration);
}

} // namespace avgq
