#pragma once

#include "avgq/mdp.hpp"

#include <cstdint>
#include <span>
#include <vector>

namespace avgq {

/// Coordinates of one generative-model draw.
struct SampleKey {
    std::uint64_t seed = 0;
    int agent = 0;
    int epoch = 0;
    long iteration = 0;
    int state = 0;
    int action = 0;
};

/// Uniform [0,1) value attached to a key. Pure function of the key.
double keyed_uniform(const SampleKey& key);

/// Smallest j with u < cdf[j]; falls back to the last state with positive mass.
int inverse_cdf(std::span<const double> cdf, double u);

/// Synchronous generative model: one next-state draw for every (s,a) at (agent, epoch, iteration).
///
/// Draws are keyed rather than streamed, so results do not depend on the order in which
/// agents or iterations are evaluated.
class Sampler {
public:
    Sampler(const Amdp& mdp, std::uint64_t seed, bool shared_stream = false);

    std::uint64_t seed() const { return seed_; }
    bool shared_stream() const { return shared_; }

    /// Fills out[s*A + a] with s'(s,a).
    void draw(int agent, int epoch, long iteration, std::span<int> out) const;
    std::vector<int> draw(int agent, int epoch, long iteration) const;

private:
    int S_;
    int A_;
    std::uint64_t seed_;
    bool shared_;
    std::vector<double> cdf_;        // per (s,a) cumulative row
    std::vector<int> point_mass_;    // target state of deterministic rows, -1 otherwise
    std::vector<int> last_support_;  // last state with positive mass
};

/// Convenience form of Sampler::draw.
std::vector<int> draw_next_states(const Amdp& mdp, std::uint64_t seed, int agent, int epoch,
                                  long iteration);

} // namespace avgq
