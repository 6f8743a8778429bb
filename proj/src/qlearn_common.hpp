#pragma once

#include "avgq/qlearn.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace avgq::detail {

inline void value_into(const QTable& q, VTable& v) {
    for (int s = 0; s < q.states(); ++s) {
        const auto row = q.row(s);
        v[s] = *std::max_element(row.begin(), row.end());
    }
}

inline void check_bounds(const QTable& q, int k, long t) {
    for (double x : q.values()) {
        if (!(x >= -kBoundSlack && x <= 1.0 + kBoundSlack)) {
            throw BoundsViolation("estimate " + std::to_string(x) + " left [0,1] at epoch " +
                                  std::to_string(k) + ", iteration " + std::to_string(t));
        }
    }
}

inline double gap_or_nan(const QTable& q, const RunOptions& options) {
    return options.oracle_gain ? inf_norm_gap(q, *options.oracle_gain) : std::nan("");
}

/// Record every ceil(N/16) iterations and at the epoch end.
inline long metrics_stride(long N) { return std::max(1L, (N + 15) / 16); }

} // namespace avgq::detail
