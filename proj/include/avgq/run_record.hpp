#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace avgq {

/// One measurement of a learner's global estimate.
struct RunRow {
    int k = 0;
    long iterations = 0;     // cumulative iterations (per agent)
    long samples = 0;        // cumulative per-agent samples, S*A*iterations
    long comm_rounds = 0;    // cumulative aggregation rounds
    double err_inf = 0.0;    // ||Q - J*||_inf, NaN without an oracle
    double gamma = 0.0;      // gamma_k of the epoch (0 before the first epoch)
    double eta_last = 0.0;   // last step size used
    int m_agents = 1;

    bool operator==(const RunRow&) const = default;
};

struct RunRecord {
    std::vector<RunRow> rows;

    bool operator==(const RunRecord&) const = default;
};

inline constexpr const char* kRunCsvHeader =
    "k,iterations_cum,samples_cum,comm_rounds_cum,err_inf,gamma_k,eta_last,m_agents";

/// Doubles are written with 17 significant digits so a re-read is exact.
void write_csv(std::ostream& out, const RunRecord& record);
RunRecord read_csv(std::istream& in);

/// Cumulative columns non-decreasing, err_inf >= 0 (or NaN when no oracle was given).
bool satisfies_invariants(const RunRecord& record);

} // namespace avgq
