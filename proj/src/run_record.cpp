#include "avgq/run_record.hpp"

#include "avgq/errors.hpp"

#include <cmath>
#include <cstdio>
#include <istream>
#include <ostream>
#include <sstream>

namespace avgq {

namespace {
std::string fmt_double(double x) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return buf;
}
} // namespace

void write_csv(std::ostream& out, const RunRecord& record) {
    out << kRunCsvHeader << '\n';
    for (const auto& row : record.rows) {
        out << row.k << ',' << row.iterations << ',' << row.samples << ',' << row.comm_rounds << ','
            << fmt_double(row.err_inf) << ',' << fmt_double(row.gamma) << ','
            << fmt_double(row.eta_last) << ',' << row.m_agents << '\n';
    }
}

RunRecord read_csv(std::istream& in) {
    RunRecord record;
    std::string line;
    if (!std::getline(in, line) || line != kRunCsvHeader) {
        throw ValidationError("run CSV header mismatch");
    }
    while (std::getline(in, line)) {
        if (line.empty()) {
            continue;
        }
        std::istringstream fields(line);
        std::string cell;
        std::vector<std::string> cells;
        while (std::getline(fields, cell, ',')) {
            cells.push_back(cell);
        }
        if (cells.size() != 8) {
            throw ValidationError("run CSV row has " + std::to_string(cells.size()) + " fields");
        }
        RunRow row;
        row.k = std::stoi(cells[0]);
        row.iterations = std::stol(cells[1]);
        row.samples = std::stol(cells[2]);
        row.comm_rounds = std::stol(cells[3]);
        row.err_inf = std::strtod(cells[4].c_str(), nullptr);
        row.gamma = std::strtod(cells[5].c_str(), nullptr);
        row.eta_last = std::strtod(cells[6].c_str(), nullptr);
        row.m_agents = std::stoi(cells[7]);
        record.rows.push_back(row);
    }
    return record;
}

bool satisfies_invariants(const RunRecord& record) {
    for (std::size_t i = 0; i < record.rows.size(); ++i) {
        const auto& row = record.rows[i];
        if (!std::isnan(row.err_inf) && row.err_inf < 0.0) {
            return false;
        }
        if (i > 0) {
            const auto& prev = record.rows[i - 1];
            if (row.iterations < prev.iterations || row.samples < prev.samples ||
                row.comm_rounds < prev.comm_rounds || row.k < prev.k) {
                return false;
            }
        }
    }
    return true;
}

} // namespace avgq
