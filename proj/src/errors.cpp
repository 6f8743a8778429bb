#include "avgq/errors.hpp"

#include <sstream>

namespace avgq {

namespace {
std::string row_sum_message(int s, int a, double actual) {
    std::ostringstream os;
    os.precision(17);
    os << "transition row (" << s << "," << a << ") sums to " << actual;
    return os.str();
}

std::string reward_message(int s, int a, double value) {
    std::ostringstream os;
    os.precision(17);
    os << "reward r(" << s << "," << a << ") = " << value << " is outside [0,1]";
    return os.str();
}
} // namespace

RowSumError::RowSumError(int s, int a, double actual_)
    : ValidationError(row_sum_message(s, a, actual_)), state(s), action(a), actual(actual_) {}

RewardRangeError::RewardRangeError(int s, int a, double value_)
    : ValidationError(reward_message(s, a, value_)), state(s), action(a), value(value_) {}

InfeasibleEpoch::InfeasibleEpoch(int k, std::string reason_)
    : Error("infeasible epoch " + std::to_string(k) + ": " + reason_), epoch(k),
      reason(std::move(reason_)) {}

NonConvergence::NonConvergence(long iterations_, double residual_)
    : Error("no convergence after " + std::to_string(iterations_) +
            " iterations (residual " + std::to_string(residual_) + ")"),
      iterations(iterations_), residual(residual_) {}

} // namespace avgq
