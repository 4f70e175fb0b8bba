#pragma once

#include <set>
#include <stdexcept>
#include <string>
#include <string_view>

#include "dslq/executor.hpp"

namespace dslq {

struct RewardConfig {
    std::int64_t length_budget = 256;  // token budget L
    double length_penalty_floor = -1.0;
    double partial_format_credit = 0.5; // well-formed tags, invalid content
    double weight_format = 1.0;
    double weight_execution = 1.0;
    double weight_result = 1.0;
    double weight_length = 1.0;
};

// The composite reward and its components. total is always the weighted
// component sum.
struct RewardBreakdown {
    double s_f = 0.0;
    double s_e = 0.0;
    double s_r = 0.0;
    double s_l = 0.0;
    double total = 0.0;
    std::string failure; // empty on clean execution

    bool operator==(const RewardBreakdown&) const = default;
};

class RewardError : public std::runtime_error {
public:
    explicit RewardError(std::string message) : std::runtime_error(std::move(message)) {}
};

// 1.0 for exactly one tag block parsing to a valid program,
// partial_format_credit for one tag block with invalid content, else 0.
double format_reward(std::string_view output, const RewardConfig& config = {});

// 1.0 when extract + parse + execute all succeed, 0 otherwise.
double execution_reward(std::string_view output, const ExecutionContext& ctx);

// F1 of the retrieved key set against the reference set. Throws
// RewardError on an empty reference.
double result_reward(const RetrievalResult& retrieved, const std::set<std::string>& reference);

// 0 within budget; past it, a linear ramp clamped at the floor. Tokens
// are whitespace-delimited.
double length_reward(std::string_view output, const RewardConfig& config = {});

std::int64_t count_tokens(std::string_view text);

// All four components in one pass. Parse failures short-circuit: the
// program is never executed and s_e = s_r = 0.
RewardBreakdown total_reward(std::string_view output, const ExecutionContext& ctx,
                             const std::set<std::string>& reference,
                             const RewardConfig& config = {});

} // namespace dslq
