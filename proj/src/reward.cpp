#include "dslq/reward.hpp"

#include <algorithm>
#include <cctype>

#include "dslq/dsl_parser.hpp"

namespace dslq {

namespace {

// Extraction and parsing combined; distinguishes "no usable tag block"
// from "tag block with invalid content".
enum class ParseOutcome { NoBlock, InvalidContent, Valid };

ParseOutcome try_parse(std::string_view output, DslProgram& program) {
    std::string inner;
    try {
        inner = extract_tagged_query(output);
    } catch (const ParseError&) {
        return ParseOutcome::NoBlock;
    }
    try {
        program = parse_program(inner);
    } catch (const ParseError&) {
        return ParseOutcome::InvalidContent;
    }
    return ParseOutcome::Valid;
}

} // namespace

std::int64_t count_tokens(std::string_view text) {
    std::int64_t count = 0;
    bool in_token = false;
    for (char c : text) {
        const bool ws = std::isspace(static_cast<unsigned char>(c));
        if (!ws && !in_token)
            ++count;
        in_token = !ws;
    }
    return count;
}

double format_reward(std::string_view output, const RewardConfig& config) {
    DslProgram program;
    switch (try_parse(output, program)) {
    case ParseOutcome::Valid:
        return 1.0;
    case ParseOutcome::InvalidContent:
        return config.partial_format_credit;
    case ParseOutcome::NoBlock:
        return 0.0;
    }
    return 0.0;
}

double execution_reward(std::string_view output, const ExecutionContext& ctx) {
    DslProgram program;
    if (try_parse(output, program) != ParseOutcome::Valid)
        return 0.0;
    return succeeded(execute(program, ctx)) ? 1.0 : 0.0;
}

double result_reward(const RetrievalResult& retrieved, const std::set<std::string>& reference) {
    if (reference.empty())
        throw RewardError("result_reward: empty reference set");
    const std::set<std::string> keys(retrieved.keys.begin(), retrieved.keys.end());
    if (keys.empty())
        return 0.0;
    std::size_t overlap = 0;
    for (const auto& k : keys)
        overlap += reference.count(k);
    if (overlap == 0)
        return 0.0;
    const double precision = static_cast<double>(overlap) / keys.size();
    const double recall = static_cast<double>(overlap) / reference.size();
    return 2.0 * precision * recall / (precision + recall);
}

double length_reward(std::string_view output, const RewardConfig& config) {
    const std::int64_t len = count_tokens(output);
    if (len <= config.length_budget)
        return 0.0;
    const double over = static_cast<double>(len - config.length_budget) /
                        static_cast<double>(config.length_budget);
    return std::max(config.length_penalty_floor, -over);
}

RewardBreakdown total_reward(std::string_view output, const ExecutionContext& ctx,
                             const std::set<std::string>& reference,
                             const RewardConfig& config) {
    RewardBreakdown breakdown;
    DslProgram program;
    const ParseOutcome outcome = try_parse(output, program);
    switch (outcome) {
    case ParseOutcome::Valid:
        breakdown.s_f = 1.0;
        break;
    case ParseOutcome::InvalidContent:
        breakdown.s_f = config.partial_format_credit;
        breakdown.failure = "program does not parse";
        break;
    case ParseOutcome::NoBlock:
        breakdown.s_f = 0.0;
        breakdown.failure = "no usable <query> block";
        break;
    }
    if (outcome == ParseOutcome::Valid) {
        ExecOutcome exec = execute(program, ctx);
        if (succeeded(exec)) {
            breakdown.s_e = 1.0;
            breakdown.s_r = result_reward(std::get<RetrievalResult>(exec), reference);
        } else {
            breakdown.failure = std::get<ExecutionFailure>(exec).reason;
        }
    }
    breakdown.s_l = length_reward(output, config);
    breakdown.total = config.weight_format * breakdown.s_f +
                      config.weight_execution * breakdown.s_e +
                      config.weight_result * breakdown.s_r +
                      config.weight_length * breakdown.s_l;
    return breakdown;
}

} // namespace dslq
