#include "dslq/rl.hpp"

#include <algorithm>
#include <cmath>

#include "dslq/dsl_parser.hpp"

namespace dslq {

namespace {

void validate_group(const RolloutGroup& group) {
    if (group.candidates.size() < 2)
        throw RlError(RlError::Kind::GroupTooSmall,
                      "need >= 2 candidates, got " + std::to_string(group.candidates.size()));
    for (std::size_t i = 0; i < group.candidates.size(); ++i) {
        const auto& c = group.candidates[i];
        if (c.logp_policy.empty() || c.logp_old.size() != c.logp_policy.size() ||
            c.logp_ref.size() != c.logp_policy.size() ||
            (!c.tokens.empty() && c.tokens.size() != c.logp_policy.size()))
            throw RlError(RlError::Kind::ShapeMismatch,
                          "candidate " + std::to_string(i) + " has inconsistent sequence shapes");
    }
}

std::vector<double> rewards_of(const RolloutGroup& group) {
    std::vector<double> out;
    out.reserve(group.candidates.size());
    for (const auto& c : group.candidates)
        out.push_back(c.reward);
    return out;
}

std::size_t token_count(const RolloutGroup& group) {
    std::size_t n = 0;
    for (const auto& c : group.candidates)
        n += c.logp_policy.size();
    return n;
}

std::vector<std::vector<double>> zero_grads(const RolloutGroup& group) {
    std::vector<std::vector<double>> g;
    g.reserve(group.candidates.size());
    for (const auto& c : group.candidates)
        g.emplace_back(c.logp_policy.size(), 0.0);
    return g;
}

} // namespace

std::vector<double> group_advantages(const std::vector<double>& rewards, double eps) {
    if (rewards.size() < 2)
        throw RlError(RlError::Kind::GroupTooSmall,
                      "need >= 2 rewards, got " + std::to_string(rewards.size()));

    bool constant = true;
    for (const auto& r : rewards)
        if (r != rewards.front()) {
            constant = false;
            break;
        }
    if (constant)
        return std::vector<double>(rewards.size(), 0.0);

    double mean = 0.0;
    for (double r : rewards)
        mean += r;
    mean /= static_cast<double>(rewards.size());
    double var = 0.0;
    for (double r : rewards)
        var += (r - mean) * (r - mean);
    var /= static_cast<double>(rewards.size());
    double denom = std::sqrt(var) + eps;

    std::vector<double> out;
    out.reserve(rewards.size());
    for (double r : rewards)
        out.push_back((r - mean) / denom);
    return out;
}

double kl_estimate(const std::vector<double>& logp_policy, const std::vector<double>& logp_ref) {
    if (logp_policy.size() != logp_ref.size() || logp_policy.empty())
        throw RlError(RlError::Kind::ShapeMismatch, "kl_estimate over mismatched sequences");
    double sum = 0.0;
    for (std::size_t t = 0; t < logp_policy.size(); ++t) {
        double d = logp_ref[t] - logp_policy[t];
        sum += std::exp(d) - d - 1.0;
    }
    return sum / static_cast<double>(logp_policy.size());
}

LossResult grpo_loss_with_grad(const RolloutGroup& group, const ObjectiveConfig& config) {
    validate_group(group);
    const auto g = static_cast<double>(group.candidates.size());
    const auto n_tokens = static_cast<double>(token_count(group));
    std::vector<double> adv = group_advantages(rewards_of(group), config.advantage_eps);

    LossResult res;
    res.grad = zero_grads(group);
    double surrogate = 0.0;
    double kl = 0.0;

    for (std::size_t i = 0; i < group.candidates.size(); ++i) {
        const auto& c = group.candidates[i];
        double s = 0.0;
        for (std::size_t t = 0; t < c.logp_policy.size(); ++t)
            s += c.logp_policy[t] - c.logp_old[t];
        double ratio = std::exp(s);
        double clipped = std::clamp(ratio, 1.0 - config.clip_eps, 1.0 + config.clip_eps);
        double u = ratio * adv[i];
        double v = clipped * adv[i];
        surrogate += std::min(u, v);
        // The clipped branch has zero derivative: it is only selected
        // when the clamp is active.
        double dmin = u <= v ? adv[i] * ratio : 0.0;

        for (std::size_t t = 0; t < c.logp_policy.size(); ++t) {
            res.grad[i][t] -= dmin / g;
            double d = c.logp_ref[t] - c.logp_policy[t];
            kl += std::exp(d) - d - 1.0;
            res.grad[i][t] += config.kl_beta * (1.0 - std::exp(d)) / n_tokens;
        }
    }

    res.loss = -surrogate / g + config.kl_beta * kl / n_tokens;
    return res;
}

double grpo_loss(const RolloutGroup& group, const ObjectiveConfig& config) {
    return grpo_loss_with_grad(group, config).loss;
}

LossResult dapo_loss_with_grad(const RolloutGroup& group, const ObjectiveConfig& config) {
    validate_group(group);
    const auto n_tokens = static_cast<double>(token_count(group));
    std::vector<double> adv = group_advantages(rewards_of(group), config.advantage_eps);

    LossResult res;
    res.grad = zero_grads(group);
    double acc = 0.0;

    for (std::size_t i = 0; i < group.candidates.size(); ++i) {
        const auto& c = group.candidates[i];
        for (std::size_t t = 0; t < c.logp_policy.size(); ++t) {
            double ratio = std::exp(c.logp_policy[t] - c.logp_old[t]);
            double clipped = std::clamp(ratio, 1.0 - config.clip_lo, 1.0 + config.clip_hi);
            double u = ratio * adv[i];
            double v = clipped * adv[i];
            acc += std::min(u, v);
            double dmin = u <= v ? adv[i] * ratio : 0.0;
            res.grad[i][t] = -config.token_loss_scale * dmin / n_tokens;
        }
    }

    res.loss = -config.token_loss_scale * acc / n_tokens;
    return res;
}

double dapo_loss(const RolloutGroup& group, const ObjectiveConfig& config) {
    return dapo_loss_with_grad(group, config).loss;
}

// ---- mock rollout ----------------------------------------------------

namespace {

struct Emission {
    std::string output;
    std::string corruption;
};

Emission emit_candidate(const TripletInstance& triplet, const MockPolicyConfig& policy, Rng& rng) {
    std::string inner = render_program(triplet.program);
    std::string gold = "<query>" + inner + "</query>";
    if (!rng.chance(policy.corruption))
        return {gold, ""};

    switch (rng.below(6)) {
    case 0:
        return {inner, "strip-tags"};
    case 1:
        return {gold + " " + gold, "duplicate-block"};
    case 2:
        return {"<query>" + inner.substr(0, inner.size() / 2) + "</query>", "truncate-json"};
    case 3: {
        DslProgram p = triplet.program;
        if (!p.vector_query_list.empty())
            p.vector_query_list[0].field = "account_email"; // schema field with no index
        return {"<query>" + render_program(p) + "</query>", "unindexed-field"};
    }
    case 4: {
        DslProgram p = triplet.program;
        Predicate blocker{Comparison{FieldRef{"thread_msg_count"}, CompareOp::Eq, IntLit{9999}}};
        if (p.sql.where)
            p.sql.where = Predicate{AndGroup{{*p.sql.where, blocker}}};
        else
            p.sql.where = blocker;
        return {"<query>" + render_program(p) + "</query>", "impossible-filter"};
    }
    default: {
        std::string padded = gold;
        for (int i = 0; i < 280; ++i)
            padded += " noted";
        return {padded, "verbose"};
    }
    }
}

std::size_t whitespace_tokens(std::string_view text) {
    std::size_t n = 0;
    bool in_tok = false;
    for (char ch : text) {
        bool ws = ch == ' ' || ch == '\t' || ch == '\n' || ch == '\r';
        if (!ws && !in_tok)
            ++n;
        in_tok = !ws;
    }
    return n;
}

} // namespace

StepReport simulate_rollout_step(const TripletInstance& triplet, const ExecutionContext& ctx,
                                 const MockPolicyConfig& policy, const ObjectiveConfig& objective,
                                 const RewardConfig& reward_config, Rng& rng) {
    RolloutGroup group;
    StepReport report;
    std::set<std::string> reference = {triplet.gold_id};

    for (std::size_t i = 0; i < std::max<std::size_t>(policy.group_size, 2); ++i) {
        Emission e = emit_candidate(triplet, policy, rng);

        RolloutCandidate c;
        std::size_t len = std::max<std::size_t>(whitespace_tokens(e.output), 1);
        c.logp_policy.reserve(len);
        for (std::size_t t = 0; t < len; ++t) {
            double lp = -rng.uniform(0.05, 2.5);
            c.logp_policy.push_back(lp);
            c.logp_old.push_back(std::min(lp + rng.uniform(-0.2, 0.2), -0.001));
            c.logp_ref.push_back(std::min(lp + rng.uniform(-0.3, 0.3), -0.001));
        }

        CandidateReport cr;
        cr.output = e.output;
        cr.corruption = e.corruption;
        cr.breakdown = total_reward(e.output, ctx, reference, reward_config);
        c.reward = cr.breakdown.total;

        group.candidates.push_back(std::move(c));
        report.candidates.push_back(std::move(cr));
    }

    std::vector<double> adv = group_advantages(rewards_of(group), objective.advantage_eps);
    for (std::size_t i = 0; i < adv.size(); ++i)
        report.candidates[i].advantage = adv[i];

    report.grpo = grpo_loss(group, objective);
    report.dapo = dapo_loss(group, objective);
    double kl = 0.0;
    for (const auto& c : group.candidates)
        kl += kl_estimate(c.logp_policy, c.logp_ref) * static_cast<double>(c.logp_policy.size());
    report.kl = kl / static_cast<double>(token_count(group));
    return report;
}

nlohmann::json step_report_to_json(const StepReport& report) {
    nlohmann::json candidates = nlohmann::json::array();
    for (const auto& c : report.candidates) {
        candidates.push_back({
            {"output", c.output},
            {"corruption", c.corruption},
            {"advantage", c.advantage},
            {"reward",
             {{"s_f", c.breakdown.s_f},
              {"s_e", c.breakdown.s_e},
              {"s_r", c.breakdown.s_r},
              {"s_l", c.breakdown.s_l},
              {"total", c.breakdown.total},
              {"failure", c.breakdown.failure}}},
        });
    }
    return {
        {"candidates", candidates},
        {"grpo_loss", report.grpo},
        {"dapo_loss", report.dapo},
        {"kl", report.kl},
    };
}

} // namespace dslq
