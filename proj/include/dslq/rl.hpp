#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "dslq/datagen.hpp"
#include "dslq/executor.hpp"
#include "dslq/reward.hpp"
#include "dslq/rng.hpp"

namespace dslq {

class RlError : public std::runtime_error {
public:
    enum class Kind { GroupTooSmall, ShapeMismatch };

    RlError(Kind kind, std::string message) : std::runtime_error(std::move(message)), kind(kind) {}

    Kind kind;
};

// One sampled completion: per-token log-probs under the policy, the
// behavior policy that sampled it, and the frozen reference.
struct RolloutCandidate {
    std::vector<std::string> tokens; // optional surface forms; empty or same length as logps
    std::vector<double> logp_policy;
    std::vector<double> logp_old;
    std::vector<double> logp_ref;
    double reward = 0.0;
};

struct RolloutGroup {
    std::vector<RolloutCandidate> candidates; // >= 2
};

struct ObjectiveConfig {
    double clip_eps = 0.2;       // symmetric clip
    double clip_lo = 0.2;        // decoupled lower clip
    double clip_hi = 0.28;       // decoupled upper clip
    double kl_beta = 0.01;       // KL penalty weight
    double advantage_eps = 1e-8; // std stabilizer
    double token_loss_scale = 2.0;
};

// Group-normalized advantages: (r - mean) / (std + eps) with the
// population std. A zero-variance group maps to exactly zero.
std::vector<double> group_advantages(const std::vector<double>& rewards, double eps);

// k3 estimator mean over one sequence: exp(d) - d - 1, d = ref - policy.
double kl_estimate(const std::vector<double>& logp_policy, const std::vector<double>& logp_ref);

struct LossResult {
    double loss = 0.0;
    // d loss / d logp_policy[i][t], shaped like the group
    std::vector<std::vector<double>> grad;
};

// Clipped surrogate with a sequence-level importance ratio, plus the
// token-averaged KL penalty.
double grpo_loss(const RolloutGroup& group, const ObjectiveConfig& config);
LossResult grpo_loss_with_grad(const RolloutGroup& group, const ObjectiveConfig& config);

// Token-level ratios with decoupled clip range, averaged over all tokens
// of the group; advantages broadcast per token. No KL term.
double dapo_loss(const RolloutGroup& group, const ObjectiveConfig& config);
LossResult dapo_loss_with_grad(const RolloutGroup& group, const ObjectiveConfig& config);

// ---- mock rollout ----------------------------------------------------

struct MockPolicyConfig {
    std::size_t group_size = 4;
    double corruption = 0.5; // per-candidate probability of a corrupted emission
};

struct CandidateReport {
    std::string output;
    RewardBreakdown breakdown;
    double advantage = 0.0;
    std::string corruption; // which corruption was applied, empty for faithful
};

struct StepReport {
    std::vector<CandidateReport> candidates;
    double grpo = 0.0;
    double dapo = 0.0;
    double kl = 0.0;
};

// One full loop iteration without a model: a mock policy emits candidate
// strings around the triplet's gold program with synthetic log-probs, the
// composite reward scores them, and both objectives are evaluated.
StepReport simulate_rollout_step(const TripletInstance& triplet, const ExecutionContext& ctx,
                                 const MockPolicyConfig& policy, const ObjectiveConfig& objective,
                                 const RewardConfig& reward_config, Rng& rng);

nlohmann::json step_report_to_json(const StepReport& report);

} // namespace dslq
