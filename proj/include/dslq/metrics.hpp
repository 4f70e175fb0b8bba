#pragma once

#include <map>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "dslq/datagen.hpp"
#include "dslq/executor.hpp"

namespace dslq {

class MetricsError : public std::runtime_error {
public:
    enum class Kind { EmptyBatch, Alignment };

    MetricsError(Kind kind, std::string message)
        : std::runtime_error(std::move(message)), kind(kind) {}

    Kind kind;
};

// One query's ranked retrieval plus its judgments. Relevance defaults to
// binary against gold_keys; a non-empty relevance map overrides it with
// graded values.
struct RankedJudgment {
    std::string query_id;
    std::vector<std::string> ranked_keys;
    std::set<std::string> gold_keys;
    std::map<std::string, double> relevance;
    double latency_ms = 0.0;

    double relevance_of(const std::string& key) const;
};

// All batch metrics throw MetricsError{EmptyBatch} on an empty input.
// Queries with no relevant key anywhere contribute 0.

double hit_at_k(const std::vector<RankedJudgment>& batch, std::size_t k);
double mean_reciprocal_rank(const std::vector<RankedJudgment>& batch);
double ndcg_at_k(const std::vector<RankedJudgment>& batch, std::size_t k);
double mean_latency_ms(const std::vector<RankedJudgment>& batch);

// The full report with its canonical key names.
nlohmann::json metrics_report(const std::vector<RankedJudgment>& batch);

// A candidate program for one triplet, aligned by query_id.
struct CandidateProgram {
    std::string query_id;
    std::string text; // wire-format program
};

// Executes each candidate against ctx, restricts the ranking to the
// triplet's candidate pool, and aggregates. Programs that fail to parse
// or execute score zero for their query (latency 0). Throws
// MetricsError{Alignment} when ids mismatch or counts differ.
nlohmann::json evaluate_run(const std::vector<TripletInstance>& triplets,
                            const std::vector<CandidateProgram>& programs,
                            const ExecutionContext& ctx);

// The per-query judgments behind evaluate_run, for inspection.
std::vector<RankedJudgment> judge_run(const std::vector<TripletInstance>& triplets,
                                      const std::vector<CandidateProgram>& programs,
                                      const ExecutionContext& ctx);

} // namespace dslq
