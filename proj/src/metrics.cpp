#include "dslq/metrics.hpp"

#include <algorithm>
#include <cmath>

#include "dslq/dsl_parser.hpp"

namespace dslq {

namespace {

void require_nonempty(const std::vector<RankedJudgment>& batch) {
    if (batch.empty())
        throw MetricsError(MetricsError::Kind::EmptyBatch, "metrics over an empty batch");
}

// 1-based rank of the first relevant key, or 0 when none is ranked.
std::size_t first_relevant_rank(const RankedJudgment& j) {
    for (std::size_t i = 0; i < j.ranked_keys.size(); ++i)
        if (j.relevance_of(j.ranked_keys[i]) > 0.0)
            return i + 1;
    return 0;
}

} // namespace

double RankedJudgment::relevance_of(const std::string& key) const {
    if (!relevance.empty()) {
        auto it = relevance.find(key);
        return it == relevance.end() ? 0.0 : it->second;
    }
    return gold_keys.count(key) ? 1.0 : 0.0;
}

double hit_at_k(const std::vector<RankedJudgment>& batch, std::size_t k) {
    require_nonempty(batch);
    double hits = 0.0;
    for (const auto& j : batch) {
        std::size_t r = first_relevant_rank(j);
        if (r != 0 && r <= k)
            hits += 1.0;
    }
    return hits / static_cast<double>(batch.size());
}

double mean_reciprocal_rank(const std::vector<RankedJudgment>& batch) {
    require_nonempty(batch);
    double sum = 0.0;
    for (const auto& j : batch) {
        std::size_t r = first_relevant_rank(j);
        if (r != 0)
            sum += 1.0 / static_cast<double>(r);
    }
    return sum / static_cast<double>(batch.size());
}

double ndcg_at_k(const std::vector<RankedJudgment>& batch, std::size_t k) {
    require_nonempty(batch);
    double sum = 0.0;
    for (const auto& j : batch) {
        double dcg = 0.0;
        for (std::size_t i = 0; i < j.ranked_keys.size() && i < k; ++i) {
            double rel = j.relevance_of(j.ranked_keys[i]);
            dcg += (std::exp2(rel) - 1.0) / std::log2(static_cast<double>(i) + 2.0);
        }

        // Ideal ordering over everything judged relevant, ranked or not.
        std::vector<double> ideal;
        if (!j.relevance.empty()) {
            for (const auto& [_, rel] : j.relevance)
                if (rel > 0.0)
                    ideal.push_back(rel);
        } else {
            ideal.assign(j.gold_keys.size(), 1.0);
        }
        std::sort(ideal.begin(), ideal.end(), std::greater<>());
        double idcg = 0.0;
        for (std::size_t i = 0; i < ideal.size() && i < k; ++i)
            idcg += (std::exp2(ideal[i]) - 1.0) / std::log2(static_cast<double>(i) + 2.0);

        if (idcg > 0.0)
            sum += dcg / idcg;
    }
    return sum / static_cast<double>(batch.size());
}

double mean_latency_ms(const std::vector<RankedJudgment>& batch) {
    require_nonempty(batch);
    double sum = 0.0;
    for (const auto& j : batch)
        sum += j.latency_ms;
    return sum / static_cast<double>(batch.size());
}

nlohmann::json metrics_report(const std::vector<RankedJudgment>& batch) {
    return {
        {"hit@1", hit_at_k(batch, 1)},
        {"hit@3", hit_at_k(batch, 3)},
        {"mrr", mean_reciprocal_rank(batch)},
        {"ndcg@5", ndcg_at_k(batch, 5)},
        {"latency_ms_mean", mean_latency_ms(batch)},
        {"queries", batch.size()},
    };
}

std::vector<RankedJudgment> judge_run(const std::vector<TripletInstance>& triplets,
                                      const std::vector<CandidateProgram>& programs,
                                      const ExecutionContext& ctx) {
    if (triplets.size() != programs.size())
        throw MetricsError(MetricsError::Kind::Alignment,
                           "triplet and program counts differ: " +
                               std::to_string(triplets.size()) + " vs " +
                               std::to_string(programs.size()));

    std::vector<RankedJudgment> batch;
    for (std::size_t i = 0; i < triplets.size(); ++i) {
        const auto& t = triplets[i];
        const auto& p = programs[i];
        if (t.query_id != p.query_id)
            throw MetricsError(MetricsError::Kind::Alignment,
                               "query_id mismatch at position " + std::to_string(i) + ": " +
                                   t.query_id + " vs " + p.query_id);

        RankedJudgment j;
        j.query_id = t.query_id;
        j.gold_keys = {t.gold_id};

        try {
            DslProgram program = parse_program(p.text);
            ExecOutcome outcome = execute(program, ctx);
            if (succeeded(outcome)) {
                const auto& result = std::get<RetrievalResult>(outcome);
                std::set<std::string> pool(t.candidate_pool.begin(), t.candidate_pool.end());
                for (const auto& key : result.keys)
                    if (pool.count(key))
                        j.ranked_keys.push_back(key);
                j.latency_ms = result.latency_ms;
            }
        } catch (const ParseError&) {
            // invalid program: empty ranking
        }
        batch.push_back(std::move(j));
    }
    return batch;
}

nlohmann::json evaluate_run(const std::vector<TripletInstance>& triplets,
                            const std::vector<CandidateProgram>& programs,
                            const ExecutionContext& ctx) {
    return metrics_report(judge_run(triplets, programs, ctx));
}

} // namespace dslq
