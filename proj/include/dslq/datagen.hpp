#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "dslq/corpus.hpp"
#include "dslq/dsl_ast.hpp"
#include "dslq/executor.hpp"
#include "dslq/rng.hpp"

namespace dslq {

class DatagenError : public std::runtime_error {
public:
    enum class Kind { RetryExhausted, InsufficientCorpus, EmptyInput };

    DatagenError(Kind kind, std::string message)
        : std::runtime_error(std::move(message)), kind(kind) {}

    Kind kind;
};

// Value of one structured attribute, with date equality at day
// granularity so structured filters select more than a single record.
struct FilterValue {
    enum class Type { Str, Bool, Count, Day };

    Type type = Type::Str;
    std::string s;
    bool b = false;
    std::int64_t n = 0;

    bool operator==(const FilterValue&) const = default;
};

// Conjunction of 1-3 metadata attribute equalities drawn from a gold
// record.
struct StructuredFilter {
    struct Attribute {
        std::string field;
        FilterValue value;

        bool operator==(const Attribute&) const = default;
    };

    std::vector<Attribute> attributes;

    bool operator==(const StructuredFilter&) const = default;
};

// One supervised instance: natural-language query, program, gold record,
// and the hard-negative candidate pool.
struct TripletInstance {
    std::string query_id;
    std::string nl_query;
    DslProgram program;
    std::string gold_id;
    std::vector<std::string> candidate_pool; // gold + negatives, gold exactly once
    std::vector<std::string> cue_terms;
    int k_str = 0;
    int k_uns = 0;

    bool operator==(const TripletInstance&) const = default;
};

struct DatagenConfig {
    std::size_t pool_size = 10;
    int max_attempts = 10; // self-consistency retries before discarding
    // Per structured-attribute count (1..3), the distribution over cue
    // counts {2,3,4}. Tuned so the emitted set reproduces the target
    // modality split and total complexity.
    double cue_count_dist[3][3] = {
        {0.0, 0.0, 1.0},
        {0.641, 0.0, 0.359},
        {0.891, 0.109, 0.0},
    };
    // Hook for externally produced natural-language queries; the default
    // slot-filling templates are used when absent.
    std::function<std::string(const EmailRecord& gold, const StructuredFilter& filter,
                              const std::vector<std::string>& cues, Rng& rng)>
        nl_query_hook;
};

// The attributes a structured filter may draw from.
const std::vector<std::string>& filter_eligible_fields();

// Value of one filter-eligible attribute; nullopt when unpopulated
// (empty string / zero date).
std::optional<FilterValue> attribute_value(const EmailRecord& record, const std::string& field);

// Seeded synthetic email corpus. Same seed, same corpus; the first n
// records are a prefix of any larger run with the same seed.
Corpus synthesize_corpus(std::uint64_t seed, std::size_t n);

// Whitespace token count of subject plus body.
std::int64_t document_token_count(const EmailRecord& record);

// 1-3 distinct populated attributes with the gold's values. `k` pins the
// size; 0 draws it uniformly. `eligible` defaults to
// filter_eligible_fields().
StructuredFilter sample_structured_filter(const EmailRecord& gold, Rng& rng,
                                          const std::vector<std::string>& eligible =
                                              filter_eligible_fields(),
                                          std::size_t k = 0);

// Records matching every filter attribute (conjunction).
std::set<std::string> structured_candidates(const Corpus& corpus, const StructuredFilter& filter);

// Subset of candidates whose content embedding has cosine >= tau with
// the cue embedding.
std::set<std::string> semantic_refine(const Corpus& corpus, const std::set<std::string>& candidates,
                                      const std::string& cue_query, const Embedder& embedder,
                                      double tau);

// Gold + hard negatives: records sharing >= 1 filter attribute first (in
// corpus order), then the most content-similar of the rest. Pass indexes
// to reuse prebuilt content vectors.
std::vector<std::string> build_candidate_pool(const Corpus& corpus, const EmailRecord& gold,
                                              const StructuredFilter& filter,
                                              const Embedder& embedder, std::size_t pool_size,
                                              const IndexSet* indexes = nullptr);

// One self-consistent triplet: the program encodes the filter as SQL
// predicates plus a cue-driven vector query; executing it against ctx
// must retrieve the gold. Throws RetryExhausted after max_attempts.
TripletInstance assemble_triplet(const ExecutionContext& ctx, Rng& rng,
                                 const DatagenConfig& config);

struct GenerationReport {
    std::vector<TripletInstance> triplets;
    std::size_t discarded = 0;
};

// Batch wrapper with per-instance substreams; query ids are assigned in
// emission order.
GenerationReport generate_triplets(const ExecutionContext& ctx, std::uint64_t seed,
                                   std::size_t count, const DatagenConfig& config);

struct DatasetProfile {
    double avg_k_str = 0.0;
    double avg_k_uns = 0.0;
    double avg_k_total = 0.0;
    double pct_structure_dominated = 0.0; // k_str > k_uns
    double pct_content_dominated = 0.0;   // k_uns > k_str
    double pct_balanced = 0.0;            // k_str == k_uns
};

DatasetProfile profile_dataset(const std::vector<TripletInstance>& triplets);

nlohmann::json profile_to_json(const DatasetProfile& profile);
nlohmann::json triplet_to_json(const TripletInstance& triplet);
TripletInstance triplet_from_json(const nlohmann::json& j);

void save_triplets(const std::vector<TripletInstance>& triplets, const std::string& path);
std::vector<TripletInstance> load_triplets(const std::string& path);

} // namespace dslq
