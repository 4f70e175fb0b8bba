#pragma once

#include <map>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "dslq/corpus.hpp"
#include "dslq/dsl_ast.hpp"
#include "dslq/embedder.hpp"
#include "dslq/schema.hpp"

namespace dslq {

class IndexError : public std::runtime_error {
public:
    enum class Kind { DimensionMismatch, FieldMismatch, UnknownField, BadFormat };

    IndexError(Kind kind, std::string message)
        : std::runtime_error(std::move(message)), kind(kind) {}

    Kind kind;
};

struct IndexEntry {
    std::string key; // message_id for MESSAGE fields, element id for ELEMENT fields
    std::vector<float> vector;

    bool operator==(const IndexEntry&) const = default;
};

struct FieldIndex {
    std::string field;
    Granularity granularity = Granularity::Message;
    std::vector<IndexEntry> entries;

    bool operator==(const FieldIndex&) const = default;
};

struct ScoredKey {
    std::string key;
    double score = 0.0; // cosine similarity in [-1, 1]

    bool operator==(const ScoredKey&) const = default;
};

// Retrieval hits for one placeholder, sorted by descending score with
// ties broken by ascending key.
struct CandidateBinding {
    std::size_t placeholder_index = 0;
    std::vector<ScoredKey> hits;

    bool contains(std::string_view key) const;
    // Score of `key`, or quiet NaN when absent.
    double score_of(std::string_view key) const;
};

// One index per searchable field. Immutable after build.
class IndexSet {
public:
    const std::vector<FieldIndex>& fields() const { return fields_; }
    const FieldIndex* find(std::string_view field) const;

    bool operator==(const IndexSet& other) const { return fields_ == other.fields_; }

    friend IndexSet build_index(const Corpus&, const Embedder&);
    friend IndexSet load_index(const std::string&);

private:
    std::vector<FieldIndex> fields_;
};

// MESSAGE-keyed fields embed one text per record; folder_labels embeds
// each label name keyed by label id; attachment_list embeds filename
// plus text keyed by attachment id.
IndexSet build_index(const Corpus& corpus, const Embedder& embedder);

// At most top_k keys with score >= tau, descending score, ties by
// ascending key.
CandidateBinding search(const FieldIndex& index, const FieldQuery& query,
                        const Embedder& embedder, std::size_t top_k, double tau);

// "email_content" -> "content"; schema names map to themselves. Throws
// IndexError{UnknownField} otherwise.
std::string resolve_field_alias(std::string_view name);

// The text a record (or element) contributes to a field's index. Exposed
// so tests and datagen can recompute similarities independently.
std::string index_text_for_message_field(const EmailRecord& record, std::string_view field);

// Line-oriented persistence, version-tagged. Floats round-trip exactly.
void save_index(const IndexSet& index, const std::string& path);
IndexSet load_index(const std::string& path);

} // namespace dslq
