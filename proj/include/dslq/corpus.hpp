#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include <json.hpp>

#include "dslq/schema.hpp"

namespace dslq {

struct FolderLabel {
    std::string id;
    std::string name;

    bool operator==(const FolderLabel&) const = default;
};

struct Attachment {
    std::string id;
    std::string filename;
    std::string text; // pre-extracted content

    bool operator==(const Attachment&) const = default;
};

// One corpus document: structured metadata plus unstructured content.
// Timestamps are UTC epoch seconds; the draft dates are present iff
// is_draft.
struct EmailRecord {
    std::string message_id;
    std::string account_email;
    std::int64_t received_date = 0;
    bool is_draft = false;
    std::optional<std::int64_t> draft_created_date;
    std::optional<std::int64_t> draft_modified_date;
    bool is_read = false;
    bool is_starred = false;
    bool is_archived = false;
    std::int64_t thread_msg_count = 1;
    std::string sender_email;
    std::string sender_name;
    std::vector<std::string> recipient_list;
    std::vector<std::string> cc_list;
    std::vector<std::string> bcc_list;
    std::vector<FolderLabel> folder_labels;
    std::vector<Attachment> attachment_list;
    std::string subject;
    std::string content;

    bool operator==(const EmailRecord&) const = default;
};

class CorpusError : public std::runtime_error {
public:
    enum class Kind { MalformedRecord, DuplicateId, IoFailure };

    CorpusError(Kind kind, std::string message, int line = 0)
        : std::runtime_error(std::move(message)), kind(kind), line(line) {}

    Kind kind;
    int line; // 1-based file line, 0 when not applicable
};

// Immutable after construction; safe for concurrent readers.
class Corpus {
public:
    Corpus() = default;

    // Rejects duplicate message_id and per-record invariant violations.
    static Corpus from_records(std::vector<EmailRecord> records);

    const std::vector<EmailRecord>& records() const { return records_; }
    std::size_t size() const { return records_.size(); }
    bool empty() const { return records_.empty(); }

    const EmailRecord* find(std::string_view message_id) const;

    // Searchable field name -> index granularity.
    const std::map<std::string, Granularity>& field_registry() const { return field_registry_; }

    bool operator==(const Corpus& other) const { return records_ == other.records_; }

private:
    std::vector<EmailRecord> records_;
    std::map<std::string, Granularity> field_registry_;
    std::unordered_map<std::string, std::size_t> by_id_;
};

// JSONL persistence: one record per line, field names matching the
// schema, timestamps as RFC 3339 strings, absent draft dates as nulls.
Corpus load_corpus(const std::string& path);
void save_corpus(const Corpus& corpus, const std::string& path);

nlohmann::json record_to_json(const EmailRecord& record);
// Throws CorpusError{MalformedRecord} with line 0; load_corpus rewrites
// the line number.
EmailRecord record_from_json(const nlohmann::json& j);

// Validates the per-record invariants (thread count, draft-date
// consistency, element id uniqueness). Throws on violation.
void check_record(const EmailRecord& record);

} // namespace dslq
