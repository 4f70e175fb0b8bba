#include "dslq/corpus.hpp"

#include <fstream>
#include <set>
#include <sstream>

#include "dslq/time_util.hpp"

namespace dslq {

namespace {

using nlohmann::json;

void fail_record(const std::string& reason) {
    throw CorpusError(CorpusError::Kind::MalformedRecord, reason);
}

std::string get_string(const json& j, const char* key) {
    auto it = j.find(key);
    if (it == j.end() || !it->is_string())
        fail_record(std::string("missing or non-string field '") + key + "'");
    return it->get<std::string>();
}

bool get_bool(const json& j, const char* key) {
    auto it = j.find(key);
    if (it == j.end() || !it->is_boolean())
        fail_record(std::string("missing or non-boolean field '") + key + "'");
    return it->get<bool>();
}

std::int64_t get_timestamp(const json& j, const char* key) {
    auto ts = parse_rfc3339(get_string(j, key));
    if (!ts)
        fail_record(std::string("field '") + key + "' is not an RFC 3339 timestamp");
    return *ts;
}

std::optional<std::int64_t> get_optional_timestamp(const json& j, const char* key) {
    auto it = j.find(key);
    if (it == j.end() || it->is_null())
        return std::nullopt;
    return get_timestamp(j, key);
}

std::vector<std::string> get_string_list(const json& j, const char* key) {
    auto it = j.find(key);
    if (it == j.end() || !it->is_array())
        fail_record(std::string("missing or non-array field '") + key + "'");
    std::vector<std::string> out;
    for (const auto& v : *it) {
        if (!v.is_string())
            fail_record(std::string("non-string element in '") + key + "'");
        out.push_back(v.get<std::string>());
    }
    return out;
}

} // namespace

void check_record(const EmailRecord& r) {
    if (r.message_id.empty())
        fail_record("empty message_id");
    if (r.thread_msg_count < 1)
        fail_record("thread_msg_count must be >= 1");
    if (r.is_draft != r.draft_created_date.has_value() ||
        r.is_draft != r.draft_modified_date.has_value())
        fail_record("draft dates must be present exactly when is_draft");
    if (r.draft_created_date && r.draft_modified_date &&
        *r.draft_modified_date < *r.draft_created_date)
        fail_record("draft_modified_date earlier than draft_created_date");
    std::set<std::string> ids;
    for (const auto& label : r.folder_labels)
        if (!ids.insert(label.id).second)
            fail_record("duplicate folder label id '" + label.id + "'");
    ids.clear();
    for (const auto& att : r.attachment_list)
        if (!ids.insert(att.id).second)
            fail_record("duplicate attachment id '" + att.id + "'");
}

Corpus Corpus::from_records(std::vector<EmailRecord> records) {
    Corpus corpus;
    corpus.records_ = std::move(records);
    for (std::size_t i = 0; i < corpus.records_.size(); ++i) {
        const auto& r = corpus.records_[i];
        check_record(r);
        if (!corpus.by_id_.emplace(r.message_id, i).second)
            throw CorpusError(CorpusError::Kind::DuplicateId,
                              "duplicate message_id '" + r.message_id + "'");
    }
    for (const auto& f : schema_fields())
        if (f.vector_searchable)
            corpus.field_registry_.emplace(std::string(f.name), f.granularity);
    return corpus;
}

const EmailRecord* Corpus::find(std::string_view message_id) const {
    auto it = by_id_.find(std::string(message_id));
    return it == by_id_.end() ? nullptr : &records_[it->second];
}

nlohmann::json record_to_json(const EmailRecord& r) {
    json j;
    j["message_id"] = r.message_id;
    j["account_email"] = r.account_email;
    j["received_date"] = format_rfc3339(r.received_date);
    j["is_draft"] = r.is_draft;
    j["draft_created_date"] =
        r.draft_created_date ? json(format_rfc3339(*r.draft_created_date)) : json(nullptr);
    j["draft_modified_date"] =
        r.draft_modified_date ? json(format_rfc3339(*r.draft_modified_date)) : json(nullptr);
    j["is_read"] = r.is_read;
    j["is_starred"] = r.is_starred;
    j["is_archived"] = r.is_archived;
    j["thread_msg_count"] = r.thread_msg_count;
    j["sender_email"] = r.sender_email;
    j["sender_name"] = r.sender_name;
    j["recipient_list"] = r.recipient_list;
    j["cc_list"] = r.cc_list;
    j["bcc_list"] = r.bcc_list;
    j["folder_labels"] = json::array();
    for (const auto& label : r.folder_labels)
        j["folder_labels"].push_back({{"id", label.id}, {"name", label.name}});
    j["attachment_list"] = json::array();
    for (const auto& att : r.attachment_list)
        j["attachment_list"].push_back(
            {{"id", att.id}, {"filename", att.filename}, {"text", att.text}});
    j["subject"] = r.subject;
    j["content"] = r.content;
    return j;
}

EmailRecord record_from_json(const nlohmann::json& j) {
    if (!j.is_object())
        fail_record("record is not a JSON object");
    EmailRecord r;
    r.message_id = get_string(j, "message_id");
    r.account_email = get_string(j, "account_email");
    r.received_date = get_timestamp(j, "received_date");
    r.is_draft = get_bool(j, "is_draft");
    r.draft_created_date = get_optional_timestamp(j, "draft_created_date");
    r.draft_modified_date = get_optional_timestamp(j, "draft_modified_date");
    r.is_read = get_bool(j, "is_read");
    r.is_starred = get_bool(j, "is_starred");
    r.is_archived = get_bool(j, "is_archived");
    auto tc = j.find("thread_msg_count");
    if (tc == j.end() || !tc->is_number_integer())
        fail_record("missing or non-integer field 'thread_msg_count'");
    r.thread_msg_count = tc->get<std::int64_t>();
    r.sender_email = get_string(j, "sender_email");
    r.sender_name = get_string(j, "sender_name");
    r.recipient_list = get_string_list(j, "recipient_list");
    r.cc_list = get_string_list(j, "cc_list");
    r.bcc_list = get_string_list(j, "bcc_list");
    auto labels = j.find("folder_labels");
    if (labels == j.end() || !labels->is_array())
        fail_record("missing or non-array field 'folder_labels'");
    for (const auto& v : *labels)
        r.folder_labels.push_back({get_string(v, "id"), get_string(v, "name")});
    auto atts = j.find("attachment_list");
    if (atts == j.end() || !atts->is_array())
        fail_record("missing or non-array field 'attachment_list'");
    for (const auto& v : *atts)
        r.attachment_list.push_back(
            {get_string(v, "id"), get_string(v, "filename"), get_string(v, "text")});
    r.subject = get_string(j, "subject");
    r.content = get_string(j, "content");
    check_record(r);
    return r;
}

Corpus load_corpus(const std::string& path) {
    std::ifstream in(path);
    if (!in)
        throw CorpusError(CorpusError::Kind::IoFailure, "cannot open '" + path + "'");
    std::vector<EmailRecord> records;
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty())
            continue;
        json j = json::parse(line, nullptr, false);
        if (j.is_discarded())
            throw CorpusError(CorpusError::Kind::MalformedRecord, "invalid JSON", line_no);
        try {
            records.push_back(record_from_json(j));
        } catch (const CorpusError& e) {
            throw CorpusError(e.kind, e.what(), line_no);
        }
    }
    return Corpus::from_records(std::move(records));
}

void save_corpus(const Corpus& corpus, const std::string& path) {
    std::ofstream out(path, std::ios::trunc);
    if (!out)
        throw CorpusError(CorpusError::Kind::IoFailure, "cannot open '" + path + "' for writing");
    for (const auto& r : corpus.records())
        out << record_to_json(r).dump() << '\n';
    if (!out)
        throw CorpusError(CorpusError::Kind::IoFailure, "write failed for '" + path + "'");
}

} // namespace dslq
