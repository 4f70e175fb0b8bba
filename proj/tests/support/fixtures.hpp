#pragma once

// Hand-built corpora and the three reference DSL cases used across the
// test suites. Every expected key set in here was derived by evaluating
// the predicates by hand against the records below.

#include <cstdint>
#include <set>
#include <string>
#include <vector>

#include <json.hpp>

#include "dslq/corpus.hpp"
#include "dslq/time_util.hpp"

namespace fixtures {

inline std::int64_t ts(const char* text) {
    return *dslq::parse_rfc3339(text);
}

// Injected clock for every fixture execution: 2024-12-31T00:00:00Z.
// date('now', '-7 day') therefore resolves to 2024-12-24T00:00:00Z.
inline std::int64_t fixture_now() {
    return ts("2024-12-31T00:00:00Z");
}

struct RecordSpec {
    const char* id;
    bool is_draft;
    bool is_starred;
    const char* draft_modified; // nullptr for non-drafts
    const char* received;
    const char* subject;
    const char* content;
};

// The ten fixture emails. Drafts get draft_created = modified - 2 days.
//
//   id     draft starred modified              labels               attachments
//   m-001    y     y     2024-12-28T10:00:00Z  -                    -
//   m-002    y     y     2024-12-20T10:00:00Z  -                    -
//   m-003    y     n     2024-12-29T12:00:00Z  -                    -
//   m-004    n     y     -                     important            contract.docx
//   m-005    y     y     2024-12-24T00:00:00Z  -                    -
//   m-006    n     n     -                     important, inbox     -
//   m-007    n     n     -                     finance              budget.xlsx
//   m-008    y     y     2024-12-30T23:59:59Z  -                    -
//   m-009    n     n     -                     -                    slides.pptx
//   m-010    n     n     -                     travel               -
inline dslq::Corpus fixture_corpus() {
    static const RecordSpec specs[] = {
        {"m-001", true, true, "2024-12-28T10:00:00Z", "2024-12-27T08:00:00Z",
         "budget review", "budget planning spreadsheet quarterly numbers"},
        {"m-002", true, true, "2024-12-20T10:00:00Z", "2024-12-19T08:00:00Z",
         "trip", "travel itinerary flights"},
        {"m-003", true, false, "2024-12-29T12:00:00Z", "2024-12-29T09:00:00Z",
         "notes", "weekly sync notes"},
        {"m-004", false, true, nullptr, "2024-12-26T10:00:00Z",
         "contract signature needed", "the vendor contract needs a signature"},
        {"m-005", true, true, "2024-12-24T00:00:00Z", "2024-12-23T12:00:00Z",
         "ooo", "holiday vacation plans"},
        {"m-006", false, false, nullptr, "2024-12-22T15:00:00Z",
         "status", "project status updates"},
        {"m-007", false, false, nullptr, "2024-12-21T09:00:00Z",
         "contract renewal discussion", "renewal of the maintenance contract"},
        {"m-008", true, true, "2024-12-30T23:59:59Z", "2024-12-30T07:00:00Z",
         "sync", "weekly budget sync notes"},
        {"m-009", false, false, nullptr, "2024-12-18T11:00:00Z",
         "launch plan", "campaign launch timeline"},
        {"m-010", false, false, nullptr, "2024-12-17T16:00:00Z",
         "booking", "flight booking confirmation"},
    };

    std::vector<dslq::EmailRecord> records;
    for (const auto& s : specs) {
        dslq::EmailRecord r;
        r.message_id = s.id;
        r.account_email = "user0@corp.example";
        r.received_date = ts(s.received);
        r.is_draft = s.is_draft;
        if (s.draft_modified) {
            r.draft_modified_date = ts(s.draft_modified);
            r.draft_created_date = *r.draft_modified_date - 2 * dslq::kSecondsPerDay;
        }
        r.is_starred = s.is_starred;
        r.thread_msg_count = 1;
        r.sender_email = "pat.doe@partner.example";
        r.sender_name = "Pat Doe";
        r.recipient_list = {"user0@corp.example"};
        r.subject = s.subject;
        r.content = s.content;

        std::string id = s.id;
        if (id == "m-004") {
            r.folder_labels = {{"lbl-m-004-0", "important"}};
            r.attachment_list = {{"att-m-004-0", "contract.docx", "signed contract scan"}};
        } else if (id == "m-006") {
            r.folder_labels = {{"lbl-m-006-0", "important"}, {"lbl-m-006-1", "inbox"}};
        } else if (id == "m-007") {
            r.folder_labels = {{"lbl-m-007-0", "finance"}};
            r.attachment_list = {{"att-m-007-0", "budget.xlsx", "quarterly budget numbers"}};
        } else if (id == "m-009") {
            r.attachment_list = {{"att-m-009-0", "slides.pptx", "marketing launch deck"}};
        } else if (id == "m-010") {
            r.folder_labels = {{"lbl-m-010-0", "travel"}};
        }
        records.push_back(std::move(r));
    }
    return dslq::Corpus::from_records(std::move(records));
}

// ---- the three reference cases --------------------------------------

inline std::string case1_sql() {
    return "SELECT DISTINCT message_id FROM email WHERE is_draft = 1 AND "
           "draft_modified_date >= date('now', '-7 day') AND is_starred = 1 "
           "AND message_id IN <vector_0>";
}

inline std::string case2_sql() {
    return "SELECT DISTINCT json_extract(json_each.value, '$.id') AS folder_id "
           "FROM email, json_each(email.folder_labels) WHERE "
           "json_extract(json_each.value, '$.id') IN <vector_0>";
}

inline std::string case3_sql() {
    return "SELECT DISTINCT json_extract(json_each.value, '$.id') AS attachment_id "
           "FROM email, json_each(email.attachment_list) WHERE message_id IN <vector_0> "
           "AND json_extract(json_each.value, '$.id') IN <vector_1>";
}

inline std::string wire(const std::string& sql, const nlohmann::json& queries) {
    return nlohmann::json{{"sql", sql}, {"vector_query_list", queries}}.dump();
}

inline std::string case1_program() {
    return wire(case1_sql(), nlohmann::json::array({{{"email_content", "budget"}}}));
}

inline std::string case2_program() {
    return wire(case2_sql(), nlohmann::json::array({{{"folder_labels", "important"}}}));
}

inline std::string case3_program() {
    return wire(case3_sql(), nlohmann::json::array({{{"subject", "contract"}},
                                                    {{"attachment_list", "contract"}}}));
}

// ---- hand-enumerated expectations -----------------------------------
// With tau = -1 every index entry is a candidate, so the IN clauses are
// vacuous and the expected sets fall out of the SQL predicates alone.

// drafts, starred, modified on/after 2024-12-24T00:00:00Z:
//   m-001 (12-28), m-005 (boundary, >= keeps it), m-008 (12-30).
//   m-002 is stale, m-003 lacks the star, m-004 is no draft.
inline std::set<std::string> case1_expected_all_candidates() {
    return {"m-001", "m-005", "m-008"};
}

// every folder label id in the corpus
inline std::set<std::string> case2_expected_all_candidates() {
    return {"lbl-m-004-0", "lbl-m-006-0", "lbl-m-006-1", "lbl-m-007-0", "lbl-m-010-0"};
}

// every attachment id in the corpus
inline std::set<std::string> case3_expected_all_candidates() {
    return {"att-m-004-0", "att-m-007-0", "att-m-009-0"};
}

// Same date cutoff without the draft/star gates: non-drafts carry null
// draft_modified_date and must not leak through the comparison.
inline std::set<std::string> recent_modified_expected() {
    return {"m-001", "m-003", "m-005", "m-008"};
}

// labels literally named "important" (cosine 1.0 against the query)
inline std::set<std::string> case2_expected_exact_label() {
    return {"lbl-m-004-0", "lbl-m-006-0"};
}

} // namespace fixtures
