#pragma once

// Naive reference implementations the real engine is checked against.
// Everything here trades speed for obviousness: linear scans, a tiny
// tagged value type, and predicate evaluation written straight from the
// behavior contract. The production embedder and timestamp parser are
// reused as deterministic primitives; no retrieval logic is shared.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "dslq/corpus.hpp"
#include "dslq/dsl_ast.hpp"
#include "dslq/embedder.hpp"
#include "dslq/time_util.hpp"

namespace oracle {

struct OracleError : std::runtime_error {
    explicit OracleError(const std::string& m) : std::runtime_error(m) {}
};

// ---- field texts and brute-force search -----------------------------

inline std::string comma_join(const std::vector<std::string>& xs) {
    std::string out;
    for (const auto& x : xs) {
        if (!out.empty())
            out += ", ";
        out += x;
    }
    return out;
}

// (key, text) pairs a field contributes to its index.
inline std::vector<std::pair<std::string, std::string>>
field_texts(const dslq::Corpus& corpus, const std::string& field) {
    std::vector<std::pair<std::string, std::string>> out;
    for (const auto& r : corpus.records()) {
        if (field == "subject")
            out.emplace_back(r.message_id, r.subject);
        else if (field == "content")
            out.emplace_back(r.message_id, r.content);
        else if (field == "sender_email")
            out.emplace_back(r.message_id, r.sender_email);
        else if (field == "sender_name")
            out.emplace_back(r.message_id, r.sender_name);
        else if (field == "recipient_list")
            out.emplace_back(r.message_id, comma_join(r.recipient_list));
        else if (field == "cc_list")
            out.emplace_back(r.message_id, comma_join(r.cc_list));
        else if (field == "bcc_list")
            out.emplace_back(r.message_id, comma_join(r.bcc_list));
        else if (field == "folder_labels")
            for (const auto& label : r.folder_labels)
                out.emplace_back(label.id, label.name);
        else if (field == "attachment_list")
            for (const auto& att : r.attachment_list)
                out.emplace_back(att.id, att.filename + " " + att.text);
        else
            throw OracleError("not a searchable field: " + field);
    }
    return out;
}

inline std::string resolve_alias(const std::string& name) {
    return name == "email_content" ? "content" : name;
}

struct Hit {
    std::string key;
    double score = 0.0;
};

// Precomputed entry embeddings so repeated queries stay cheap.
struct OracleIndex {
    std::map<std::string, std::vector<std::pair<std::string, std::vector<float>>>> fields;

    static OracleIndex build(const dslq::Corpus& corpus, const dslq::Embedder& embedder) {
        static const char* kSearchable[] = {
            "subject",     "content", "sender_email",  "sender_name",    "recipient_list",
            "cc_list",     "bcc_list", "folder_labels", "attachment_list",
        };
        OracleIndex index;
        for (const char* field : kSearchable) {
            auto& entries = index.fields[field];
            for (const auto& [key, text] : field_texts(corpus, field))
                entries.emplace_back(key, embedder.embed(text));
        }
        return index;
    }
};

inline std::vector<Hit> brute_search(const OracleIndex& index, const std::string& field,
                                     const std::string& text, const dslq::Embedder& embedder,
                                     std::size_t top_k, double tau) {
    auto it = index.fields.find(resolve_alias(field));
    if (it == index.fields.end())
        throw OracleError("no index for field " + field);
    const std::vector<float> q = embedder.embed(text);
    std::vector<Hit> hits;
    for (const auto& [key, vec] : it->second) {
        double score = dslq::cosine(q, vec);
        if (score >= tau)
            hits.push_back({key, score});
    }
    std::sort(hits.begin(), hits.end(), [](const Hit& a, const Hit& b) {
        return a.score != b.score ? a.score > b.score : a.key < b.key;
    });
    if (hits.size() > top_k)
        hits.resize(top_k);
    return hits;
}

// ---- reference predicate evaluation ---------------------------------

struct Val {
    enum Kind { Null, Str, Int, Bool, Ts } kind = Null;
    std::string s;
    std::int64_t i = 0;
    bool b = false;
};

using Element = std::vector<std::pair<std::string, std::string>>;

inline std::vector<Element> elements_of(const dslq::EmailRecord& r, const std::string& field) {
    std::vector<Element> out;
    if (field == "folder_labels") {
        for (const auto& l : r.folder_labels)
            out.push_back({{"id", l.id}, {"name", l.name}});
    } else if (field == "attachment_list") {
        for (const auto& a : r.attachment_list)
            out.push_back({{"id", a.id}, {"filename", a.filename}, {"text", a.text}});
    } else {
        throw OracleError("not a list field: " + field);
    }
    return out;
}

inline const std::string* element_path(const Element& el, const std::string& path) {
    for (const auto& [k, v] : el)
        if (k == path)
            return &v;
    return nullptr;
}

inline Val scalar_field(const dslq::EmailRecord& r, const std::string& name) {
    auto str = [](const std::string& s) { return Val{Val::Str, s, 0, false}; };
    auto when = [](std::int64_t t) { return Val{Val::Ts, {}, t, false}; };
    auto flag = [](bool b) { return Val{Val::Bool, {}, 0, b}; };
    if (name == "message_id")
        return str(r.message_id);
    if (name == "account_email")
        return str(r.account_email);
    if (name == "received_date")
        return when(r.received_date);
    if (name == "is_draft")
        return flag(r.is_draft);
    if (name == "draft_created_date")
        return r.draft_created_date ? when(*r.draft_created_date) : Val{};
    if (name == "draft_modified_date")
        return r.draft_modified_date ? when(*r.draft_modified_date) : Val{};
    if (name == "is_read")
        return flag(r.is_read);
    if (name == "is_starred")
        return flag(r.is_starred);
    if (name == "is_archived")
        return flag(r.is_archived);
    if (name == "thread_msg_count")
        return Val{Val::Int, {}, r.thread_msg_count, false};
    if (name == "sender_email")
        return str(r.sender_email);
    if (name == "sender_name")
        return str(r.sender_name);
    if (name == "subject")
        return str(r.subject);
    if (name == "content")
        return str(r.content);
    throw OracleError("no scalar value for field " + name);
}

inline Val operand_val(const dslq::Operand& op, const dslq::EmailRecord& r, const Element* el,
                       std::int64_t now) {
    if (const auto* f = std::get_if<dslq::FieldRef>(&op))
        return scalar_field(r, f->name);
    if (const auto* j = std::get_if<dslq::JsonPathRef>(&op)) {
        if (el == nullptr)
            throw OracleError("json_extract without json_each");
        const std::string* v = element_path(*el, j->path);
        return v ? Val{Val::Str, *v, 0, false} : Val{};
    }
    if (const auto* s = std::get_if<dslq::StringLit>(&op))
        return Val{Val::Str, s->value, 0, false};
    if (const auto* i = std::get_if<dslq::IntLit>(&op))
        return Val{Val::Int, {}, i->value, false};
    if (const auto* b = std::get_if<dslq::BoolLit>(&op))
        return Val{Val::Bool, {}, 0, b->value};
    const auto& d = std::get<dslq::RelativeDate>(op);
    return Val{Val::Ts, {}, now + d.offset_days * dslq::kSecondsPerDay, false};
}

inline bool order_holds(dslq::CompareOp op, int cmp) {
    switch (op) {
    case dslq::CompareOp::Eq:
        return cmp == 0;
    case dslq::CompareOp::Ne:
        return cmp != 0;
    case dslq::CompareOp::Lt:
        return cmp < 0;
    case dslq::CompareOp::Le:
        return cmp <= 0;
    case dslq::CompareOp::Gt:
        return cmp > 0;
    case dslq::CompareOp::Ge:
        return cmp >= 0;
    }
    return false;
}

inline bool compare(const Val& a, dslq::CompareOp op, const Val& b) {
    if (a.kind == Val::Null || b.kind == Val::Null)
        return false; // null never satisfies a comparison
    if (a.kind == Val::Str && b.kind == Val::Str) {
        int c = a.s < b.s ? -1 : (a.s == b.s ? 0 : 1);
        return order_holds(op, c);
    }
    if (a.kind == Val::Int && b.kind == Val::Int)
        return order_holds(op, a.i < b.i ? -1 : (a.i > b.i ? 1 : 0));
    if (a.kind == Val::Bool && b.kind == Val::Bool) {
        int av = a.b ? 1 : 0, bv = b.b ? 1 : 0;
        return order_holds(op, av - bv);
    }
    if (a.kind == Val::Ts || b.kind == Val::Ts) {
        auto epoch = [](const Val& v) -> std::int64_t {
            if (v.kind == Val::Ts || v.kind == Val::Int)
                return v.i;
            if (v.kind == Val::Str) {
                auto t = dslq::parse_rfc3339(v.s);
                if (!t)
                    throw OracleError("not a timestamp: " + v.s);
                return *t;
            }
            throw OracleError("boolean against timestamp");
        };
        std::int64_t x = epoch(a), y = epoch(b);
        return order_holds(op, x < y ? -1 : (x > y ? 1 : 0));
    }
    throw OracleError("incomparable types");
}

inline bool predicate_holds(const dslq::Predicate& p, const dslq::EmailRecord& r,
                            const Element* el, const std::vector<std::vector<Hit>>& bindings,
                            std::int64_t now) {
    if (const auto* c = std::get_if<dslq::Comparison>(&p.node))
        return compare(operand_val(c->lhs, r, el, now), c->op, operand_val(c->rhs, r, el, now));
    if (const auto* m = std::get_if<dslq::Membership>(&p.node)) {
        if (m->placeholder >= bindings.size())
            throw OracleError("placeholder out of range");
        Val v = operand_val(m->expr, r, el, now);
        if (v.kind == Val::Null)
            return false;
        if (v.kind != Val::Str)
            throw OracleError("IN over a non-key value");
        for (const auto& hit : bindings[m->placeholder])
            if (hit.key == v.s)
                return true;
        return false;
    }
    if (const auto* b = std::get_if<dslq::BoolConst>(&p.node))
        return b->value;
    if (const auto* g = std::get_if<dslq::AndGroup>(&p.node)) {
        for (const auto& t : g->terms)
            if (!predicate_holds(t, r, el, bindings, now))
                return false;
        return true;
    }
    const auto& g = std::get<dslq::OrGroup>(p.node);
    for (const auto& t : g.terms)
        if (predicate_holds(t, r, el, bindings, now))
            return true;
    return false;
}

// ---- reference execution --------------------------------------------

struct Result {
    std::vector<std::string> keys;
    std::vector<std::optional<double>> scores;
};

struct Params {
    std::size_t top_k = 20;
    double tau = 0.3;
    std::int64_t now = 0;
};

// nullopt mirrors an ExecutionFailure.
inline std::optional<Result> run(const dslq::DslProgram& program, const dslq::Corpus& corpus,
                                 const OracleIndex& index, const dslq::Embedder& embedder,
                                 const Params& params) {
    try {
        std::vector<std::vector<Hit>> bindings;
        for (const auto& q : program.vector_query_list)
            bindings.push_back(
                brute_search(index, q.field, q.text, embedder, params.top_k, params.tau));

        struct Emitted {
            std::string key;
            double score = std::nan("");
        };
        std::vector<Emitted> emitted;

        auto best_binding_score = [&](const std::string& message_id, const Element* el) {
            double best = std::nan("");
            auto consider = [&](const std::string& key) {
                for (const auto& b : bindings)
                    for (const auto& hit : b)
                        if (hit.key == key && (std::isnan(best) || hit.score > best))
                            best = hit.score;
            };
            consider(message_id);
            if (el != nullptr)
                if (const std::string* id = element_path(*el, "id"))
                    consider(*id);
            return best;
        };

        auto emit = [&](const std::string& key, double score) {
            for (auto& e : emitted)
                if (e.key == key) {
                    if (!std::isnan(score) && (std::isnan(e.score) || score > e.score))
                        e.score = score;
                    return;
                }
            emitted.push_back({key, score});
        };

        for (const auto& r : corpus.records()) {
            if (program.sql.json_each_field) {
                for (const Element& el : elements_of(r, *program.sql.json_each_field)) {
                    if (program.sql.where &&
                        !predicate_holds(*program.sql.where, r, &el, bindings, params.now))
                        continue;
                    if (const auto* proj =
                            std::get_if<dslq::ElementProjection>(&program.sql.projection)) {
                        if (const std::string* v = element_path(el, proj->path))
                            emit(*v, best_binding_score(r.message_id, &el));
                    } else {
                        emit(r.message_id, best_binding_score(r.message_id, &el));
                    }
                }
            } else {
                if (program.sql.where &&
                    !predicate_holds(*program.sql.where, r, nullptr, bindings, params.now))
                    continue;
                emit(r.message_id, best_binding_score(r.message_id, nullptr));
            }
        }

        std::stable_sort(emitted.begin(), emitted.end(), [](const Emitted& a, const Emitted& b) {
            bool sa = !std::isnan(a.score), sb = !std::isnan(b.score);
            if (sa != sb)
                return sa;
            return sa && a.score > b.score;
        });

        Result out;
        for (const auto& e : emitted) {
            out.keys.push_back(e.key);
            out.scores.push_back(std::isnan(e.score) ? std::nullopt
                                                     : std::optional<double>(e.score));
        }
        return out;
    } catch (const OracleError&) {
        return std::nullopt;
    }
}

} // namespace oracle
