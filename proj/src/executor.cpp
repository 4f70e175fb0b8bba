#include "dslq/executor.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <unordered_map>

#include "dslq/time_util.hpp"

namespace dslq {

namespace {

// Typed runtime value; Null propagates to false in comparisons.
struct Value {
    enum class Type { Null, Str, Int, Bool, Ts } type = Type::Null;
    std::string s;
    std::int64_t i = 0;
    bool b = false;

    static Value null() { return {}; }
    static Value str(std::string v) { return {Type::Str, std::move(v), 0, false}; }
    static Value integer(std::int64_t v) { return {Type::Int, {}, v, false}; }
    static Value boolean(bool v) { return {Type::Bool, {}, 0, v}; }
    static Value timestamp(std::int64_t v) { return {Type::Ts, {}, v, false}; }
};

Value field_value(const EmailRecord& r, const std::string& name) {
    if (name == "message_id")
        return Value::str(r.message_id);
    if (name == "account_email")
        return Value::str(r.account_email);
    if (name == "received_date")
        return Value::timestamp(r.received_date);
    if (name == "is_draft")
        return Value::boolean(r.is_draft);
    if (name == "draft_created_date")
        return r.draft_created_date ? Value::timestamp(*r.draft_created_date) : Value::null();
    if (name == "draft_modified_date")
        return r.draft_modified_date ? Value::timestamp(*r.draft_modified_date) : Value::null();
    if (name == "is_read")
        return Value::boolean(r.is_read);
    if (name == "is_starred")
        return Value::boolean(r.is_starred);
    if (name == "is_archived")
        return Value::boolean(r.is_archived);
    if (name == "thread_msg_count")
        return Value::integer(r.thread_msg_count);
    if (name == "sender_email")
        return Value::str(r.sender_email);
    if (name == "sender_name")
        return Value::str(r.sender_name);
    if (name == "subject")
        return Value::str(r.subject);
    if (name == "content")
        return Value::str(r.content);
    throw EvalError("field '" + name + "' cannot be used as a scalar value");
}

Value operand_value(const Operand& op, const EmailRecord& r, const ElementCursor* cursor,
                    std::int64_t now) {
    struct Visitor {
        const EmailRecord& r;
        const ElementCursor* cursor;
        std::int64_t now;

        Value operator()(const FieldRef& f) const { return field_value(r, f.name); }
        Value operator()(const JsonPathRef& j) const {
            if (cursor == nullptr)
                throw EvalError("json_extract outside a json_each row");
            const std::string* v = cursor->get(j.path);
            return v ? Value::str(*v) : Value::null();
        }
        Value operator()(const StringLit& s) const { return Value::str(s.value); }
        Value operator()(const IntLit& i) const { return Value::integer(i.value); }
        Value operator()(const BoolLit& b) const { return Value::boolean(b.value); }
        Value operator()(const RelativeDate& d) const {
            return Value::timestamp(now + d.offset_days * kSecondsPerDay);
        }
    };
    return std::visit(Visitor{r, cursor, now}, op);
}

bool apply_order(CompareOp op, int cmp) {
    switch (op) {
    case CompareOp::Eq:
        return cmp == 0;
    case CompareOp::Ne:
        return cmp != 0;
    case CompareOp::Lt:
        return cmp < 0;
    case CompareOp::Le:
        return cmp <= 0;
    case CompareOp::Gt:
        return cmp > 0;
    case CompareOp::Ge:
        return cmp >= 0;
    }
    return false;
}

int order_of(std::int64_t a, std::int64_t b) {
    return a < b ? -1 : (a > b ? 1 : 0);
}

std::int64_t timestamp_from_string(const std::string& s) {
    auto ts = parse_rfc3339(s);
    if (!ts)
        throw EvalError("'" + s + "' is not a timestamp");
    return *ts;
}

bool compare_values(const Value& lhs, CompareOp op, const Value& rhs) {
    using T = Value::Type;
    if (lhs.type == T::Null || rhs.type == T::Null)
        return false;
    if (lhs.type == T::Str && rhs.type == T::Str)
        return apply_order(op, lhs.s.compare(rhs.s) < 0 ? -1 : (lhs.s == rhs.s ? 0 : 1));
    if (lhs.type == T::Int && rhs.type == T::Int)
        return apply_order(op, order_of(lhs.i, rhs.i));
    if (lhs.type == T::Bool && rhs.type == T::Bool)
        return apply_order(op, order_of(lhs.b ? 1 : 0, rhs.b ? 1 : 0));
    // Timestamps compare against timestamps, epoch integers, and RFC 3339
    // strings (a bare date means midnight UTC).
    if (lhs.type == T::Ts || rhs.type == T::Ts) {
        auto as_ts = [](const Value& v) -> std::int64_t {
            switch (v.type) {
            case T::Ts:
            case T::Int:
                return v.i;
            case T::Str:
                return timestamp_from_string(v.s);
            default:
                throw EvalError("cannot compare timestamp with boolean");
            }
        };
        return apply_order(op, order_of(as_ts(lhs), as_ts(rhs)));
    }
    throw EvalError("type mismatch in comparison");
}

struct RankedEmission {
    std::string key;
    double best_score = std::numeric_limits<double>::quiet_NaN();
    std::size_t order = 0; // first-emission position
};

} // namespace

const std::string* ElementCursor::get(std::string_view path) const {
    for (const auto& [k, v] : attrs)
        if (k == path)
            return &v;
    return nullptr;
}

std::vector<ElementCursor> expand_json_each(const EmailRecord& record,
                                            std::string_view list_field) {
    std::vector<ElementCursor> cursors;
    if (list_field == "folder_labels") {
        for (const auto& label : record.folder_labels)
            cursors.push_back({{{"id", label.id}, {"name", label.name}}});
    } else if (list_field == "attachment_list") {
        for (const auto& att : record.attachment_list)
            cursors.push_back(
                {{{"id", att.id}, {"filename", att.filename}, {"text", att.text}}});
    } else {
        throw EvalError("'" + std::string(list_field) + "' is not a list field");
    }
    return cursors;
}

bool evaluate_predicate(const Predicate& pred, const EmailRecord& record,
                        const ElementCursor* cursor,
                        const std::vector<CandidateBinding>& bindings, std::int64_t now) {
    struct Visitor {
        const EmailRecord& record;
        const ElementCursor* cursor;
        const std::vector<CandidateBinding>& bindings;
        std::int64_t now;

        bool operator()(const Comparison& c) const {
            return compare_values(operand_value(c.lhs, record, cursor, now), c.op,
                                  operand_value(c.rhs, record, cursor, now));
        }
        bool operator()(const Membership& m) const {
            if (m.placeholder >= bindings.size())
                throw EvalError("unbound placeholder <vector_" + std::to_string(m.placeholder) +
                                ">");
            Value v = operand_value(m.expr, record, cursor, now);
            if (v.type == Value::Type::Null)
                return false;
            if (v.type != Value::Type::Str)
                throw EvalError("IN requires a key-valued operand");
            return bindings[m.placeholder].contains(v.s);
        }
        bool operator()(const BoolConst& b) const { return b.value; }
        bool operator()(const AndGroup& g) const {
            for (const auto& t : g.terms)
                if (!evaluate_predicate(t, record, cursor, bindings, now))
                    return false;
            return true;
        }
        bool operator()(const OrGroup& g) const {
            for (const auto& t : g.terms)
                if (evaluate_predicate(t, record, cursor, bindings, now))
                    return true;
            return false;
        }
    };
    return std::visit(Visitor{record, cursor, bindings, now}, pred.node);
}

ExecOutcome execute(const DslProgram& program, const ExecutionContext& ctx) {
    const auto start = std::chrono::steady_clock::now();
    try {
        // Vector queries first; their keys become the IN constraints.
        std::vector<CandidateBinding> bindings;
        for (std::size_t i = 0; i < program.vector_query_list.size(); ++i) {
            const FieldQuery& q = program.vector_query_list[i];
            const FieldIndex* index = ctx.indexes->find(q.field);
            if (index == nullptr)
                throw EvalError("no vector index for field '" + q.field + "'");
            CandidateBinding b = search(*index, q, *ctx.embedder, ctx.top_k, ctx.tau);
            b.placeholder_index = i;
            bindings.push_back(std::move(b));
        }

        std::vector<RankedEmission> emissions;
        std::unordered_map<std::string, std::size_t> emitted; // key -> emissions slot

        auto emit = [&](const std::string& key, const EmailRecord& r, const ElementCursor* cur) {
            // Ranking credit: any binding that holds the row's message id
            // or the projected element's id.
            double score = std::numeric_limits<double>::quiet_NaN();
            auto consider = [&](double s) {
                if (!std::isnan(s) && (std::isnan(score) || s > score))
                    score = s;
            };
            for (const auto& b : bindings) {
                consider(b.score_of(r.message_id));
                if (cur != nullptr)
                    if (const std::string* id = cur->get("id"))
                        consider(b.score_of(*id));
            }
            auto it = emitted.find(key);
            if (it == emitted.end()) {
                emitted.emplace(key, emissions.size());
                emissions.push_back({key, score, emissions.size()});
            } else if (!std::isnan(score)) {
                RankedEmission& e = emissions[it->second];
                if (std::isnan(e.best_score) || score > e.best_score)
                    e.best_score = score;
            }
        };

        for (const auto& record : ctx.corpus->records()) {
            if (program.sql.json_each_field) {
                for (const ElementCursor& cur : expand_json_each(record,
                                                                 *program.sql.json_each_field)) {
                    if (program.sql.where &&
                        !evaluate_predicate(*program.sql.where, record, &cur, bindings, ctx.now))
                        continue;
                    if (const auto* proj = std::get_if<ElementProjection>(&program.sql.projection)) {
                        if (const std::string* v = cur.get(proj->path))
                            emit(*v, record, &cur);
                        // null projection: row contributes nothing
                    } else {
                        emit(record.message_id, record, &cur);
                    }
                }
            } else {
                if (program.sql.where &&
                    !evaluate_predicate(*program.sql.where, record, nullptr, bindings, ctx.now))
                    continue;
                emit(record.message_id, record, nullptr);
            }
        }

        // Scored keys first by descending score; unscored keep corpus
        // (first-emission) order behind them.
        std::stable_sort(emissions.begin(), emissions.end(),
                         [](const RankedEmission& a, const RankedEmission& b) {
                             const bool sa = !std::isnan(a.best_score);
                             const bool sb = !std::isnan(b.best_score);
                             if (sa != sb)
                                 return sa;
                             if (sa && a.best_score != b.best_score)
                                 return a.best_score > b.best_score;
                             return false;
                         });

        RetrievalResult result;
        for (const auto& e : emissions) {
            result.keys.push_back(e.key);
            if (std::isnan(e.best_score))
                result.scores.push_back(std::nullopt);
            else
                result.scores.push_back(e.best_score);
        }
        for (const auto& b : bindings)
            result.trace.push_back(b.hits.size());
        result.latency_ms =
            std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start)
                .count();
        return result;
    } catch (const EvalError& e) {
        return ExecutionFailure{e.what()};
    } catch (const IndexError& e) {
        return ExecutionFailure{e.what()};
    }
}

nlohmann::json result_to_json(const RetrievalResult& result) {
    nlohmann::json j;
    j["keys"] = result.keys;
    j["scores"] = nlohmann::json::array();
    for (const auto& s : result.scores)
        j["scores"].push_back(s ? nlohmann::json(*s) : nlohmann::json(nullptr));
    j["latency_ms"] = result.latency_ms;
    j["trace"] = result.trace;
    return j;
}

} // namespace dslq
