#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <variant>
#include <vector>

namespace dslq {

// AST for the restricted SQL dialect. The grammar is a closed whitelist:
// a single SELECT over the `email` table, optionally expanded through one
// json_each(...) source, with a predicate tree of comparisons, vector
// placeholder membership tests, and AND/OR groups.

enum class CompareOp { Eq, Ne, Lt, Le, Gt, Ge };

// Reference to a schema field of the email row.
struct FieldRef {
    std::string name;

    bool operator==(const FieldRef&) const = default;
};

// json_extract(json_each.value, '$.<path>') over the expanded element.
struct JsonPathRef {
    std::string path; // without the "$." prefix

    bool operator==(const JsonPathRef&) const = default;
};

struct StringLit {
    std::string value;

    bool operator==(const StringLit&) const = default;
};

struct IntLit {
    std::int64_t value = 0;

    bool operator==(const IntLit&) const = default;
};

struct BoolLit {
    bool value = false;

    bool operator==(const BoolLit&) const = default;
};

// date('now', '<offset> day'), resolved against the injected clock.
struct RelativeDate {
    std::int64_t offset_days = 0;

    bool operator==(const RelativeDate&) const = default;
};

using Operand = std::variant<FieldRef, JsonPathRef, StringLit, IntLit, BoolLit, RelativeDate>;

struct Comparison {
    Operand lhs;
    CompareOp op = CompareOp::Eq;
    Operand rhs;

    bool operator==(const Comparison&) const = default;
};

// <operand> IN <vector_k>
struct Membership {
    Operand expr;
    std::size_t placeholder = 0;

    bool operator==(const Membership&) const = default;
};

struct BoolConst {
    bool value = false;

    bool operator==(const BoolConst&) const = default;
};

struct Predicate;

struct AndGroup {
    std::vector<Predicate> terms; // >= 2

    bool operator==(const AndGroup&) const = default;
};

struct OrGroup {
    std::vector<Predicate> terms; // >= 2

    bool operator==(const OrGroup&) const = default;
};

struct Predicate {
    std::variant<Comparison, Membership, BoolConst, AndGroup, OrGroup> node;

    bool operator==(const Predicate&) const = default;
};

struct MessageIdProjection {
    bool operator==(const MessageIdProjection&) const = default;
};

// json_extract(json_each.value, '$.<path>') [AS <alias>]
struct ElementProjection {
    std::string path;
    std::string alias; // empty when no AS clause

    bool operator==(const ElementProjection&) const = default;
};

using Projection = std::variant<MessageIdProjection, ElementProjection>;

struct SqlAst {
    bool distinct = false;
    Projection projection = MessageIdProjection{};
    // FROM email [, json_each(email.<list_field>)]
    std::optional<std::string> json_each_field;
    std::optional<Predicate> where;

    bool operator==(const SqlAst&) const = default;
};

// One entry of the vector search query list; field is already resolved
// through the alias table.
struct FieldQuery {
    std::string field;
    std::string text;

    bool operator==(const FieldQuery&) const = default;
};

struct DslProgram {
    SqlAst sql;
    std::vector<FieldQuery> vector_query_list;

    bool operator==(const DslProgram&) const = default;
};

// Placeholder indexes referenced by the predicate, in first-appearance
// order with duplicates retained.
std::vector<std::size_t> collect_placeholders(const SqlAst& sql);

} // namespace dslq
