#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <string_view>

#include "dslq/dsl_ast.hpp"

namespace dslq {

class ParseError : public std::runtime_error {
public:
    enum class Kind {
        NoTag,
        MultipleTags,
        UnterminatedTag,
        JsonMalformed,
        SqlSyntax,
        UnknownField,
        PlaceholderOutOfRange,
        DanglingVectorQuery,
    };

    ParseError(Kind kind, std::string message, std::size_t position = 0)
        : std::runtime_error(std::move(message)), kind(kind), position(position) {}

    Kind kind;
    std::size_t position; // byte offset into the SQL text for SqlSyntax
};

// Inner text of the unique <query>...</query> block. Tags are
// case-sensitive and must be spelled exactly.
std::string extract_tagged_query(std::string_view output);

// Parses the JSON wire format {"sql": ..., "vector_query_list": [...]}
// into a validated program. Field names are resolved through the alias
// table; placeholder arity and dangling-query invariants are enforced.
DslProgram parse_program(std::string_view text);

// Canonical wire-format rendering. parse_program(render_program(p)) is
// structurally equal to p for every valid program.
std::string render_program(const DslProgram& program);

// The SQL clause alone, canonically formatted.
std::string render_sql(const SqlAst& sql);

// Exposed for tests and datagen; throws ParseError{SqlSyntax, UnknownField}.
SqlAst parse_sql(std::string_view sql);

} // namespace dslq
