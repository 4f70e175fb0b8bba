#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

#include <json.hpp>

#include "dslq/corpus.hpp"
#include "dslq/dsl_ast.hpp"
#include "dslq/embedder.hpp"
#include "dslq/field_index.hpp"

namespace dslq {

// Everything a program execution reads. Immutable for the duration of
// the call; `now` is the injected clock for relative dates.
struct ExecutionContext {
    const Corpus* corpus = nullptr;
    const IndexSet* indexes = nullptr;
    const Embedder* embedder = nullptr;
    std::int64_t now = 0;
    std::size_t top_k = 20;
    double tau = 0.3;
};

struct RetrievalResult {
    std::vector<std::string> keys;
    std::vector<std::optional<double>> scores; // aligned with keys, non-increasing where present
    double latency_ms = 0.0;
    std::vector<std::size_t> trace; // per-placeholder binding sizes

    bool operator==(const RetrievalResult&) const = default;
};

// Runtime faults (unknown field at eval time, type mismatches,
// json_extract misuse) are data, not exceptions: reward scoring needs
// them as first-class outcomes.
struct ExecutionFailure {
    std::string reason;

    bool operator==(const ExecutionFailure&) const = default;
};

using ExecOutcome = std::variant<RetrievalResult, ExecutionFailure>;

inline bool succeeded(const ExecOutcome& outcome) {
    return std::holds_alternative<RetrievalResult>(outcome);
}

// Thrown by the evaluation helpers; execute() converts it into an
// ExecutionFailure.
class EvalError : public std::runtime_error {
public:
    explicit EvalError(std::string message) : std::runtime_error(std::move(message)) {}
};

// One expanded list element, addressable by json_extract path.
struct ElementCursor {
    std::vector<std::pair<std::string, std::string>> attrs;

    const std::string* get(std::string_view path) const;
};

// One cursor per element of the named list field; throws EvalError when
// the field is not ELEMENT-keyed.
std::vector<ElementCursor> expand_json_each(const EmailRecord& record,
                                            std::string_view list_field);

// Three-valued logic collapsed to two: comparisons against absent
// optional values are false. Throws EvalError on type mismatches.
bool evaluate_predicate(const Predicate& pred, const EmailRecord& record,
                        const ElementCursor* cursor,
                        const std::vector<CandidateBinding>& bindings, std::int64_t now);

// Runs the vector queries, injects candidate keys into the IN
// constraints, filters rows, projects and ranks. SQL filtering is
// authoritative for membership; vector scores rank the survivors.
ExecOutcome execute(const DslProgram& program, const ExecutionContext& ctx);

nlohmann::json result_to_json(const RetrievalResult& result);

} // namespace dslq
