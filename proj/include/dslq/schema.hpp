#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace dslq {

enum class FieldType {
    String,
    Timestamp,
    Bool,
    Int,
    StringList,
    LabelList,
    AttachmentList,
};

// MESSAGE-keyed fields index one vector per record; ELEMENT-keyed fields
// index one vector per list element.
enum class Granularity { Message, Element };

struct FieldInfo {
    std::string_view name;
    FieldType type;
    bool vector_searchable = false;
    Granularity granularity = Granularity::Message;
};

// The full email schema, message_id first.
const std::vector<FieldInfo>& schema_fields();

// Lookup by exact schema name; nullptr if unknown.
const FieldInfo* find_field(std::string_view name);

// Maps query-surface names onto schema names ("email_content" ->
// "content"; schema names map to themselves). Nullopt for anything else.
std::optional<std::string> lookup_field_alias(std::string_view name);

} // namespace dslq
