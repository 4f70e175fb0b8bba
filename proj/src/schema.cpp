#include "dslq/schema.hpp"

namespace dslq {

const std::vector<FieldInfo>& schema_fields() {
    static const std::vector<FieldInfo> fields = {
        {"message_id", FieldType::String},
        {"account_email", FieldType::String},
        {"received_date", FieldType::Timestamp},
        {"is_draft", FieldType::Bool},
        {"draft_created_date", FieldType::Timestamp},
        {"draft_modified_date", FieldType::Timestamp},
        {"is_read", FieldType::Bool},
        {"is_starred", FieldType::Bool},
        {"is_archived", FieldType::Bool},
        {"thread_msg_count", FieldType::Int},
        {"sender_email", FieldType::String, true},
        {"sender_name", FieldType::String, true},
        {"recipient_list", FieldType::StringList, true},
        {"cc_list", FieldType::StringList, true},
        {"bcc_list", FieldType::StringList, true},
        {"folder_labels", FieldType::LabelList, true, Granularity::Element},
        {"attachment_list", FieldType::AttachmentList, true, Granularity::Element},
        {"subject", FieldType::String, true},
        {"content", FieldType::String, true},
    };
    return fields;
}

const FieldInfo* find_field(std::string_view name) {
    for (const auto& f : schema_fields())
        if (f.name == name)
            return &f;
    return nullptr;
}

std::optional<std::string> lookup_field_alias(std::string_view name) {
    if (name == "email_content")
        return std::string("content");
    if (find_field(name) != nullptr)
        return std::string(name);
    return std::nullopt;
}

} // namespace dslq
