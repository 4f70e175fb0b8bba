#include "dslq/field_index.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>

namespace dslq {

namespace {

constexpr std::string_view kFormatHeader = "# dslq-index v1";

std::string join(const std::vector<std::string>& parts) {
    std::string out;
    for (std::size_t i = 0; i < parts.size(); ++i) {
        if (i > 0)
            out += ", ";
        out += parts[i];
    }
    return out;
}

} // namespace

bool CandidateBinding::contains(std::string_view key) const {
    for (const auto& hit : hits)
        if (hit.key == key)
            return true;
    return false;
}

double CandidateBinding::score_of(std::string_view key) const {
    for (const auto& hit : hits)
        if (hit.key == key)
            return hit.score;
    return std::numeric_limits<double>::quiet_NaN();
}

const FieldIndex* IndexSet::find(std::string_view field) const {
    for (const auto& f : fields_)
        if (f.field == field)
            return &f;
    return nullptr;
}

std::string resolve_field_alias(std::string_view name) {
    auto resolved = lookup_field_alias(name);
    if (!resolved)
        throw IndexError(IndexError::Kind::UnknownField,
                         "unknown field '" + std::string(name) + "'");
    return *resolved;
}

std::string index_text_for_message_field(const EmailRecord& r, std::string_view field) {
    if (field == "subject")
        return r.subject;
    if (field == "content")
        return r.content;
    if (field == "sender_email")
        return r.sender_email;
    if (field == "sender_name")
        return r.sender_name;
    if (field == "recipient_list")
        return join(r.recipient_list);
    if (field == "cc_list")
        return join(r.cc_list);
    if (field == "bcc_list")
        return join(r.bcc_list);
    throw IndexError(IndexError::Kind::UnknownField,
                     "field '" + std::string(field) + "' is not MESSAGE-indexed");
}

IndexSet build_index(const Corpus& corpus, const Embedder& embedder) {
    IndexSet set;
    for (const auto& [field, granularity] : corpus.field_registry()) {
        FieldIndex index;
        index.field = field;
        index.granularity = granularity;
        for (const auto& r : corpus.records()) {
            if (granularity == Granularity::Message) {
                index.entries.push_back(
                    {r.message_id, embedder.embed(index_text_for_message_field(r, field))});
            } else if (field == "folder_labels") {
                for (const auto& label : r.folder_labels)
                    index.entries.push_back({label.id, embedder.embed(label.name)});
            } else { // attachment_list
                for (const auto& att : r.attachment_list)
                    index.entries.push_back(
                        {att.id, embedder.embed(att.filename + " " + att.text)});
            }
        }
        for (const auto& e : index.entries)
            if (e.vector.size() != embedder.dimension())
                throw IndexError(IndexError::Kind::DimensionMismatch,
                                 "entry dimension " + std::to_string(e.vector.size()) +
                                     " != embedder dimension " +
                                     std::to_string(embedder.dimension()));
        set.fields_.push_back(std::move(index));
    }
    return set;
}

CandidateBinding search(const FieldIndex& index, const FieldQuery& query,
                        const Embedder& embedder, std::size_t top_k, double tau) {
    if (index.field != resolve_field_alias(query.field))
        throw IndexError(IndexError::Kind::FieldMismatch,
                         "index field '" + index.field + "' does not match query field '" +
                             query.field + "'");
    const std::vector<float> q = embedder.embed(query.text);
    CandidateBinding binding;
    for (const auto& entry : index.entries) {
        if (entry.vector.size() != q.size())
            throw IndexError(IndexError::Kind::DimensionMismatch,
                             "stored vector dimension mismatch in field '" + index.field + "'");
        const double score = cosine(q, entry.vector);
        if (score >= tau)
            binding.hits.push_back({entry.key, score});
    }
    std::sort(binding.hits.begin(), binding.hits.end(), [](const auto& a, const auto& b) {
        if (a.score != b.score)
            return a.score > b.score;
        return a.key < b.key;
    });
    if (binding.hits.size() > top_k)
        binding.hits.resize(top_k);
    return binding;
}

void save_index(const IndexSet& index, const std::string& path) {
    std::ofstream out(path, std::ios::trunc);
    if (!out)
        throw IndexError(IndexError::Kind::BadFormat, "cannot open '" + path + "' for writing");
    out << kFormatHeader << '\n';
    char buf[64];
    for (const auto& field : index.fields()) {
        for (const auto& entry : field.entries) {
            out << field.field << '\t'
                << (field.granularity == Granularity::Message ? "message" : "element") << '\t'
                << entry.key << '\t';
            for (std::size_t i = 0; i < entry.vector.size(); ++i) {
                auto res = std::to_chars(buf, buf + sizeof(buf), entry.vector[i]);
                if (i > 0)
                    out << ' ';
                out.write(buf, res.ptr - buf);
            }
            out << '\n';
        }
        // Keep empty fields visible so reload == rebuild structurally.
        if (field.entries.empty())
            out << field.field << '\t'
                << (field.granularity == Granularity::Message ? "message" : "element")
                << "\t\t\n";
    }
    if (!out)
        throw IndexError(IndexError::Kind::BadFormat, "write failed for '" + path + "'");
}

IndexSet load_index(const std::string& path) {
    std::ifstream in(path);
    if (!in)
        throw IndexError(IndexError::Kind::BadFormat, "cannot open '" + path + "'");
    std::string line;
    if (!std::getline(in, line) || line != kFormatHeader)
        throw IndexError(IndexError::Kind::BadFormat, "missing index format header");
    IndexSet set;
    int line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty())
            continue;
        std::size_t t1 = line.find('\t');
        std::size_t t2 = t1 == std::string::npos ? std::string::npos : line.find('\t', t1 + 1);
        std::size_t t3 = t2 == std::string::npos ? std::string::npos : line.find('\t', t2 + 1);
        if (t3 == std::string::npos)
            throw IndexError(IndexError::Kind::BadFormat,
                             "malformed index line " + std::to_string(line_no));
        std::string field = line.substr(0, t1);
        std::string gran = line.substr(t1 + 1, t2 - t1 - 1);
        std::string key = line.substr(t2 + 1, t3 - t2 - 1);
        std::string floats = line.substr(t3 + 1);
        if (gran != "message" && gran != "element")
            throw IndexError(IndexError::Kind::BadFormat,
                             "bad granularity on line " + std::to_string(line_no));
        FieldIndex* index = nullptr;
        for (auto& f : set.fields_)
            if (f.field == field)
                index = &f;
        if (index == nullptr) {
            set.fields_.push_back(
                {field, gran == "message" ? Granularity::Message : Granularity::Element, {}});
            index = &set.fields_.back();
        }
        if (key.empty() && floats.empty())
            continue; // empty-field marker
        IndexEntry entry;
        entry.key = std::move(key);
        const char* p = floats.data();
        const char* end = floats.data() + floats.size();
        while (p < end) {
            if (*p == ' ') {
                ++p;
                continue;
            }
            float v{};
            auto res = std::from_chars(p, end, v);
            if (res.ec != std::errc{})
                throw IndexError(IndexError::Kind::BadFormat,
                                 "bad float on line " + std::to_string(line_no));
            entry.vector.push_back(v);
            p = res.ptr;
        }
        index->entries.push_back(std::move(entry));
    }
    return set;
}

} // namespace dslq
