#include "dslq/datagen.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <unordered_map>

#include "dslq/dsl_parser.hpp"
#include "dslq/embedder.hpp"
#include "dslq/field_index.hpp"
#include "dslq/reward.hpp"
#include "dslq/time_util.hpp"

namespace dslq {

namespace {

// ---- synthetic corpus vocabulary ------------------------------------

const std::vector<std::string> kCommonWords = {
    "the",     "and",     "for",      "with",     "from",   "about",  "please",
    "update",  "team",    "meeting",  "notes",    "review", "next",   "week",
    "will",    "need",    "send",     "new",      "time",   "plan",   "status",
    "reply",   "request", "project",  "call",     "schedule", "office", "summary",
    "details", "follow",  "thanks",   "regarding", "our",    "your",   "this",
    "that",    "before",  "after",    "during",   "today",  "tomorrow", "morning",
    "afternoon", "final", "short",    "quick",    "open",   "closed",
};

const std::vector<std::vector<std::string>> kTopicWords = {
    {"budget", "invoice", "payment", "expense", "quarterly", "revenue", "forecast",
     "audit", "payroll", "reimbursement", "spreadsheet", "approval", "vendor",
     "billing", "statement", "fiscal", "margin", "allocation"},
    {"contract", "clause", "agreement", "counsel", "compliance", "liability",
     "signature", "amendment", "confidentiality", "arbitration", "renewal",
     "negotiation", "counterparty", "indemnity", "litigation", "regulatory",
     "disclosure", "addendum"},
    {"deploy", "release", "pipeline", "regression", "latency", "cluster",
     "rollout", "incident", "migration", "kernel", "refactor", "benchmark",
     "logging", "throughput", "outage", "patch", "debugging", "telemetry"},
    {"candidate", "interview", "resume", "offer", "onboarding", "recruiter",
     "referral", "headcount", "screening", "panel", "compensation", "relocation",
     "orientation", "probation", "staffing", "vacancy", "roster", "shortlist"},
    {"campaign", "launch", "branding", "newsletter", "engagement", "audience",
     "conversion", "sponsorship", "webinar", "outreach", "analytics",
     "impressions", "creative", "messaging", "channel", "promotion",
     "segmentation", "banner"},
    {"itinerary", "flight", "hotel", "booking", "visa", "conference", "summit",
     "reservation", "shuttle", "terminal", "layover", "luggage", "passport",
     "venue", "registration", "agenda", "keynote", "badge"},
    {"roadmap", "milestone", "prototype", "feedback", "sprint", "backlog",
     "requirement", "mockup", "usability", "beta", "iteration", "stakeholder",
     "adoption", "metric", "workflow", "integration", "specification", "demo"},
    {"lease", "renovation", "maintenance", "furniture", "parking", "cafeteria",
     "janitorial", "elevator", "heating", "lighting", "workspace", "signage",
     "inspection", "utilities", "recycling", "courier", "storage", "keycard"},
};

const std::vector<std::string> kLabelNames = {
    "inbox",    "important", "finance", "travel", "team",  "clients",
    "archive",  "follow-up", "personal", "projects", "legal", "events",
};

const std::vector<std::string> kAttachmentNames = {
    "report.pdf",  "invoice.pdf", "contract.docx", "slides.pptx",
    "notes.txt",   "summary.xlsx", "agenda.docx",  "scan.pdf",
    "budget.xlsx", "timeline.pdf", "photo.png",    "minutes.docx",
};

const std::vector<std::string> kFirstNames = {
    "Alice", "Ben",   "Carla", "Daniel", "Elena",  "Frank", "Grace",
    "Hiro",  "Irene", "Jonas", "Keiko",  "Luis",   "Mara",  "Nadia",
    "Omar",  "Priya", "Quentin", "Rosa", "Sam",    "Tara",
};

const std::vector<std::string> kLastNames = {
    "Chen",   "Alvarez", "Brandt",    "Okafor", "Singh",   "Weber",  "Tanaka",
    "Moreau", "Lindqvist", "Novak",   "Petrov", "Silva",   "Haddad", "Kim",
    "Johansson", "Ferrara", "Osei",   "Duran",  "Kowalski", "Bauer",
};

std::string ascii_lower(std::string_view s) {
    std::string out(s);
    for (char& c : out)
        if (c >= 'A' && c <= 'Z')
            c = static_cast<char>(c - 'A' + 'a');
    return out;
}

// Biased toward low indexes so word frequencies are roughly Zipfian.
const std::string& zipf_pick(const std::vector<std::string>& pool, Rng& rng) {
    double u = rng.uniform();
    auto idx = static_cast<std::size_t>(u * u * static_cast<double>(pool.size()));
    if (idx >= pool.size())
        idx = pool.size() - 1;
    return pool[idx];
}

std::string make_text(std::size_t words, std::size_t topic, double common_p, Rng& rng) {
    std::string out;
    for (std::size_t i = 0; i < words; ++i) {
        if (i)
            out += ' ';
        out += rng.chance(common_p) ? zipf_pick(kCommonWords, rng)
                                    : zipf_pick(kTopicWords[topic], rng);
    }
    return out;
}

std::vector<std::string> pick_distinct(const std::vector<std::string>& pool, std::size_t n,
                                       Rng& rng) {
    std::vector<std::size_t> idx(pool.size());
    for (std::size_t i = 0; i < idx.size(); ++i)
        idx[i] = i;
    rng.shuffle(idx);
    std::vector<std::string> out;
    for (std::size_t i = 0; i < n && i < pool.size(); ++i)
        out.push_back(pool[idx[i]]);
    return out;
}

constexpr std::int64_t kCorpusEpochStart = 1704067200; // 2024-01-01T00:00:00Z

EmailRecord make_record(std::uint64_t seed, std::size_t i) {
    Rng rng = Rng::substream(seed, "record:" + std::to_string(i));

    EmailRecord r;
    char idbuf[32];
    std::snprintf(idbuf, sizeof(idbuf), "msg-%05zu", i);
    r.message_id = idbuf;

    std::size_t topic = rng.below(kTopicWords.size());
    r.subject = make_text(3 + rng.below(4), topic, 0.2, rng);
    auto target = static_cast<std::size_t>(rng.range(120, 190));
    std::size_t subject_words = static_cast<std::size_t>(count_tokens(r.subject));
    r.content = make_text(target - subject_words, topic, 0.35, rng);

    r.account_email = "user" + std::to_string(rng.below(8)) + "@corp.example";
    std::size_t s = rng.below(kFirstNames.size());
    r.sender_name = kFirstNames[s] + " " + kLastNames[s];
    r.sender_email =
        ascii_lower(kFirstNames[s]) + "." + ascii_lower(kLastNames[s]) + "@partner.example";

    std::vector<std::string> addresses;
    for (std::size_t k = 0; k < kFirstNames.size(); ++k)
        addresses.push_back(ascii_lower(kFirstNames[k]) + "." + ascii_lower(kLastNames[k]) +
                            "@client.example");
    r.recipient_list = pick_distinct(addresses, 1 + rng.below(3), rng);
    r.cc_list = pick_distinct(addresses, rng.below(3), rng);
    r.bcc_list = pick_distinct(addresses, rng.below(2), rng);

    r.received_date = kCorpusEpochStart + static_cast<std::int64_t>(rng.below(364 * 86400ULL));
    r.thread_msg_count = 1 + static_cast<std::int64_t>(rng.below(8));
    r.is_read = rng.chance(0.55);
    r.is_starred = rng.chance(0.2);
    r.is_archived = rng.chance(0.25);
    r.is_draft = rng.chance(0.18);
    if (r.is_draft) {
        r.draft_created_date = r.received_date - rng.range(86400, 10 * 86400);
        r.draft_modified_date = *r.draft_created_date + static_cast<std::int64_t>(
                                                            rng.below(7 * 86400ULL));
    }

    auto labels = pick_distinct(kLabelNames, rng.below(4), rng);
    for (std::size_t k = 0; k < labels.size(); ++k)
        r.folder_labels.push_back({"lbl-" + r.message_id + "-" + std::to_string(k), labels[k]});

    std::size_t n_att = rng.chance(0.3) ? 1 + rng.below(2) : 0;
    for (std::size_t k = 0; k < n_att; ++k) {
        Attachment a;
        a.id = "att-" + r.message_id + "-" + std::to_string(k);
        a.filename = rng.pick(kAttachmentNames);
        a.text = make_text(10 + rng.below(16), topic, 0.25, rng);
        r.attachment_list.push_back(std::move(a));
    }
    return r;
}

// ---- cue sampling ---------------------------------------------------

using TokenCounts = std::unordered_map<std::string, std::int64_t>;

void count_into(TokenCounts& counts, std::string_view text) {
    std::size_t i = 0;
    while (i < text.size()) {
        while (i < text.size() && std::isspace(static_cast<unsigned char>(text[i])))
            ++i;
        std::size_t start = i;
        while (i < text.size() && !std::isspace(static_cast<unsigned char>(text[i])))
            ++i;
        if (i > start)
            ++counts[std::string(text.substr(start, i - start))];
    }
}

TokenCounts build_token_counts(const Corpus& corpus) {
    TokenCounts counts;
    for (const auto& r : corpus.records()) {
        count_into(counts, r.subject);
        count_into(counts, r.content);
    }
    return counts;
}

// Weighted sample without replacement from the gold's content tokens,
// weight proportional to inverse corpus frequency.
std::vector<std::string> sample_cues(const EmailRecord& gold, std::size_t k,
                                     const TokenCounts& counts, Rng& rng) {
    TokenCounts own;
    count_into(own, gold.content);
    std::vector<std::pair<std::string, double>> cands;
    for (const auto& [tok, _] : own) {
        if (tok.size() < 3)
            continue;
        auto it = counts.find(tok);
        std::int64_t c = it == counts.end() ? 1 : it->second;
        cands.emplace_back(tok, 1.0 / static_cast<double>(c));
    }
    std::sort(cands.begin(), cands.end()); // map order is unspecified
    std::vector<std::string> out;
    while (out.size() < k && !cands.empty()) {
        double total = 0.0;
        for (const auto& [_, w] : cands)
            total += w;
        double u = rng.uniform() * total;
        std::size_t chosen = cands.size() - 1;
        for (std::size_t i = 0; i < cands.size(); ++i) {
            u -= cands[i].second;
            if (u < 0.0) {
                chosen = i;
                break;
            }
        }
        out.push_back(cands[chosen].first);
        cands.erase(cands.begin() + static_cast<std::ptrdiff_t>(chosen));
    }
    return out;
}

// ---- filter -> SQL / NL ---------------------------------------------

std::string day_string(std::int64_t day) {
    return format_rfc3339(day * kSecondsPerDay).substr(0, 10);
}

void append_filter_terms(const StructuredFilter& filter, std::vector<Predicate>& terms) {
    for (const auto& attr : filter.attributes) {
        switch (attr.value.type) {
        case FilterValue::Type::Str:
            terms.push_back(
                {Comparison{FieldRef{attr.field}, CompareOp::Eq, StringLit{attr.value.s}}});
            break;
        case FilterValue::Type::Bool:
            terms.push_back(
                {Comparison{FieldRef{attr.field}, CompareOp::Eq, BoolLit{attr.value.b}}});
            break;
        case FilterValue::Type::Count:
            terms.push_back(
                {Comparison{FieldRef{attr.field}, CompareOp::Eq, IntLit{attr.value.n}}});
            break;
        case FilterValue::Type::Day:
            // day equality as a half-open range of RFC 3339 dates
            terms.push_back({Comparison{FieldRef{attr.field}, CompareOp::Ge,
                                        StringLit{day_string(attr.value.n)}}});
            terms.push_back({Comparison{FieldRef{attr.field}, CompareOp::Lt,
                                        StringLit{day_string(attr.value.n + 1)}}});
            break;
        }
    }
}

DslProgram build_program(const StructuredFilter& filter, const std::vector<std::string>& cues) {
    std::vector<Predicate> terms;
    append_filter_terms(filter, terms);
    terms.push_back({Membership{FieldRef{"message_id"}, 0}});

    DslProgram program;
    program.sql.distinct = true;
    program.sql.projection = MessageIdProjection{};
    if (terms.size() == 1)
        program.sql.where = terms[0];
    else
        program.sql.where = Predicate{AndGroup{std::move(terms)}};

    std::string cue_text;
    for (std::size_t i = 0; i < cues.size(); ++i) {
        if (i)
            cue_text += ' ';
        cue_text += cues[i];
    }
    program.vector_query_list.push_back({"content", cue_text});
    return program;
}

std::string join_natural(const std::vector<std::string>& parts) {
    std::string out;
    for (std::size_t i = 0; i < parts.size(); ++i) {
        if (i) {
            out += i + 1 == parts.size() ? " and " : ", ";
        }
        out += parts[i];
    }
    return out;
}

std::string render_nl(const EmailRecord&, const StructuredFilter& filter,
                      const std::vector<std::string>& cues, Rng& rng) {
    static const std::vector<std::string> kOpeners = {"Find emails", "Show emails",
                                                      "List the emails", "Retrieve emails"};
    static const std::vector<std::string> kCueLeads = {"about", "mentioning", "related to"};

    std::string out = rng.pick(kOpeners);
    for (const auto& attr : filter.attributes) {
        out += ' ';
        if (attr.field == "account_email") {
            out += "in the " + attr.value.s + " account";
        } else if (attr.field == "received_date") {
            out += "received on " + day_string(attr.value.n);
        } else if (attr.field == "is_draft") {
            out += attr.value.b ? "that are drafts" : "that are not drafts";
        } else if (attr.field == "is_read") {
            out += attr.value.b ? "that have been read" : "that are unread";
        } else if (attr.field == "is_starred") {
            out += attr.value.b ? "that are starred" : "without a star";
        } else if (attr.field == "is_archived") {
            out += attr.value.b ? "that are archived" : "not yet archived";
        } else if (attr.field == "thread_msg_count") {
            out += "in threads with " + std::to_string(attr.value.n) + " messages";
        } else {
            out += "where " + attr.field + " matches";
        }
    }
    if (!cues.empty())
        out += ' ' + rng.pick(kCueLeads) + ' ' + join_natural(cues);
    return out;
}

TripletInstance assemble_impl(const ExecutionContext& ctx, Rng& rng, const DatagenConfig& config,
                              const TokenCounts& counts) {
    const Corpus& corpus = *ctx.corpus;
    if (corpus.size() < config.pool_size)
        throw DatagenError(DatagenError::Kind::InsufficientCorpus,
                           "corpus smaller than candidate pool size");

    // The complexity tuple is drawn once so retries cannot tilt the
    // dataset toward instances that are easier to make self-consistent.
    auto k_str = static_cast<std::size_t>(1 + rng.below(3));
    const double* dist = config.cue_count_dist[k_str - 1];
    double u = rng.uniform();
    std::size_t k_uns = u < dist[0] ? 2 : (u < dist[0] + dist[1] ? 3 : 4);

    for (int attempt = 0; attempt < config.max_attempts; ++attempt) {
        const EmailRecord& gold = corpus.records()[rng.below(corpus.size())];
        StructuredFilter filter = sample_structured_filter(gold, rng, filter_eligible_fields(),
                                                          k_str);

        std::vector<std::string> cues = sample_cues(gold, k_uns, counts, rng);
        if (cues.size() < 2)
            continue;

        DslProgram program = build_program(filter, cues);
        ExecOutcome outcome = execute(program, ctx);
        if (!succeeded(outcome))
            continue;
        const auto& result = std::get<RetrievalResult>(outcome);
        if (std::find(result.keys.begin(), result.keys.end(), gold.message_id) ==
            result.keys.end())
            continue; // program does not retrieve its own gold; resample

        TripletInstance t;
        t.nl_query = config.nl_query_hook ? config.nl_query_hook(gold, filter, cues, rng)
                                          : render_nl(gold, filter, cues, rng);
        t.program = std::move(program);
        t.gold_id = gold.message_id;
        t.candidate_pool = build_candidate_pool(corpus, gold, filter, *ctx.embedder,
                                                config.pool_size, ctx.indexes);
        t.cue_terms = std::move(cues);
        t.k_str = static_cast<int>(filter.attributes.size());
        t.k_uns = static_cast<int>(t.cue_terms.size());
        return t;
    }
    throw DatagenError(DatagenError::Kind::RetryExhausted,
                       "no self-consistent triplet within retry budget");
}

} // namespace

const std::vector<std::string>& filter_eligible_fields() {
    static const std::vector<std::string> kFields = {
        "account_email", "received_date", "is_draft",        "is_read",
        "is_starred",    "is_archived",   "thread_msg_count",
    };
    return kFields;
}

std::optional<FilterValue> attribute_value(const EmailRecord& record, const std::string& field) {
    FilterValue v;
    if (field == "account_email") {
        if (record.account_email.empty())
            return std::nullopt;
        v.type = FilterValue::Type::Str;
        v.s = record.account_email;
    } else if (field == "received_date") {
        if (record.received_date == 0)
            return std::nullopt;
        v.type = FilterValue::Type::Day;
        v.n = day_bucket(record.received_date);
    } else if (field == "thread_msg_count") {
        v.type = FilterValue::Type::Count;
        v.n = record.thread_msg_count;
    } else if (field == "is_draft" || field == "is_read" || field == "is_starred" ||
               field == "is_archived") {
        v.type = FilterValue::Type::Bool;
        v.b = field == "is_draft"     ? record.is_draft
              : field == "is_read"    ? record.is_read
              : field == "is_starred" ? record.is_starred
                                      : record.is_archived;
    } else {
        return std::nullopt;
    }
    return v;
}

Corpus synthesize_corpus(std::uint64_t seed, std::size_t n) {
    std::vector<EmailRecord> records;
    records.reserve(n);
    for (std::size_t i = 0; i < n; ++i)
        records.push_back(make_record(seed, i));
    return Corpus::from_records(std::move(records));
}

std::int64_t document_token_count(const EmailRecord& record) {
    return count_tokens(record.subject) + count_tokens(record.content);
}

StructuredFilter sample_structured_filter(const EmailRecord& gold, Rng& rng,
                                          const std::vector<std::string>& eligible,
                                          std::size_t k) {
    std::vector<std::string> populated;
    for (const auto& field : eligible)
        if (attribute_value(gold, field))
            populated.push_back(field);
    if (populated.empty())
        throw DatagenError(DatagenError::Kind::InsufficientCorpus,
                           "gold record has no populated filterable attribute");

    if (k == 0)
        k = static_cast<std::size_t>(1 + rng.below(3));
    if (k > populated.size())
        k = populated.size();
    rng.shuffle(populated);
    populated.resize(k);
    auto rank = [&eligible](const std::string& field) {
        return std::find(eligible.begin(), eligible.end(), field) - eligible.begin();
    };
    std::sort(populated.begin(), populated.end(),
              [&rank](const auto& a, const auto& b) { return rank(a) < rank(b); });

    StructuredFilter filter;
    for (const auto& field : populated)
        filter.attributes.push_back({field, *attribute_value(gold, field)});
    return filter;
}

std::set<std::string> structured_candidates(const Corpus& corpus, const StructuredFilter& filter) {
    std::set<std::string> out;
    for (const auto& r : corpus.records()) {
        bool all = true;
        for (const auto& attr : filter.attributes) {
            auto v = attribute_value(r, attr.field);
            if (!v || !(*v == attr.value)) {
                all = false;
                break;
            }
        }
        if (all)
            out.insert(r.message_id);
    }
    return out;
}

std::set<std::string> semantic_refine(const Corpus& corpus, const std::set<std::string>& candidates,
                                      const std::string& cue_query, const Embedder& embedder,
                                      double tau) {
    std::vector<float> q = embedder.embed(cue_query);
    std::set<std::string> out;
    for (const auto& id : candidates) {
        const EmailRecord* r = corpus.find(id);
        if (!r)
            continue;
        if (cosine(q, embedder.embed(index_text_for_message_field(*r, "content"))) >= tau)
            out.insert(id);
    }
    return out;
}

std::vector<std::string> build_candidate_pool(const Corpus& corpus, const EmailRecord& gold,
                                              const StructuredFilter& filter,
                                              const Embedder& embedder, std::size_t pool_size,
                                              const IndexSet* indexes) {
    if (corpus.size() < pool_size)
        throw DatagenError(DatagenError::Kind::InsufficientCorpus,
                           "corpus smaller than candidate pool size");

    std::vector<std::string> pool = {gold.message_id};
    std::set<std::string> taken = {gold.message_id};

    // Stage 1: records sharing at least one filter attribute, corpus order.
    for (const auto& r : corpus.records()) {
        if (pool.size() >= pool_size)
            break;
        if (taken.count(r.message_id))
            continue;
        bool shares = false;
        for (const auto& attr : filter.attributes) {
            auto v = attribute_value(r, attr.field);
            if (v && *v == attr.value) {
                shares = true;
                break;
            }
        }
        if (shares) {
            pool.push_back(r.message_id);
            taken.insert(r.message_id);
        }
    }

    // Stage 2: fill with the most content-similar of the remainder.
    if (pool.size() < pool_size) {
        const FieldIndex* content_index = indexes ? indexes->find("content") : nullptr;
        std::unordered_map<std::string, const std::vector<float>*> stored;
        if (content_index)
            for (const auto& e : content_index->entries)
                stored[e.key] = &e.vector;

        auto vector_of = [&](const EmailRecord& r) -> std::vector<float> {
            if (auto it = stored.find(r.message_id); it != stored.end())
                return *it->second;
            return embedder.embed(index_text_for_message_field(r, "content"));
        };

        std::vector<float> g = vector_of(gold);
        std::vector<std::pair<double, std::string>> scored;
        for (const auto& r : corpus.records()) {
            if (taken.count(r.message_id))
                continue;
            scored.emplace_back(cosine(g, vector_of(r)), r.message_id);
        }
        std::sort(scored.begin(), scored.end(), [](const auto& a, const auto& b) {
            if (a.first != b.first)
                return a.first > b.first;
            return a.second < b.second;
        });
        for (const auto& [_, id] : scored) {
            if (pool.size() >= pool_size)
                break;
            pool.push_back(id);
        }
    }
    return pool;
}

TripletInstance assemble_triplet(const ExecutionContext& ctx, Rng& rng,
                                 const DatagenConfig& config) {
    return assemble_impl(ctx, rng, config, build_token_counts(*ctx.corpus));
}

GenerationReport generate_triplets(const ExecutionContext& ctx, std::uint64_t seed,
                                   std::size_t count, const DatagenConfig& config) {
    TokenCounts counts = build_token_counts(*ctx.corpus);
    GenerationReport report;
    std::size_t sequence = 0;
    while (report.triplets.size() < count) {
        Rng rng = Rng::substream(seed, "triplet:" + std::to_string(sequence));
        ++sequence;
        try {
            TripletInstance t = assemble_impl(ctx, rng, config, counts);
            char idbuf[16];
            std::snprintf(idbuf, sizeof(idbuf), "q%04zu", report.triplets.size());
            t.query_id = idbuf;
            report.triplets.push_back(std::move(t));
        } catch (const DatagenError& e) {
            if (e.kind != DatagenError::Kind::RetryExhausted)
                throw;
            ++report.discarded;
            if (report.discarded > 20 * count + 100)
                throw DatagenError(DatagenError::Kind::RetryExhausted,
                                   "discard rate too high; check corpus and search parameters");
        }
    }
    return report;
}

DatasetProfile profile_dataset(const std::vector<TripletInstance>& triplets) {
    if (triplets.empty())
        throw DatagenError(DatagenError::Kind::EmptyInput, "cannot profile an empty dataset");
    DatasetProfile p;
    std::size_t structure = 0, content = 0, balanced = 0;
    for (const auto& t : triplets) {
        p.avg_k_str += t.k_str;
        p.avg_k_uns += t.k_uns;
        if (t.k_str > t.k_uns)
            ++structure;
        else if (t.k_uns > t.k_str)
            ++content;
        else
            ++balanced;
    }
    auto n = static_cast<double>(triplets.size());
    p.avg_k_str /= n;
    p.avg_k_uns /= n;
    p.avg_k_total = p.avg_k_str + p.avg_k_uns;
    p.pct_structure_dominated = 100.0 * static_cast<double>(structure) / n;
    p.pct_content_dominated = 100.0 * static_cast<double>(content) / n;
    p.pct_balanced = 100.0 * static_cast<double>(balanced) / n;
    return p;
}

nlohmann::json profile_to_json(const DatasetProfile& p) {
    return {
        {"avg_k_str", p.avg_k_str},
        {"avg_k_uns", p.avg_k_uns},
        {"avg_k_total", p.avg_k_total},
        {"pct_structure_dominated", p.pct_structure_dominated},
        {"pct_content_dominated", p.pct_content_dominated},
        {"pct_balanced", p.pct_balanced},
    };
}

nlohmann::json triplet_to_json(const TripletInstance& t) {
    nlohmann::json queries = nlohmann::json::array();
    for (const auto& q : t.program.vector_query_list)
        queries.push_back({{q.field, q.text}});
    return {
        {"query_id", t.query_id},
        {"query", t.nl_query},
        {"sql", render_sql(t.program.sql)},
        {"vector_query_list", queries},
        {"gold_id", t.gold_id},
        {"candidate_pool", t.candidate_pool},
        {"cue_terms", t.cue_terms},
        {"k_str", t.k_str},
        {"k_uns", t.k_uns},
    };
}

TripletInstance triplet_from_json(const nlohmann::json& j) {
    TripletInstance t;
    t.query_id = j.at("query_id").get<std::string>();
    t.nl_query = j.at("query").get<std::string>();
    nlohmann::json program = {{"sql", j.at("sql")}, {"vector_query_list", j.at("vector_query_list")}};
    t.program = parse_program(program.dump());
    t.gold_id = j.at("gold_id").get<std::string>();
    t.candidate_pool = j.at("candidate_pool").get<std::vector<std::string>>();
    t.cue_terms = j.at("cue_terms").get<std::vector<std::string>>();
    t.k_str = j.at("k_str").get<int>();
    t.k_uns = j.at("k_uns").get<int>();
    return t;
}

void save_triplets(const std::vector<TripletInstance>& triplets, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out)
        throw CorpusError(CorpusError::Kind::IoFailure, "cannot open " + path + " for writing");
    for (const auto& t : triplets)
        out << triplet_to_json(t).dump() << '\n';
}

std::vector<TripletInstance> load_triplets(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw CorpusError(CorpusError::Kind::IoFailure, "cannot open " + path);
    std::vector<TripletInstance> out;
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty())
            continue;
        out.push_back(triplet_from_json(nlohmann::json::parse(line)));
    }
    return out;
}

} // namespace dslq
