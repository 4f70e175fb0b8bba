#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cstdio>
#include <set>
#include <sstream>
#include <string>

#include "dslq/datagen.hpp"
#include "dslq/dsl_parser.hpp"
#include "support/fixtures.hpp"
#include "support/temp.hpp"

using namespace dslq;

namespace {

const HashingEmbedder& embedder() {
    static HashingEmbedder e(7, 256, 3);
    return e;
}

std::set<std::string> tokens_of(const std::string& text) {
    std::set<std::string> out;
    std::istringstream in(text);
    std::string tok;
    while (in >> tok)
        out.insert(tok);
    return out;
}

std::set<std::string> all_ids(const Corpus& corpus) {
    std::set<std::string> out;
    for (const auto& r : corpus.records())
        out.insert(r.message_id);
    return out;
}

bool shares_attribute(const EmailRecord& record, const StructuredFilter& filter) {
    for (const auto& attr : filter.attributes) {
        auto v = attribute_value(record, attr.field);
        if (v && *v == attr.value)
            return true;
    }
    return false;
}

} // namespace

TEST_CASE("the eligible filter fields are the seven metadata attributes") {
    CHECK(filter_eligible_fields() ==
          std::vector<std::string>{"account_email", "received_date", "is_draft", "is_read",
                                   "is_starred", "is_archived", "thread_msg_count"});
}

TEST_CASE("attribute values type according to the schema") {
    const Corpus c = fixtures::fixture_corpus();
    const EmailRecord& r = *c.find("m-001");

    auto account = attribute_value(r, "account_email");
    REQUIRE(account.has_value());
    CHECK(account->type == FilterValue::Type::Str);
    CHECK(account->s == "user0@corp.example");

    auto received = attribute_value(r, "received_date");
    REQUIRE(received.has_value());
    CHECK(received->type == FilterValue::Type::Day);
    CHECK(received->n == day_bucket(r.received_date));

    auto draft = attribute_value(r, "is_draft");
    REQUIRE(draft.has_value());
    CHECK(draft->type == FilterValue::Type::Bool);
    CHECK(draft->b == true);

    auto threads = attribute_value(r, "thread_msg_count");
    REQUIRE(threads.has_value());
    CHECK(threads->type == FilterValue::Type::Count);
    CHECK(threads->n == 1);

    EmailRecord blank = r;
    blank.account_email.clear();
    blank.received_date = 0;
    CHECK(!attribute_value(blank, "account_email").has_value());
    CHECK(!attribute_value(blank, "received_date").has_value());
}

TEST_CASE("structured filters draw distinct populated attributes from the gold") {
    const Corpus c = fixtures::fixture_corpus();
    const EmailRecord& gold = *c.find("m-004");
    Rng rng(11);
    for (int i = 0; i < 200; ++i) {
        std::size_t k = 1 + rng.below(3);
        StructuredFilter f = sample_structured_filter(gold, rng, filter_eligible_fields(), k);
        CHECK(f.attributes.size() == k);
        std::set<std::string> fields;
        for (const auto& attr : f.attributes) {
            fields.insert(attr.field);
            auto v = attribute_value(gold, attr.field);
            REQUIRE(v.has_value());
            CHECK(*v == attr.value);
        }
        CHECK(fields.size() == k); // no repeats
    }
}

TEST_CASE("unpinned filter sizes are uniform over {1,2,3}") {
    const Corpus c = fixtures::fixture_corpus();
    const EmailRecord& gold = *c.find("m-001");
    Rng rng(12);
    int sizes[4] = {0, 0, 0, 0};
    const int n = 10000;
    for (int i = 0; i < n; ++i)
        ++sizes[sample_structured_filter(gold, rng).attributes.size()];
    for (int k = 1; k <= 3; ++k)
        CHECK(std::abs(sizes[k] / static_cast<double>(n) - 1.0 / 3.0) < 0.02);
}

TEST_CASE("a restricted eligible list caps the filter") {
    const Corpus c = fixtures::fixture_corpus();
    const EmailRecord& gold = *c.find("m-001");
    Rng rng(13);
    StructuredFilter f =
        sample_structured_filter(gold, rng, std::vector<std::string>{"is_read"}, 3);
    REQUIRE(f.attributes.size() == 1);
    CHECK(f.attributes[0].field == "is_read");
    CHECK(f.attributes[0].value.type == FilterValue::Type::Bool);
    CHECK(f.attributes[0].value.b == false);
}

TEST_CASE("structured candidates on the hand fixture") {
    const Corpus c = fixtures::fixture_corpus();
    StructuredFilter drafts;
    drafts.attributes.push_back({"is_draft", {FilterValue::Type::Bool, "", true, 0}});
    CHECK(structured_candidates(c, drafts) ==
          std::set<std::string>{"m-001", "m-002", "m-003", "m-005", "m-008"});

    StructuredFilter starred_drafts = drafts;
    starred_drafts.attributes.push_back({"is_starred", {FilterValue::Type::Bool, "", true, 0}});
    CHECK(structured_candidates(c, starred_drafts) ==
          std::set<std::string>{"m-001", "m-002", "m-005", "m-008"});
}

TEST_CASE("structured candidates match a naive conjunction scan") {
    Corpus c = synthesize_corpus(31, 150);
    Rng rng(14);
    for (int i = 0; i < 200; ++i) {
        const EmailRecord& gold = c.records()[rng.below(c.size())];
        StructuredFilter f = sample_structured_filter(gold, rng);
        std::set<std::string> got = structured_candidates(c, f);

        std::set<std::string> want;
        for (const auto& r : c.records()) {
            bool match = true;
            for (const auto& attr : f.attributes) {
                auto v = attribute_value(r, attr.field);
                if (!v || !(*v == attr.value)) {
                    match = false;
                    break;
                }
            }
            if (match)
                want.insert(r.message_id);
        }
        CHECK(got == want);
        CHECK(got.count(gold.message_id) == 1); // the gold always matches itself
    }
}

TEST_CASE("semantic refinement filters by content cosine") {
    Corpus c = fixtures::fixture_corpus();
    std::set<std::string> ids = all_ids(c);

    // tau -1 admits everything
    CHECK(semantic_refine(c, ids, "budget", embedder(), -1.0) == ids);

    // near-exact threshold keeps only the record with identical content
    std::set<std::string> exact = semantic_refine(
        c, ids, "budget planning spreadsheet quarterly numbers", embedder(), 0.9999);
    CHECK(exact == std::set<std::string>{"m-001"});

    // subset property and agreement with a direct cosine recomputation
    Rng rng(15);
    std::vector<std::string> cues = {"budget", "contract launch", "weekly sync",
                                     "flight booking", "zzz"};
    for (int i = 0; i < 60; ++i) {
        double tau = rng.uniform(-0.2, 0.8);
        const std::string& cue = rng.pick(cues);
        std::set<std::string> got = semantic_refine(c, ids, cue, embedder(), tau);
        std::set<std::string> want;
        auto q = embedder().embed(cue);
        for (const auto& r : c.records())
            if (cosine(q, embedder().embed(r.content)) >= tau)
                want.insert(r.message_id);
        CHECK(got == want);
    }
}

TEST_CASE("candidate pools order sharers first, then content similarity") {
    std::vector<EmailRecord> records;
    auto add = [&](const char* id, const char* account, const char* content) {
        EmailRecord r;
        r.message_id = id;
        r.account_email = account;
        r.received_date = 1704067200 + static_cast<std::int64_t>(records.size()) * 97;
        r.content = content;
        records.push_back(r);
    };
    add("p-00", "acct-a", "alpha beta gamma");
    add("p-01", "acct-a", "zzz yyy xxx");
    add("p-02", "acct-b", "alpha something else");
    add("p-03", "acct-a", "www vvv uuu");
    add("p-04", "acct-b", "alpha beta gamma");
    add("p-05", "acct-b", "alpha beta gamma");
    add("p-06", "acct-b", "totally different text");
    Corpus c = Corpus::from_records(records);

    StructuredFilter f;
    f.attributes.push_back({"account_email", {FilterValue::Type::Str, "acct-a", false, 0}});

    std::vector<std::string> pool =
        build_candidate_pool(c, *c.find("p-00"), f, embedder(), 6);
    REQUIRE(pool.size() == 6);
    // gold, then account sharers in corpus order
    CHECK(pool[0] == "p-00");
    CHECK(pool[1] == "p-01");
    CHECK(pool[2] == "p-03");
    // then the identical-content pair, tie broken by ascending id
    CHECK(pool[3] == "p-04");
    CHECK(pool[4] == "p-05");
    // final slot: whichever remaining content sits closer to the gold's
    auto gold_vec = embedder().embed("alpha beta gamma");
    double sim_p02 = cosine(gold_vec, embedder().embed("alpha something else"));
    double sim_p06 = cosine(gold_vec, embedder().embed("totally different text"));
    CHECK(pool[5] == (sim_p02 > sim_p06 ? "p-02" : "p-06"));

    // prebuilt indexes must not change the pool
    IndexSet idx = build_index(c, embedder());
    CHECK(build_candidate_pool(c, *c.find("p-00"), f, embedder(), 6, &idx) == pool);
}

TEST_CASE("pool invariants hold across random golds and filters") {
    Corpus c = synthesize_corpus(5, 120);
    Rng rng(16);
    for (int i = 0; i < 100; ++i) {
        const EmailRecord& gold = c.records()[rng.below(c.size())];
        StructuredFilter f = sample_structured_filter(gold, rng);
        std::vector<std::string> pool = build_candidate_pool(c, gold, f, embedder(), 10);

        REQUIRE(pool.size() == 10);
        CHECK(pool[0] == gold.message_id);
        std::set<std::string> unique(pool.begin(), pool.end());
        CHECK(unique.size() == pool.size());

        // sharers occupy a corpus-ordered prefix right after the gold
        std::vector<std::string> sharers;
        for (const auto& r : c.records())
            if (r.message_id != gold.message_id && shares_attribute(r, f))
                sharers.push_back(r.message_id);
        std::size_t expect = std::min(sharers.size(), pool.size() - 1);
        for (std::size_t j = 0; j < expect; ++j)
            CHECK(pool[1 + j] == sharers[j]);
        // whatever follows shares nothing with the filter
        for (std::size_t j = 1 + expect; j < pool.size(); ++j)
            CHECK(!shares_attribute(*c.find(pool[j]), f));
    }
}

TEST_CASE("candidate chains nest: refined within structured within corpus") {
    Corpus c = synthesize_corpus(6, 100);
    std::set<std::string> ids = all_ids(c);
    Rng rng(17);
    for (int i = 0; i < 100; ++i) {
        const EmailRecord& gold = c.records()[rng.below(c.size())];
        StructuredFilter f = sample_structured_filter(gold, rng);
        std::set<std::string> structured = structured_candidates(c, f);
        std::set<std::string> refined =
            semantic_refine(c, structured, gold.content, embedder(), rng.uniform(-0.1, 0.5));
        for (const auto& id : refined)
            CHECK(structured.count(id) == 1);
        for (const auto& id : structured)
            CHECK(ids.count(id) == 1);
    }
}

// ---- the full generation loop ----------------------------------------

namespace {

struct GenFixture {
    Corpus corpus = synthesize_corpus(2, 250);
    IndexSet indexes = build_index(corpus, embedder());

    ExecutionContext ctx() const {
        return {&corpus, &indexes, &embedder(), fixtures::fixture_now(), 200, 0.02};
    }
};

} // namespace

TEST_CASE("generated triplets are well-formed and self-consistent") {
    GenFixture fx;
    ExecutionContext ctx = fx.ctx();
    GenerationReport report = generate_triplets(ctx, 1, 40, {});
    REQUIRE(report.triplets.size() == 40);

    for (std::size_t i = 0; i < report.triplets.size(); ++i) {
        const TripletInstance& t = report.triplets[i];
        char idbuf[16];
        std::snprintf(idbuf, sizeof(idbuf), "q%04zu", i);
        CHECK(t.query_id == idbuf);

        CHECK(t.k_str >= 1);
        CHECK(t.k_str <= 3);
        CHECK(t.k_uns >= 2);
        CHECK(t.k_uns <= 4);
        CHECK(t.cue_terms.size() == static_cast<std::size_t>(t.k_uns));
        CHECK(!t.nl_query.empty());

        // program shape: DISTINCT message_id with a single content query
        CHECK(t.program.sql.distinct);
        CHECK(std::holds_alternative<MessageIdProjection>(t.program.sql.projection));
        REQUIRE(t.program.vector_query_list.size() == 1);
        CHECK(t.program.vector_query_list[0].field == "content");

        // cue terms come from the gold's content verbatim
        const EmailRecord* gold = fx.corpus.find(t.gold_id);
        REQUIRE(gold != nullptr);
        std::set<std::string> content_tokens = tokens_of(gold->content);
        std::string joined;
        for (const auto& cue : t.cue_terms) {
            CHECK(cue.size() >= 3);
            CHECK(content_tokens.count(cue) == 1);
            if (!joined.empty())
                joined += ' ';
            joined += cue;
        }
        CHECK(t.program.vector_query_list[0].text == joined);

        // pool: gold exactly once, up front, no duplicates
        REQUIRE(t.candidate_pool.size() == 10);
        CHECK(t.candidate_pool[0] == t.gold_id);
        std::set<std::string> unique(t.candidate_pool.begin(), t.candidate_pool.end());
        CHECK(unique.size() == t.candidate_pool.size());

        // self-consistency: the program retrieves its own gold
        ExecOutcome outcome = execute(t.program, ctx);
        REQUIRE(succeeded(outcome));
        const auto& keys = std::get<RetrievalResult>(outcome).keys;
        CHECK(std::find(keys.begin(), keys.end(), t.gold_id) != keys.end());

        // cue-count support depends on the structured size
        if (t.k_str == 1)
            CHECK(t.k_uns == 4);
        if (t.k_str == 2)
            CHECK((t.k_uns == 2 || t.k_uns == 4));
        if (t.k_str == 3)
            CHECK((t.k_uns == 2 || t.k_uns == 3));
    }
}

TEST_CASE("day filters render as a bucket-bounding date pair") {
    GenFixture fx;
    GenerationReport report = generate_triplets(fx.ctx(), 3, 60, {});
    bool found = false;
    for (const TripletInstance& t : report.triplets) {
        std::string sql = render_sql(t.program.sql);
        if (sql.find("received_date >= '") != std::string::npos) {
            found = true;
            CHECK(sql.find("received_date < '") != std::string::npos);
        }
    }
    CHECK(found); // 60 draws make a received_date attribute overwhelmingly likely
}

TEST_CASE("generation is deterministic and prefix-stable in the count") {
    GenFixture fx;
    GenerationReport a = generate_triplets(fx.ctx(), 7, 12, {});
    GenerationReport b = generate_triplets(fx.ctx(), 7, 12, {});
    CHECK(a.triplets == b.triplets);
    CHECK(a.discarded == b.discarded);

    GenerationReport larger = generate_triplets(fx.ctx(), 7, 25, {});
    REQUIRE(larger.triplets.size() == 25);
    for (std::size_t i = 0; i < a.triplets.size(); ++i)
        CHECK(larger.triplets[i] == a.triplets[i]);

    GenerationReport other = generate_triplets(fx.ctx(), 8, 12, {});
    CHECK(other.triplets != a.triplets);
}

TEST_CASE("the nl hook overrides the default templates") {
    GenFixture fx;
    DatagenConfig config;
    config.nl_query_hook = [](const EmailRecord&, const StructuredFilter&,
                              const std::vector<std::string>&, Rng&) {
        return std::string("CUSTOM QUERY");
    };
    GenerationReport report = generate_triplets(fx.ctx(), 4, 3, config);
    for (const auto& t : report.triplets)
        CHECK(t.nl_query == "CUSTOM QUERY");
}

TEST_CASE("a corpus smaller than the pool cannot generate") {
    Corpus tiny = synthesize_corpus(1, 5);
    IndexSet idx = build_index(tiny, embedder());
    ExecutionContext ctx{&tiny, &idx, &embedder(), fixtures::fixture_now(), 200, 0.02};
    try {
        generate_triplets(ctx, 1, 1, {});
        FAIL("expected DatagenError");
    } catch (const DatagenError& e) {
        CHECK(e.kind == DatagenError::Kind::InsufficientCorpus);
    }
}

TEST_CASE("profiles summarize complexity and modality") {
    auto t = [](int k_str, int k_uns) {
        TripletInstance x;
        x.k_str = k_str;
        x.k_uns = k_uns;
        return x;
    };
    DatasetProfile uniform = profile_dataset({t(2, 3), t(2, 3), t(2, 3), t(2, 3)});
    CHECK(uniform.avg_k_total == doctest::Approx(5.0).epsilon(1e-12));
    CHECK(uniform.pct_content_dominated == doctest::Approx(100.0).epsilon(1e-12));
    CHECK(uniform.pct_structure_dominated == 0.0);
    CHECK(uniform.pct_balanced == 0.0);

    DatasetProfile mixed = profile_dataset({t(1, 4), t(3, 2), t(2, 2)});
    CHECK(mixed.pct_content_dominated == doctest::Approx(100.0 / 3.0).epsilon(1e-9));
    CHECK(mixed.pct_structure_dominated == doctest::Approx(100.0 / 3.0).epsilon(1e-9));
    CHECK(mixed.pct_balanced == doctest::Approx(100.0 / 3.0).epsilon(1e-9));
    CHECK(mixed.avg_k_str == doctest::Approx(2.0).epsilon(1e-12));
    CHECK(mixed.avg_k_uns == doctest::Approx(8.0 / 3.0).epsilon(1e-12));
    CHECK(mixed.avg_k_total == doctest::Approx(14.0 / 3.0).epsilon(1e-12));

    try {
        profile_dataset({});
        FAIL("expected DatagenError");
    } catch (const DatagenError& e) {
        CHECK(e.kind == DatagenError::Kind::EmptyInput);
    }

    nlohmann::json j = profile_to_json(uniform);
    CHECK(j.contains("avg_k_total"));
    CHECK(j.contains("pct_content_dominated"));
}

TEST_CASE("triplets round trip through json and jsonl files") {
    GenFixture fx;
    fixtures::TempDir dir;
    GenerationReport report = generate_triplets(fx.ctx(), 5, 8, {});
    for (const auto& t : report.triplets)
        CHECK(triplet_from_json(triplet_to_json(t)) == t);

    std::string path = dir.file("triplets.jsonl");
    save_triplets(report.triplets, path);
    CHECK(load_triplets(path) == report.triplets);

    try {
        load_triplets("/nonexistent/triplets.jsonl");
        FAIL("expected CorpusError");
    } catch (const CorpusError& e) {
        CHECK(e.kind == CorpusError::Kind::IoFailure);
    }
}

TEST_CASE("synthetic corpora are seeded, prefix-stable, and in range") {
    Corpus a = synthesize_corpus(9, 30);
    Corpus b = synthesize_corpus(9, 30);
    CHECK(a == b);

    Corpus larger = synthesize_corpus(9, 50);
    for (std::size_t i = 0; i < 30; ++i)
        CHECK(larger.records()[i] == a.records()[i]);

    Corpus other = synthesize_corpus(10, 30);
    CHECK(!(other == a));

    Corpus big = synthesize_corpus(1, 2500);
    double mean = 0.0;
    for (const auto& r : big.records())
        mean += static_cast<double>(document_token_count(r));
    mean /= static_cast<double>(big.size());
    // documents target 120-190 tokens uniformly
    CHECK(mean > 140.0);
    CHECK(mean < 170.0);

    int drafts = 0;
    for (const auto& r : big.records())
        drafts += r.is_draft ? 1 : 0;
    double draft_rate = drafts / static_cast<double>(big.size());
    CHECK(draft_rate > 0.14);
    CHECK(draft_rate < 0.22);
}
