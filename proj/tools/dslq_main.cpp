// dslq: generate corpora and triplets, build field indexes, execute DSL
// programs, score rewards, evaluate runs, and demo the RL objectives.

#include <cstdint>
#include <fstream>
#include <iostream>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "dslq/corpus.hpp"
#include "dslq/datagen.hpp"
#include "dslq/dsl_parser.hpp"
#include "dslq/embedder.hpp"
#include "dslq/executor.hpp"
#include "dslq/field_index.hpp"
#include "dslq/metrics.hpp"
#include "dslq/reward.hpp"
#include "dslq/rl.hpp"
#include "dslq/time_util.hpp"

namespace {

// 0 ok, 1 config, 2 parse, 3 execution, 4 data
constexpr int kExitConfig = 1;
constexpr int kExitParse = 2;
constexpr int kExitExecution = 3;
constexpr int kExitData = 4;

constexpr const char* kDefaultNow = "2024-12-31T00:00:00Z";

struct CommonFlags {
    std::string now = kDefaultNow;
    double tau = 0.3;
    std::size_t top_k = 20;
    std::uint64_t embed_seed = 7;
    std::size_t dim = 256;
    bool timing = false;
    bool pretty = false;
};

void add_search_flags(CLI::App& cmd, CommonFlags& f) {
    cmd.add_option("--now", f.now, "Clock for relative dates (RFC 3339 or epoch seconds)");
    cmd.add_option("--tau", f.tau, "Similarity threshold");
    cmd.add_option("--top-k", f.top_k, "Vector search depth");
    cmd.add_option("--embed-seed", f.embed_seed, "Embedder hash seed");
    cmd.add_option("--dim", f.dim, "Embedding dimension");
}

std::int64_t parse_now(const std::string& text) {
    if (!text.empty() && text.find_first_not_of("-0123456789") == std::string::npos)
        return std::stoll(text);
    if (auto ts = dslq::parse_rfc3339(text))
        return *ts;
    throw CLI::ValidationError("--now", "expected RFC 3339 timestamp or epoch seconds");
}

std::string read_stream(std::istream& in) {
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw dslq::CorpusError(dslq::CorpusError::Kind::IoFailure, "cannot open " + path);
    return read_stream(in);
}

// Accepts either the bare wire JSON or a full tagged model output.
dslq::DslProgram program_from_text(const std::string& text) {
    if (text.find("<query>") != std::string::npos)
        return dslq::parse_program(dslq::extract_tagged_query(text));
    return dslq::parse_program(text);
}

void emit(const nlohmann::json& j, bool pretty) {
    std::cout << (pretty ? j.dump(2) : j.dump()) << '\n';
}

struct LoadedContext {
    dslq::Corpus corpus;
    dslq::HashingEmbedder embedder;
    dslq::IndexSet indexes;
    dslq::ExecutionContext ctx;

    LoadedContext(const std::string& corpus_path, const std::string& index_path,
                  const CommonFlags& f)
        : embedder(f.embed_seed, f.dim) {
        corpus = dslq::load_corpus(corpus_path);
        indexes = index_path.empty() ? dslq::build_index(corpus, embedder)
                                     : dslq::load_index(index_path);
        ctx = {&corpus, &indexes, &embedder, parse_now(f.now), f.top_k, f.tau};
    }
};

int cmd_gen(const std::string& corpus_out, std::uint64_t seed, std::size_t n,
            std::size_t triplet_count, const std::string& triplets_out,
            const std::string& stats_out, const dslq::DatagenConfig& dgc, const CommonFlags& f) {
    std::cerr << "# gen seed=" << seed << " n=" << n << " triplets=" << triplet_count
              << " tau=" << f.tau << " top_k=" << f.top_k << '\n';

    dslq::Corpus corpus = dslq::synthesize_corpus(seed, n);
    dslq::save_corpus(corpus, corpus_out);

    nlohmann::json summary = {{"corpus", corpus_out}, {"records", corpus.size()}};

    if (triplet_count > 0) {
        dslq::HashingEmbedder embedder(f.embed_seed, f.dim);
        dslq::IndexSet indexes = dslq::build_index(corpus, embedder);
        dslq::ExecutionContext ctx{&corpus, &indexes, &embedder, parse_now(f.now), f.top_k, f.tau};
        dslq::GenerationReport report = dslq::generate_triplets(ctx, seed, triplet_count, dgc);
        dslq::save_triplets(report.triplets, triplets_out);
        summary["triplets"] = triplets_out;
        summary["emitted"] = report.triplets.size();
        summary["discarded"] = report.discarded;

        nlohmann::json stats = {
            {"profile", dslq::profile_to_json(dslq::profile_dataset(report.triplets))},
            {"emitted", report.triplets.size()},
            {"discarded", report.discarded},
            {"seed", seed},
            {"tau", f.tau},
            {"top_k", f.top_k},
            {"pool_size", dgc.pool_size},
        };
        if (!stats_out.empty()) {
            std::ofstream out(stats_out, std::ios::binary);
            if (!out)
                throw dslq::CorpusError(dslq::CorpusError::Kind::IoFailure,
                                        "cannot open " + stats_out + " for writing");
            out << stats.dump(2) << '\n';
            summary["stats"] = stats_out;
        } else {
            summary["stats"] = stats;
        }
    }
    emit(summary, f.pretty);
    return 0;
}

int cmd_index(const std::string& corpus_path, const std::string& out, const CommonFlags& f) {
    std::cerr << "# index corpus=" << corpus_path << " dim=" << f.dim << '\n';
    dslq::Corpus corpus = dslq::load_corpus(corpus_path);
    dslq::HashingEmbedder embedder(f.embed_seed, f.dim);
    dslq::IndexSet indexes = dslq::build_index(corpus, embedder);
    dslq::save_index(indexes, out);

    std::size_t entries = 0;
    for (const auto& field : indexes.fields())
        entries += field.entries.size();
    emit({{"index", out}, {"fields", indexes.fields().size()}, {"entries", entries}}, f.pretty);
    return 0;
}

int cmd_exec(const std::string& corpus_path, const std::string& index_path,
             const std::string& program_text, const std::string& program_file,
             const CommonFlags& f) {
    std::cerr << "# exec tau=" << f.tau << " top_k=" << f.top_k << '\n';
    LoadedContext loaded(corpus_path, index_path, f);

    std::string text = !program_text.empty() ? program_text
                       : !program_file.empty() ? read_file(program_file)
                                               : read_stream(std::cin);
    dslq::DslProgram program = program_from_text(text);

    dslq::ExecOutcome outcome = dslq::execute(program, loaded.ctx);
    if (!dslq::succeeded(outcome)) {
        emit({{"failure", std::get<dslq::ExecutionFailure>(outcome).reason}}, f.pretty);
        return kExitExecution;
    }
    auto result = std::get<dslq::RetrievalResult>(outcome);
    if (!f.timing)
        result.latency_ms = 0.0;
    emit(dslq::result_to_json(result), f.pretty);
    return 0;
}

int cmd_eval(const std::string& corpus_path, const std::string& index_path,
             const std::string& triplets_path, const std::string& programs_path,
             const CommonFlags& f) {
    std::cerr << "# eval tau=" << f.tau << " top_k=" << f.top_k << '\n';
    LoadedContext loaded(corpus_path, index_path, f);
    std::vector<dslq::TripletInstance> triplets = dslq::load_triplets(triplets_path);

    std::vector<dslq::CandidateProgram> programs;
    if (programs_path.empty()) {
        for (const auto& t : triplets)
            programs.push_back({t.query_id, dslq::render_program(t.program)});
    } else {
        std::ifstream in(programs_path, std::ios::binary);
        if (!in)
            throw dslq::CorpusError(dslq::CorpusError::Kind::IoFailure,
                                    "cannot open " + programs_path);
        std::string line;
        while (std::getline(in, line)) {
            if (line.empty())
                continue;
            nlohmann::json j = nlohmann::json::parse(line, nullptr, false);
            if (j.is_discarded() || !j.contains("query_id") || !j.contains("program"))
                throw dslq::CorpusError(dslq::CorpusError::Kind::MalformedRecord,
                                        "bad program line: " + line);
            programs.push_back(
                {j["query_id"].get<std::string>(), j["program"].get<std::string>()});
        }
    }

    nlohmann::json report = dslq::evaluate_run(triplets, programs, loaded.ctx);
    if (!f.timing)
        report["latency_ms_mean"] = 0.0;
    emit(report, f.pretty);
    return 0;
}

nlohmann::json breakdown_to_json(const dslq::RewardBreakdown& b) {
    return {{"s_f", b.s_f}, {"s_e", b.s_e},     {"s_r", b.s_r},
            {"s_l", b.s_l}, {"total", b.total}, {"failure", b.failure}};
}

int cmd_reward(const std::string& corpus_path, const std::string& index_path,
               const std::string& output_text, const std::string& output_file,
               const std::string& batch_file, const std::vector<std::string>& gold,
               const dslq::RewardConfig& rc, const CommonFlags& f) {
    std::cerr << "# reward budget=" << rc.length_budget << '\n';
    LoadedContext loaded(corpus_path, index_path, f);

    if (!batch_file.empty()) {
        // one {"output": ..., "reference": [...]} per line -> one breakdown per line
        std::ifstream in(batch_file, std::ios::binary);
        if (!in)
            throw dslq::CorpusError(dslq::CorpusError::Kind::IoFailure,
                                    "cannot open " + batch_file);
        std::string line;
        while (std::getline(in, line)) {
            if (line.empty())
                continue;
            nlohmann::json j = nlohmann::json::parse(line, nullptr, false);
            if (j.is_discarded() || !j.contains("output") || !j.contains("reference"))
                throw dslq::CorpusError(dslq::CorpusError::Kind::MalformedRecord,
                                        "bad reward line: " + line);
            auto refs = j["reference"].get<std::vector<std::string>>();
            std::set<std::string> reference(refs.begin(), refs.end());
            emit(breakdown_to_json(dslq::total_reward(j["output"].get<std::string>(), loaded.ctx,
                                                      reference, rc)),
                 f.pretty);
        }
        return 0;
    }

    if (gold.empty())
        throw std::runtime_error("--gold is required unless --batch is given");
    std::string text = !output_text.empty() ? output_text
                       : !output_file.empty() ? read_file(output_file)
                                              : read_stream(std::cin);
    std::set<std::string> reference(gold.begin(), gold.end());
    emit(breakdown_to_json(dslq::total_reward(text, loaded.ctx, reference, rc)), f.pretty);
    return 0;
}

int cmd_rl_demo(std::uint64_t seed, std::size_t n, std::size_t steps, bool sweep,
                const dslq::MockPolicyConfig& policy, const dslq::ObjectiveConfig& objective,
                const dslq::RewardConfig& rc, const dslq::DatagenConfig& dgc,
                const CommonFlags& f) {
    std::cerr << "# rl-demo seed=" << seed << " n=" << n << " steps=" << steps
              << " group=" << policy.group_size << '\n';

    dslq::Corpus corpus = dslq::synthesize_corpus(seed, n);
    dslq::HashingEmbedder embedder(f.embed_seed, f.dim);
    dslq::IndexSet indexes = dslq::build_index(corpus, embedder);
    dslq::ExecutionContext ctx{&corpus, &indexes, &embedder, parse_now(f.now), f.top_k, f.tau};

    dslq::GenerationReport gen = dslq::generate_triplets(ctx, seed, std::max<std::size_t>(steps, 1), dgc);

    auto run_steps = [&](double corruption, std::string_view stream) {
        dslq::MockPolicyConfig p = policy;
        p.corruption = corruption;
        dslq::Rng rng = dslq::Rng::substream(seed, stream);
        nlohmann::json reports = nlohmann::json::array();
        double mean_reward = 0.0;
        std::size_t count = 0;
        for (std::size_t s = 0; s < steps; ++s) {
            const auto& t = gen.triplets[s % gen.triplets.size()];
            dslq::StepReport r = dslq::simulate_rollout_step(t, ctx, p, objective, rc, rng);
            for (const auto& c : r.candidates) {
                mean_reward += c.breakdown.total;
                ++count;
            }
            reports.push_back(dslq::step_report_to_json(r));
        }
        mean_reward /= static_cast<double>(count);
        return std::pair<nlohmann::json, double>(std::move(reports), mean_reward);
    };

    if (!sweep) {
        auto [reports, mean_reward] = run_steps(policy.corruption, "rl-demo");
        emit({{"steps", reports}, {"mean_reward", mean_reward}}, f.pretty);
        return 0;
    }

    const std::vector<double> levels = {0.9, 0.7, 0.5, 0.3, 0.1};
    nlohmann::json rows = nlohmann::json::array();
    bool increasing = true;
    double prev = 0.0;
    for (std::size_t i = 0; i < levels.size(); ++i) {
        auto [_, mean_reward] = run_steps(levels[i], "rl-sweep:" + std::to_string(i));
        if (i > 0 && mean_reward <= prev)
            increasing = false;
        prev = mean_reward;
        rows.push_back({{"corruption", levels[i]}, {"mean_reward", mean_reward}});
    }
    emit({{"sweep", rows}, {"reward_increases_as_corruption_drops", increasing}}, f.pretty);
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Hybrid SQL + vector retrieval DSL toolkit"};
    app.require_subcommand(1);

    CommonFlags f;
    dslq::DatagenConfig dgc;
    dslq::RewardConfig rc;
    dslq::ObjectiveConfig oc;
    dslq::MockPolicyConfig pc;

    std::uint64_t seed = 1;
    std::size_t n = 2500;
    std::size_t triplet_count = 0;
    std::size_t steps = 5;
    bool sweep = false;
    std::string corpus_path, index_path, out_path = "corpus.jsonl";
    std::string triplets_path = "triplets.jsonl", stats_path;
    std::string program_text, program_file, output_text, output_file, programs_path;
    std::vector<std::string> gold;

    auto* gen = app.add_subcommand("gen", "Synthesize a corpus and optional triplet dataset");
    gen->add_option("--seed", seed, "Root seed");
    gen->add_option("--n", n, "Corpus size");
    gen->add_option("--corpus-out", out_path, "Corpus JSONL path");
    gen->add_option("--triplets", triplet_count, "Number of triplets to emit");
    gen->add_option("--triplets-out", triplets_path, "Triplet JSONL path");
    gen->add_option("--stats-out", stats_path, "Dataset statistics JSON path");
    gen->add_option("--pool-size", dgc.pool_size, "Candidate pool size");
    gen->add_option("--max-attempts", dgc.max_attempts, "Self-consistency retries per instance");
    add_search_flags(*gen, f);
    gen->add_flag("--pretty", f.pretty, "Indent JSON output");
    // Generation wants a permissive search so gold records stay inside
    // their own vector bindings; the executor defaults stay strict.
    gen->get_option("--tau")->default_val(0.02);
    gen->get_option("--top-k")->default_val(200);

    auto* index = app.add_subcommand("index", "Build and save the per-field vector indexes");
    index->add_option("--corpus", corpus_path, "Corpus JSONL path")->required();
    index->add_option("--out", out_path, "Index file path")->required();
    add_search_flags(*index, f);
    index->add_flag("--pretty", f.pretty, "Indent JSON output");

    auto* exec = app.add_subcommand("exec", "Execute one DSL program");
    exec->add_option("--corpus", corpus_path, "Corpus JSONL path")->required();
    exec->add_option("--index", index_path, "Prebuilt index path (else build in memory)");
    exec->add_option("--program", program_text, "Program text (wire JSON or tagged output)");
    exec->add_option("--program-file", program_file, "Program file (default: stdin)");
    add_search_flags(*exec, f);
    exec->add_flag("--timing", f.timing, "Report measured latency (off for reproducible output)");
    exec->add_flag("--pretty", f.pretty, "Indent JSON output");

    auto* eval = app.add_subcommand("eval", "Evaluate programs against a triplet dataset");
    eval->add_option("--corpus", corpus_path, "Corpus JSONL path")->required();
    eval->add_option("--index", index_path, "Prebuilt index path (else build in memory)");
    eval->add_option("--triplets", triplets_path, "Triplet JSONL path")->required();
    eval->add_option("--programs", programs_path,
                     "Candidate programs JSONL (default: the triplets' own programs)");
    add_search_flags(*eval, f);
    eval->add_flag("--timing", f.timing, "Report measured latency (off for reproducible output)");
    eval->add_flag("--pretty", f.pretty, "Indent JSON output");

    auto* reward = app.add_subcommand("reward", "Score model outputs");
    std::string batch_file;
    reward->add_option("--corpus", corpus_path, "Corpus JSONL path")->required();
    reward->add_option("--index", index_path, "Prebuilt index path (else build in memory)");
    reward->add_option("--output", output_text, "Model output text");
    reward->add_option("--output-file", output_file, "Model output file (default: stdin)");
    reward->add_option("--batch", batch_file,
                       "JSONL of {output, reference} pairs; one breakdown per line");
    auto* gold_opt = reward->add_option("--gold", gold, "Reference key (repeatable)");
    gold_opt->excludes("--batch");
    reward->add_option("--length-budget", rc.length_budget, "Token budget before penalties");
    add_search_flags(*reward, f);
    reward->add_flag("--pretty", f.pretty, "Indent JSON output");

    auto* rl = app.add_subcommand("rl-demo", "Mock-policy rollout on a synthetic corpus");
    rl->add_option("--seed", seed, "Root seed");
    rl->add_option("--n", n, "Synthetic corpus size");
    rl->add_option("--steps", steps, "Rollout steps");
    rl->add_option("--group-size", pc.group_size, "Candidates per group");
    rl->add_option("--corruption", pc.corruption, "Per-candidate corruption probability");
    rl->add_flag("--sweep", sweep, "Sweep corruption levels and report mean rewards");
    rl->add_option("--clip-eps", oc.clip_eps, "Symmetric clip width");
    rl->add_option("--clip-lo", oc.clip_lo, "Decoupled lower clip width");
    rl->add_option("--clip-hi", oc.clip_hi, "Decoupled upper clip width");
    rl->add_option("--kl-beta", oc.kl_beta, "KL penalty weight");
    rl->add_option("--length-budget", rc.length_budget, "Token budget before penalties");
    rl->add_option("--pool-size", dgc.pool_size, "Candidate pool size");
    add_search_flags(*rl, f);
    rl->add_flag("--pretty", f.pretty, "Indent JSON output");
    rl->get_option("--tau")->default_val(0.02);
    rl->get_option("--top-k")->default_val(200);

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return kExitConfig;
    }

    try {
        if (gen->parsed())
            return cmd_gen(out_path, seed, n, triplet_count, triplets_path, stats_path, dgc, f);
        if (index->parsed())
            return cmd_index(corpus_path, out_path, f);
        if (exec->parsed())
            return cmd_exec(corpus_path, index_path, program_text, program_file, f);
        if (eval->parsed())
            return cmd_eval(corpus_path, index_path, triplets_path, programs_path, f);
        if (reward->parsed())
            return cmd_reward(corpus_path, index_path, output_text, output_file, batch_file,
                              gold, rc, f);
        if (rl->parsed())
            return cmd_rl_demo(seed, n, steps, sweep, pc, oc, rc, dgc, f);
    } catch (const dslq::ParseError& e) {
        std::cerr << "parse error: " << e.what() << '\n';
        return kExitParse;
    } catch (const dslq::CorpusError& e) {
        std::cerr << "data error: " << e.what() << '\n';
        return kExitData;
    } catch (const dslq::DatagenError& e) {
        std::cerr << "data error: " << e.what() << '\n';
        return kExitData;
    } catch (const dslq::MetricsError& e) {
        std::cerr << "data error: " << e.what() << '\n';
        return kExitData;
    } catch (const dslq::IndexError& e) {
        std::cerr << "index error: " << e.what() << '\n';
        return kExitData;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitConfig;
    }
    return kExitConfig;
}
