// Single entry point for the corpus, retrieval, scheduling, replay,
// metric, and assurance commands. Machine-readable results go to stdout;
// prompts, summaries and warnings go to stderr. Configuration merges
// defaults, then --config file, then CAREPIPE_* variables, then flags.

#include <algorithm>
#include <cctype>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "carepipe/assurance.hpp"
#include "carepipe/cli.hpp"
#include "carepipe/corpus.hpp"
#include "carepipe/embedder.hpp"
#include "carepipe/json_codec.hpp"
#include "carepipe/parser.hpp"
#include "carepipe/pipeline.hpp"
#include "carepipe/retrieval.hpp"
#include "carepipe/scheduler.hpp"
#include "carepipe/store.hpp"
#include "carepipe/synth.hpp"
#include "carepipe/time_utc.hpp"
#include "carepipe/types.hpp"
#include "carepipe/validate.hpp"

using nlohmann::json;
using namespace carepipe;

namespace {

const std::map<std::string, std::string>& flag_help() {
    static const std::map<std::string, std::string> help = {
        {"corpus", "transcript corpus file (JSONL)"},
        {"residents", "resident registry file (JSONL)"},
        {"categories", "category taxonomy file (JSONL)"},
        {"store", "persistent store file (JSONL, append-only)"},
        {"case", "assurance case definition (JSONL); empty uses the bundled case"},
        {"fuzzy_threshold", "minimum normalized name similarity, in [0, 1]"},
        {"tie_tolerance", "name-match gap that forces a clarification, in [0, 1]"},
        {"gate_threshold", "confidence gate for records and scheduling, in [0, 1]"},
        {"k1", "BM25 term-frequency saturation, positive"},
        {"b", "BM25 length normalization, in [0, 1]"},
        {"rrf_k", "reciprocal-rank fusion constant, positive"},
        {"embedding_dim", "hashing embedder dimension, at least 1"},
        {"min_similarity", "weak-evidence gate threshold, in [0, 1]"},
        {"delta", "per-transcript error budget, in [0, 1]"},
        {"tau_ms", "per-transcript latency budget in milliseconds"},
        {"seed", "seed for every generation command"},
        {"confirm_on_fire", "require a follow-up confirmation after firing"},
    };
    return help;
}

struct ConfigLayers {
    std::string config_file;
    std::map<std::string, std::string> flags;  // only keys the user passed

    cli::Config merged() const {
        cli::Config config;
        if (!config_file.empty()) config = cli::load_config_file(config_file);
        cli::apply_env(config);
        for (const auto& [key, value] : flags) cli::apply_override(config, key, value);
        cli::validate(config);
        return config;
    }
};

void add_config_flags(CLI::App& app, ConfigLayers& layers) {
    app.add_option("--config", layers.config_file, "JSON config file");
    for (const std::string& key : cli::config_keys()) {
        std::string flag = "--" + key;
        std::replace(flag.begin(), flag.end(), '_', '-');
        app.add_option_function<std::string>(
            flag, [&layers, key](const std::string& value) { layers.flags[key] = value; },
            flag_help().at(key));
    }
}

std::string require_path(const std::string& value, const std::string& key) {
    if (value.empty())
        throw std::runtime_error("a " + key + " path is required (flag --" + key +
                                 ", config key \"" + key + "\", or CAREPIPE_" +
                                 [&] {
                                     std::string u;
                                     for (char ch : key)
                                         u += static_cast<char>(std::toupper(
                                             static_cast<unsigned char>(ch)));
                                     return u;
                                 }() +
                                 ")");
    return value;
}

Registries load_registries(const cli::Config& config) {
    Registries r;
    r.residents = load_residents(require_path(config.residents, "residents"));
    r.categories = load_categories(require_path(config.categories, "categories"));
    return r;
}

UtcTime parse_time_flag(const std::string& value, const std::string& flag) {
    const auto t = parse_utc(value);
    if (!t) throw std::runtime_error(flag + ": unparseable UTC time: " + value);
    return *t;
}

pipeline::FaultSpec parse_fault_spec(const std::string& text, uint64_t seed) {
    std::vector<std::string> parts;
    std::stringstream ss(text);
    std::string part;
    while (std::getline(ss, part, ':')) parts.push_back(part);
    if (parts.empty() || parts.size() > 3)
        throw std::runtime_error("--fault expects kind[:rate[:delay_ms]], got: " + text);
    const auto kind = pipeline::fault_kind_from_string(parts[0]);
    if (!kind) throw std::runtime_error("--fault: unknown fault kind: " + parts[0]);
    pipeline::FaultSpec spec;
    spec.kind = *kind;
    spec.seed = seed;
    if (parts.size() > 1) {
        try {
            spec.rate = std::stod(parts[1]);
        } catch (const std::exception&) {
            throw std::runtime_error("--fault: unparseable rate: " + parts[1]);
        }
        if (spec.rate < 0.0 || spec.rate > 1.0)
            throw std::runtime_error("--fault: rate must be in [0, 1]");
    }
    if (parts.size() > 2) {
        try {
            spec.delay_ms = std::stoi(parts[2]);
        } catch (const std::exception&) {
            throw std::runtime_error("--fault: unparseable delay: " + parts[2]);
        }
        if (spec.delay_ms < 0) throw std::runtime_error("--fault: delay must be non-negative");
    }
    return spec;
}

void write_file(const std::string& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + path);
    out << content;
    if (!out) throw std::runtime_error("short write to " + path);
}

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot read " + path);
    std::stringstream buffer;
    buffer << in.rdbuf();
    return buffer.str();
}

// ---------------------------------------------------------------------------
// Subcommand handlers

void run_corpus_generate(const ConfigLayers& layers, std::size_t size, double reminder_fraction,
                         double adversarial_fraction, const std::string& out_dir) {
    const cli::Config config = layers.merged();
    synth::CorpusSpec spec;
    spec.size = size;
    spec.reminder_fraction = reminder_fraction;
    spec.adversarial_fraction = adversarial_fraction;
    spec.seed = config.seed;
    const synth::GeneratedCorpus generated = synth::generate_corpus(spec);

    const std::string corpus_path =
        config.corpus.empty() ? out_dir + "/corpus.jsonl" : config.corpus;
    const std::string residents_path =
        config.residents.empty() ? out_dir + "/residents.jsonl" : config.residents;
    const std::string categories_path =
        config.categories.empty() ? out_dir + "/categories.jsonl" : config.categories;
    save_corpus(generated.transcripts, corpus_path);
    save_residents(generated.residents, residents_path);
    save_categories(generated.categories, categories_path);

    std::size_t reminder_truths = 0;
    for (const Transcript& t : generated.transcripts)
        if (t.truth && t.truth->reminder) ++reminder_truths;

    std::cerr << "generated " << generated.transcripts.size() << " transcripts ("
              << reminder_truths << " reminder truths) with seed " << config.seed << "\n";
    json j;
    j["corpus"] = corpus_path;
    j["residents"] = residents_path;
    j["categories"] = categories_path;
    j["transcripts"] = generated.transcripts.size();
    j["reminder_truths"] = reminder_truths;
    j["seed"] = config.seed;
    std::cout << j.dump() << "\n";
}

void run_ingest(const ConfigLayers& layers) {
    const cli::Config config = layers.merged();
    const auto corpus = load_corpus(require_path(config.corpus, "corpus"));
    const Registries registries = load_registries(config);
    const parser::ParserConfig pconfig = cli::parser_config(config);
    Store store(require_path(config.store, "store"));

    std::size_t records = 0, intents = 0, deferred = 0, rejected = 0;
    for (const Transcript& t : corpus) {
        const parser::ParseOutcome outcome = parser::parse(t, registries, pconfig);
        if (outcome.disposition == parser::ParseDisposition::clarification_needed) {
            ++deferred;
            continue;
        }
        const ValidationResult checked =
            validate_record(draft_from(*outcome.record), registries.residents,
                            registries.categories);
        if (const auto* error = std::get_if<ValidationError>(&checked)) {
            store.append_audit("validator", AuditAction::reject, outcome.record->record_id,
                               error->describe(), t.spoken_at);
            ++rejected;
            continue;
        }
        store.insert_record(std::get<CareRecord>(checked), "ingest", t.spoken_at);
        ++records;
        if (outcome.intent) {
            store.insert_intent(*outcome.intent, "ingest", t.spoken_at);
            ++intents;
        }
    }
    std::cerr << "ingested " << records << " records, " << intents << " intents ("
              << deferred << " deferred, " << rejected << " rejected)\n";
    json j;
    j["transcripts"] = corpus.size();
    j["records"] = records;
    j["intents"] = intents;
    j["deferred"] = deferred;
    j["rejected"] = rejected;
    std::cout << j.dump() << "\n";
}

void run_index_build(const ConfigLayers& layers) {
    const cli::Config config = layers.merged();
    Store store(require_path(config.store, "store"));
    const auto docs = retrieval::docs_from_records(store.query_records());
    json j;
    j["docs"] = docs.size();
    if (docs.empty()) {
        std::cerr << "store has no records to index\n";
        j["terms"] = 0;
        j["dimension"] = config.embedding_dim;
        std::cout << j.dump() << "\n";
        return;
    }
    const auto sparse = retrieval::InvertedIndex::build(docs);
    const HashingEmbedder embedder(config.embedding_dim);
    const auto dense = retrieval::DenseIndex::build(docs, embedder);
    j["terms"] = sparse.postings().size();
    j["average_length"] = sparse.average_length();
    j["dimension"] = dense.dimension();
    std::cerr << "indexed " << docs.size() << " records, " << sparse.postings().size()
              << " distinct terms\n";
    std::cout << j.dump() << "\n";
}

void print_results(const std::vector<retrieval::RankedResult>& results) {
    for (const auto& r : results) {
        json j;
        j["record_id"] = r.record_id;
        j["score"] = r.score;
        j["rank"] = r.rank;
        j["method"] = retrieval::to_string(r.method);
        std::cout << j.dump() << "\n";
    }
}

void print_insufficient(const retrieval::InsufficientEvidence& gate) {
    json j;
    j["insufficient_evidence"] = true;
    j["top_similarity"] = gate.top_similarity;
    j["threshold"] = gate.threshold;
    std::cout << j.dump() << "\n";
}

void run_query(const ConfigLayers& layers, const std::string& query, const std::string& method,
               std::size_t k) {
    const cli::Config config = layers.merged();
    Store store(require_path(config.store, "store"));
    const auto docs = retrieval::docs_from_records(store.query_records());
    if (docs.empty()) {
        if (method == "sparse") return;
        print_insufficient({0.0, config.min_similarity});
        return;
    }
    const retrieval::Bm25Params params = cli::bm25_params(config);
    if (method == "sparse") {
        print_results(retrieval::sparse_search(query, retrieval::InvertedIndex::build(docs), k,
                                               params));
        return;
    }
    const HashingEmbedder embedder(config.embedding_dim);
    const auto dense = retrieval::DenseIndex::build(docs, embedder);
    const auto dense_hits = retrieval::dense_search(query, dense, embedder,
                                                    method == "dense" ? k : 1);
    const double top_similarity = dense_hits.empty() ? 0.0 : dense_hits.front().score;
    std::vector<retrieval::RankedResult> results;
    if (method == "dense") {
        results = dense_hits;
    } else {
        results = retrieval::hybrid_search(query, retrieval::InvertedIndex::build(docs), dense,
                                           embedder, k, params);
    }
    const auto gated =
        retrieval::weak_evidence_gate(std::move(results), top_similarity, config.min_similarity);
    if (const auto* weak = std::get_if<retrieval::InsufficientEvidence>(&gated)) {
        print_insufficient(*weak);
        return;
    }
    print_results(std::get<std::vector<retrieval::RankedResult>>(gated));
}

void run_needle(const ConfigLayers& layers, std::size_t routine, const std::string& needle,
                std::vector<std::string> queries) {
    const cli::Config config = layers.merged();
    if (queries.empty())
        queries = {needle, "anaphylaxis epipen allergy", "quarterly invoice totals due"};
    const HashingEmbedder embedder(config.embedding_dim);
    const retrieval::NeedleReport report = retrieval::needle_harness(
        routine, needle, queries, embedder, config.seed, config.min_similarity);
    std::cerr << "needle buried in " << report.routine_count << " routine records, seed "
              << report.seed << "\n";
    for (const auto& q : report.queries) {
        json j;
        j["query"] = q.query;
        j["sparse_rank"] = q.sparse_rank;
        j["dense_rank"] = q.dense_rank;
        j["hybrid_rank"] = q.hybrid_rank;
        j["needle_similarity"] = q.needle_similarity;
        j["top_dense_similarity"] = q.top_dense_similarity;
        j["insufficient_evidence"] = q.insufficient_evidence;
        std::cout << j.dump() << "\n";
    }
}

void run_schedule_run(const ConfigLayers& layers, const std::string& until) {
    const cli::Config config = layers.merged();
    auto corpus = load_corpus(require_path(config.corpus, "corpus"));
    const Registries registries = load_registries(config);
    Store store(require_path(config.store, "store"));
    const parser::RuleBasedParser parser(cli::parser_config(config));
    scheduler::VirtualClock clock;
    scheduler::Scheduler sched(store, clock, cli::scheduler_config(config));

    std::sort(corpus.begin(), corpus.end(), [](const Transcript& a, const Transcript& b) {
        if (a.spoken_at != b.spoken_at) return a.spoken_at < b.spoken_at;
        return a.id < b.id;
    });
    pipeline::PipelineContext ctx{parser, registries, store, sched, clock};
    std::size_t scheduled = 0;
    for (const Transcript& t : corpus) {
        const PipelineOutcome outcome = pipeline::run_pipeline(t, ctx);
        scheduled += outcome.scheduled_event_count;
        store.append_outcome(outcome);
    }

    std::vector<ScheduledEvent> fired;
    if (!until.empty()) {
        clock.advance_to(parse_time_flag(until, "--until"));
        fired = sched.tick();
    }
    std::cerr << "scheduled " << scheduled << " events, fired " << fired.size() << "\n";
    for (const ScheduledEvent& e : fired) std::cout << codec::to_json(e).dump() << "\n";
}

void run_schedule_export(const ConfigLayers& layers, const std::string& ics_path) {
    const cli::Config config = layers.merged();
    Store store(require_path(config.store, "store"));
    const std::string calendar = scheduler::export_ics(store.events());
    if (ics_path == "-") {
        std::cout << calendar;
    } else {
        write_file(ics_path, calendar);
        std::cerr << "wrote " << store.events().size() << " events to " << ics_path << "\n";
    }
}

void run_schedule_confirm(const ConfigLayers& layers, const std::string& id, bool approve,
                          const std::string& now) {
    const cli::Config config = layers.merged();
    Store store(require_path(config.store, "store"));
    scheduler::VirtualClock clock;
    if (!now.empty()) clock.advance_to(parse_time_flag(now, "--now"));
    scheduler::Scheduler sched(store, clock, cli::scheduler_config(config));
    const scheduler::ConfirmOutcome outcome = sched.confirm(id, approve);
    if (const auto* events = std::get_if<std::vector<ScheduledEvent>>(&outcome)) {
        std::cerr << "approved " << id << ", materialized " << events->size() << " events\n";
        for (const ScheduledEvent& e : *events) std::cout << codec::to_json(e).dump() << "\n";
        return;
    }
    json j;
    j["id"] = id;
    j["status"] = to_string(std::get<EventStatus>(outcome));
    std::cout << j.dump() << "\n";
}

void run_replay(const ConfigLayers& layers, const std::string& report_path,
                const std::string& fault, bool with_latencies, bool overwrite, bool interactive,
                const std::string& answers_path) {
    const cli::Config config = layers.merged();
    const auto corpus = load_corpus(require_path(config.corpus, "corpus"));
    const Registries registries = load_registries(config);

    const std::string store_path = require_path(config.store, "store");
    if (overwrite) std::remove(store_path.c_str());
    Store store(store_path);
    if (!store.query_records().empty() || !store.outcomes().empty())
        throw std::runtime_error("store " + store_path +
                                 " already contains data; replay needs a fresh store "
                                 "(pass --overwrite to discard it)");

    pipeline::ReplayReport report;
    if (interactive || !answers_path.empty()) {
        std::ifstream answers_file;
        if (!answers_path.empty()) {
            answers_file.open(answers_path);
            if (!answers_file)
                throw std::runtime_error("cannot read answers file " + answers_path);
        }
        std::istream& answers = answers_path.empty() ? std::cin : answers_file;
        try {
            report = cli::interactive_replay(corpus, registries, store, answers, std::cerr,
                                             config);
        } catch (const cli::AbortedByUser& aborted) {
            const std::string resume_path =
                (report_path.empty() ? std::string("replay") : report_path) + ".resume.json";
            write_file(resume_path, aborted.resume_json + "\n");
            throw std::runtime_error(std::string(aborted.what()) + "; resume state written to " +
                                     resume_path);
        }
    } else {
        const parser::RuleBasedParser base(cli::parser_config(config));
        if (fault.empty()) {
            report = pipeline::replay(corpus, registries, base, store,
                                      cli::replay_config(config));
        } else {
            const pipeline::FaultInjectingParser faulty(base,
                                                        parse_fault_spec(fault, config.seed));
            report = pipeline::replay(corpus, registries, faulty, store,
                                      cli::replay_config(config));
        }
    }

    const std::string machine = pipeline::serialize_report(report, with_latencies);
    if (!report_path.empty()) write_file(report_path, machine);
    std::cout << machine;
    std::cerr << pipeline::render_report(report);
}

void run_metrics_eval(const std::string& report_path, const std::string& name) {
    const auto metrics = pipeline::metrics_from_report(read_file(report_path));
    if (!name.empty()) {
        const auto it = metrics.find(name);
        if (it == metrics.end())
            throw std::runtime_error("metric not present in report: " + name);
        json j;
        j[name] = it->second;
        std::cout << j.dump() << "\n";
        return;
    }
    json j = json::object();
    for (const auto& [metric, value] : metrics) j[metric] = value;
    std::cout << j.dump(2) << "\n";
}

std::map<std::string, double> load_metric_values(const std::string& path) {
    const json j = json::parse(read_file(path));
    std::map<std::string, double> values;
    const json& source = j.contains("metrics") ? j.at("metrics") : j;
    if (!source.is_object())
        throw std::runtime_error(path + ": expected a replay report or a flat metrics object");
    for (const auto& [name, value] : source.items()) {
        if (!value.is_number())
            throw std::runtime_error(path + ": metric " + name + " is not a number");
        values[name] = value.get<double>();
    }
    return values;
}

void run_assurance_evaluate(const ConfigLayers& layers, const std::string& metrics_path,
                            const std::vector<std::string>& activate) {
    const cli::Config config = layers.merged();
    const assurance::AssuranceCase c =
        config.case_definition.empty()
            ? assurance::load_case(assurance::default_case_text())
            : assurance::load_case_file(config.case_definition);
    std::set<std::string> active;
    for (const std::string& id : activate) {
        const assurance::AssuranceNode* node = c.find(id);
        if (!node) throw std::runtime_error("--activate: no such node: " + id);
        if (node->kind != assurance::NodeKind::defeater)
            throw std::runtime_error("--activate: " + id + " is not a defeater");
        active.insert(id);
    }
    const auto values = load_metric_values(metrics_path);
    const assurance::CaseStatus status = assurance::evaluate_case(c, values, active);
    std::cerr << assurance::render_report(c, status, values);
    std::cout << assurance::serialize_status(status);
}

void run_report(const std::string& report_path) {
    std::cout << pipeline::render_report(
        pipeline::report_from_json(read_file(report_path)));
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"care record pipeline: corpus, retrieval, scheduling and replay harness"};
    app.require_subcommand(1);

    ConfigLayers layers;
    add_config_flags(app, layers);

    const auto sub = [](CLI::App* parent, const std::string& name, const std::string& desc) {
        CLI::App* s = parent->add_subcommand(name, desc);
        s->fallthrough();
        return s;
    };

    // corpus generate
    CLI::App* corpus_cmd = sub(&app, "corpus", "corpus file operations");
    corpus_cmd->require_subcommand(1);
    CLI::App* generate = sub(corpus_cmd, "generate", "write a deterministic synthetic corpus");
    std::size_t gen_size = 330;
    double gen_reminder_fraction = 184.0 / 330.0;
    double gen_adversarial_fraction = 0.1;
    std::string gen_out = ".";
    generate->add_option("--size", gen_size, "number of transcripts")->check(CLI::PositiveNumber);
    generate->add_option("--reminder-fraction", gen_reminder_fraction,
                         "fraction of transcripts with reminder truth");
    generate->add_option("--adversarial-fraction", gen_adversarial_fraction,
                         "fraction of traps, ambiguous names, underspecified times");
    generate->add_option("--out", gen_out, "output directory for the three files");
    generate->callback([&] {
        run_corpus_generate(layers, gen_size, gen_reminder_fraction, gen_adversarial_fraction,
                            gen_out);
    });

    // ingest
    CLI::App* ingest = sub(&app, "ingest", "parse a corpus and persist records and intents");
    ingest->callback([&] { run_ingest(layers); });

    // index build
    CLI::App* index_cmd = sub(&app, "index", "retrieval index operations");
    index_cmd->require_subcommand(1);
    CLI::App* build = sub(index_cmd, "build", "index the stored records and report stats");
    build->callback([&] { run_index_build(layers); });

    // query
    CLI::App* query = sub(&app, "query", "search stored records");
    std::string query_text;
    std::string query_method = "hybrid";
    std::size_t query_k = 5;
    query->add_option("text", query_text, "query text")->required();
    query->add_option("--method", query_method, "sparse, dense, or hybrid")
        ->check(CLI::IsMember({"sparse", "dense", "hybrid"}));
    query->add_option("--k", query_k, "results to return")->check(CLI::PositiveNumber);
    query->callback([&] { run_query(layers, query_text, query_method, query_k); });

    // needle
    CLI::App* needle = sub(&app, "needle", "needle-in-a-haystack retrieval stress run");
    std::size_t needle_routine = 500;
    std::string needle_text =
        "urgent severe peanut allergy alert for walter with anaphylaxis risk epipen kept in the "
        "medication fridge";
    std::vector<std::string> needle_queries;
    needle->add_option("--routine", needle_routine, "routine records to bury the needle in")
        ->check(CLI::PositiveNumber);
    needle->add_option("--needle", needle_text, "text of the one critical record");
    needle->add_option("--query", needle_queries,
                       "query to run (repeatable; default: verbatim, unique-term, unrelated)");
    needle->callback([&] { run_needle(layers, needle_routine, needle_text, needle_queries); });

    // schedule run | export | confirm
    CLI::App* schedule = sub(&app, "schedule", "reminder scheduling operations");
    schedule->require_subcommand(1);
    CLI::App* schedule_run = sub(schedule, "run", "pipeline a corpus, then fire due events");
    std::string until;
    schedule_run->add_option("--until", until, "advance the clock to this UTC time and tick");
    schedule_run->callback([&] { run_schedule_run(layers, until); });
    CLI::App* schedule_export = sub(schedule, "export", "write stored events as iCalendar");
    std::string ics_out;
    schedule_export->add_option("--ics", ics_out, "output path, or - for stdout")->required();
    schedule_export->callback([&] { run_schedule_export(layers, ics_out); });
    CLI::App* schedule_confirm = sub(schedule, "confirm", "approve or reject a held request");
    std::string confirm_id;
    std::string confirm_now;
    bool approve = false, reject = false;
    schedule_confirm->add_option("id", confirm_id, "confirmation request id or event id")
        ->required();
    schedule_confirm->add_flag("--approve", approve, "approve the request");
    schedule_confirm->add_flag("--reject", reject, "reject the request");
    schedule_confirm->add_option("--now", confirm_now, "virtual clock position (UTC)");
    schedule_confirm->callback([&] {
        if (approve == reject)
            throw CLI::ValidationError("schedule confirm", "pass exactly one of --approve/--reject");
        run_schedule_confirm(layers, confirm_id, approve, confirm_now);
    });

    // replay
    CLI::App* replay = sub(&app, "replay", "replay a corpus and report metrics");
    std::string report_out, fault_spec, answers_path;
    bool with_latencies = false, overwrite = false, interactive = false;
    replay->add_option("--report", report_out, "also write the machine report here");
    replay->add_option("--fault", fault_spec, "inject a fault: kind[:rate[:delay_ms]]");
    replay->add_flag("--with-latencies", with_latencies,
                     "include measured wall-clock timings (non-canonical)");
    replay->add_flag("--overwrite", overwrite, "discard an existing store file first");
    replay->add_flag("--interactive", interactive, "read clarification answers from stdin");
    replay->add_option("--answers", answers_path, "scripted clarification answers file");
    replay->callback([&] {
        run_replay(layers, report_out, fault_spec, with_latencies, overwrite, interactive,
                   answers_path);
    });

    // metrics eval
    CLI::App* metrics_cmd = sub(&app, "metrics", "metric extraction");
    metrics_cmd->require_subcommand(1);
    CLI::App* eval = sub(metrics_cmd, "eval", "print the metrics of a machine report");
    std::string metrics_report, metric_name;
    eval->add_option("--report", metrics_report, "machine report file")->required();
    eval->add_option("--name", metric_name, "print one metric instead of all");
    eval->callback([&] { run_metrics_eval(metrics_report, metric_name); });

    // assurance evaluate
    CLI::App* assurance_cmd = sub(&app, "assurance", "assurance case operations");
    assurance_cmd->require_subcommand(1);
    CLI::App* evaluate = sub(assurance_cmd, "evaluate", "evaluate the case against metrics");
    std::string assurance_metrics;
    std::vector<std::string> activate;
    evaluate->add_option("--metrics", assurance_metrics,
                         "machine replay report or flat metrics JSON")
        ->required();
    evaluate->add_option("--activate", activate, "treat this defeater as active (repeatable)");
    evaluate->callback([&] { run_assurance_evaluate(layers, assurance_metrics, activate); });

    // report
    CLI::App* report_cmd = sub(&app, "report", "render a machine report for humans");
    std::string render_path;
    report_cmd->add_option("--report", render_path, "machine report file")->required();
    report_cmd->callback([&] { run_report(render_path); });

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
