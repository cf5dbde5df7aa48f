#pragma once
// Configuration and the interactive clarification loop behind the
// command-line binary. Configuration merges in fixed precedence: built-in
// defaults, then a JSON config file, then CAREPIPE_* environment
// variables, then explicit flag overrides.

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <map>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

#include "carepipe/parser.hpp"
#include "carepipe/pipeline.hpp"
#include "carepipe/retrieval.hpp"
#include "carepipe/scheduler.hpp"
#include "carepipe/store.hpp"
#include "carepipe/types.hpp"

namespace carepipe::cli {

class ConfigError : public std::runtime_error {
public:
    enum class Kind { FileUnreadable, MalformedFile, UnknownKey, BadValue };

    ConfigError(Kind kind, const std::string& message)
        : std::runtime_error(message), kind(kind) {}

    Kind kind;
};

struct Config {
    // file paths
    std::string corpus;
    std::string residents;
    std::string categories;
    std::string store = "carepipe-store.jsonl";
    std::string case_definition;  // assurance case; empty means the bundled one

    // parser thresholds
    double fuzzy_threshold = 0.8;
    double tie_tolerance = 0.05;
    double gate_threshold = 0.7;

    // retrieval
    double k1 = 1.2;
    double b = 0.75;
    double rrf_k = 60.0;
    std::size_t embedding_dim = 256;
    double min_similarity = 0.3;

    // replay budgets
    double delta = 0.05;
    double tau_ms = 2000.0;

    uint64_t seed = 42;
    bool confirm_on_fire = false;

    bool operator==(const Config&) const = default;
};

// Every accepted key, in declaration order. "case" selects the assurance
// case path; the rest match the field names.
const std::vector<std::string>& config_keys();

// One key=value assignment, shared by the env and flag layers. Booleans
// spell "true"/"false" (or 1/0). Unknown keys and values that fail to
// parse or leave their documented range are loud errors.
void apply_override(Config& config, const std::string& key, const std::string& value);

// JSON object over a subset of config_keys(); unknown keys rejected.
void apply_config_text(Config& config, const std::string& text, const std::string& origin);
Config load_config_file(const std::string& path);

// Reads CAREPIPE_<KEY> (key upper-cased) for every config key. The getter
// indirection keeps the layer testable without touching the process
// environment; the nullary form wraps std::getenv.
using EnvGetter = std::function<const char*(const std::string&)>;
void apply_env(Config& config, const EnvGetter& get);
void apply_env(Config& config);

// Re-checks every range invariant on the merged result.
void validate(const Config& config);

parser::ParserConfig parser_config(const Config& config);
scheduler::SchedulerConfig scheduler_config(const Config& config);
pipeline::ReplayConfig replay_config(const Config& config);
retrieval::Bm25Params bm25_params(const Config& config);

// ---------------------------------------------------------------------------
// Interactive clarification loop

struct ResidentAnswer {
    std::string resident_id;
    bool operator==(const ResidentAnswer&) const = default;
};
struct TimeAnswer {
    UtcTime time;
    bool operator==(const TimeAnswer&) const = default;
};
struct SkipAnswer {
    bool operator==(const SkipAnswer&) const = default;
};
using ClarificationAnswer = std::variant<ResidentAnswer, TimeAnswer, SkipAnswer>;

class MalformedAnswer : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// `resident=r-amara-okafor`, `time=2025-03-01T14:00Z`, or `skip`.
// Surrounding whitespace is ignored; anything else is MalformedAnswer.
ClarificationAnswer parse_answer(const std::string& line);

// The answer stream ran dry while a prompt was waiting. Carries what a
// rerun needs: how many transcripts already resolved, which one was
// blocked, and the answers pinned so far.
class AbortedByUser : public std::runtime_error {
public:
    AbortedByUser(std::size_t completed, std::string pending_transcript, std::string resume_json)
        : std::runtime_error("answer stream exhausted at transcript " + pending_transcript),
          completed(completed), pending_transcript(std::move(pending_transcript)),
          resume_json(std::move(resume_json)) {}

    std::size_t completed;           // transcripts fully resolved before the abort
    std::string pending_transcript;  // the one whose prompt went unanswered
    std::string resume_json;         // single-line resume state
};

// Rule-based parsing with per-transcript answers pinned in, so a replay
// after the prompt pass reproduces the answered parses deterministically.
class AnsweringParser final : public parser::ParserAdapter {
public:
    explicit AnsweringParser(parser::ParserConfig config = {}) : config_(config) {}

    parser::ParseOutcome parse(const Transcript& transcript,
                               const Registries& registries) const override;

    void pin(const std::string& transcript_id, const ClarificationAnswer& answer);
    const std::map<std::string, parser::ParseOverrides>& pinned() const { return overrides_; }

private:
    parser::ParserConfig config_;
    std::map<std::string, parser::ParseOverrides> overrides_;
};

// Walks the corpus in replay order. Whenever a transcript would stop for
// a clarification, prints the prompt and its candidates to `prompts` and
// reads one answer line from `answers`: `skip` leaves the deferral in
// place, a resident or time answer re-parses with that field pinned
// (re-prompting if the transcript still cannot complete). Once every
// prompt is settled the corpus replays against `store` exactly as the
// batch pipeline would. Runs with the same corpus and scripted answers
// are byte-identical. An exhausted answer stream aborts before anything
// is written to the store.
pipeline::ReplayReport interactive_replay(std::vector<Transcript> corpus,
                                          const Registries& registries, Store& store,
                                          std::istream& answers, std::ostream& prompts,
                                          const Config& config);

}  // namespace carepipe::cli
