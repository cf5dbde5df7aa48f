#pragma once
// End-to-end composition and corpus replay. Each transcript runs
// parse -> validate -> insert -> schedule; per-stage 0/1 error against
// ground truth and wall-clock latency are recorded, and replay rolls
// them up into the metric set the assurance case consumes.
//
// Error accounting: a stage's error is 0 when its output agrees with the
// transcript's ground truth, 1 on a mismatch, and absent when there is
// no truth. Clarification and confirmation outcomes are safe deferrals:
// those transcripts are excluded from the mean-error denominator and
// counted separately. Rejections stay in the denominator.

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "carepipe/parser.hpp"
#include "carepipe/scheduler.hpp"
#include "carepipe/store.hpp"
#include "carepipe/types.hpp"

namespace carepipe::pipeline {

struct StageBudget {
    double delta = 0.05;     // max acceptable mean cumulative error
    double tau_ms = 2000.0;  // max acceptable per-transcript total latency
};

// ---------------------------------------------------------------------------
// Fault injection

enum class FaultKind { none, drop_field, wrong_resident, delay_ms };

std::string to_string(FaultKind k);
std::optional<FaultKind> fault_kind_from_string(std::string_view s);

struct FaultSpec {
    FaultKind kind = FaultKind::none;
    double rate = 1.0;   // fraction of transcripts hit, chosen by id hash
    uint64_t seed = 0;
    int delay_ms = 0;    // only for FaultKind::delay_ms
};

// Wraps a parser and corrupts (or delays) its outcome for a
// deterministic, seed-selected subset of transcripts.
class FaultInjectingParser final : public parser::ParserAdapter {
public:
    FaultInjectingParser(const parser::ParserAdapter& inner, FaultSpec spec)
        : inner_(inner), spec_(spec) {}

    parser::ParseOutcome parse(const Transcript& transcript,
                               const Registries& registries) const override;

    // Stateless per-id choice, so selection is independent of replay order.
    bool selects(const std::string& transcript_id) const;

    const FaultSpec& spec() const { return spec_; }

private:
    const parser::ParserAdapter& inner_;
    FaultSpec spec_;
};

// ---------------------------------------------------------------------------
// Single-transcript run

struct PipelineContext {
    const parser::ParserAdapter& parser;
    const Registries& registries;
    Store& store;
    scheduler::Scheduler& scheduler;
    scheduler::VirtualClock& clock;
};

// Runs one transcript through every stage it reaches. A stage entry's
// `success` means the stage ran without failing; deferrals count as
// successes and are told apart by the outcome's disposition. Stage
// failures are captured in the outcome, never thrown past the harness.
PipelineOutcome run_pipeline(const Transcript& transcript, PipelineContext& ctx);

// True iff the stage list is a non-empty prefix of
// parse, validate, insert, schedule.
bool stages_in_order(const PipelineOutcome& outcome);

// ---------------------------------------------------------------------------
// Corpus replay

struct ReplayConfig {
    StageBudget budget;
    scheduler::SchedulerConfig scheduler;
};

struct DispositionCounts {
    std::size_t completed = 0;
    std::size_t clarification_requested = 0;
    std::size_t rejected = 0;
};

struct ReplayReport {
    std::vector<PipelineOutcome> outcomes;  // sorted by transcript id
    std::size_t transcript_count = 0;
    std::size_t truth_count = 0;
    DispositionCounts dispositions;
    std::map<std::string, std::size_t> clarification_fields;  // field -> count

    // Mean per-transcript error sum over charged transcripts: those with
    // ground truth whose disposition is not a deferral.
    double mean_error = 0.0;
    std::size_t error_sample = 0;
    bool error_within_budget = true;

    // Measured wall-clock; excluded from the canonical serialization.
    double mean_latency_ms = 0.0;
    double max_latency_ms = 0.0;
    bool latency_within_budget = true;

    StageBudget budget;

    // Flattened metric values ("insertion_accuracy.ci_low", ...) for
    // evidence bindings. Undefined metrics are absent, never faked.
    std::map<std::string, double> metrics;
};

// Replays every transcript in (spoken_at, id) order against a fresh
// scheduler bound to `store`, persisting records, intents, events and
// outcomes there, then aggregates the full metric set.
ReplayReport replay(std::vector<Transcript> corpus, const Registries& registries,
                    const parser::ParserAdapter& adapter, Store& store,
                    const ReplayConfig& config = {});

// Machine-readable JSON. The canonical form (include_latencies=false)
// zeroes measured timings and omits the latency block so identical runs
// serialize byte-identically.
std::string serialize_report(const ReplayReport& report, bool include_latencies = false);

// The "metrics" object of a serialized report.
std::map<std::string, double> metrics_from_report(const std::string& json_text);

// Inverse of serialize_report. Canonical input restores with zeroed
// latency aggregates; serialize(report_from_json(s)) == s either way.
ReplayReport report_from_json(const std::string& json_text);

// Human-readable summary.
std::string render_report(const ReplayReport& report);

}  // namespace carepipe::pipeline
