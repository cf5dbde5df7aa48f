#include "carepipe/pipeline.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <set>
#include <sstream>
#include <thread>

#include <json.hpp>

#include "carepipe/corpus.hpp"
#include "carepipe/embedder.hpp"
#include "carepipe/json_codec.hpp"
#include "carepipe/metrics.hpp"
#include "carepipe/text.hpp"
#include "carepipe/validate.hpp"

namespace carepipe::pipeline {

namespace {

using nlohmann::json;

double ms_since(std::chrono::steady_clock::time_point start) {
    return std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start)
        .count();
}

}  // namespace

// ---------------------------------------------------------------------------
// Fault injection

std::string to_string(FaultKind k) {
    switch (k) {
        case FaultKind::none: return "none";
        case FaultKind::drop_field: return "drop_field";
        case FaultKind::wrong_resident: return "wrong_resident";
        case FaultKind::delay_ms: return "delay_ms";
    }
    return "none";
}

std::optional<FaultKind> fault_kind_from_string(std::string_view s) {
    if (s == "none") return FaultKind::none;
    if (s == "drop_field") return FaultKind::drop_field;
    if (s == "wrong_resident") return FaultKind::wrong_resident;
    if (s == "delay_ms") return FaultKind::delay_ms;
    return std::nullopt;
}

bool FaultInjectingParser::selects(const std::string& transcript_id) const {
    if (spec_.kind == FaultKind::none || spec_.rate <= 0.0) return false;
    if (spec_.rate >= 1.0) return true;
    const uint64_t h =
        HashingEmbedder::fnv1a64(transcript_id + "#" + std::to_string(spec_.seed));
    return h % 1000000 < static_cast<uint64_t>(std::llround(spec_.rate * 1e6));
}

parser::ParseOutcome FaultInjectingParser::parse(const Transcript& transcript,
                                                 const Registries& registries) const {
    parser::ParseOutcome out = inner_.parse(transcript, registries);
    if (!selects(transcript.id)) return out;
    switch (spec_.kind) {
        case FaultKind::none:
            break;
        case FaultKind::drop_field:
            if (out.record) out.record->note.clear();
            break;
        case FaultKind::wrong_resident:
            if (out.record) out.record->resident_id = "phantom-resident";
            if (out.intent) out.intent->resident_id = "phantom-resident";
            break;
        case FaultKind::delay_ms:
            std::this_thread::sleep_for(std::chrono::milliseconds(spec_.delay_ms));
            break;
    }
    return out;
}

// ---------------------------------------------------------------------------
// Single-transcript run

PipelineOutcome run_pipeline(const Transcript& transcript, PipelineContext& ctx) {
    PipelineOutcome out;
    out.transcript_id = transcript.id;
    if (transcript.spoken_at > ctx.clock.now()) ctx.clock.advance_to(transcript.spoken_at);

    const GroundTruth* truth = transcript.truth ? &*transcript.truth : nullptr;

    // parse
    auto start = std::chrono::steady_clock::now();
    parser::ParseOutcome parsed;
    bool parse_failed = false;
    try {
        parsed = ctx.parser.parse(transcript, ctx.registries);
        // a parsed disposition must carry a record
        parse_failed = parsed.disposition == parser::ParseDisposition::parsed && !parsed.record;
    } catch (const std::exception&) {
        parse_failed = true;
        parsed = {};
    }
    StageEntry parse_entry{"parse", !parse_failed, std::nullopt, ms_since(start)};

    out.reminder_detected = parsed.reminder_detected;
    const bool emitted = !parse_failed && parsed.record.has_value();
    if (emitted) {
        out.emitted_resident = parsed.record->resident_id;
        out.emitted_category = parsed.record->category_id;
        out.emitted_note = parsed.record->note;
        if (parsed.intent) out.emitted_reminder_description = parsed.intent->description;
    }

    bool parse_matches_truth = false;
    if (truth) {
        parse_matches_truth = emitted && parsed.record->resident_id == truth->resident_id &&
                              parsed.record->category_id == truth->category_id &&
                              parsed.record->note == truth->note &&
                              parsed.reminder_detected == truth->reminder;
        double eps = 0.0;
        if (parse_failed || (emitted && !parse_matches_truth)) eps = 1.0;
        parse_entry.error = eps;  // deferrals are not charged
    }
    out.stages.push_back(parse_entry);

    if (parse_failed) {
        out.disposition = Disposition::rejected;
        return out;
    }
    if (parsed.disposition == parser::ParseDisposition::clarification_needed) {
        out.disposition = Disposition::clarification_requested;
        if (parsed.clarification) out.clarification_field = to_string(parsed.clarification->field);
        return out;
    }

    // validate
    start = std::chrono::steady_clock::now();
    const ValidationResult vr = validate_record(draft_from(*parsed.record),
                                                ctx.registries.residents, ctx.registries.categories);
    const bool valid = std::holds_alternative<CareRecord>(vr);
    StageEntry validate_entry{"validate", valid, std::nullopt, ms_since(start)};
    // a rejection only counts against validate when the record it turned
    // away actually matched the truth
    if (truth) validate_entry.error = (!valid && parse_matches_truth) ? 1.0 : 0.0;
    out.stages.push_back(validate_entry);
    if (!valid) {
        out.disposition = Disposition::rejected;
        try {
            ctx.store.append_audit("validate", AuditAction::reject, parsed.record->record_id,
                                   std::get<ValidationError>(vr).describe(), ctx.clock.now());
        } catch (const StoreError&) {
        }
        return out;
    }

    // insert
    start = std::chrono::steady_clock::now();
    bool inserted = false;
    try {
        ctx.store.insert_record(std::get<CareRecord>(vr), "insert", ctx.clock.now());
        if (parsed.intent) ctx.store.insert_intent(*parsed.intent, "insert", ctx.clock.now());
        inserted = true;
    } catch (const StoreError&) {
    }
    StageEntry insert_entry{"insert", inserted, std::nullopt, ms_since(start)};
    if (truth) insert_entry.error = inserted ? 0.0 : 1.0;
    out.stages.push_back(insert_entry);
    if (!inserted) {
        out.disposition = Disposition::rejected;
        return out;
    }

    // schedule, only when a reminder intent was emitted
    if (parsed.intent) {
        start = std::chrono::steady_clock::now();
        StageEntry schedule_entry{"schedule", true, std::nullopt, 0.0};
        try {
            const scheduler::ScheduleOutcome so = ctx.scheduler.schedule(*parsed.intent);
            schedule_entry.latency_ms = ms_since(start);
            if (const auto* events = std::get_if<std::vector<ScheduledEvent>>(&so)) {
                out.scheduled_event_count = static_cast<int>(events->size());
                if (truth) {
                    const bool count_known = truth->reminder && truth->expected_event_count;
                    schedule_entry.error =
                        count_known && *truth->expected_event_count != out.scheduled_event_count
                            ? 1.0
                            : 0.0;
                }
            } else {
                if (truth) schedule_entry.error = 0.0;  // safe deferral
                out.disposition = Disposition::clarification_requested;
                out.clarification_field =
                    std::holds_alternative<ClarificationRequest>(so)
                        ? to_string(std::get<ClarificationRequest>(so).field)
                        : "confirmation";
            }
        } catch (const std::exception&) {
            schedule_entry.success = false;
            schedule_entry.latency_ms = ms_since(start);
            if (truth) schedule_entry.error = 1.0;
            out.disposition = Disposition::rejected;
        }
        out.stages.push_back(schedule_entry);
    }
    return out;
}

bool stages_in_order(const PipelineOutcome& outcome) {
    static const char* const expected[] = {"parse", "validate", "insert", "schedule"};
    if (outcome.stages.empty() || outcome.stages.size() > 4) return false;
    for (std::size_t i = 0; i < outcome.stages.size(); ++i)
        if (outcome.stages[i].stage != expected[i]) return false;
    return true;
}

// ---------------------------------------------------------------------------
// Aggregation

namespace {

void put_proportion(std::map<std::string, double>& m, const std::string& name,
                    const metrics::ProportionEstimate& p) {
    m[name + ".successes"] = static_cast<double>(p.successes);
    m[name + ".n"] = static_cast<double>(p.n);
    m[name + ".p_hat"] = p.p_hat;
    m[name + ".ci_low"] = p.ci_low;
    m[name + ".ci_high"] = p.ci_high;
}

void put_summary(std::map<std::string, double>& m, const std::string& name,
                 std::vector<double> samples) {
    if (samples.empty()) return;
    const metrics::DistanceSummary s = metrics::distance_summary(std::move(samples));
    m[name + ".n"] = static_cast<double>(s.n);
    m[name + ".mean"] = s.mean;
    m[name + ".p25"] = s.p25;
    m[name + ".p75"] = s.p75;
}

void add_distances(const std::string& emitted, const std::string& expected,
                   std::vector<double>& cos_out, std::vector<double>& wmd_out,
                   const Embedder& embedder) {
    std::vector<std::string> a = tokenize(emitted);
    std::vector<std::string> b = tokenize(expected);
    if (a.empty() || b.empty()) return;
    if (a.size() > 64) a.resize(64);
    if (b.size() > 64) b.resize(64);
    const std::vector<double> va = embedder.embed(emitted);
    const std::vector<double> vb = embedder.embed(expected);
    cos_out.push_back(metrics::cosine_distance(va, vb));
    wmd_out.push_back(metrics::wmd(a, b, embedder));
}

void aggregate(ReplayReport& report, const std::vector<Transcript>& corpus,
               const Registries& registries, const Store& store, std::size_t malformed) {
    std::map<std::string, const GroundTruth*> truth_by_id;
    for (const Transcript& t : corpus)
        if (t.truth) truth_by_id[t.id] = &*t.truth;
    report.truth_count = truth_by_id.size();

    std::map<std::string, const CareRecord*> stored_by_source;
    const std::vector<CareRecord> stored = store.query_records();
    for (const CareRecord& r : stored) stored_by_source.emplace(r.source_transcript, &r);

    double error_sum = 0.0;
    std::size_t charged = 0;
    double latency_sum = 0.0;
    double latency_max = 0.0;

    std::vector<metrics::IdCategory> pred, tru;          // emitted records only
    std::vector<metrics::IdCategory> pred_all, tru_all;  // deferrals count as misses
    std::size_t insert_success = 0, insert_n = 0;
    metrics::ConfusionMatrix cm;
    std::size_t hallucinations = 0, trap_fp = 0, silent_ambiguous = 0;
    std::map<std::string, int> scheduled_counts;
    std::map<std::string, int> expected_counts;
    std::vector<double> note_cos, note_wmd, rem_cos, rem_wmd;
    const HashingEmbedder embedder;

    for (const PipelineOutcome& o : report.outcomes) {
        switch (o.disposition) {
            case Disposition::completed: ++report.dispositions.completed; break;
            case Disposition::clarification_requested:
                ++report.dispositions.clarification_requested;
                break;
            case Disposition::rejected: ++report.dispositions.rejected; break;
        }
        if (o.clarification_field) ++report.clarification_fields[*o.clarification_field];

        double transcript_latency = 0.0;
        double transcript_error = 0.0;
        bool has_error = false;
        for (const StageEntry& s : o.stages) {
            transcript_latency += s.latency_ms;
            if (s.error) {
                has_error = true;
                transcript_error += *s.error;
            }
        }
        latency_sum += transcript_latency;
        latency_max = std::max(latency_max, transcript_latency);
        if (has_error && o.disposition != Disposition::clarification_requested) {
            error_sum += transcript_error;
            ++charged;
        }

        if ((o.emitted_resident && !registries.residents.contains(*o.emitted_resident)) ||
            (o.emitted_category && !registries.categories.contains(*o.emitted_category)))
            ++hallucinations;

        const auto it = truth_by_id.find(o.transcript_id);
        if (it == truth_by_id.end()) continue;
        const GroundTruth& gt = *it->second;

        if (o.reminder_detected && gt.reminder) {
            ++cm.tp;
        } else if (o.reminder_detected && !gt.reminder) {
            ++cm.fp;
            ++trap_fp;
        } else if (!o.reminder_detected && gt.reminder) {
            ++cm.fn;
        } else {
            ++cm.tn;
        }

        if (gt.reminder && gt.expected_event_count) {
            expected_counts[o.transcript_id] = *gt.expected_event_count;
            scheduled_counts[o.transcript_id] = o.scheduled_event_count;
            if (*gt.expected_event_count == 0 && o.scheduled_event_count > 0) ++silent_ambiguous;
        }

        if (o.emitted_resident) {
            pred.push_back({*o.emitted_resident, o.emitted_category.value_or("")});
            tru.push_back({gt.resident_id, gt.category_id});
            pred_all.push_back(pred.back());
            tru_all.push_back(tru.back());

            ++insert_n;
            const auto sit = stored_by_source.find(o.transcript_id);
            if (sit != stored_by_source.end() && sit->second->resident_id == gt.resident_id &&
                sit->second->category_id == gt.category_id && sit->second->note == gt.note)
                ++insert_success;

            if (o.emitted_note) add_distances(*o.emitted_note, gt.note, note_cos, note_wmd, embedder);
            if (o.emitted_reminder_description && gt.reminder_description)
                add_distances(*o.emitted_reminder_description, *gt.reminder_description, rem_cos,
                              rem_wmd, embedder);
        } else {
            pred_all.push_back({"", ""});
            tru_all.push_back({gt.resident_id, gt.category_id});
        }
    }

    report.error_sample = charged;
    report.mean_error = charged > 0 ? error_sum / static_cast<double>(charged) : 0.0;
    report.error_within_budget = report.mean_error <= report.budget.delta;
    report.mean_latency_ms =
        report.outcomes.empty() ? 0.0 : latency_sum / static_cast<double>(report.outcomes.size());
    report.max_latency_ms = latency_max;
    report.latency_within_budget = report.max_latency_ms <= report.budget.tau_ms;

    auto& m = report.metrics;
    m["transcripts.total"] = static_cast<double>(report.transcript_count);
    m["transcripts.with_truth"] = static_cast<double>(report.truth_count);
    m["dispositions.completed"] = static_cast<double>(report.dispositions.completed);
    m["dispositions.clarification_requested"] =
        static_cast<double>(report.dispositions.clarification_requested);
    m["dispositions.rejected"] = static_cast<double>(report.dispositions.rejected);
    for (const auto& [field, count] : report.clarification_fields)
        m["clarifications." + field] = static_cast<double>(count);
    m["corpus_malformed_count"] = static_cast<double>(malformed);
    m["error.mean"] = report.mean_error;
    m["error.sample"] = static_cast<double>(report.error_sample);
    m["error.within_budget"] = report.error_within_budget ? 1.0 : 0.0;
    m["budget.delta"] = report.budget.delta;
    m["budget.tau_ms"] = report.budget.tau_ms;
    m["hallucination_count"] = static_cast<double>(hallucinations);
    m["trap_false_positive_count"] = static_cast<double>(trap_fp);
    m["silent_ambiguous_schedule_count"] = static_cast<double>(silent_ambiguous);

    if (cm.total() > 0) {
        m["reminder_confusion.tp"] = static_cast<double>(cm.tp);
        m["reminder_confusion.fp"] = static_cast<double>(cm.fp);
        m["reminder_confusion.fn"] = static_cast<double>(cm.fn);
        m["reminder_confusion.tn"] = static_cast<double>(cm.tn);
        m["reminder_accuracy"] = metrics::accuracy(cm);
        if (cm.tp + cm.fp > 0) m["reminder_precision"] = metrics::precision(cm);
        if (cm.tp + cm.fn > 0) m["reminder_recall"] = metrics::recall(cm);
    }
    if (!tru.empty())
        put_proportion(m, "joint_accuracy", metrics::joint_id_category_accuracy(pred, tru));
    if (!tru_all.empty())
        put_proportion(m, "joint_accuracy_with_deferrals",
                       metrics::joint_id_category_accuracy(pred_all, tru_all));
    if (insert_n > 0)
        put_proportion(m, "insertion_accuracy", metrics::wilson_interval(insert_success, insert_n));
    if (!expected_counts.empty())
        put_proportion(m, "reminder_count_match",
                       scheduler::reminder_count_match(scheduled_counts, expected_counts).aggregate);
    put_summary(m, "note_cosine", std::move(note_cos));
    put_summary(m, "note_wmd", std::move(note_wmd));
    put_summary(m, "reminder_cosine", std::move(rem_cos));
    put_summary(m, "reminder_wmd", std::move(rem_wmd));

    std::set<std::string> audited;
    for (const AuditEntry& a : store.audit_log()) audited.insert(a.subject_id);
    std::size_t subjects = 0, covered = 0;
    const auto count_subject = [&](const std::string& id) {
        ++subjects;
        if (audited.count(id)) ++covered;
    };
    for (const CareRecord& r : stored) count_subject(r.record_id);
    for (const ReminderIntent& i : store.intents()) count_subject(i.intent_id);
    for (const ScheduledEvent& e : store.events()) count_subject(e.event_id);
    m["audit_coverage"] =
        subjects == 0 ? 1.0 : static_cast<double>(covered) / static_cast<double>(subjects);
}

}  // namespace

// ---------------------------------------------------------------------------
// Replay

ReplayReport replay(std::vector<Transcript> corpus, const Registries& registries,
                    const parser::ParserAdapter& adapter, Store& store,
                    const ReplayConfig& config) {
    std::sort(corpus.begin(), corpus.end(), [](const Transcript& a, const Transcript& b) {
        if (a.spoken_at != b.spoken_at) return a.spoken_at < b.spoken_at;
        return a.id < b.id;
    });

    ReplayReport report;
    report.budget = config.budget;
    report.transcript_count = corpus.size();

    // well-formedness check: every transcript must survive a
    // serialization round trip unchanged
    std::size_t malformed = 0;
    for (const Transcript& t : corpus) {
        try {
            const std::string line = serialize_transcript(t);
            if (serialize_transcript(parse_transcript_line(line)) != line) ++malformed;
        } catch (const std::exception&) {
            ++malformed;
        }
    }

    scheduler::VirtualClock clock(corpus.empty() ? UtcTime{} : corpus.front().spoken_at);
    scheduler::Scheduler sched(store, clock, config.scheduler);
    PipelineContext ctx{adapter, registries, store, sched, clock};

    report.outcomes.reserve(corpus.size());
    for (const Transcript& t : corpus) {
        PipelineOutcome outcome = run_pipeline(t, ctx);
        store.append_outcome(outcome);
        report.outcomes.push_back(std::move(outcome));
    }
    std::sort(report.outcomes.begin(), report.outcomes.end(),
              [](const PipelineOutcome& a, const PipelineOutcome& b) {
                  return a.transcript_id < b.transcript_id;
              });

    aggregate(report, corpus, registries, store, malformed);
    return report;
}

// ---------------------------------------------------------------------------
// Serialization

std::string serialize_report(const ReplayReport& report, bool include_latencies) {
    json j;
    j["budget"] = {{"delta", report.budget.delta}, {"tau_ms", report.budget.tau_ms}};
    j["transcripts"] = {{"total", report.transcript_count}, {"with_truth", report.truth_count}};
    j["dispositions"] = {
        {"completed", report.dispositions.completed},
        {"clarification_requested", report.dispositions.clarification_requested},
        {"rejected", report.dispositions.rejected}};
    json clar = json::object();
    for (const auto& [field, count] : report.clarification_fields) clar[field] = count;
    j["clarifications"] = std::move(clar);
    j["error"] = {{"mean", report.mean_error},
                  {"sample", report.error_sample},
                  {"within_budget", report.error_within_budget}};
    if (include_latencies)
        j["latency"] = {{"mean_ms", report.mean_latency_ms},
                        {"max_ms", report.max_latency_ms},
                        {"within_budget", report.latency_within_budget}};
    json mm = json::object();
    for (const auto& [name, value] : report.metrics) mm[name] = value;
    j["metrics"] = std::move(mm);
    json outs = json::array();
    for (const PipelineOutcome& o : report.outcomes) {
        json oj = codec::to_json(o);
        if (!include_latencies)
            for (json& s : oj["stages"]) s["latency_ms"] = 0.0;
        outs.push_back(std::move(oj));
    }
    j["outcomes"] = std::move(outs);
    return j.dump(2) + "\n";
}

std::map<std::string, double> metrics_from_report(const std::string& json_text) {
    const json j = json::parse(json_text);
    std::map<std::string, double> out;
    if (j.contains("metrics"))
        for (const auto& [name, value] : j.at("metrics").items())
            out[name] = value.get<double>();
    return out;
}

ReplayReport report_from_json(const std::string& json_text) {
    const json j = json::parse(json_text);
    ReplayReport r;
    r.budget.delta = j.at("budget").at("delta").get<double>();
    r.budget.tau_ms = j.at("budget").at("tau_ms").get<double>();
    r.transcript_count = j.at("transcripts").at("total").get<std::size_t>();
    r.truth_count = j.at("transcripts").at("with_truth").get<std::size_t>();
    const json& d = j.at("dispositions");
    r.dispositions.completed = d.at("completed").get<std::size_t>();
    r.dispositions.clarification_requested = d.at("clarification_requested").get<std::size_t>();
    r.dispositions.rejected = d.at("rejected").get<std::size_t>();
    for (const auto& [field, count] : j.at("clarifications").items())
        r.clarification_fields[field] = count.get<std::size_t>();
    r.mean_error = j.at("error").at("mean").get<double>();
    r.error_sample = j.at("error").at("sample").get<std::size_t>();
    r.error_within_budget = j.at("error").at("within_budget").get<bool>();
    if (j.contains("latency")) {
        r.mean_latency_ms = j.at("latency").at("mean_ms").get<double>();
        r.max_latency_ms = j.at("latency").at("max_ms").get<double>();
        r.latency_within_budget = j.at("latency").at("within_budget").get<bool>();
    }
    for (const auto& [name, value] : j.at("metrics").items())
        r.metrics[name] = value.get<double>();
    for (const json& oj : j.at("outcomes")) r.outcomes.push_back(codec::outcome_from_json(oj));
    return r;
}

std::string render_report(const ReplayReport& report) {
    std::ostringstream os;
    char buf[128];
    os << "replay of " << report.transcript_count << " transcripts (" << report.truth_count
       << " with ground truth)\n";
    os << "  dispositions: " << report.dispositions.completed << " completed, "
       << report.dispositions.clarification_requested << " clarification requests, "
       << report.dispositions.rejected << " rejected\n";
    std::snprintf(buf, sizeof(buf), "  mean error %.4f over %zu charged (budget %.4f, %s)\n",
                  report.mean_error, report.error_sample, report.budget.delta,
                  report.error_within_budget ? "within budget" : "EXCEEDED");
    os << buf;
    std::snprintf(buf, sizeof(buf), "  latency mean %.2f ms, max %.2f ms (budget %.0f ms, %s)\n",
                  report.mean_latency_ms, report.max_latency_ms, report.budget.tau_ms,
                  report.latency_within_budget ? "within budget" : "EXCEEDED");
    os << buf;

    const auto pct = [&](const char* name) -> std::string {
        const auto low = report.metrics.find(std::string(name) + ".ci_low");
        const auto high = report.metrics.find(std::string(name) + ".ci_high");
        const auto p = report.metrics.find(std::string(name) + ".p_hat");
        if (low == report.metrics.end() || high == report.metrics.end() ||
            p == report.metrics.end())
            return "n/a";
        char line[96];
        std::snprintf(line, sizeof(line), "%.2f%% [%.2f, %.2f]", metrics::round_percent(p->second),
                      metrics::round_percent(low->second), metrics::round_percent(high->second));
        return line;
    };
    os << "  joint resident+category accuracy: " << pct("joint_accuracy")
       << " (with deferrals: " << pct("joint_accuracy_with_deferrals") << ")\n";
    os << "  insertion accuracy: " << pct("insertion_accuracy") << "\n";
    os << "  reminder count match: " << pct("reminder_count_match") << "\n";

    const auto count = [&](const char* name) -> long {
        const auto it = report.metrics.find(name);
        return it == report.metrics.end() ? -1 : static_cast<long>(it->second);
    };
    os << "  hallucinations " << count("hallucination_count") << ", trap false positives "
       << count("trap_false_positive_count") << ", silent ambiguous schedules "
       << count("silent_ambiguous_schedule_count") << ", malformed corpus lines "
       << count("corpus_malformed_count") << "\n";
    return os.str();
}

}  // namespace carepipe::pipeline
