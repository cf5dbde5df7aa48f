#include "carepipe/json_codec.hpp"

#include <stdexcept>

namespace carepipe::codec {

UtcTime utc_field(const json& j, const char* key) {
    const auto parsed = parse_utc(j.at(key).get<std::string>());
    if (!parsed) throw std::runtime_error(std::string("bad timestamp in field '") + key + "'");
    return *parsed;
}

json to_json(const CareRecord& r) {
    return {{"record_id", r.record_id},
            {"resident_id", r.resident_id},
            {"category_id", r.category_id},
            {"timestamp", format_iso(r.timestamp)},
            {"note", r.note},
            {"source_transcript", r.source_transcript},
            {"parser_confidence", r.parser_confidence}};
}

CareRecord record_from_json(const json& j) {
    CareRecord r;
    r.record_id = j.at("record_id").get<std::string>();
    r.resident_id = j.at("resident_id").get<std::string>();
    r.category_id = j.at("category_id").get<std::string>();
    r.timestamp = utc_field(j, "timestamp");
    r.note = j.at("note").get<std::string>();
    r.source_transcript = j.at("source_transcript").get<std::string>();
    r.parser_confidence = j.at("parser_confidence").get<double>();
    return r;
}

json to_json(const ScheduleSpec& s) {
    json j;
    if (const auto* one = std::get_if<OneShotSpec>(&s)) {
        j["type"] = "one_shot";
        j["fire_at"] = format_iso(one->fire_at);
    } else if (const auto* rec = std::get_if<RecurringSpec>(&s)) {
        j["type"] = "recurring";
        j["first_fire"] = format_iso(rec->first_fire);
        j["count"] = rec->count;
    } else {
        j["type"] = "ambiguous";
    }
    return j;
}

ScheduleSpec schedule_from_json(const json& j) {
    const std::string type = j.at("type").get<std::string>();
    if (type == "one_shot") return OneShotSpec{utc_field(j, "fire_at")};
    if (type == "recurring")
        return RecurringSpec{utc_field(j, "first_fire"), j.at("count").get<int>()};
    if (type == "ambiguous") return AmbiguousSpec{};
    throw std::runtime_error("unknown schedule type '" + type + "'");
}

json to_json(const ReminderIntent& i) {
    return {{"intent_id", i.intent_id},
            {"source_transcript", i.source_transcript},
            {"resident_id", i.resident_id},
            {"category_id", i.category_id},
            {"description", i.description},
            {"schedule", to_json(i.schedule)},
            {"confidence", i.confidence},
            {"created_at", format_iso(i.created_at)}};
}

ReminderIntent intent_from_json(const json& j) {
    ReminderIntent i;
    i.intent_id = j.at("intent_id").get<std::string>();
    i.source_transcript = j.at("source_transcript").get<std::string>();
    i.resident_id = j.at("resident_id").get<std::string>();
    i.category_id = j.at("category_id").get<std::string>();
    i.description = j.at("description").get<std::string>();
    i.schedule = schedule_from_json(j.at("schedule"));
    i.confidence = j.at("confidence").get<double>();
    i.created_at = utc_field(j, "created_at");
    return i;
}

json to_json(const ScheduledEvent& e) {
    return {{"event_id", e.event_id},
            {"intent_id", e.intent_id},
            {"fire_at", format_iso(e.fire_at)},
            {"summary", e.summary},
            {"status", to_string(e.status)}};
}

ScheduledEvent event_from_json(const json& j) {
    ScheduledEvent e;
    e.event_id = j.at("event_id").get<std::string>();
    e.intent_id = j.at("intent_id").get<std::string>();
    e.fire_at = utc_field(j, "fire_at");
    e.summary = j.at("summary").get<std::string>();
    const auto status = event_status_from_string(j.at("status").get<std::string>());
    if (!status) throw std::runtime_error("unknown event status");
    e.status = *status;
    return e;
}

json to_json(const AuditEntry& a) {
    return {{"seq", a.seq},
            {"at", format_iso(a.at)},
            {"actor", a.actor},
            {"action", to_string(a.action)},
            {"subject_id", a.subject_id},
            {"detail", a.detail}};
}

AuditEntry audit_from_json(const json& j) {
    AuditEntry a;
    a.seq = j.at("seq").get<int64_t>();
    a.at = utc_field(j, "at");
    a.actor = j.at("actor").get<std::string>();
    const auto action = audit_action_from_string(j.at("action").get<std::string>());
    if (!action) throw std::runtime_error("unknown audit action");
    a.action = *action;
    a.subject_id = j.at("subject_id").get<std::string>();
    a.detail = j.at("detail").get<std::string>();
    return a;
}

json to_json(const PipelineOutcome& o) {
    json stages = json::array();
    for (const StageEntry& s : o.stages) {
        json e = {{"stage", s.stage}, {"success", s.success}, {"latency_ms", s.latency_ms}};
        if (s.error) e["error"] = *s.error;
        stages.push_back(std::move(e));
    }
    json j = {{"transcript_id", o.transcript_id},
              {"stages", std::move(stages)},
              {"disposition", to_string(o.disposition)},
              {"reminder_detected", o.reminder_detected},
              {"scheduled_event_count", o.scheduled_event_count}};
    if (o.emitted_resident) j["emitted_resident"] = *o.emitted_resident;
    if (o.emitted_category) j["emitted_category"] = *o.emitted_category;
    if (o.emitted_note) j["emitted_note"] = *o.emitted_note;
    if (o.emitted_reminder_description)
        j["emitted_reminder_description"] = *o.emitted_reminder_description;
    if (o.clarification_field) j["clarification_field"] = *o.clarification_field;
    return j;
}

PipelineOutcome outcome_from_json(const json& j) {
    PipelineOutcome o;
    o.transcript_id = j.at("transcript_id").get<std::string>();
    for (const json& e : j.at("stages")) {
        StageEntry s;
        s.stage = e.at("stage").get<std::string>();
        s.success = e.at("success").get<bool>();
        s.latency_ms = e.at("latency_ms").get<double>();
        if (e.contains("error")) s.error = e.at("error").get<double>();
        o.stages.push_back(std::move(s));
    }
    const auto disp = disposition_from_string(j.at("disposition").get<std::string>());
    if (!disp) throw std::runtime_error("unknown disposition");
    o.disposition = *disp;
    o.reminder_detected = j.at("reminder_detected").get<bool>();
    o.scheduled_event_count = j.at("scheduled_event_count").get<int>();
    if (j.contains("emitted_resident"))
        o.emitted_resident = j.at("emitted_resident").get<std::string>();
    if (j.contains("emitted_category"))
        o.emitted_category = j.at("emitted_category").get<std::string>();
    if (j.contains("emitted_note")) o.emitted_note = j.at("emitted_note").get<std::string>();
    if (j.contains("emitted_reminder_description"))
        o.emitted_reminder_description = j.at("emitted_reminder_description").get<std::string>();
    if (j.contains("clarification_field"))
        o.clarification_field = j.at("clarification_field").get<std::string>();
    return o;
}

}  // namespace carepipe::codec
