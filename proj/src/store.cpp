#include "carepipe/store.hpp"

#include <algorithm>
#include <fstream>

#include <json.hpp>

#include "carepipe/json_codec.hpp"

namespace carepipe {

using nlohmann::json;

namespace {

AuditAction action_for_status(EventStatus status) {
    switch (status) {
        case EventStatus::pending: return AuditAction::schedule;
        case EventStatus::fired: return AuditAction::fire;
        case EventStatus::confirmed: return AuditAction::confirm;
        case EventStatus::cancelled: return AuditAction::cancel;
    }
    return AuditAction::schedule;
}

}  // namespace

Store::Store(std::string path) : path_(std::move(path)) {
    replay();
    // probe writability up front so failures surface at open, not mid-run
    std::ofstream probe(path_, std::ios::app);
    if (!probe)
        throw StoreError(StoreError::Kind::StorageUnavailable, "cannot open store file " + path_);
    open_ = true;
}

void Store::require_open() const {
    if (!open_) throw StoreError(StoreError::Kind::StorageUnavailable, "store is closed");
}

void Store::replay() {
    std::ifstream in(path_, std::ios::binary);
    if (!in) return;  // fresh store

    std::string contents((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    std::size_t line_no = 0;
    std::size_t pos = 0;
    while (pos < contents.size()) {
        const std::size_t nl = contents.find('\n', pos);
        if (nl == std::string::npos) break;  // torn final line: the write never completed
        const std::string line = contents.substr(pos, nl - pos);
        pos = nl + 1;
        ++line_no;
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;

        json j;
        try {
            j = json::parse(line);
            const std::string type = j.at("type").get<std::string>();
            if (type == "record") {
                const CareRecord r = codec::record_from_json(j);
                records_[r.record_id] = r;
            } else if (type == "intent") {
                const ReminderIntent i = codec::intent_from_json(j);
                intents_[i.intent_id] = i;
            } else if (type == "event") {
                const ScheduledEvent e = codec::event_from_json(j);
                events_[e.event_id] = e;  // latest status wins
            } else if (type == "outcome") {
                outcomes_.push_back(codec::outcome_from_json(j));
            } else if (type == "audit") {
                const AuditEntry a = codec::audit_from_json(j);
                audit_.push_back(a);
                next_seq_ = std::max(next_seq_, a.seq + 1);
            } else {
                throw std::runtime_error("unknown line type '" + type + "'");
            }
        } catch (const std::exception& e) {
            throw StoreError(StoreError::Kind::CorruptLine,
                             path_ + ":" + std::to_string(line_no) + ": " + e.what());
        }
    }
}

void Store::append_line(const std::string& line) {
    std::ofstream out(path_, std::ios::app | std::ios::binary);
    out << line << '\n';
    out.flush();
    if (!out)
        throw StoreError(StoreError::Kind::StorageUnavailable, "write failed on " + path_);
}

AuditEntry Store::next_audit(const std::string& actor, AuditAction action,
                             const std::string& subject_id, const std::string& detail,
                             UtcTime at) {
    AuditEntry a;
    a.seq = next_seq_++;
    a.at = at;
    a.actor = actor;
    a.action = action;
    a.subject_id = subject_id;
    a.detail = detail;
    return a;
}

std::string Store::insert_record(const CareRecord& record, const std::string& actor, UtcTime at) {
    require_open();
    if (records_.count(record.record_id))
        throw StoreError(StoreError::Kind::DuplicateRecordId,
                         "record id already stored: " + record.record_id);

    json line = codec::to_json(record);
    line["type"] = "record";
    const AuditEntry audit =
        next_audit(actor, AuditAction::insert, record.record_id, "care record stored", at);
    json audit_line = codec::to_json(audit);
    audit_line["type"] = "audit";
    // both lines go out in one append so a crash cannot split the operation
    append_line(line.dump() + "\n" + audit_line.dump());

    records_[record.record_id] = record;
    audit_.push_back(audit);
    return record.record_id;
}

std::optional<CareRecord> Store::get_record(const std::string& record_id) const {
    const auto it = records_.find(record_id);
    if (it == records_.end()) return std::nullopt;
    return it->second;
}

std::vector<CareRecord> Store::query_records(const QueryFilter& filter) const {
    std::vector<CareRecord> out;
    for (const auto& [id, r] : records_) {
        if (filter.resident_id && r.resident_id != *filter.resident_id) continue;
        if (filter.category_id && r.category_id != *filter.category_id) continue;
        if (filter.from && r.timestamp < *filter.from) continue;
        if (filter.to && *filter.to < r.timestamp) continue;
        out.push_back(r);
    }
    std::sort(out.begin(), out.end(), [](const CareRecord& a, const CareRecord& b) {
        if (a.timestamp != b.timestamp) return a.timestamp < b.timestamp;
        return a.record_id < b.record_id;
    });
    return out;
}

std::string Store::insert_intent(const ReminderIntent& intent, const std::string& actor,
                                 UtcTime at) {
    require_open();
    if (intents_.count(intent.intent_id))
        throw StoreError(StoreError::Kind::DuplicateIntentId,
                         "intent id already stored: " + intent.intent_id);

    json line = codec::to_json(intent);
    line["type"] = "intent";
    const AuditEntry audit =
        next_audit(actor, AuditAction::insert, intent.intent_id, "reminder intent stored", at);
    json audit_line = codec::to_json(audit);
    audit_line["type"] = "audit";
    append_line(line.dump() + "\n" + audit_line.dump());

    intents_[intent.intent_id] = intent;
    audit_.push_back(audit);
    return intent.intent_id;
}

std::optional<ReminderIntent> Store::get_intent(const std::string& intent_id) const {
    const auto it = intents_.find(intent_id);
    if (it == intents_.end()) return std::nullopt;
    return it->second;
}

std::vector<ReminderIntent> Store::intents() const {
    std::vector<ReminderIntent> out;
    out.reserve(intents_.size());
    for (const auto& [id, i] : intents_) out.push_back(i);
    return out;
}

std::string Store::insert_event(const ScheduledEvent& event, const std::string& actor,
                                UtcTime at) {
    require_open();
    if (events_.count(event.event_id))
        throw StoreError(StoreError::Kind::DuplicateEventId,
                         "event id already stored: " + event.event_id);

    json line = codec::to_json(event);
    line["type"] = "event";
    const AuditEntry audit = next_audit(actor, AuditAction::schedule, event.event_id,
                                        "event scheduled for " + format_iso(event.fire_at), at);
    json audit_line = codec::to_json(audit);
    audit_line["type"] = "audit";
    append_line(line.dump() + "\n" + audit_line.dump());

    events_[event.event_id] = event;
    audit_.push_back(audit);
    return event.event_id;
}

void Store::update_event_status(const std::string& event_id, EventStatus status,
                                const std::string& actor, UtcTime at,
                                const std::string& detail) {
    require_open();
    const auto it = events_.find(event_id);
    if (it == events_.end())
        throw StoreError(StoreError::Kind::UnknownEventId, "no such event: " + event_id);

    ScheduledEvent updated = it->second;
    updated.status = status;

    json line = codec::to_json(updated);
    line["type"] = "event";
    const AuditEntry audit = next_audit(actor, action_for_status(status), event_id, detail, at);
    json audit_line = codec::to_json(audit);
    audit_line["type"] = "audit";
    append_line(line.dump() + "\n" + audit_line.dump());

    it->second = updated;
    audit_.push_back(audit);
}

std::optional<ScheduledEvent> Store::get_event(const std::string& event_id) const {
    const auto it = events_.find(event_id);
    if (it == events_.end()) return std::nullopt;
    return it->second;
}

std::vector<ScheduledEvent> Store::events() const {
    std::vector<ScheduledEvent> out;
    out.reserve(events_.size());
    for (const auto& [id, e] : events_) out.push_back(e);
    return out;
}

void Store::append_outcome(const PipelineOutcome& outcome) {
    require_open();
    json line = codec::to_json(outcome);
    line["type"] = "outcome";
    append_line(line.dump());
    outcomes_.push_back(outcome);
}

void Store::append_audit(const std::string& actor, AuditAction action,
                         const std::string& subject_id, const std::string& detail, UtcTime at) {
    require_open();
    const AuditEntry audit = next_audit(actor, action, subject_id, detail, at);
    json line = codec::to_json(audit);
    line["type"] = "audit";
    append_line(line.dump());
    audit_.push_back(audit);
}

std::vector<AuditEntry> Store::audit_log(const std::optional<std::string>& subject_id) const {
    if (!subject_id) return audit_;
    std::vector<AuditEntry> out;
    for (const AuditEntry& a : audit_)
        if (a.subject_id == *subject_id) out.push_back(a);
    return out;
}

void Store::close() { open_ = false; }

}  // namespace carepipe
