#pragma once
// Append-only persistence for records, intents, scheduled events, and
// pipeline outcomes, with an immutable audit trail.
//
// One JSONL file: every line is {"type": ..., ...payload...}. Mutation is
// expressed as a new line (an event status change appends the updated
// event; replay keeps the latest). Reopening replays the file; a torn
// final line from an interrupted write is dropped, any other malformed
// line is a loud error.
//
// Single-writer, multi-reader: all writes go through one Store owner;
// readers work on value snapshots returned by the accessors.

#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "carepipe/types.hpp"

namespace carepipe {

class StoreError : public std::runtime_error {
public:
    enum class Kind {
        DuplicateRecordId,
        DuplicateIntentId,
        DuplicateEventId,
        UnknownEventId,
        StorageUnavailable,
        CorruptLine,
    };

    StoreError(Kind kind, const std::string& message)
        : std::runtime_error(message), kind(kind) {}

    Kind kind;
};

struct QueryFilter {
    std::optional<std::string> resident_id;
    std::optional<std::string> category_id;
    std::optional<UtcTime> from;  // inclusive
    std::optional<UtcTime> to;    // inclusive
};

class Store {
public:
    // Opens (creating if absent) and replays the file at `path`.
    explicit Store(std::string path);

    Store(const Store&) = delete;
    Store& operator=(const Store&) = delete;

    std::string insert_record(const CareRecord& record, const std::string& actor, UtcTime at);
    std::optional<CareRecord> get_record(const std::string& record_id) const;
    // Matches every supplied filter field; ascending (timestamp, record_id).
    std::vector<CareRecord> query_records(const QueryFilter& filter = {}) const;

    std::string insert_intent(const ReminderIntent& intent, const std::string& actor, UtcTime at);
    std::optional<ReminderIntent> get_intent(const std::string& intent_id) const;
    std::vector<ReminderIntent> intents() const;

    std::string insert_event(const ScheduledEvent& event, const std::string& actor, UtcTime at);
    // Appends the event with its new status; the action is derived from it
    // (fired -> fire, confirmed -> confirm, cancelled -> cancel).
    void update_event_status(const std::string& event_id, EventStatus status,
                             const std::string& actor, UtcTime at, const std::string& detail);
    std::optional<ScheduledEvent> get_event(const std::string& event_id) const;
    std::vector<ScheduledEvent> events() const;

    void append_outcome(const PipelineOutcome& outcome);
    const std::vector<PipelineOutcome>& outcomes() const { return outcomes_; }

    void append_audit(const std::string& actor, AuditAction action,
                      const std::string& subject_id, const std::string& detail, UtcTime at);
    // All entries, or just those touching one subject, in seq order.
    std::vector<AuditEntry> audit_log(const std::optional<std::string>& subject_id = {}) const;

    void close();
    bool is_open() const { return open_; }
    const std::string& path() const { return path_; }

private:
    void require_open() const;
    void replay();
    void append_line(const std::string& line);
    AuditEntry next_audit(const std::string& actor, AuditAction action,
                          const std::string& subject_id, const std::string& detail, UtcTime at);

    std::string path_;
    bool open_ = false;
    int64_t next_seq_ = 1;
    std::map<std::string, CareRecord> records_;
    std::map<std::string, ReminderIntent> intents_;
    std::map<std::string, ScheduledEvent> events_;
    std::vector<PipelineOutcome> outcomes_;
    std::vector<AuditEntry> audit_;
};

}  // namespace carepipe
