#pragma once
// Shared domain types. Immutable value objects after construction;
// safe to share across threads.

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "carepipe/time_utc.hpp"

namespace carepipe {

// Ground-truth annotations attached to a transcript for evaluation replay.
struct GroundTruth {
    std::string resident_id;
    std::string category_id;
    std::string note;
    bool reminder = false;
    // present only when reminder == true
    std::optional<std::string> reminder_description;
    std::optional<int> expected_event_count;
};

// One spoken interaction.
struct Transcript {
    std::string id;
    std::string text;
    UtcTime spoken_at;
    std::optional<GroundTruth> truth;
};

struct Resident {
    std::string id;
    std::string full_name;
    std::vector<std::string> aliases;
};

struct CareCategory {
    std::string id;
    std::string label;
    std::vector<std::string> lexicon;  // trigger keywords/phrases, normalized-disjoint
};

// Schema-validated structured entry.
struct CareRecord {
    std::string record_id;
    std::string resident_id;
    std::string category_id;
    UtcTime timestamp;
    std::string note;
    std::string source_transcript;
    double parser_confidence = 0.0;

    bool operator==(const CareRecord&) const = default;
};

// Reminder timing: a resolved instant, a daily recurrence, or explicitly
// unresolved. AMBIGUOUS intents are never directly schedulable.
struct OneShotSpec {
    UtcTime fire_at;
    bool operator==(const OneShotSpec&) const = default;
};

struct RecurringSpec {
    UtcTime first_fire;   // first occurrence, strictly after the reference time
    int count = 1;        // number of daily occurrences, >= 1
    bool operator==(const RecurringSpec&) const = default;
};

struct AmbiguousSpec {
    bool operator==(const AmbiguousSpec&) const = default;
};

using ScheduleSpec = std::variant<OneShotSpec, RecurringSpec, AmbiguousSpec>;

inline bool is_ambiguous(const ScheduleSpec& s) {
    return std::holds_alternative<AmbiguousSpec>(s);
}

struct ReminderIntent {
    std::string intent_id;
    std::string source_transcript;
    std::string resident_id;
    std::string category_id;
    std::string description;
    ScheduleSpec schedule = AmbiguousSpec{};
    double confidence = 0.0;
    UtcTime created_at;
};

// A safe deferral: the system asks instead of acting on uncertain input.
struct ClarificationRequest {
    enum class Field { resident, category, time };
    Field field;
    std::vector<std::string> candidates;  // registry ids, may be empty
    std::string prompt;
};

std::string to_string(ClarificationRequest::Field f);

enum class EventStatus { pending, fired, confirmed, cancelled };

std::string to_string(EventStatus s);
std::optional<EventStatus> event_status_from_string(std::string_view s);

struct ScheduledEvent {
    std::string event_id;
    std::string intent_id;
    UtcTime fire_at;
    std::string summary;
    EventStatus status = EventStatus::pending;
};

// ---------------------------------------------------------------------------
// Audit trail

enum class AuditAction { insert, schedule, fire, confirm, cancel, reject };

std::string to_string(AuditAction a);
std::optional<AuditAction> audit_action_from_string(std::string_view s);

// One line of the immutable audit trail; never mutated or deleted.
struct AuditEntry {
    int64_t seq = 0;  // strictly increasing per store
    UtcTime at;
    std::string actor;  // pipeline stage name
    AuditAction action = AuditAction::insert;
    std::string subject_id;
    std::string detail;

    bool operator==(const AuditEntry&) const = default;
};

// ---------------------------------------------------------------------------
// Pipeline bookkeeping

enum class Disposition { completed, clarification_requested, rejected };

std::string to_string(Disposition d);
std::optional<Disposition> disposition_from_string(std::string_view s);

struct StageEntry {
    std::string stage;                 // parse | validate | insert | schedule
    bool success = true;
    std::optional<double> error;       // 0/1 loss vs ground truth; absent without truth
    double latency_ms = 0.0;
};

struct PipelineOutcome {
    std::string transcript_id;
    std::vector<StageEntry> stages;    // in pipeline order
    Disposition disposition = Disposition::completed;
    // parse-level detail used by the evaluation harness
    bool reminder_detected = false;
    std::optional<std::string> emitted_resident;
    std::optional<std::string> emitted_category;
    std::optional<std::string> emitted_note;
    std::optional<std::string> emitted_reminder_description;
    std::optional<std::string> clarification_field;
    int scheduled_event_count = 0;
};

// ---------------------------------------------------------------------------
// Registries

class ResidentRegistry {
public:
    ResidentRegistry() = default;
    explicit ResidentRegistry(std::vector<Resident> residents);

    const Resident* find(const std::string& id) const;
    bool contains(const std::string& id) const { return find(id) != nullptr; }
    const std::vector<Resident>& all() const { return residents_; }
    bool empty() const { return residents_.empty(); }

private:
    std::vector<Resident> residents_;
    std::map<std::string, std::size_t> by_id_;
};

class CategoryTaxonomy {
public:
    CategoryTaxonomy() = default;
    explicit CategoryTaxonomy(std::vector<CareCategory> categories);

    const CareCategory* find(const std::string& id) const;
    bool contains(const std::string& id) const { return find(id) != nullptr; }
    const std::vector<CareCategory>& all() const { return categories_; }
    bool empty() const { return categories_.empty(); }

private:
    std::vector<CareCategory> categories_;
    std::map<std::string, std::size_t> by_id_;
};

struct Registries {
    ResidentRegistry residents;
    CategoryTaxonomy categories;
};

// The default 11-category taxonomy. Lexicons are pairwise disjoint after
// normalization; corpora can override via a taxonomy file.
std::vector<CareCategory> default_categories();

}  // namespace carepipe
