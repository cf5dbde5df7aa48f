#pragma once
// Reminder scheduling under safety gates. Intents become discrete events
// only when their timing is resolved, in the future, and above the
// confidence gate; everything else defers to a clarification or a human
// confirmation. Events are persisted and audited through the store and
// fired against a virtual clock.
//
// Single-owner state machine: one mutator at a time; schedule, confirm
// and tick must not interleave.

#include <map>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

#include "carepipe/metrics.hpp"
#include "carepipe/store.hpp"
#include "carepipe/types.hpp"

namespace carepipe::scheduler {

class SchedulerError : public std::runtime_error {
public:
    enum class Kind { UnknownId, InvalidTransition };

    SchedulerError(Kind kind, const std::string& message)
        : std::runtime_error(message), kind(kind) {}

    Kind kind;
};

// Harness-driven time. Never moves backward.
class VirtualClock {
public:
    explicit VirtualClock(UtcTime start = {}) : now_(start) {}

    UtcTime now() const { return now_; }

    void advance_to(UtcTime t) {
        if (t < now_) throw std::logic_error("virtual clock cannot move backward");
        now_ = t;
    }
    void advance_by_seconds(int64_t s) { advance_to(now_.plus_seconds(s)); }

private:
    UtcTime now_;
};

// A low-confidence intent held back until a human approves or rejects it.
struct ConfirmationRequest {
    std::string request_id;  // "conf-" + intent_id, stable across reopen
    std::string intent_id;
    std::string prompt;
};

using ScheduleOutcome =
    std::variant<std::vector<ScheduledEvent>, ClarificationRequest, ConfirmationRequest>;

// confirm() yields either materialized events (approved request) or the
// status the target ended in.
using ConfirmOutcome = std::variant<std::vector<ScheduledEvent>, EventStatus>;

struct SchedulerConfig {
    double gate_threshold = 0.7;
    bool confirm_on_fire = false;  // ask for a follow-up confirm after firing
    int max_recurrence = 31;       // expansion horizon in days
};

class Scheduler {
public:
    // Rebuilds pending confirmations from the store, so a reopened process
    // can still answer `confirm` for requests raised in an earlier run.
    Scheduler(Store& store, VirtualClock& clock, SchedulerConfig config = {});

    // Pre: the intent is already stored. AMBIGUOUS or past-time schedules
    // yield a time ClarificationRequest; confidence below the gate yields
    // a ConfirmationRequest; otherwise events are created and audited.
    ScheduleOutcome schedule(const ReminderIntent& intent);

    // `id` is either a ConfirmationRequest id or an event id.
    ConfirmOutcome confirm(const std::string& id, bool approve);

    // Fires every pending event due at the clock, exactly once, in
    // (fire_at, event_id) order.
    std::vector<ScheduledEvent> tick();

    std::vector<ConfirmationRequest> pending_confirmations() const;

    const SchedulerConfig& config() const { return config_; }

private:
    std::vector<ScheduledEvent> materialize(const ReminderIntent& intent);

    Store& store_;
    VirtualClock& clock_;
    SchedulerConfig config_;
    std::map<std::string, std::string> pending_;  // request_id -> intent_id
};

// ---------------------------------------------------------------------------
// Calendar export

// RFC 5545 subset: VCALENDAR wrapper, one VEVENT per event carrying UID,
// DTSTART (UTC basic format) and SUMMARY; CRLF endings, text escaping,
// lines folded at 75 octets.
std::string export_ics(const std::vector<ScheduledEvent>& events);

std::string ics_escape_text(const std::string& s);

struct IcsEvent {
    std::string uid;
    UtcTime dtstart;
    std::string summary;
};

// Minimal read-back (unfold, unescape) used to verify exports.
std::vector<IcsEvent> parse_ics_events(const std::string& calendar);

// ---------------------------------------------------------------------------
// Count matching

struct CountMatchResult {
    std::vector<std::pair<std::string, bool>> per_transcript;  // sorted by transcript id
    metrics::ProportionEstimate aggregate;                     // proportion matching, Wilson CI
};

// True per transcript iff the number of materialized events equals the
// expected count; transcripts absent from `scheduled` count as zero events.
CountMatchResult reminder_count_match(const std::map<std::string, int>& scheduled,
                                      const std::map<std::string, int>& expected);

}  // namespace carepipe::scheduler
