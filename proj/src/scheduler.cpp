#include "carepipe/scheduler.hpp"

#include <algorithm>

namespace carepipe::scheduler {

namespace {

ClarificationRequest time_clarification(const std::string& prompt) {
    return ClarificationRequest{ClarificationRequest::Field::time, {}, prompt};
}

// First fire instant of a resolved (non-ambiguous) spec.
UtcTime first_fire_of(const ScheduleSpec& spec) {
    if (const auto* one = std::get_if<OneShotSpec>(&spec)) return one->fire_at;
    return std::get<RecurringSpec>(spec).first_fire;
}

}  // namespace

Scheduler::Scheduler(Store& store, VirtualClock& clock, SchedulerConfig config)
    : store_(store), clock_(clock), config_(config) {
    // a request is still pending when its intent never produced events and
    // no confirm decision was audited against the request id
    std::map<std::string, int> events_per_intent;
    for (const ScheduledEvent& e : store_.events()) ++events_per_intent[e.intent_id];

    for (const ReminderIntent& intent : store_.intents()) {
        if (is_ambiguous(intent.schedule)) continue;
        if (intent.confidence >= config_.gate_threshold) continue;
        if (events_per_intent.count(intent.intent_id)) continue;
        const std::string request_id = "conf-" + intent.intent_id;
        if (!store_.audit_log(request_id).empty()) continue;  // already decided
        pending_[request_id] = intent.intent_id;
    }
}

std::vector<ScheduledEvent> Scheduler::materialize(const ReminderIntent& intent) {
    std::vector<ScheduledEvent> events;
    const auto add = [&](UtcTime fire_at, int index) {
        ScheduledEvent e;
        e.event_id = intent.intent_id + "-ev-" + std::to_string(index);
        e.intent_id = intent.intent_id;
        e.fire_at = fire_at;
        e.summary = intent.description;
        e.status = EventStatus::pending;
        events.push_back(e);
    };

    if (const auto* one = std::get_if<OneShotSpec>(&intent.schedule)) {
        add(one->fire_at, 1);
    } else {
        const auto& rec = std::get<RecurringSpec>(intent.schedule);
        const int count = std::min(rec.count, config_.max_recurrence);
        for (int k = 0; k < count; ++k) add(rec.first_fire.plus_days(k), k + 1);
    }

    for (const ScheduledEvent& e : events) store_.insert_event(e, "schedule", clock_.now());
    return events;
}

ScheduleOutcome Scheduler::schedule(const ReminderIntent& intent) {
    if (!store_.get_intent(intent.intent_id))
        throw SchedulerError(SchedulerError::Kind::UnknownId,
                             "intent not stored: " + intent.intent_id);

    if (is_ambiguous(intent.schedule))
        return time_clarification("When should this reminder fire?");

    if (!(clock_.now() < first_fire_of(intent.schedule)))
        return time_clarification("The requested time has already passed; when should it fire?");

    if (intent.confidence < config_.gate_threshold) {
        ConfirmationRequest req;
        req.request_id = "conf-" + intent.intent_id;
        req.intent_id = intent.intent_id;
        req.prompt = "Confidence " + std::to_string(intent.confidence) +
                     " is below the gate; schedule \"" + intent.description + "\"?";
        pending_[req.request_id] = req.intent_id;
        return req;
    }

    return materialize(intent);
}

ConfirmOutcome Scheduler::confirm(const std::string& id, bool approve) {
    const auto pending_it = pending_.find(id);
    if (pending_it != pending_.end()) {
        const auto intent = store_.get_intent(pending_it->second);
        if (!intent)
            throw SchedulerError(SchedulerError::Kind::UnknownId,
                                 "pending request points at missing intent " + pending_it->second);
        pending_.erase(pending_it);
        if (approve) {
            store_.append_audit("confirm", AuditAction::confirm, id, "request approved",
                               clock_.now());
            return materialize(*intent);
        }
        store_.append_audit("confirm", AuditAction::cancel, id, "request rejected",
                            clock_.now());
        return EventStatus::cancelled;
    }

    const auto event = store_.get_event(id);
    if (!event) throw SchedulerError(SchedulerError::Kind::UnknownId, "no such id: " + id);

    // legal transitions: fired -> confirmed (approve), pending -> cancelled (reject)
    if (approve) {
        if (event->status != EventStatus::fired)
            throw SchedulerError(SchedulerError::Kind::InvalidTransition,
                                 "can only confirm a fired event; " + id + " is " +
                                     to_string(event->status));
        store_.update_event_status(id, EventStatus::confirmed, "confirm", clock_.now(),
                                   "fire confirmed");
        return EventStatus::confirmed;
    }
    if (event->status != EventStatus::pending)
        throw SchedulerError(SchedulerError::Kind::InvalidTransition,
                             "can only cancel a pending event; " + id + " is " +
                                 to_string(event->status));
    store_.update_event_status(id, EventStatus::cancelled, "confirm", clock_.now(),
                               "cancelled before firing");
    return EventStatus::cancelled;
}

std::vector<ScheduledEvent> Scheduler::tick() {
    std::vector<ScheduledEvent> due;
    for (const ScheduledEvent& e : store_.events())
        if (e.status == EventStatus::pending && !(clock_.now() < e.fire_at)) due.push_back(e);

    std::sort(due.begin(), due.end(), [](const ScheduledEvent& a, const ScheduledEvent& b) {
        if (a.fire_at != b.fire_at) return a.fire_at < b.fire_at;
        return a.event_id < b.event_id;
    });

    for (ScheduledEvent& e : due) {
        store_.update_event_status(e.event_id, EventStatus::fired, "schedule", clock_.now(),
                                   "fired at " + format_iso(clock_.now()));
        e.status = EventStatus::fired;
    }
    return due;
}

std::vector<ConfirmationRequest> Scheduler::pending_confirmations() const {
    std::vector<ConfirmationRequest> out;
    for (const auto& [request_id, intent_id] : pending_) {
        ConfirmationRequest req;
        req.request_id = request_id;
        req.intent_id = intent_id;
        req.prompt = "Awaiting confirmation for intent " + intent_id;
        out.push_back(req);
    }
    return out;
}

// ---------------------------------------------------------------------------
// Calendar export

std::string ics_escape_text(const std::string& s) {
    std::string out;
    out.reserve(s.size());
    for (char c : s) {
        switch (c) {
            case '\\': out += "\\\\"; break;
            case ';': out += "\\;"; break;
            case ',': out += "\\,"; break;
            case '\n': out += "\\n"; break;
            case '\r': break;  // bare CR never appears in content
            default: out += c;
        }
    }
    return out;
}

namespace {

bool utf8_continuation(unsigned char c) { return (c & 0xC0) == 0x80; }

// Content lines longer than 75 octets are folded: subsequent chunks start
// with a single space. Splits back off so multi-byte sequences stay whole.
void append_folded(std::string& out, const std::string& line) {
    constexpr std::size_t kLimit = 75;
    std::size_t pos = 0;
    bool first = true;
    while (pos < line.size()) {
        const std::size_t budget = first ? kLimit : kLimit - 1;
        std::size_t take = std::min(budget, line.size() - pos);
        while (take > 0 && pos + take < line.size() &&
               utf8_continuation(static_cast<unsigned char>(line[pos + take])))
            --take;
        if (!first) out += ' ';
        out.append(line, pos, take);
        out += "\r\n";
        pos += take;
        first = false;
    }
    if (first) out += "\r\n";  // empty content line
}

}  // namespace

std::string export_ics(const std::vector<ScheduledEvent>& events) {
    std::string out;
    append_folded(out, "BEGIN:VCALENDAR");
    append_folded(out, "VERSION:2.0");
    append_folded(out, "PRODID:-//carepipe//scheduler//EN");
    for (const ScheduledEvent& e : events) {
        append_folded(out, "BEGIN:VEVENT");
        append_folded(out, "UID:" + e.event_id);
        append_folded(out, "DTSTART:" + format_ics_basic(e.fire_at));
        append_folded(out, "SUMMARY:" + ics_escape_text(e.summary));
        append_folded(out, "END:VEVENT");
    }
    append_folded(out, "END:VCALENDAR");
    return out;
}

namespace {

std::string ics_unescape(const std::string& s) {
    std::string out;
    for (std::size_t i = 0; i < s.size(); ++i) {
        if (s[i] == '\\' && i + 1 < s.size()) {
            const char next = s[++i];
            if (next == 'n' || next == 'N')
                out += '\n';
            else
                out += next;
        } else {
            out += s[i];
        }
    }
    return out;
}

}  // namespace

std::vector<IcsEvent> parse_ics_events(const std::string& calendar) {
    // unfold: CRLF followed by a space joins with the previous line
    std::vector<std::string> lines;
    std::size_t pos = 0;
    while (pos < calendar.size()) {
        std::size_t end = calendar.find("\r\n", pos);
        if (end == std::string::npos) end = calendar.size();
        std::string line = calendar.substr(pos, end - pos);
        pos = end + 2 > calendar.size() ? calendar.size() : end + 2;
        if (!line.empty() && !lines.empty() && line.front() == ' ')
            lines.back() += line.substr(1);
        else
            lines.push_back(std::move(line));
    }

    std::vector<IcsEvent> events;
    IcsEvent current;
    bool in_event = false;
    for (const std::string& line : lines) {
        if (line == "BEGIN:VEVENT") {
            in_event = true;
            current = IcsEvent{};
        } else if (line == "END:VEVENT") {
            if (in_event) events.push_back(current);
            in_event = false;
        } else if (in_event) {
            const std::size_t colon = line.find(':');
            if (colon == std::string::npos) continue;
            const std::string key = line.substr(0, colon);
            const std::string value = line.substr(colon + 1);
            if (key == "UID") {
                current.uid = value;
            } else if (key == "DTSTART") {
                // YYYYMMDDTHHMMSSZ
                if (value.size() == 16) {
                    const std::string iso = value.substr(0, 4) + "-" + value.substr(4, 2) +
                                            "-" + value.substr(6, 2) + "T" +
                                            value.substr(9, 2) + ":" + value.substr(11, 2) +
                                            ":" + value.substr(13, 2) + "Z";
                    if (const auto t = parse_utc(iso)) current.dtstart = *t;
                }
            } else if (key == "SUMMARY") {
                current.summary = ics_unescape(value);
            }
        }
    }
    return events;
}

// ---------------------------------------------------------------------------
// Count matching

CountMatchResult reminder_count_match(const std::map<std::string, int>& scheduled,
                                      const std::map<std::string, int>& expected) {
    CountMatchResult result;
    std::size_t hits = 0;
    for (const auto& [transcript_id, want] : expected) {
        const auto it = scheduled.find(transcript_id);
        const int got = it == scheduled.end() ? 0 : it->second;
        const bool match = got == want;
        if (match) ++hits;
        result.per_transcript.emplace_back(transcript_id, match);
    }
    result.aggregate = metrics::wilson_interval(hits, expected.size());
    return result;
}

}  // namespace carepipe::scheduler
