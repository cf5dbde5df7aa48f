#pragma once
// JSON conversions for domain objects, shared by the store file format,
// the parser adapter wire format, and replay reports. Decoders throw
// std::runtime_error on missing keys or malformed values; encode/decode
// round-trips exactly.

#include <string>

#include <json.hpp>

#include "carepipe/types.hpp"

namespace carepipe::codec {

using nlohmann::json;

json to_json(const CareRecord& r);
CareRecord record_from_json(const json& j);

json to_json(const ScheduleSpec& s);
ScheduleSpec schedule_from_json(const json& j);

json to_json(const ReminderIntent& i);
ReminderIntent intent_from_json(const json& j);

json to_json(const ScheduledEvent& e);
ScheduledEvent event_from_json(const json& j);

json to_json(const AuditEntry& a);
AuditEntry audit_from_json(const json& j);

json to_json(const PipelineOutcome& o);
PipelineOutcome outcome_from_json(const json& j);

// Timestamp field helper: ISO-8601 text in, UtcTime out, loud on garbage.
UtcTime utc_field(const json& j, const char* key);

}  // namespace carepipe::codec
