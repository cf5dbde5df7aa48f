#include <doctest.h>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <random>

#include "carepipe/json_codec.hpp"
#include "carepipe/store.hpp"

using namespace carepipe;

namespace {

struct TempStorePath {
    std::string path;
    explicit TempStorePath(const std::string& name) : path("/tmp/" + name) {
        std::remove(path.c_str());
    }
    ~TempStorePath() { std::remove(path.c_str()); }
};

CareRecord record(const std::string& id, const std::string& resident,
                  const std::string& category, UtcTime at) {
    CareRecord r;
    r.record_id = id;
    r.resident_id = resident;
    r.category_id = category;
    r.timestamp = at;
    r.note = "note for " + id;
    r.source_transcript = "t-" + id;
    r.parser_confidence = 0.9;
    return r;
}

ScheduledEvent event(const std::string& id, UtcTime fire_at) {
    ScheduledEvent e;
    e.event_id = id;
    e.intent_id = "int-" + id;
    e.fire_at = fire_at;
    e.summary = "summary " + id;
    return e;
}

const UtcTime kT0 = make_utc(2025, 3, 1, 9, 0, 0);

}  // namespace

TEST_CASE("read-your-write and duplicate rejection") {
    TempStorePath tmp("carepipe-store-basic.jsonl");
    Store store(tmp.path);

    const CareRecord r = record("rec-1", "r1", "medication", kT0);
    CHECK(store.insert_record(r, "insert", kT0) == "rec-1");
    REQUIRE(store.get_record("rec-1").has_value());
    CHECK(*store.get_record("rec-1") == r);
    CHECK(!store.get_record("rec-2").has_value());

    CHECK_THROWS_AS(store.insert_record(r, "insert", kT0), StoreError);
    try {
        store.insert_record(r, "insert", kT0);
    } catch (const StoreError& e) {
        CHECK(e.kind == StoreError::Kind::DuplicateRecordId);
    }
    // unchanged after the rejected duplicate
    CHECK(store.query_records().size() == 1);
    CHECK(store.audit_log().size() == 1);
}

TEST_CASE("operations after close fail loudly") {
    TempStorePath tmp("carepipe-store-closed.jsonl");
    Store store(tmp.path);
    store.close();
    try {
        store.insert_record(record("rec-1", "r1", "medication", kT0), "insert", kT0);
        FAIL_CHECK("insert accepted on closed store");
    } catch (const StoreError& e) {
        CHECK(e.kind == StoreError::Kind::StorageUnavailable);
    }
}

TEST_CASE("query agrees with a brute-force scan") {
    TempStorePath tmp("carepipe-store-query.jsonl");
    Store store(tmp.path);

    std::mt19937 rng(11);
    std::uniform_int_distribution<int> res(1, 4), cat(1, 3), minutes(0, 5000);
    std::vector<CareRecord> all;
    for (int i = 0; i < 40; ++i) {
        const CareRecord r =
            record("rec-" + std::to_string(i), "r" + std::to_string(res(rng)),
                   "c" + std::to_string(cat(rng)), kT0.plus_minutes(minutes(rng)));
        store.insert_record(r, "insert", kT0);
        all.push_back(r);
    }

    const auto brute = [&](const QueryFilter& f) {
        std::vector<CareRecord> out;
        for (const auto& r : all) {
            if (f.resident_id && r.resident_id != *f.resident_id) continue;
            if (f.category_id && r.category_id != *f.category_id) continue;
            if (f.from && r.timestamp < *f.from) continue;
            if (f.to && *f.to < r.timestamp) continue;
            out.push_back(r);
        }
        std::sort(out.begin(), out.end(), [](const CareRecord& a, const CareRecord& b) {
            if (a.timestamp != b.timestamp) return a.timestamp < b.timestamp;
            return a.record_id < b.record_id;
        });
        return out;
    };

    std::vector<QueryFilter> filters;
    filters.push_back({});
    for (int i = 1; i <= 4; ++i) {
        QueryFilter f;
        f.resident_id = "r" + std::to_string(i);
        filters.push_back(f);
        f.category_id = "c" + std::to_string(1 + i % 3);
        filters.push_back(f);
    }
    QueryFilter range;
    range.from = kT0.plus_minutes(1000);
    range.to = kT0.plus_minutes(3000);
    filters.push_back(range);
    range.resident_id = "r2";
    filters.push_back(range);

    for (const auto& f : filters) CHECK(store.query_records(f) == brute(f));
    QueryFilter none;
    none.resident_id = "r9";
    CHECK(store.query_records(none).empty());
}

TEST_CASE("audit trail grows in sequence order") {
    TempStorePath tmp("carepipe-store-audit.jsonl");
    Store store(tmp.path);

    store.insert_record(record("rec-1", "r1", "medication", kT0), "insert", kT0);
    const auto after_insert = store.audit_log();
    REQUIRE(after_insert.size() == 1);
    CHECK(after_insert[0].action == AuditAction::insert);
    CHECK(after_insert[0].subject_id == "rec-1");

    store.insert_event(event("ev-1", kT0.plus_hours(2)), "schedule", kT0);
    store.update_event_status("ev-1", EventStatus::fired, "schedule", kT0.plus_hours(2),
                              "fired");
    const auto log = store.audit_log();
    REQUIRE(log.size() == 3);
    CHECK(log[0].action == AuditAction::insert);
    CHECK(log[1].action == AuditAction::schedule);
    CHECK(log[2].action == AuditAction::fire);
    for (std::size_t i = 1; i < log.size(); ++i) CHECK(log[i].seq > log[i - 1].seq);

    CHECK(store.audit_log(std::string("ev-1")).size() == 2);
    CHECK(store.audit_log(std::string("nobody")).empty());

    try {
        store.update_event_status("ev-9", EventStatus::fired, "schedule", kT0, "x");
        FAIL_CHECK("unknown event accepted");
    } catch (const StoreError& e) {
        CHECK(e.kind == StoreError::Kind::UnknownEventId);
    }
}

TEST_CASE("the persistence file never shrinks") {
    TempStorePath tmp("carepipe-store-append.jsonl");
    Store store(tmp.path);

    std::uintmax_t last = 0;
    const auto grown = [&] {
        const auto size = std::filesystem::file_size(tmp.path);
        const bool ok = size >= last;
        last = size;
        return ok;
    };

    store.insert_record(record("rec-1", "r1", "medication", kT0), "insert", kT0);
    CHECK(grown());
    store.insert_event(event("ev-1", kT0.plus_hours(1)), "schedule", kT0);
    CHECK(grown());
    store.update_event_status("ev-1", EventStatus::cancelled, "schedule", kT0, "cancelled");
    CHECK(grown());
    store.append_audit("pipeline", AuditAction::reject, "t-9", "validation failed", kT0);
    CHECK(grown());
}

namespace {

// Everything observable about a store, serialized for equality checks.
std::string snapshot(const Store& s) {
    nlohmann::json j;
    for (const auto& r : s.query_records()) j["records"].push_back(codec::to_json(r));
    for (const auto& i : s.intents()) j["intents"].push_back(codec::to_json(i));
    for (const auto& e : s.events()) j["events"].push_back(codec::to_json(e));
    for (const auto& o : s.outcomes()) j["outcomes"].push_back(codec::to_json(o));
    for (const auto& a : s.audit_log()) j["audit"].push_back(codec::to_json(a));
    return j.dump();
}

}  // namespace

TEST_CASE("reopening replays to the identical state") {
    TempStorePath tmp("carepipe-store-replay.jsonl");
    std::mt19937 rng(23);

    std::string before;
    {
        Store store(tmp.path);
        std::vector<std::string> event_ids;
        std::uniform_int_distribution<int> op_pick(0, 4);
        for (int i = 0; i < 60; ++i) {
            const std::string id = std::to_string(i);
            const UtcTime at = kT0.plus_minutes(i);
            switch (op_pick(rng)) {
                case 0:
                    store.insert_record(record("rec-" + id, "r1", "medication", at), "insert",
                                        at);
                    break;
                case 1: {
                    ReminderIntent intent;
                    intent.intent_id = "int-" + id;
                    intent.source_transcript = "t-" + id;
                    intent.resident_id = "r1";
                    intent.category_id = "medication";
                    intent.description = "check " + id;
                    intent.schedule = OneShotSpec{at.plus_hours(1)};
                    intent.confidence = 0.8;
                    intent.created_at = at;
                    store.insert_intent(intent, "schedule", at);
                    break;
                }
                case 2:
                    store.insert_event(event("ev-" + id, at.plus_hours(2)), "schedule", at);
                    event_ids.push_back("ev-" + id);
                    break;
                case 3:
                    if (!event_ids.empty()) {
                        const auto& target =
                            event_ids[rng() % event_ids.size()];
                        const EventStatus status =
                            rng() % 2 ? EventStatus::fired : EventStatus::cancelled;
                        store.update_event_status(target, status, "schedule", at, "tick");
                    }
                    break;
                case 4: {
                    PipelineOutcome o;
                    o.transcript_id = "t-" + id;
                    o.disposition = Disposition::completed;
                    o.stages.push_back({"parse", true, 0.0, 1.5});
                    store.append_outcome(o);
                    break;
                }
            }
        }
        before = snapshot(store);
    }

    Store reopened(tmp.path);
    CHECK(snapshot(reopened) == before);

    // a torn final line (interrupted write) is ignored on replay
    {
        std::ofstream out(tmp.path, std::ios::app | std::ios::binary);
        out << R"({"type":"record","record_id":"rec-torn")";  // no newline, cut mid-object
    }
    Store after_crash(tmp.path);
    CHECK(snapshot(after_crash) == before);
    CHECK(!after_crash.get_record("rec-torn").has_value());

    // but a complete malformed line is corruption and must be loud
    {
        std::ofstream out(tmp.path, std::ios::app | std::ios::binary);
        out << "{\"type\":\"garbage\"}\n";
    }
    CHECK_THROWS_AS(Store{tmp.path}, StoreError);
}
