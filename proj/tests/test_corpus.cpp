#include <doctest.h>

#include <cstdio>
#include <sstream>

#include "carepipe/corpus.hpp"

using namespace carepipe;

namespace {

Transcript sample_with_truth() {
    Transcript t;
    t.id = "t-001";
    t.text = "Remind me to check blood pressure for Margaret at 2 pm";
    t.spoken_at = make_utc(2025, 3, 1, 9, 0, 0);
    GroundTruth g;
    g.resident_id = "margaret-hale";
    g.category_id = "medication";
    g.note = t.text;
    g.reminder = true;
    g.reminder_description = "check blood pressure for Margaret";
    g.expected_event_count = 1;
    t.truth = g;
    return t;
}

void check_equal(const Transcript& a, const Transcript& b) {
    CHECK(a.id == b.id);
    CHECK(a.text == b.text);
    CHECK(a.spoken_at == b.spoken_at);
    REQUIRE(a.truth.has_value() == b.truth.has_value());
    if (a.truth) {
        CHECK(a.truth->resident_id == b.truth->resident_id);
        CHECK(a.truth->category_id == b.truth->category_id);
        CHECK(a.truth->note == b.truth->note);
        CHECK(a.truth->reminder == b.truth->reminder);
        CHECK(a.truth->reminder_description == b.truth->reminder_description);
        CHECK(a.truth->expected_event_count == b.truth->expected_event_count);
    }
}

}  // namespace

TEST_CASE("transcript line round-trips") {
    const Transcript t = sample_with_truth();
    check_equal(parse_transcript_line(serialize_transcript(t)), t);

    Transcript bare;
    bare.id = "t-002";
    bare.text = "Elsie enjoyed the garden.";
    bare.spoken_at = make_utc(2025, 3, 2, 10, 30, 0);
    check_equal(parse_transcript_line(serialize_transcript(bare)), bare);
}

TEST_CASE("malformed transcript lines are rejected with the line number") {
    const auto expect_malformed = [](const std::string& line) {
        try {
            parse_transcript_line(line, 7);
            FAIL_CHECK("accepted: " << line);
        } catch (const CorpusError& e) {
            CHECK(e.kind == CorpusError::Kind::MalformedLine);
            CHECK(e.line_no == 7);
        }
    };

    expect_malformed("not json");
    expect_malformed("[1,2]");
    expect_malformed(R"({"text":"x","spoken_at":"2025-03-01T09:00:00Z"})");   // no id
    expect_malformed(R"({"id":"a","spoken_at":"2025-03-01T09:00:00Z"})");     // no text
    expect_malformed(R"({"id":"a","text":"   ","spoken_at":"2025-03-01T09:00:00Z"})");
    expect_malformed(R"({"id":"a","text":"x","spoken_at":"yesterday"})");
    expect_malformed(R"({"id":"a","text":"x","spoken_at":"2025-03-01T09:00:00Z","extra":1})");
    // truth invariant: a non-reminder cannot carry reminder fields
    expect_malformed(
        R"({"id":"a","text":"x","spoken_at":"2025-03-01T09:00:00Z",)"
        R"("truth":{"resident_id":"r","category_id":"c","note":"x","reminder":false,)"
        R"("reminder_description":"d"}})");
}

TEST_CASE("load_corpus_stream skips blanks and reports duplicates") {
    std::istringstream in(
        serialize_transcript(sample_with_truth()) + "\n\n" +
        R"({"id":"t-002","text":"Note.","spoken_at":"2025-03-01T10:00:00Z"})" + "\n");
    const auto corpus = load_corpus_stream(in, "mem");
    REQUIRE(corpus.size() == 2);
    CHECK(corpus[0].id == "t-001");
    CHECK(corpus[1].id == "t-002");

    std::istringstream dup(
        R"({"id":"t-001","text":"A.","spoken_at":"2025-03-01T10:00:00Z"})" "\n"
        R"({"id":"t-001","text":"B.","spoken_at":"2025-03-01T11:00:00Z"})" "\n");
    try {
        load_corpus_stream(dup, "mem");
        FAIL_CHECK("duplicate id accepted");
    } catch (const CorpusError& e) {
        CHECK(e.kind == CorpusError::Kind::DuplicateId);
        CHECK(e.id == "t-001");
        CHECK(e.line_no == 2);
    }
}

TEST_CASE("missing corpus file raises FileUnreadable") {
    try {
        load_corpus("/nonexistent/corpus.jsonl");
        FAIL_CHECK("missing file accepted");
    } catch (const CorpusError& e) {
        CHECK(e.kind == CorpusError::Kind::FileUnreadable);
    }
}

TEST_CASE("registry files round-trip through save and load") {
    const std::vector<Resident> residents = {
        {"margaret-hale", "Margaret Hale", {"Margaret", "Maggie"}},
        {"edith-shaw", "Edith Shaw", {"Edith"}},
    };
    const std::vector<CareCategory> categories = {
        {"medication", "Medication", {"tablets", "blood pressure"}},
    };

    const std::string rpath = "/tmp/carepipe-test-residents.jsonl";
    const std::string cpath = "/tmp/carepipe-test-categories.jsonl";
    save_residents(residents, rpath);
    save_categories(categories, cpath);

    const ResidentRegistry reg = load_residents(rpath);
    REQUIRE(reg.all().size() == 2);
    const Resident* m = reg.find("margaret-hale");
    REQUIRE(m != nullptr);
    CHECK(m->full_name == "Margaret Hale");
    CHECK(m->aliases == std::vector<std::string>{"Margaret", "Maggie"});

    const CategoryTaxonomy tax = load_categories(cpath);
    REQUIRE(tax.all().size() == 1);
    const CareCategory* med = tax.find("medication");
    REQUIRE(med != nullptr);
    CHECK(med->lexicon == std::vector<std::string>{"tablets", "blood pressure"});

    std::remove(rpath.c_str());
    std::remove(cpath.c_str());
}
