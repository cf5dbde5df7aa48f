#include <doctest.h>

#include <cmath>

#include "carepipe/validate.hpp"

using namespace carepipe;

namespace {

Registries test_registries() {
    Registries r;
    r.residents = ResidentRegistry{{{"margaret-hale", "Margaret Hale", {"Margaret"}}}};
    r.categories = CategoryTaxonomy{default_categories()};
    return r;
}

RecordDraft good_draft() {
    RecordDraft d;
    d.record_id = "rec-1";
    d.resident_id = "margaret-hale";
    d.category_id = "medication";
    d.timestamp = make_utc(2025, 3, 1, 9, 0, 0);
    d.note = "Gave her the morning tablets.";
    d.source_transcript = "t-001";
    d.parser_confidence = 0.92;
    return d;
}

}  // namespace

TEST_CASE("a complete draft validates to a record") {
    const Registries regs = test_registries();
    const ValidationResult res = validate_record(good_draft(), regs.residents, regs.categories);
    REQUIRE(std::holds_alternative<CareRecord>(res));
    const CareRecord& r = std::get<CareRecord>(res);
    CHECK(r.record_id == "rec-1");
    CHECK(r.resident_id == "margaret-hale");
    CHECK(r.category_id == "medication");
    CHECK(r.note == "Gave her the morning tablets.");
    CHECK(r.parser_confidence == doctest::Approx(0.92));
}

TEST_CASE("missing fields all accumulate") {
    const Registries regs = test_registries();
    const ValidationResult res = validate_record(RecordDraft{}, regs.residents, regs.categories);
    REQUIRE(std::holds_alternative<ValidationError>(res));
    const auto& err = std::get<ValidationError>(res);
    CHECK(err.violations.size() == 7);
    for (const Violation& v : err.violations) CHECK(v.kind == ViolationKind::MissingField);
    CHECK(!err.describe().empty());
}

TEST_CASE("registry membership and ranges are enforced together") {
    const Registries regs = test_registries();
    RecordDraft d = good_draft();
    d.resident_id = "nobody";
    d.category_id = "astronomy";
    d.note = "   ";
    d.parser_confidence = 1.5;

    const ValidationResult res = validate_record(d, regs.residents, regs.categories);
    REQUIRE(std::holds_alternative<ValidationError>(res));
    const auto& violations = std::get<ValidationError>(res).violations;
    REQUIRE(violations.size() == 4);
    CHECK(violations[0] == Violation{ViolationKind::UnknownResident, "resident_id"});
    CHECK(violations[1] == Violation{ViolationKind::UnknownCategory, "category_id"});
    CHECK(violations[2] == Violation{ViolationKind::EmptyNote, "note"});
    CHECK(violations[3] == Violation{ViolationKind::ConfidenceOutOfRange, "parser_confidence"});
}

TEST_CASE("confidence must be finite and in range") {
    const Registries regs = test_registries();
    for (double bad : {-0.01, 1.01, std::nan(""), HUGE_VAL}) {
        RecordDraft d = good_draft();
        d.parser_confidence = bad;
        const ValidationResult res = validate_record(d, regs.residents, regs.categories);
        REQUIRE(std::holds_alternative<ValidationError>(res));
        CHECK(std::get<ValidationError>(res).violations.front().kind ==
              ViolationKind::ConfidenceOutOfRange);
    }
    for (double ok : {0.0, 1.0, 0.5}) {
        RecordDraft d = good_draft();
        d.parser_confidence = ok;
        CHECK(std::holds_alternative<CareRecord>(
            validate_record(d, regs.residents, regs.categories)));
    }
}

TEST_CASE("draft_from inverts validation") {
    const Registries regs = test_registries();
    const auto res = validate_record(good_draft(), regs.residents, regs.categories);
    const CareRecord& r = std::get<CareRecord>(res);
    const RecordDraft d = draft_from(r);
    const auto res2 = validate_record(d, regs.residents, regs.categories);
    REQUIRE(std::holds_alternative<CareRecord>(res2));
    CHECK(std::get<CareRecord>(res2) == r);
}
