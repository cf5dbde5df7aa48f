#include "carepipe/validate.hpp"

#include <cmath>

namespace carepipe {

namespace {

bool blank(const std::string& s) {
    return s.find_first_not_of(" \t\r\n") == std::string::npos;
}

}  // namespace

RecordDraft draft_from(const CareRecord& r) {
    RecordDraft d;
    d.record_id = r.record_id;
    d.resident_id = r.resident_id;
    d.category_id = r.category_id;
    d.timestamp = r.timestamp;
    d.note = r.note;
    d.source_transcript = r.source_transcript;
    d.parser_confidence = r.parser_confidence;
    return d;
}

std::string to_string(ViolationKind k) {
    switch (k) {
        case ViolationKind::MissingField: return "MissingField";
        case ViolationKind::UnknownResident: return "UnknownResident";
        case ViolationKind::UnknownCategory: return "UnknownCategory";
        case ViolationKind::EmptyNote: return "EmptyNote";
        case ViolationKind::ConfidenceOutOfRange: return "ConfidenceOutOfRange";
    }
    return "Unknown";
}

std::string ValidationError::describe() const {
    std::string out;
    for (const auto& v : violations) {
        if (!out.empty()) out += "; ";
        out += to_string(v.kind) + ": " + v.field;
    }
    return out;
}

ValidationResult validate_record(const RecordDraft& candidate, const ResidentRegistry& residents,
                                 const CategoryTaxonomy& categories) {
    ValidationError err;
    auto missing = [&](const char* field) {
        err.violations.push_back({ViolationKind::MissingField, field});
    };

    if (!candidate.record_id || candidate.record_id->empty()) missing("record_id");
    if (!candidate.resident_id)
        missing("resident_id");
    else if (!residents.contains(*candidate.resident_id))
        err.violations.push_back({ViolationKind::UnknownResident, "resident_id"});
    if (!candidate.category_id)
        missing("category_id");
    else if (!categories.contains(*candidate.category_id))
        err.violations.push_back({ViolationKind::UnknownCategory, "category_id"});
    if (!candidate.timestamp) missing("timestamp");
    if (!candidate.note)
        missing("note");
    else if (blank(*candidate.note))
        err.violations.push_back({ViolationKind::EmptyNote, "note"});
    if (!candidate.source_transcript || candidate.source_transcript->empty())
        missing("source_transcript");
    if (!candidate.parser_confidence)
        missing("parser_confidence");
    else if (!(std::isfinite(*candidate.parser_confidence) && *candidate.parser_confidence >= 0.0 &&
               *candidate.parser_confidence <= 1.0))
        err.violations.push_back({ViolationKind::ConfidenceOutOfRange, "parser_confidence"});

    if (!err.violations.empty()) return err;

    CareRecord r;
    r.record_id = *candidate.record_id;
    r.resident_id = *candidate.resident_id;
    r.category_id = *candidate.category_id;
    r.timestamp = *candidate.timestamp;
    r.note = *candidate.note;
    r.source_transcript = *candidate.source_transcript;
    r.parser_confidence = *candidate.parser_confidence;
    return r;
}

}  // namespace carepipe
