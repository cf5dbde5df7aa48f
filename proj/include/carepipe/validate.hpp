#pragma once
// Schema validation for care records. Rejection reasons accumulate so the
// audit trail can name every violated field, not just the first.

#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "carepipe/types.hpp"

namespace carepipe {

// Unvalidated candidate fields, e.g. straight out of a parser.
struct RecordDraft {
    std::optional<std::string> record_id;
    std::optional<std::string> resident_id;
    std::optional<std::string> category_id;
    std::optional<UtcTime> timestamp;
    std::optional<std::string> note;
    std::optional<std::string> source_transcript;
    std::optional<double> parser_confidence;
};

RecordDraft draft_from(const CareRecord& r);

enum class ViolationKind {
    MissingField,
    UnknownResident,
    UnknownCategory,
    EmptyNote,
    ConfidenceOutOfRange,
};

std::string to_string(ViolationKind k);

struct Violation {
    ViolationKind kind;
    std::string field;

    bool operator==(const Violation&) const = default;
};

struct ValidationError {
    std::vector<Violation> violations;  // every violated field, stable order

    std::string describe() const;
};

using ValidationResult = std::variant<CareRecord, ValidationError>;

// Total: every candidate yields exactly one of record / error.
ValidationResult validate_record(const RecordDraft& candidate, const ResidentRegistry& residents,
                                 const CategoryTaxonomy& categories);

}  // namespace carepipe
