#pragma once
// Rule-based transcript parser: resident matching, category classification,
// reminder extraction with a small temporal grammar, and the confidence gate
// that routes uncertain inputs to clarification instead of execution.
//
// Everything here is a pure function over immutable inputs; the adapter
// interface lets an external (e.g. model-backed) parser stand in for the
// rule-based baseline.

#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "carepipe/types.hpp"

namespace carepipe::parser {

// -------------------------------------------------------------------------
// Match outcomes (not errors)

struct Ambiguous {
    std::vector<std::string> candidate_ids;  // similarity-descending, then id
};

struct NotFound {};

struct ResidentHit {
    std::string resident_id;
    double confidence = 0.0;  // 1.0 on exact name/alias match
};

struct CategoryHit {
    std::string category_id;
    double confidence = 0.0;  // winner hits / total hits
};

using ResidentMatch = std::variant<ResidentHit, Ambiguous, NotFound>;
using CategoryMatch = std::variant<CategoryHit, Ambiguous, NotFound>;

// -------------------------------------------------------------------------
// Configuration

struct CanonicalTimes {
    int morning = 8 * 3600;
    int afternoon = 14 * 3600;
    int evening = 18 * 3600;
    int night = 21 * 3600;
};

struct ParserConfig {
    double fuzzy_threshold = 0.8;   // min normalized similarity to accept a name
    double tie_tolerance = 0.05;    // best-vs-runner-up gap that forces Ambiguous
    double gate_threshold = 0.7;    // min record confidence to emit without clarifying
    CanonicalTimes canonical;
    int default_recurrence_count = 7;  // "every morning" with no horizon
};

// -------------------------------------------------------------------------
// Extractors

ResidentMatch match_resident(const std::string& text, const ResidentRegistry& registry,
                             const ParserConfig& config = {});

CategoryMatch classify_category(const std::string& text, const CategoryTaxonomy& taxonomy);

struct ReminderFields {
    std::string description;
    ScheduleSpec schedule = AmbiguousSpec{};
    bool time_resolved = false;
};

struct NoReminder {};

using ReminderExtraction = std::variant<ReminderFields, NoReminder>;

// Trigger phrases are matched word-bounded; a trigger with no resolvable
// time phrase yields an AMBIGUOUS schedule, never a guessed one.
ReminderExtraction extract_reminder(const std::string& text, UtcTime reference_time,
                                    const ParserConfig& config = {});

// Geometric mean of resident and category confidence, halved when a
// reminder's time could not be resolved.
double score_confidence(double resident_conf, double category_conf, bool time_resolved);

// -------------------------------------------------------------------------
// Composition

using carepipe::ClarificationRequest;  // shared with the scheduler's time gate

enum class ParseDisposition { parsed, clarification_needed };

struct ParseOutcome {
    ParseDisposition disposition = ParseDisposition::clarification_needed;
    std::optional<CareRecord> record;       // present iff parsed
    std::optional<ReminderIntent> intent;   // may carry an AMBIGUOUS schedule
    std::optional<ClarificationRequest> clarification;
    bool reminder_detected = false;         // trigger phrase present at all
};

// Answers fed back after a clarification; parsing resumes with the
// answered field pinned.
struct ParseOverrides {
    std::optional<std::string> resident_id;
    std::optional<std::string> category_id;
    std::optional<UtcTime> time;
};

ParseOutcome parse(const Transcript& transcript, const Registries& registries,
                   const ParserConfig& config = {}, const ParseOverrides& overrides = {});

// -------------------------------------------------------------------------
// Adapter boundary

class ParserAdapter {
public:
    virtual ~ParserAdapter() = default;
    virtual ParseOutcome parse(const Transcript& transcript,
                               const Registries& registries) const = 0;
};

class RuleBasedParser final : public ParserAdapter {
public:
    explicit RuleBasedParser(ParserConfig config = {}) : config_(config) {}

    ParseOutcome parse(const Transcript& transcript,
                       const Registries& registries) const override {
        return parser::parse(transcript, registries, config_);
    }

    const ParserConfig& config() const { return config_; }

private:
    ParserConfig config_;
};

// Runs `command` once per transcript: the transcript object is written to
// its stdin as one JSON line, and one ParseOutcome JSON line is read back.
class ExternalProcessParser final : public ParserAdapter {
public:
    explicit ExternalProcessParser(std::string command) : command_(std::move(command)) {}

    ParseOutcome parse(const Transcript& transcript,
                       const Registries& registries) const override;

private:
    std::string command_;
};

// Wire format for the adapter boundary.
std::string serialize_outcome(const ParseOutcome& outcome);
ParseOutcome parse_outcome_line(const std::string& line);

}  // namespace carepipe::parser
