#pragma once
// Deterministic synthetic corpus generation. Every transcript is built
// from a hand-audited template whose ground-truth labels (resident,
// category, note, reminder description, event count) are fixed by the
// template itself, so the truth annotations never depend on running the
// parser.
//
// Besides routine notes and reminders, the corpus seeds three
// adversarial classes: reminder-like traps ("reminiscing",
// "forget-me-nots"), ambiguous resident names, and reminders with an
// underspecified time.

#include <cstdint>
#include <vector>

#include "carepipe/types.hpp"

namespace carepipe::synth {

struct CorpusSpec {
    std::size_t size = 330;
    double reminder_fraction = 184.0 / 330.0;  // includes underspecified-time items
    double adversarial_fraction = 0.1;         // traps + ambiguous names + underspecified
    uint64_t seed = 42;
    UtcTime start = make_utc(2025, 3, 1, 9, 0, 0);
};

// How a corpus spec splits into template classes. Adversarial items are
// divided evenly between the three classes; underspecified-time items
// count toward the reminder fraction.
struct ClassCounts {
    std::size_t resolved_reminders = 0;
    std::size_t underspecified = 0;
    std::size_t notes = 0;
    std::size_t traps = 0;
    std::size_t ambiguous_names = 0;

    std::size_t total() const {
        return resolved_reminders + underspecified + notes + traps + ambiguous_names;
    }
    bool operator==(const ClassCounts&) const = default;
};

ClassCounts plan_counts(std::size_t size, double reminder_fraction,
                        double adversarial_fraction);

struct GeneratedCorpus {
    std::vector<Transcript> transcripts;
    std::vector<Resident> residents;
    std::vector<CareCategory> categories;
};

// The fixed 33-resident roster, three per category, including the
// deliberately confusable Margaret Hale / Margaret Dale pair.
std::vector<Resident> default_residents();

// Transcript ids encode their class (t-rem-*, t-und-*, t-note-*,
// t-trap-*, t-amb-*); the seed controls interleaving and timestamps.
GeneratedCorpus generate_corpus(const CorpusSpec& spec);

}  // namespace carepipe::synth
