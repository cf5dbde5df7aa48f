#include "carepipe/synth.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <random>
#include <stdexcept>
#include <string>

namespace carepipe::synth {
namespace {

// Three residents per category, in category order. First names are
// unique except for the Margaret pair, and no name word appears in any
// category lexicon, so full-name mentions always resolve uniquely.
const char* const kResidentNames[33] = {
    "Margaret Hale",      "Margaret Dale",     "Arthur Pembroke",   // medication
    "Beatrice Langley",   "Cedric Holloway",   "Dorothy Finch",     // mobility
    "Edmund Barrow",      "Florence Whitfield", "Gerald Ashcombe",  // hygiene
    "Harriet Molloy",     "Isaac Thornbury",   "Josephine Carver",  // activities
    "Katherine Elwood",   "Leonard Mabey",     "Mildred Ostler",    // equipment
    "Norman Quigley",     "Olive Ratcliffe",   "Percival Stannard", // goals
    "Rosalind Underhill", "Stanley Vickers",   "Theodora Wainwright", // nutrition
    "Victor Allenby",     "Winifred Bexley",   "Albert Causton",    // hydration
    "Brenda Dunmore",     "Clifford Eastham",  "Doris Fairweather", // sleep
    "Ernest Goodwin",     "Frances Hartwell",  "George Inglewood",  // social
    "Hilda Jessop",       "Ivy Kershaw",       "Jack Lockwood",     // skin
};

// Reminder task snippets, two per category. Each hits only its own
// category's lexicon and contains no trigger or time words.
const char* const kTasks[11][2] = {
    {"take the morning tablets", "collect the new prescription"},
    {"practise walking with the frame", "do the balance exercises"},
    {"run the bath", "help with the shower"},
    {"set out the painting things", "put up the bingo board"},
    {"charge the hearing aid", "swap the callbell battery"},
    {"go over the care plan", "write up the progress review"},
    {"prepare the soft diet meal", "plate up the evening snack"},
    {"refill the water jug", "top up the juice cups"},
    {"turn down the bed", "set out the nap blanket"},
    {"arrange the family visit", "phone the daughter back"},
    {"put cream on the heel", "redo the wound dressing"},
};

// Routine note templates, two per category; %F is the full name.
const char* const kNotes[11][2] = {
    {"%F took the morning tablets without any fuss",
     "%F asked when the next dose of medicine is due"},
    {"%F managed the stairs well on the walk today",
     "%F walked to the lounge leaning on the frame"},
    {"%F had a long shower and washed without help",
     "%F had the nails trimmed after the morning wash"},
    {"%F won at bingo and joined the singing afterwards",
     "%F spent an hour on the garden puzzle table"},
    {"%F needs new batteries for the hearing aid",
     "%F reported the callbell sensor was beeping again"},
    {"%F talked through the care plan and the next review",
     "%F hit the first milestone on the progress chart"},
    {"%F finished every meal and asked for a second portion",
     "%F enjoyed the cooked breakfast and a small snack"},
    {"%F drank plenty of water and some juice at lunchtime",
     "%F kept sipping fluids and finished the squash"},
    {"%F slept right through after an early bedtime",
     "%F skipped the usual nap and rested in the chair instead"},
    {"%F chatted happily during the family visit",
     "%F phoned the son for a long conversation"},
    {"%F had cream applied to the dry skin patch",
     "%F had the wound dressing changed and the redness checked"},
};

// Reminder-like words that must never fire the word-bounded trigger.
struct TrapShape {
    const char* text;  // %F placeholder
    std::size_t category;
};
const TrapShape kTraps[4] = {
    {"%F spent the afternoon reminiscing about the old garden parties", 3},
    {"%F planted forget-me-nots along the garden border", 3},
    {"%F was reminded of the wedding breakfast by the radio", 6},
    {"%F left the remainder of the lunch untouched", 6},
};

// "Margaret Gale" sits at equal edit distance from Margaret Hale and
// Margaret Dale, forcing a resident tie.
struct AmbiguousShape {
    const char* text;
    std::size_t category;
};
const AmbiguousShape kAmbiguous[3] = {
    {"Margaret Gale enjoyed the quiz this afternoon", 3},
    {"Margaret Gale asked for more water at teatime", 7},
    {"Margaret Gale napped soundly in the chair all afternoon", 8},
};

const char* const kClockWords[6] = {"2 pm", "10 am", "4:30 pm", "6 pm", "11 am", "12:30"};
const char* const kWeekdays[7] = {"Monday",   "Tuesday", "Wednesday", "Thursday",
                                  "Friday",   "Saturday", "Sunday"};
const int kInHours[3] = {2, 3, 5};
const int kEveryDays[4] = {3, 4, 5, 6};

std::size_t rounded(double x) { return static_cast<std::size_t>(std::llround(x)); }

GroundTruth note_truth(const std::string& resident_id, const std::string& category_id,
                       const std::string& text) {
    GroundTruth g;
    g.resident_id = resident_id;
    g.category_id = category_id;
    g.note = text;
    g.reminder = false;
    return g;
}

std::string fill_name(const std::string& tpl, const std::string& name) {
    std::string out = tpl;
    const auto pos = out.find("%F");
    if (pos != std::string::npos) out.replace(pos, 2, name);
    return out;
}

std::string slug(const std::string& full_name) {
    std::string s;
    for (const char c : full_name)
        s += c == ' ' ? '-' : static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    return s;
}

}  // namespace

std::vector<Resident> default_residents() {
    std::vector<Resident> out;
    out.reserve(33);
    for (const char* name : kResidentNames) out.push_back({slug(name), name, {}});
    return out;
}

ClassCounts plan_counts(std::size_t size, double reminder_fraction,
                        double adversarial_fraction) {
    if (size < 1) throw std::invalid_argument("corpus size must be at least 1");
    ClassCounts c;
    const std::size_t adv_each =
        rounded(static_cast<double>(size) * adversarial_fraction / 3.0);
    const std::size_t reminders =
        std::min(rounded(static_cast<double>(size) * reminder_fraction), size);

    c.traps = adv_each;
    c.ambiguous_names = adv_each;
    c.underspecified = std::min(adv_each, reminders);
    c.resolved_reminders = reminders - c.underspecified;
    const std::size_t used = reminders + c.traps + c.ambiguous_names;
    if (used > size)
        throw std::invalid_argument("reminder and adversarial fractions exceed the corpus size");
    c.notes = size - used;
    return c;
}

GeneratedCorpus generate_corpus(const CorpusSpec& spec) {
    const ClassCounts counts =
        plan_counts(spec.size, spec.reminder_fraction, spec.adversarial_fraction);

    GeneratedCorpus out;
    out.residents = default_residents();
    out.categories = default_categories();

    const auto resident_of = [&](std::size_t category, std::size_t rotation) -> const Resident& {
        return out.residents[category * 3 + rotation % 3];
    };
    const auto make_id = [](const char* prefix, std::size_t i) {
        char buf[24];
        std::snprintf(buf, sizeof buf, "%s-%03zu", prefix, i + 1);
        return std::string(buf);
    };

    std::vector<Transcript> items;
    items.reserve(spec.size);

    for (std::size_t i = 0; i < counts.resolved_reminders; ++i) {
        const std::size_t cat = i % 11;
        const std::size_t shape = (i / 11) % 6;
        const Resident& r = resident_of(cat, i / 11);
        const std::string task = kTasks[cat][i % 2];
        const std::string clock = kClockWords[i % 6];

        std::string text;
        std::string desc;
        int events = 1;
        switch (shape) {
            case 0:
                text = "Set a reminder for " + r.full_name + " to " + task + " at " + clock;
                desc = r.full_name + " to " + task;
                break;
            case 1:
                text = "Remind me to " + task + " for " + r.full_name + " tomorrow at " + clock;
                desc = task + " for " + r.full_name;
                break;
            case 2:
                text = "Remind us to " + task + " for " + r.full_name + " on " +
                       kWeekdays[i % 7] + " at " + clock;
                desc = task + " for " + r.full_name;
                break;
            case 3:
                text = "Don't forget to " + task + " for " + r.full_name + " in " +
                       std::to_string(kInHours[i % 3]) + " hours";
                desc = task + " for " + r.full_name;
                break;
            case 4:
                events = kEveryDays[i % 4];
                text = "Remind " + r.full_name + " to " + task +
                       " every morning for the next " + std::to_string(events) + " days";
                desc = r.full_name + " to " + task;
                break;
            default:
                events = 7;  // parser's default recurrence horizon
                text = "Set a reminder to " + task + " for " + r.full_name + " every evening";
                desc = task + " for " + r.full_name;
                break;
        }

        GroundTruth g = note_truth(r.id, out.categories[cat].id, text);
        g.reminder = true;
        g.reminder_description = desc;
        g.expected_event_count = events;
        items.push_back({make_id("t-rem", i), text, {}, std::move(g)});
    }

    for (std::size_t i = 0; i < counts.underspecified; ++i) {
        const std::size_t cat = i % 11;
        const Resident& r = resident_of(cat, i);
        const std::string task = kTasks[cat][i % 2];

        std::string text;
        std::string desc;
        if (i % 2 == 0) {
            text = "Remind me to " + task + " for " + r.full_name;
            desc = task + " for " + r.full_name;
        } else {
            text = "Don't forget to " + task + " for " + r.full_name + " later today";
            desc = task + " for " + r.full_name + " later today";
        }

        GroundTruth g = note_truth(r.id, out.categories[cat].id, text);
        g.reminder = true;
        g.reminder_description = desc;
        g.expected_event_count = 0;  // must end in clarification, never an event
        items.push_back({make_id("t-und", i), text, {}, std::move(g)});
    }

    for (std::size_t i = 0; i < counts.notes; ++i) {
        const std::size_t cat = i % 11;
        const Resident& r = resident_of(cat, i / 22);
        const std::string text = fill_name(kNotes[cat][(i / 11) % 2], r.full_name);
        items.push_back(
            {make_id("t-note", i), text, {}, note_truth(r.id, out.categories[cat].id, text)});
    }

    for (std::size_t i = 0; i < counts.traps; ++i) {
        const TrapShape& shape = kTraps[i % 4];
        const Resident& r = out.residents[(i * 7 + 3) % 33];
        const std::string text = fill_name(shape.text, r.full_name);
        items.push_back({make_id("t-trap", i), text, {},
                         note_truth(r.id, out.categories[shape.category].id, text)});
    }

    for (std::size_t i = 0; i < counts.ambiguous_names; ++i) {
        const AmbiguousShape& shape = kAmbiguous[i % 3];
        // the intended resident alternates between the confusable pair
        const Resident& r = out.residents[i % 2];
        items.push_back({make_id("t-amb", i), shape.text, {},
                         note_truth(r.id, out.categories[shape.category].id, shape.text)});
    }

    // Interleave the classes; modulo Fisher-Yates keeps the order
    // identical across standard libraries.
    std::mt19937_64 rng(spec.seed);
    for (std::size_t i = items.size() - 1; i > 0; --i)
        std::swap(items[i], items[rng() % (i + 1)]);

    // Timestamps rise through the file: a new morning every 12 items,
    // minutes ticking within it. All times stay before the earliest
    // spoken clock phrase (10 am) so same-day resolution holds.
    for (std::size_t p = 0; p < items.size(); ++p)
        items[p].spoken_at =
            spec.start.plus_seconds(static_cast<int64_t>(p / 12) * 86400 +
                                    static_cast<int64_t>(p % 12) * 240);

    out.transcripts = std::move(items);
    return out;
}

}  // namespace carepipe::synth
