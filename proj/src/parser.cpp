#include "carepipe/parser.hpp"

#include <algorithm>
#include <array>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <regex>
#include <sstream>
#include <stdexcept>

#include <unistd.h>

#include <json.hpp>

#include "carepipe/corpus.hpp"
#include "carepipe/json_codec.hpp"
#include "carepipe/text.hpp"
#include "carepipe/validate.hpp"

namespace carepipe::parser {
namespace {

using json = nlohmann::json;

// -------------------------------------------------------------------------
// Name matching

double best_name_similarity(const std::vector<std::string>& words, const Resident& r) {
    std::vector<std::string> names;
    names.reserve(r.aliases.size() + 1);
    names.push_back(r.full_name);
    names.insert(names.end(), r.aliases.begin(), r.aliases.end());

    double best = 0.0;
    for (const std::string& raw : names) {
        const std::vector<std::string> name_words = tokenize(raw);
        if (name_words.empty()) continue;
        const std::string name = join(name_words, " ");
        const std::size_t w = name_words.size();
        if (words.size() < w) {
            best = std::max(best, normalized_similarity(join(words, " "), name));
            continue;
        }
        // slide a window of the name's word count across the transcript
        for (std::size_t i = 0; i + w <= words.size(); ++i) {
            std::string window = words[i];
            for (std::size_t j = 1; j < w; ++j) {
                window += ' ';
                window += words[i + j];
            }
            best = std::max(best, normalized_similarity(window, name));
            if (best == 1.0) return best;
        }
    }
    return best;
}

// -------------------------------------------------------------------------
// Temporal grammar
//
// Applied to the lowercased transcript; spans of resolved phrases are
// excised from the original text to leave the task description behind.

// Shared clock sub-pattern: hour, optional :MM, optional am/pm.
const char* const kClock = R"((\d{1,2})(?::([0-5][0-9]))?(?:\s*([ap]m)\b)?)";

const std::regex& trigger_re() {
    static const std::regex re(
        R"(\b(?:set\s+a\s+reminder|don'?t\s+forget|remind(?:er)?)\b(?:\s+(?:me|us)\b)?)");
    return re;
}

// groups: 1 period, 2 hour, 3 minute, 4 am/pm, 5 day count
const std::regex& every_re() {
    static const std::regex re(
        std::string(R"(\bevery\s+(morning|afternoon|evening|night|day)\b)") +
        R"((?:\s+at\s+)" + kClock + R"()?)" +
        R"((?:\s+for\s+(?:the\s+next\s+)?(\d{1,3})\s+days?\b)?)");
    return re;
}

// groups: 1 hour, 2 minute, 3 am/pm
const std::regex& tomorrow_re() {
    static const std::regex re(std::string(R"(\btomorrow\b)") + R"((?:\s+at\s+)" + kClock +
                               R"()?)");
    return re;
}

// groups: 1 weekday, 2 hour, 3 minute, 4 am/pm
const std::regex& weekday_re() {
    static const std::regex re(
        std::string(
            R"(\bon\s+(monday|tuesday|wednesday|thursday|friday|saturday|sunday)\b)") +
        R"((?:\s+at\s+)" + kClock + R"()?)");
    return re;
}

// groups: 1 hour, 2 minute, 3 am/pm
const std::regex& at_re() {
    static const std::regex re(std::string(R"(\bat\s+)") + kClock);
    return re;
}

// groups: 1 amount, 2 unit
const std::regex& in_re() {
    static const std::regex re(R"(\bin\s+(\d{1,3})\s+(minutes?|hours?)\b)");
    return re;
}

// Seconds since midnight, or nullopt when the phrase is not a valid clock
// time (bare "at 3", hour out of range).
std::optional<int> clock_seconds(const std::ssub_match& hour, const std::ssub_match& minute,
                                 const std::ssub_match& ampm) {
    if (!hour.matched) return std::nullopt;
    int h = std::stoi(hour.str());
    const int m = minute.matched ? std::stoi(minute.str()) : 0;
    if (ampm.matched) {
        if (h < 1 || h > 12) return std::nullopt;
        if (ampm.str() == "am")
            h = (h == 12) ? 0 : h;
        else
            h = (h == 12) ? 12 : h + 12;
    } else {
        if (!minute.matched) return std::nullopt;
        if (h > 23) return std::nullopt;
    }
    return h * 3600 + m * 60;
}

int weekday_index(const std::string& name) {
    static const std::array<const char*, 7> days = {
        "sunday", "monday", "tuesday", "wednesday", "thursday", "friday", "saturday"};
    for (int i = 0; i < 7; ++i)
        if (name == days[i]) return i;
    throw std::logic_error("unreachable weekday name '" + name + "'");
}

UtcTime day_time(UtcTime ref, int64_t day_offset, int tod) {
    return UtcTime{(ref.day_number() + day_offset) * 86400 + tod};
}

// Next occurrence of a time of day, strictly after the reference.
UtcTime next_daily(UtcTime ref, int tod) {
    return day_time(ref, tod > ref.seconds_of_day() ? 0 : 1, tod);
}

bool is_word_byte(unsigned char c) { return c >= 0x80 || std::isalnum(c) != 0; }

std::string strip_outer_punct(const std::string& w) {
    std::size_t b = 0;
    std::size_t e = w.size();
    while (b < e && !is_word_byte(static_cast<unsigned char>(w[b]))) ++b;
    while (e > b && !is_word_byte(static_cast<unsigned char>(w[e - 1]))) --e;
    return w.substr(b, e - b);
}

// Remaining text after excision, whitespace-collapsed, with leading filler
// words ("remind me TO ...") dropped. Falls back to the normalized full
// text rather than returning an empty description.
std::string assemble_description(const std::string& original, const std::vector<char>& cut) {
    std::string kept;
    kept.reserve(original.size());
    for (std::size_t i = 0; i < original.size(); ++i)
        if (!cut[i]) kept += original[i];

    std::istringstream in(kept);
    std::vector<std::string> words;
    std::string w;
    while (in >> w) {
        std::string stripped = strip_outer_punct(w);
        if (!stripped.empty()) words.push_back(std::move(stripped));
    }

    static const std::array<const char*, 7> connectors = {"to",  "about", "that", "please",
                                                          "for", "and",   "then"};
    auto leading_connector = [&] {
        if (words.empty()) return false;
        const std::string low = to_lower(words.front());
        return std::find(connectors.begin(), connectors.end(), low) != connectors.end();
    };
    while (leading_connector()) words.erase(words.begin());

    if (words.empty()) words = tokenize(original);
    return join(words, " ");
}

ClarificationRequest::Field field_from_string(const std::string& s) {
    if (s == "resident") return ClarificationRequest::Field::resident;
    if (s == "category") return ClarificationRequest::Field::category;
    if (s == "time") return ClarificationRequest::Field::time;
    throw std::runtime_error("unknown clarification field '" + s + "'");
}

}  // namespace

// -------------------------------------------------------------------------
// Extractors

ResidentMatch match_resident(const std::string& text, const ResidentRegistry& registry,
                             const ParserConfig& config) {
    const std::vector<std::string> words = tokenize(text);

    struct Scored {
        std::string id;
        double sim;
    };
    std::vector<Scored> scored;
    for (const Resident& r : registry.all()) {
        const double sim = best_name_similarity(words, r);
        if (sim >= config.fuzzy_threshold) scored.push_back({r.id, sim});
    }
    if (scored.empty()) return NotFound{};

    std::sort(scored.begin(), scored.end(), [](const Scored& a, const Scored& b) {
        if (a.sim != b.sim) return a.sim > b.sim;
        return a.id < b.id;
    });

    if (scored.size() > 1 && scored[0].sim - scored[1].sim <= config.tie_tolerance) {
        Ambiguous amb;
        for (const Scored& s : scored)
            if (scored[0].sim - s.sim <= config.tie_tolerance) amb.candidate_ids.push_back(s.id);
        return amb;
    }
    return ResidentHit{scored[0].id, scored[0].sim};
}

CategoryMatch classify_category(const std::string& text, const CategoryTaxonomy& taxonomy) {
    const std::vector<std::string> words = tokenize(text);

    struct Scored {
        std::string id;
        std::size_t hits;
    };
    std::vector<Scored> scored;
    std::size_t total = 0;
    for (const CareCategory& c : taxonomy.all()) {
        std::size_t hits = 0;
        for (const std::string& entry : c.lexicon) hits += count_phrase(words, entry);
        if (hits > 0) scored.push_back({c.id, hits});
        total += hits;
    }
    if (scored.empty()) return NotFound{};

    std::sort(scored.begin(), scored.end(), [](const Scored& a, const Scored& b) {
        if (a.hits != b.hits) return a.hits > b.hits;
        return a.id < b.id;
    });

    if (scored.size() > 1 && scored[0].hits == scored[1].hits) {
        Ambiguous amb;
        for (const Scored& s : scored)
            if (s.hits == scored[0].hits) amb.candidate_ids.push_back(s.id);
        return amb;
    }
    return CategoryHit{scored[0].id,
                       static_cast<double>(scored[0].hits) / static_cast<double>(total)};
}

ReminderExtraction extract_reminder(const std::string& text, UtcTime reference_time,
                                    const ParserConfig& config) {
    const std::string lc = to_lower(text);

    std::smatch trig;
    if (!std::regex_search(lc, trig, trigger_re())) return NoReminder{};

    std::vector<char> cut(lc.size(), 0);
    auto mark_span = [&](std::size_t pos, std::size_t len) {
        for (std::size_t i = pos; i < pos + len && i < cut.size(); ++i) cut[i] = 1;
    };
    mark_span(static_cast<std::size_t>(trig.position(0)),
              static_cast<std::size_t>(trig.length(0)));

    // First parseable standalone clock phrase; combines with a bare day
    // phrase ("at 2 pm tomorrow") or stands on its own.
    std::optional<int> clock_tod;
    std::size_t clock_pos = 0;
    std::size_t clock_len = 0;
    for (auto it = std::sregex_iterator(lc.begin(), lc.end(), at_re());
         it != std::sregex_iterator(); ++it) {
        if (auto tod = clock_seconds((*it)[1], (*it)[2], (*it)[3])) {
            clock_tod = tod;
            clock_pos = static_cast<std::size_t>(it->position(0));
            clock_len = static_cast<std::size_t>(it->length(0));
            break;
        }
    }
    auto take_clock = [&] {
        mark_span(clock_pos, clock_len);
        return *clock_tod;
    };

    ScheduleSpec schedule = AmbiguousSpec{};
    bool resolved = false;

    // Family precedence: recurring > tomorrow > weekday > clock > relative.
    // A family that matches but cannot be resolved leaves the schedule
    // AMBIGUOUS instead of falling through to a weaker guess.
    std::smatch m;
    if (std::regex_search(lc, m, every_re())) {
        const std::string period = m[1].str();
        std::optional<int> tod;
        if (m[2].matched)
            tod = clock_seconds(m[2], m[3], m[4]);
        else if (period == "morning")
            tod = config.canonical.morning;
        else if (period == "afternoon")
            tod = config.canonical.afternoon;
        else if (period == "evening")
            tod = config.canonical.evening;
        else if (period == "night")
            tod = config.canonical.night;
        else if (clock_tod)
            tod = take_clock();  // "every day ... at 9 am" with words between
        int count = config.default_recurrence_count;
        if (m[5].matched) count = std::stoi(m[5].str());
        if (tod && count >= 1) {
            schedule = RecurringSpec{next_daily(reference_time, *tod), count};
            resolved = true;
            mark_span(static_cast<std::size_t>(m.position(0)),
                      static_cast<std::size_t>(m.length(0)));
        }
    } else if (std::regex_search(lc, m, tomorrow_re())) {
        std::optional<int> tod;
        if (m[1].matched)
            tod = clock_seconds(m[1], m[2], m[3]);
        else if (clock_tod)
            tod = take_clock();
        else
            tod = config.canonical.morning;
        if (tod) {
            schedule = OneShotSpec{day_time(reference_time, 1, *tod)};
            resolved = true;
            mark_span(static_cast<std::size_t>(m.position(0)),
                      static_cast<std::size_t>(m.length(0)));
        }
    } else if (std::regex_search(lc, m, weekday_re())) {
        std::optional<int> tod;
        if (m[2].matched)
            tod = clock_seconds(m[2], m[3], m[4]);
        else if (clock_tod)
            tod = take_clock();
        else
            tod = config.canonical.morning;
        if (tod) {
            const int target = weekday_index(m[1].str());
            const int ahead = (target - reference_time.weekday() + 6) % 7 + 1;
            schedule = OneShotSpec{day_time(reference_time, ahead, *tod)};
            resolved = true;
            mark_span(static_cast<std::size_t>(m.position(0)),
                      static_cast<std::size_t>(m.length(0)));
        }
    } else if (clock_tod) {
        schedule = OneShotSpec{next_daily(reference_time, take_clock())};
        resolved = true;
    } else if (std::regex_search(lc, m, in_re())) {
        const int n = std::stoi(m[1].str());
        if (n >= 1) {
            const bool hours = m[2].str()[0] == 'h';
            schedule =
                OneShotSpec{reference_time.plus_seconds(int64_t{n} * (hours ? 3600 : 60))};
            resolved = true;
            mark_span(static_cast<std::size_t>(m.position(0)),
                      static_cast<std::size_t>(m.length(0)));
        }
    }

    ReminderFields fields;
    if (resolved) fields.schedule = schedule;
    fields.time_resolved = resolved;
    fields.description = assemble_description(text, cut);
    return fields;
}

double score_confidence(double resident_conf, double category_conf, bool time_resolved) {
    double s = std::sqrt(resident_conf * category_conf);
    if (!time_resolved) s *= 0.5;
    return s;
}

// -------------------------------------------------------------------------
// Composition

ParseOutcome parse(const Transcript& transcript, const Registries& registries,
                   const ParserConfig& config, const ParseOverrides& overrides) {
    ParseOutcome out;

    ResidentMatch rm =
        overrides.resident_id
            ? (registries.residents.contains(*overrides.resident_id)
                   ? ResidentMatch{ResidentHit{*overrides.resident_id, 1.0}}
                   : ResidentMatch{NotFound{}})
            : match_resident(transcript.text, registries.residents, config);
    CategoryMatch cm =
        overrides.category_id
            ? (registries.categories.contains(*overrides.category_id)
                   ? CategoryMatch{CategoryHit{*overrides.category_id, 1.0}}
                   : CategoryMatch{NotFound{}})
            : classify_category(transcript.text, registries.categories);

    ReminderExtraction ext = extract_reminder(transcript.text, transcript.spoken_at, config);
    out.reminder_detected = std::holds_alternative<ReminderFields>(ext);

    // an answered time pins an otherwise ambiguous schedule
    if (out.reminder_detected && overrides.time) {
        auto& fields = std::get<ReminderFields>(ext);
        if (is_ambiguous(fields.schedule)) {
            fields.schedule = OneShotSpec{*overrides.time};
            fields.time_resolved = true;
        }
    }

    using Field = ClarificationRequest::Field;
    if (const auto* amb = std::get_if<Ambiguous>(&rm)) {
        out.clarification =
            ClarificationRequest{Field::resident, amb->candidate_ids,
                                 "Which resident did you mean: " +
                                     join(amb->candidate_ids, ", ") + "?"};
        return out;
    }
    if (std::holds_alternative<NotFound>(rm)) {
        out.clarification =
            ClarificationRequest{Field::resident, {}, "Which resident is this note about?"};
        return out;
    }
    if (const auto* amb = std::get_if<Ambiguous>(&cm)) {
        out.clarification =
            ClarificationRequest{Field::category, amb->candidate_ids,
                                 "Which care category applies: " +
                                     join(amb->candidate_ids, ", ") + "?"};
        return out;
    }
    if (std::holds_alternative<NotFound>(cm)) {
        out.clarification = ClarificationRequest{Field::category, {},
                                                 "Which care category does this fall under?"};
        return out;
    }

    const auto& rh = std::get<ResidentHit>(rm);
    const auto& ch = std::get<CategoryHit>(cm);

    const double record_conf = std::sqrt(rh.confidence * ch.confidence);
    if (record_conf < config.gate_threshold) {
        // confirm the weaker of the two fields before emitting anything
        if (rh.confidence <= ch.confidence) {
            out.clarification = ClarificationRequest{
                Field::resident,
                {rh.resident_id},
                "Please confirm the resident: best guess is '" + rh.resident_id + "'."};
        } else {
            out.clarification = ClarificationRequest{
                Field::category,
                {ch.category_id},
                "Please confirm the category: best guess is '" + ch.category_id + "'."};
        }
        return out;
    }

    RecordDraft draft;
    draft.record_id = "rec-" + transcript.id;
    draft.resident_id = rh.resident_id;
    draft.category_id = ch.category_id;
    draft.timestamp = transcript.spoken_at;
    draft.note = transcript.text;
    draft.source_transcript = transcript.id;
    draft.parser_confidence = record_conf;

    ValidationResult vr = validate_record(draft, registries.residents, registries.categories);
    if (const auto* err = std::get_if<ValidationError>(&vr))
        throw std::logic_error("parser emitted an invalid record: " + err->describe());
    out.record = std::get<CareRecord>(vr);

    if (out.reminder_detected) {
        const auto& fields = std::get<ReminderFields>(ext);
        ReminderIntent intent;
        intent.intent_id = "int-" + transcript.id;
        intent.source_transcript = transcript.id;
        intent.resident_id = rh.resident_id;
        intent.category_id = ch.category_id;
        intent.description = fields.description;
        intent.schedule = fields.schedule;
        intent.confidence = score_confidence(rh.confidence, ch.confidence, fields.time_resolved);
        intent.created_at = transcript.spoken_at;
        out.intent = std::move(intent);
    }

    out.disposition = ParseDisposition::parsed;
    return out;
}

// -------------------------------------------------------------------------
// Wire format

std::string serialize_outcome(const ParseOutcome& outcome) {
    json j;
    j["disposition"] =
        outcome.disposition == ParseDisposition::parsed ? "parsed" : "clarification_needed";
    j["reminder_detected"] = outcome.reminder_detected;
    if (outcome.record) j["record"] = codec::to_json(*outcome.record);
    if (outcome.intent) j["intent"] = codec::to_json(*outcome.intent);
    if (outcome.clarification) {
        const ClarificationRequest& c = *outcome.clarification;
        j["clarification"] = {{"field", to_string(c.field)},
                              {"candidates", c.candidates},
                              {"prompt", c.prompt}};
    }
    return j.dump();
}

ParseOutcome parse_outcome_line(const std::string& line) {
    try {
        const json j = json::parse(line);
        if (!j.is_object()) throw std::runtime_error("outcome line is not a JSON object");

        ParseOutcome out;
        const std::string disp = j.at("disposition").get<std::string>();
        if (disp == "parsed")
            out.disposition = ParseDisposition::parsed;
        else if (disp == "clarification_needed")
            out.disposition = ParseDisposition::clarification_needed;
        else
            throw std::runtime_error("unknown disposition '" + disp + "'");
        out.reminder_detected = j.at("reminder_detected").get<bool>();

        if (j.contains("record")) out.record = codec::record_from_json(j.at("record"));
        if (j.contains("intent")) out.intent = codec::intent_from_json(j.at("intent"));
        if (j.contains("clarification")) {
            const json& c = j.at("clarification");
            ClarificationRequest req;
            req.field = field_from_string(c.at("field").get<std::string>());
            req.candidates = c.at("candidates").get<std::vector<std::string>>();
            req.prompt = c.at("prompt").get<std::string>();
            out.clarification = std::move(req);
        }
        return out;
    } catch (const json::exception& e) {
        throw std::runtime_error(std::string("malformed parser outcome line: ") + e.what());
    }
}

// -------------------------------------------------------------------------
// External adapter

namespace {

class TempFile {
public:
    TempFile() {
        char tmpl[] = "/tmp/carepipe-adapter-XXXXXX";
        const int fd = ::mkstemp(tmpl);
        if (fd < 0) throw std::runtime_error("cannot create temp file for external parser");
        ::close(fd);
        path_ = tmpl;
    }
    ~TempFile() { std::remove(path_.c_str()); }
    TempFile(const TempFile&) = delete;
    TempFile& operator=(const TempFile&) = delete;

    const std::string& path() const { return path_; }

private:
    std::string path_;
};

}  // namespace

ParseOutcome ExternalProcessParser::parse(const Transcript& transcript,
                                          const Registries&) const {
    TempFile in_file;
    TempFile out_file;
    {
        std::ofstream in(in_file.path());
        in << serialize_transcript(transcript) << '\n';
        if (!in) throw std::runtime_error("cannot write external parser input");
    }

    const std::string shell =
        command_ + " < " + in_file.path() + " > " + out_file.path();
    const int rc = std::system(shell.c_str());
    if (rc != 0)
        throw std::runtime_error("external parser command failed with status " +
                                 std::to_string(rc));

    std::ifstream out(out_file.path());
    std::string line;
    if (!std::getline(out, line) || line.empty())
        throw std::runtime_error("external parser produced no output");
    return parse_outcome_line(line);
}

}  // namespace carepipe::parser
