#include "carepipe/cli.hpp"

#include <algorithm>
#include <cctype>
#include <cstdlib>
#include <fstream>
#include <optional>
#include <ostream>
#include <sstream>

#include <json.hpp>

#include "carepipe/text.hpp"
#include "carepipe/time_utc.hpp"

namespace carepipe::cli {

using nlohmann::json;

namespace {

void check(bool ok, const std::string& key, const std::string& what) {
    if (!ok) throw ConfigError(ConfigError::Kind::BadValue, "config key " + key + " " + what);
}

double parse_double(const std::string& key, const std::string& value) {
    try {
        std::size_t pos = 0;
        const double v = std::stod(value, &pos);
        if (pos == value.size()) return v;
    } catch (const std::exception&) {
    }
    throw ConfigError(ConfigError::Kind::BadValue,
                      "config key " + key + " is not a number: " + value);
}

uint64_t parse_u64(const std::string& key, const std::string& value) {
    try {
        std::size_t pos = 0;
        const uint64_t v = std::stoull(value, &pos);
        if (pos == value.size() && value[0] != '-') return v;
    } catch (const std::exception&) {
    }
    throw ConfigError(ConfigError::Kind::BadValue,
                      "config key " + key + " is not a non-negative integer: " + value);
}

bool parse_bool(const std::string& key, const std::string& value) {
    if (value == "true" || value == "1") return true;
    if (value == "false" || value == "0") return false;
    throw ConfigError(ConfigError::Kind::BadValue,
                      "config key " + key + " is not a boolean: " + value);
}

// Range invariant for one key against the currently stored value.
void check_range(const Config& c, const std::string& key) {
    const auto in01 = [&](double v) { check(v >= 0.0 && v <= 1.0, key, "must be in [0, 1]"); };
    if (key == "fuzzy_threshold") in01(c.fuzzy_threshold);
    else if (key == "tie_tolerance") in01(c.tie_tolerance);
    else if (key == "gate_threshold") in01(c.gate_threshold);
    else if (key == "k1") check(c.k1 > 0.0, key, "must be positive");
    else if (key == "b") in01(c.b);
    else if (key == "rrf_k") check(c.rrf_k > 0.0, key, "must be positive");
    else if (key == "embedding_dim") check(c.embedding_dim >= 1, key, "must be at least 1");
    else if (key == "min_similarity") in01(c.min_similarity);
    else if (key == "delta") in01(c.delta);
    else if (key == "tau_ms") check(c.tau_ms > 0.0, key, "must be positive");
}

}  // namespace

const std::vector<std::string>& config_keys() {
    static const std::vector<std::string> keys = {
        "corpus",        "residents",      "categories", "store",          "case",
        "fuzzy_threshold", "tie_tolerance", "gate_threshold", "k1",        "b",
        "rrf_k",         "embedding_dim",  "min_similarity", "delta",      "tau_ms",
        "seed",          "confirm_on_fire"};
    return keys;
}

void apply_override(Config& c, const std::string& key, const std::string& value) {
    if (key == "corpus") c.corpus = value;
    else if (key == "residents") c.residents = value;
    else if (key == "categories") c.categories = value;
    else if (key == "store") c.store = value;
    else if (key == "case") c.case_definition = value;
    else if (key == "fuzzy_threshold") c.fuzzy_threshold = parse_double(key, value);
    else if (key == "tie_tolerance") c.tie_tolerance = parse_double(key, value);
    else if (key == "gate_threshold") c.gate_threshold = parse_double(key, value);
    else if (key == "k1") c.k1 = parse_double(key, value);
    else if (key == "b") c.b = parse_double(key, value);
    else if (key == "rrf_k") c.rrf_k = parse_double(key, value);
    else if (key == "embedding_dim") c.embedding_dim = parse_u64(key, value);
    else if (key == "min_similarity") c.min_similarity = parse_double(key, value);
    else if (key == "delta") c.delta = parse_double(key, value);
    else if (key == "tau_ms") c.tau_ms = parse_double(key, value);
    else if (key == "seed") c.seed = parse_u64(key, value);
    else if (key == "confirm_on_fire") c.confirm_on_fire = parse_bool(key, value);
    else throw ConfigError(ConfigError::Kind::UnknownKey, "unknown config key: " + key);
    check_range(c, key);
}

void apply_config_text(Config& config, const std::string& text, const std::string& origin) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::parse_error& e) {
        throw ConfigError(ConfigError::Kind::MalformedFile, origin + ": " + e.what());
    }
    if (!j.is_object())
        throw ConfigError(ConfigError::Kind::MalformedFile,
                          origin + ": config must be a JSON object");
    for (const auto& [key, value] : j.items()) {
        const std::string v = value.is_string() ? value.get<std::string>() : value.dump();
        apply_override(config, key, v);
    }
}

Config load_config_file(const std::string& path) {
    std::ifstream in(path);
    if (!in)
        throw ConfigError(ConfigError::Kind::FileUnreadable, "cannot read config file " + path);
    std::stringstream buffer;
    buffer << in.rdbuf();
    Config config;
    apply_config_text(config, buffer.str(), path);
    return config;
}

void apply_env(Config& config, const EnvGetter& get) {
    for (const std::string& key : config_keys()) {
        std::string name = "CAREPIPE_";
        for (const char ch : key)
            name += static_cast<char>(std::toupper(static_cast<unsigned char>(ch)));
        if (const char* value = get(name)) apply_override(config, key, value);
    }
}

void apply_env(Config& config) {
    apply_env(config, [](const std::string& name) -> const char* {
        return std::getenv(name.c_str());
    });
}

void validate(const Config& config) {
    for (const std::string& key : config_keys()) check_range(config, key);
}

parser::ParserConfig parser_config(const Config& c) {
    parser::ParserConfig p;
    p.fuzzy_threshold = c.fuzzy_threshold;
    p.tie_tolerance = c.tie_tolerance;
    p.gate_threshold = c.gate_threshold;
    return p;
}

scheduler::SchedulerConfig scheduler_config(const Config& c) {
    scheduler::SchedulerConfig s;
    s.gate_threshold = c.gate_threshold;
    s.confirm_on_fire = c.confirm_on_fire;
    return s;
}

pipeline::ReplayConfig replay_config(const Config& c) {
    pipeline::ReplayConfig r;
    r.budget.delta = c.delta;
    r.budget.tau_ms = c.tau_ms;
    r.scheduler = scheduler_config(c);
    return r;
}

retrieval::Bm25Params bm25_params(const Config& c) { return {c.k1, c.b}; }

// ---------------------------------------------------------------------------
// Interactive clarification loop

namespace {

std::string trimmed(const std::string& s) {
    std::size_t begin = 0;
    std::size_t end = s.size();
    while (begin < end && std::isspace(static_cast<unsigned char>(s[begin]))) ++begin;
    while (end > begin && std::isspace(static_cast<unsigned char>(s[end - 1]))) --end;
    return s.substr(begin, end - begin);
}

}  // namespace

ClarificationAnswer parse_answer(const std::string& line) {
    const std::string s = trimmed(line);
    if (s == "skip") return SkipAnswer{};
    if (s.rfind("resident=", 0) == 0) {
        std::string id = s.substr(9);
        if (id.empty()) throw MalformedAnswer("resident answer needs an id: " + line);
        return ResidentAnswer{std::move(id)};
    }
    if (s.rfind("time=", 0) == 0) {
        const auto t = parse_utc(s.substr(5));
        if (!t) throw MalformedAnswer("unparseable time answer: " + line);
        return TimeAnswer{*t};
    }
    throw MalformedAnswer("expected resident=<id>, time=<iso-utc>, or skip: " + line);
}

parser::ParseOutcome AnsweringParser::parse(const Transcript& transcript,
                                            const Registries& registries) const {
    const auto it = overrides_.find(transcript.id);
    return parser::parse(transcript, registries, config_,
                         it == overrides_.end() ? parser::ParseOverrides{} : it->second);
}

void AnsweringParser::pin(const std::string& transcript_id, const ClarificationAnswer& answer) {
    parser::ParseOverrides& o = overrides_[transcript_id];
    if (const auto* r = std::get_if<ResidentAnswer>(&answer)) o.resident_id = r->resident_id;
    else if (const auto* t = std::get_if<TimeAnswer>(&answer)) o.time = t->time;
}

namespace {

UtcTime first_fire_of(const ScheduleSpec& spec) {
    if (const auto* one = std::get_if<OneShotSpec>(&spec)) return one->fire_at;
    return std::get<RecurringSpec>(spec).first_fire;
}

// A parsed intent will still stop at the scheduler when its timing is
// ambiguous or not in the future; predict that here so the prompt comes
// before anything is persisted.
std::optional<ClarificationRequest> pending_time_prompt(const parser::ParseOutcome& outcome,
                                                        UtcTime now) {
    if (!outcome.intent) return std::nullopt;
    if (is_ambiguous(outcome.intent->schedule))
        return ClarificationRequest{ClarificationRequest::Field::time, {},
                                    "When should this reminder fire?"};
    if (!(now < first_fire_of(outcome.intent->schedule)))
        return ClarificationRequest{
            ClarificationRequest::Field::time, {},
            "The requested time has already passed; when should it fire?"};
    return std::nullopt;
}

void print_prompt(std::ostream& out, const Transcript& t, const ClarificationRequest& req) {
    out << t.id << " needs " << to_string(req.field) << ": " << req.prompt << "\n";
    if (!req.candidates.empty()) out << "  candidates: " << join(req.candidates, ", ") << "\n";
    out.flush();
}

std::string resume_state(const std::map<std::string, parser::ParseOverrides>& pins,
                         std::size_t completed, const std::string& pending) {
    json j;
    j["completed"] = completed;
    j["pending_transcript"] = pending;
    json answered = json::object();
    for (const auto& [tid, o] : pins) {
        json oj = json::object();
        if (o.resident_id) oj["resident"] = *o.resident_id;
        if (o.category_id) oj["category"] = *o.category_id;
        if (o.time) oj["time"] = format_iso(*o.time);
        answered[tid] = std::move(oj);
    }
    j["answered"] = std::move(answered);
    return j.dump();
}

}  // namespace

pipeline::ReplayReport interactive_replay(std::vector<Transcript> corpus,
                                          const Registries& registries, Store& store,
                                          std::istream& answers, std::ostream& prompts,
                                          const Config& config) {
    std::sort(corpus.begin(), corpus.end(), [](const Transcript& a, const Transcript& b) {
        if (a.spoken_at != b.spoken_at) return a.spoken_at < b.spoken_at;
        return a.id < b.id;
    });

    AnsweringParser parser(parser_config(config));

    std::size_t completed = 0;
    for (const Transcript& t : corpus) {
        bool settled = false;
        while (!settled) {
            const parser::ParseOutcome p = parser.parse(t, registries);
            std::optional<ClarificationRequest> pending = p.clarification;
            if (!pending) pending = pending_time_prompt(p, t.spoken_at);
            if (!pending) break;

            print_prompt(prompts, t, *pending);
            bool answered = false;
            std::string line;
            while (std::getline(answers, line)) {
                try {
                    const ClarificationAnswer answer = parse_answer(line);
                    if (std::holds_alternative<SkipAnswer>(answer)) settled = true;
                    else parser.pin(t.id, answer);
                    answered = true;
                    break;
                } catch (const MalformedAnswer& e) {
                    prompts << "  " << e.what() << "\n";
                }
            }
            if (!answered)
                throw AbortedByUser(completed, t.id,
                                    resume_state(parser.pinned(), completed, t.id));
        }
        ++completed;
    }

    return pipeline::replay(std::move(corpus), registries, parser, store, replay_config(config));
}

}  // namespace carepipe::cli
