#include "carepipe/corpus.hpp"

#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

namespace carepipe {

using nlohmann::json;

namespace {

std::string trimmed(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r\n");
    if (b == std::string::npos) return {};
    const auto e = s.find_last_not_of(" \t\r\n");
    return s.substr(b, e - b + 1);
}

[[noreturn]] void malformed(std::size_t line_no, const std::string& why) {
    throw CorpusError(CorpusError::Kind::MalformedLine,
                      "line " + std::to_string(line_no) + ": " + why, line_no);
}

void require_keys(const json& obj, std::size_t line_no, const std::set<std::string>& required,
                  const std::set<std::string>& optional) {
    for (const auto& key : required)
        if (!obj.contains(key)) malformed(line_no, "missing key '" + key + "'");
    for (const auto& [key, _] : obj.items())
        if (!required.count(key) && !optional.count(key))
            malformed(line_no, "unknown key '" + key + "'");
}

std::string get_string(const json& obj, std::size_t line_no, const char* key) {
    const auto& v = obj.at(key);
    if (!v.is_string()) malformed(line_no, std::string("'") + key + "' must be a string");
    return v.get<std::string>();
}

}  // namespace

Transcript parse_transcript_line(const std::string& line, std::size_t line_no) {
    json obj;
    try {
        obj = json::parse(line);
    } catch (const json::exception& e) {
        malformed(line_no, e.what());
    }
    if (!obj.is_object()) malformed(line_no, "not a JSON object");
    require_keys(obj, line_no, {"id", "text", "spoken_at"}, {"truth"});

    Transcript t;
    t.id = get_string(obj, line_no, "id");
    if (t.id.empty()) malformed(line_no, "empty id");
    t.text = get_string(obj, line_no, "text");
    if (trimmed(t.text).empty()) malformed(line_no, "text empty after trimming");
    const auto at = parse_utc(get_string(obj, line_no, "spoken_at"));
    if (!at) malformed(line_no, "invalid spoken_at timestamp");
    t.spoken_at = *at;

    if (obj.contains("truth")) {
        const json& tr = obj.at("truth");
        if (!tr.is_object()) malformed(line_no, "'truth' must be an object");
        require_keys(tr, line_no, {"resident_id", "category_id", "note", "reminder"},
                     {"reminder_description", "expected_event_count"});
        GroundTruth g;
        g.resident_id = get_string(tr, line_no, "resident_id");
        g.category_id = get_string(tr, line_no, "category_id");
        g.note = get_string(tr, line_no, "note");
        if (!tr.at("reminder").is_boolean()) malformed(line_no, "'reminder' must be a boolean");
        g.reminder = tr.at("reminder").get<bool>();
        if (tr.contains("reminder_description"))
            g.reminder_description = get_string(tr, line_no, "reminder_description");
        if (tr.contains("expected_event_count")) {
            if (!tr.at("expected_event_count").is_number_integer())
                malformed(line_no, "'expected_event_count' must be an integer");
            g.expected_event_count = tr.at("expected_event_count").get<int>();
        }
        if (!g.reminder && (g.reminder_description || g.expected_event_count))
            malformed(line_no, "reminder fields present with reminder=false");
        t.truth = std::move(g);
    }
    return t;
}

namespace {

template <typename T, typename ParseLine>
std::vector<T> load_lines(std::istream& in, const std::string& origin, ParseLine parse_line) {
    std::vector<T> items;
    std::set<std::string> seen;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (trimmed(line).empty()) continue;
        T item = parse_line(line, line_no);
        if (!seen.insert(item.id).second)
            throw CorpusError(CorpusError::Kind::DuplicateId,
                              origin + " line " + std::to_string(line_no) + ": duplicate id '" +
                                  item.id + "'",
                              line_no, item.id);
        items.push_back(std::move(item));
    }
    return items;
}

std::ifstream open_or_throw(const std::string& path) {
    std::ifstream in(path);
    if (!in)
        throw CorpusError(CorpusError::Kind::FileUnreadable, "cannot open '" + path + "'");
    return in;
}

Resident parse_resident_line(const std::string& line, std::size_t line_no) {
    json obj;
    try {
        obj = json::parse(line);
    } catch (const json::exception& e) {
        malformed(line_no, e.what());
    }
    if (!obj.is_object()) malformed(line_no, "not a JSON object");
    require_keys(obj, line_no, {"id", "full_name"}, {"aliases"});
    Resident r;
    r.id = get_string(obj, line_no, "id");
    r.full_name = get_string(obj, line_no, "full_name");
    if (r.id.empty() || trimmed(r.full_name).empty())
        malformed(line_no, "resident id/full_name must be non-empty");
    if (obj.contains("aliases")) {
        if (!obj.at("aliases").is_array()) malformed(line_no, "'aliases' must be an array");
        std::set<std::string> unique;
        for (const auto& a : obj.at("aliases")) {
            if (!a.is_string()) malformed(line_no, "alias must be a string");
            const auto alias = a.get<std::string>();
            if (!unique.insert(alias).second) malformed(line_no, "duplicate alias '" + alias + "'");
            r.aliases.push_back(alias);
        }
    }
    return r;
}

CareCategory parse_category_line(const std::string& line, std::size_t line_no) {
    json obj;
    try {
        obj = json::parse(line);
    } catch (const json::exception& e) {
        malformed(line_no, e.what());
    }
    if (!obj.is_object()) malformed(line_no, "not a JSON object");
    require_keys(obj, line_no, {"id", "label", "lexicon"}, {});
    CareCategory c;
    c.id = get_string(obj, line_no, "id");
    c.label = get_string(obj, line_no, "label");
    if (!obj.at("lexicon").is_array()) malformed(line_no, "'lexicon' must be an array");
    for (const auto& w : obj.at("lexicon")) {
        if (!w.is_string()) malformed(line_no, "lexicon entry must be a string");
        c.lexicon.push_back(w.get<std::string>());
    }
    return c;
}

}  // namespace

std::vector<Transcript> load_corpus_stream(std::istream& in, const std::string& origin) {
    return load_lines<Transcript>(in, origin, parse_transcript_line);
}

std::vector<Transcript> load_corpus(const std::string& path) {
    auto in = open_or_throw(path);
    return load_corpus_stream(in, path);
}

ResidentRegistry load_residents(const std::string& path) {
    auto in = open_or_throw(path);
    return ResidentRegistry(load_lines<Resident>(in, path, parse_resident_line));
}

CategoryTaxonomy load_categories(const std::string& path) {
    auto in = open_or_throw(path);
    return CategoryTaxonomy(load_lines<CareCategory>(in, path, parse_category_line));
}

std::string serialize_transcript(const Transcript& t) {
    json obj;
    obj["id"] = t.id;
    obj["text"] = t.text;
    obj["spoken_at"] = format_iso(t.spoken_at);
    if (t.truth) {
        json tr;
        tr["resident_id"] = t.truth->resident_id;
        tr["category_id"] = t.truth->category_id;
        tr["note"] = t.truth->note;
        tr["reminder"] = t.truth->reminder;
        if (t.truth->reminder_description) tr["reminder_description"] = *t.truth->reminder_description;
        if (t.truth->expected_event_count) tr["expected_event_count"] = *t.truth->expected_event_count;
        obj["truth"] = std::move(tr);
    }
    return obj.dump();
}

std::string serialize_resident(const Resident& r) {
    json obj;
    obj["id"] = r.id;
    obj["full_name"] = r.full_name;
    obj["aliases"] = r.aliases;
    return obj.dump();
}

std::string serialize_category(const CareCategory& c) {
    json obj;
    obj["id"] = c.id;
    obj["label"] = c.label;
    obj["lexicon"] = c.lexicon;
    return obj.dump();
}

namespace {

template <typename T, typename Serialize>
void save_lines(const std::vector<T>& items, const std::string& path, Serialize serialize) {
    std::ofstream out(path, std::ios::trunc);
    if (!out)
        throw CorpusError(CorpusError::Kind::FileUnreadable, "cannot write '" + path + "'");
    for (const auto& item : items) out << serialize(item) << '\n';
}

}  // namespace

void save_corpus(const std::vector<Transcript>& transcripts, const std::string& path) {
    save_lines(transcripts, path, serialize_transcript);
}

void save_residents(const std::vector<Resident>& residents, const std::string& path) {
    save_lines(residents, path, serialize_resident);
}

void save_categories(const std::vector<CareCategory>& categories, const std::string& path) {
    save_lines(categories, path, serialize_category);
}

}  // namespace carepipe
