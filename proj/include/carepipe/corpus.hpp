#pragma once
// Corpus and registry files: UTF-8, one JSON object per line.
//
// Transcript lines:  {"id","text","spoken_at", "truth"?:{...}}
// Resident lines:    {"id","full_name","aliases"}
// Category lines:    {"id","label","lexicon"}
// Key names are normative; unknown keys are rejected as malformed.

#include <iosfwd>
#include <stdexcept>
#include <string>
#include <vector>

#include "carepipe/types.hpp"

namespace carepipe {

class CorpusError : public std::runtime_error {
public:
    enum class Kind { MalformedLine, DuplicateId, FileUnreadable };

    CorpusError(Kind kind, std::string message, std::size_t line_no = 0, std::string id = {})
        : std::runtime_error(std::move(message)), kind(kind), line_no(line_no),
          id(std::move(id)) {}

    Kind kind;
    std::size_t line_no;  // 1-based; 0 when not line-specific
    std::string id;       // offending id for DuplicateId
};

std::vector<Transcript> load_corpus(const std::string& path);
std::vector<Transcript> load_corpus_stream(std::istream& in, const std::string& origin);

ResidentRegistry load_residents(const std::string& path);
CategoryTaxonomy load_categories(const std::string& path);

// Canonical single-line form; load(serialize(x)) == x.
std::string serialize_transcript(const Transcript& t);
std::string serialize_resident(const Resident& r);
std::string serialize_category(const CareCategory& c);

void save_corpus(const std::vector<Transcript>& transcripts, const std::string& path);
void save_residents(const std::vector<Resident>& residents, const std::string& path);
void save_categories(const std::vector<CareCategory>& categories, const std::string& path);

// Single-line parsers used by the store and the adapter boundary as well.
Transcript parse_transcript_line(const std::string& line, std::size_t line_no = 0);

}  // namespace carepipe
