#pragma once
// Sparse (Okapi BM25), dense (cosine over a pluggable embedder), and
// hybrid (reciprocal-rank fusion) retrieval over stored care records,
// plus the needle-in-a-haystack stress harness.
//
// Indexes are immutable once built; queries are pure and may run
// concurrently. Exact search throughout: the corpora are small enough
// that approximate structures would only add noise.

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "carepipe/embedder.hpp"
#include "carepipe/types.hpp"

namespace carepipe::retrieval {

// Minimal indexable unit. Care records index their note text; the
// needle harness generates synthetic docs directly.
struct Doc {
    std::string id;
    std::string text;

    bool operator==(const Doc&) const = default;
};

std::vector<Doc> docs_from_records(const std::vector<CareRecord>& records);

enum class Method { sparse, dense, hybrid };
std::string to_string(Method m);

struct RankedResult {
    std::string record_id;
    double score = 0.0;
    std::size_t rank = 0;  // 1-based, consecutive
    Method method = Method::sparse;
};

struct Posting {
    std::string record_id;
    int tf = 0;
};

class InvertedIndex {
public:
    // Rejects docs with duplicate ids or no tokens at all.
    static InvertedIndex build(const std::vector<Doc>& docs);

    std::size_t size() const { return lengths_.size(); }  // N
    double average_length() const { return avg_length_; }
    bool contains(const std::string& id) const { return lengths_.count(id) != 0; }
    std::size_t doc_length(const std::string& id) const;
    std::size_t doc_frequency(const std::string& term) const;
    int term_frequency(const std::string& term, const std::string& id) const;

    // term -> postings in ascending record id
    const std::map<std::string, std::vector<Posting>>& postings() const { return postings_; }
    std::vector<std::string> ids() const;  // ascending

private:
    std::map<std::string, std::vector<Posting>> postings_;
    std::map<std::string, std::size_t> lengths_;
    double avg_length_ = 0.0;
};

class DenseIndex {
public:
    // Embeds every doc; rejects duplicates, dimension drift, and vectors
    // whose norm strays from 1 by more than 1e-9.
    static DenseIndex build(const std::vector<Doc>& docs, const Embedder& embedder);

    std::size_t size() const { return vectors_.size(); }
    std::size_t dimension() const { return dim_; }
    const std::map<std::string, std::vector<double>>& vectors() const { return vectors_; }

private:
    std::size_t dim_ = 0;
    std::map<std::string, std::vector<double>> vectors_;
};

struct Bm25Params {
    double k1 = 1.2;
    double b = 0.75;
};

// Okapi BM25 with IDF(t) = ln(1 + (N - df + 0.5)/(df + 0.5)), summed
// over the query terms in order (duplicated terms contribute twice).
// The record must be in the index.
double bm25_score(const std::vector<std::string>& query_terms, const std::string& record_id,
                  const InvertedIndex& index, Bm25Params params = {});

// Every record is scored (absent terms contribute zero), so k beyond the
// corpus returns the whole ranking. Ties break by record id ascending.
std::vector<RankedResult> sparse_search(const std::string& query, const InvertedIndex& index,
                                        std::size_t k, Bm25Params params = {});

std::vector<RankedResult> dense_search(const std::string& query, const DenseIndex& index,
                                       const Embedder& embedder, std::size_t k);

// Reciprocal-rank fusion over ranked id lists: fused(r) = sum of
// 1/(K + rank) across every list containing r.
std::map<std::string, double> rrf_fuse(const std::vector<std::vector<std::string>>& ranked_lists,
                                       double K = 60.0);

// Fuses the sparse and dense top-(4k) lists with K=60, then returns the
// top k by fused score, ties by record id.
std::vector<RankedResult> hybrid_search(const std::string& query, const InvertedIndex& sparse,
                                        const DenseIndex& dense, const Embedder& embedder,
                                        std::size_t k, Bm25Params params = {});

struct InsufficientEvidence {
    double top_similarity = 0.0;
    double threshold = 0.0;
};

using GatedResults = std::variant<std::vector<RankedResult>, InsufficientEvidence>;

// Refuses to answer rather than guessing: if the best dense similarity
// for the query falls below `min_similarity` (or there are no results
// at all), the results are withheld.
GatedResults weak_evidence_gate(std::vector<RankedResult> results, double top_dense_similarity,
                                double min_similarity = 0.3);

// ---------------------------------------------------------------------------
// Needle in a haystack

struct NeedleQueryOutcome {
    std::string query;
    std::size_t sparse_rank = 0;  // 1-based rank of the needle per method
    std::size_t dense_rank = 0;
    std::size_t hybrid_rank = 0;
    double needle_similarity = 0.0;      // dense similarity of query vs needle
    double top_dense_similarity = 0.0;   // best similarity over the whole corpus
    bool insufficient_evidence = false;  // weak-evidence gate verdict
};

struct NeedleReport {
    std::size_t routine_count = 0;
    uint64_t seed = 0;
    std::vector<NeedleQueryOutcome> queries;
};

// Buries one critical record among `routine_count` synthetic routine
// notes (template pool, seeded PRNG) and reports where each query finds
// it under every method.
NeedleReport needle_harness(std::size_t routine_count, const std::string& needle_text,
                            const std::vector<std::string>& queries, const Embedder& embedder,
                            uint64_t seed, double min_similarity = 0.3);

std::vector<Doc> routine_docs(std::size_t count, uint64_t seed);

}  // namespace carepipe::retrieval
