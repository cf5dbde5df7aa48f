#include "carepipe/retrieval.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <iterator>
#include <random>
#include <stdexcept>

#include "carepipe/metrics.hpp"
#include "carepipe/text.hpp"

namespace carepipe::retrieval {

std::vector<Doc> docs_from_records(const std::vector<CareRecord>& records) {
    std::vector<Doc> docs;
    docs.reserve(records.size());
    for (const auto& r : records) docs.push_back({r.record_id, r.note});
    return docs;
}

std::string to_string(Method m) {
    switch (m) {
        case Method::sparse: return "sparse";
        case Method::dense: return "dense";
        case Method::hybrid: return "hybrid";
    }
    return "sparse";
}

InvertedIndex InvertedIndex::build(const std::vector<Doc>& docs) {
    InvertedIndex index;
    std::size_t total_length = 0;
    for (const auto& doc : docs) {
        const auto terms = tokenize(doc.text);
        if (terms.empty())
            throw std::invalid_argument("doc '" + doc.id + "' has no indexable terms");
        if (!index.lengths_.emplace(doc.id, terms.size()).second)
            throw std::invalid_argument("duplicate doc id '" + doc.id + "'");
        total_length += terms.size();

        std::map<std::string, int> tf;
        for (const auto& t : terms) ++tf[t];
        for (const auto& [term, count] : tf)
            index.postings_[term].push_back({doc.id, count});
    }
    // postings arrive in input order; queries expect ids ascending
    for (auto& [term, list] : index.postings_)
        std::sort(list.begin(), list.end(),
                  [](const Posting& a, const Posting& b) { return a.record_id < b.record_id; });
    if (!docs.empty())
        index.avg_length_ = static_cast<double>(total_length) / static_cast<double>(docs.size());
    return index;
}

std::size_t InvertedIndex::doc_length(const std::string& id) const {
    const auto it = lengths_.find(id);
    if (it == lengths_.end()) throw std::out_of_range("doc '" + id + "' not in index");
    return it->second;
}

std::size_t InvertedIndex::doc_frequency(const std::string& term) const {
    const auto it = postings_.find(term);
    return it == postings_.end() ? 0 : it->second.size();
}

int InvertedIndex::term_frequency(const std::string& term, const std::string& id) const {
    const auto it = postings_.find(term);
    if (it == postings_.end()) return 0;
    for (const auto& p : it->second)
        if (p.record_id == id) return p.tf;
    return 0;
}

std::vector<std::string> InvertedIndex::ids() const {
    std::vector<std::string> out;
    out.reserve(lengths_.size());
    for (const auto& [id, len] : lengths_) out.push_back(id);
    return out;
}

DenseIndex DenseIndex::build(const std::vector<Doc>& docs, const Embedder& embedder) {
    DenseIndex index;
    index.dim_ = embedder.dimension();
    for (const auto& doc : docs) {
        auto v = embedder.embed(doc.text);
        if (v.size() != index.dim_)
            throw std::invalid_argument("embedding for '" + doc.id + "' has wrong dimension");
        double norm_sq = 0.0;
        for (const double x : v) norm_sq += x * x;
        if (std::abs(std::sqrt(norm_sq) - 1.0) > 1e-9)
            throw std::invalid_argument("embedding for '" + doc.id + "' is not unit length");
        if (!index.vectors_.emplace(doc.id, std::move(v)).second)
            throw std::invalid_argument("duplicate doc id '" + doc.id + "'");
    }
    return index;
}

double bm25_score(const std::vector<std::string>& query_terms, const std::string& record_id,
                  const InvertedIndex& index, Bm25Params params) {
    const double len = static_cast<double>(index.doc_length(record_id));
    const double avg = index.average_length();
    const double n = static_cast<double>(index.size());

    double score = 0.0;
    for (const auto& term : query_terms) {
        const int tf = index.term_frequency(term, record_id);
        if (tf == 0) continue;
        const double df = static_cast<double>(index.doc_frequency(term));
        const double idf = std::log(1.0 + (n - df + 0.5) / (df + 0.5));
        score += idf * (tf * (params.k1 + 1.0)) /
                 (tf + params.k1 * (1.0 - params.b + params.b * len / avg));
    }
    return score;
}

namespace {

// score descending, then id ascending; ranks assigned 1..k
std::vector<RankedResult> take_top(std::vector<RankedResult> scored, std::size_t k,
                                   Method method) {
    std::sort(scored.begin(), scored.end(), [](const RankedResult& a, const RankedResult& b) {
        if (a.score != b.score) return a.score > b.score;
        return a.record_id < b.record_id;
    });
    if (scored.size() > k) scored.resize(k);
    for (std::size_t i = 0; i < scored.size(); ++i) {
        scored[i].rank = i + 1;
        scored[i].method = method;
    }
    return scored;
}

}  // namespace

std::vector<RankedResult> sparse_search(const std::string& query, const InvertedIndex& index,
                                        std::size_t k, Bm25Params params) {
    const auto terms = tokenize(query);
    std::vector<RankedResult> scored;
    for (const auto& id : index.ids())
        scored.push_back({id, bm25_score(terms, id, index, params), 0, Method::sparse});
    return take_top(std::move(scored), k, Method::sparse);
}

std::vector<RankedResult> dense_search(const std::string& query, const DenseIndex& index,
                                       const Embedder& embedder, std::size_t k) {
    const auto qv = embedder.embed(query);
    double q_norm_sq = 0.0;
    for (const double x : qv) q_norm_sq += x * x;

    std::vector<RankedResult> scored;
    for (const auto& [id, v] : index.vectors()) {
        // a query with no tokens embeds to the zero vector: similarity 0
        const double sim = q_norm_sq == 0.0 ? 0.0 : metrics::cosine_similarity(qv, v);
        scored.push_back({id, sim, 0, Method::dense});
    }
    return take_top(std::move(scored), k, Method::dense);
}

std::map<std::string, double> rrf_fuse(const std::vector<std::vector<std::string>>& ranked_lists,
                                       double K) {
    std::map<std::string, double> fused;
    for (const auto& list : ranked_lists)
        for (std::size_t i = 0; i < list.size(); ++i)
            fused[list[i]] += 1.0 / (K + static_cast<double>(i + 1));
    return fused;
}

std::vector<RankedResult> hybrid_search(const std::string& query, const InvertedIndex& sparse,
                                        const DenseIndex& dense, const Embedder& embedder,
                                        std::size_t k, Bm25Params params) {
    const std::size_t pool = 4 * k;
    std::vector<std::string> sparse_ids, dense_ids;
    for (const auto& r : sparse_search(query, sparse, pool, params))
        sparse_ids.push_back(r.record_id);
    for (const auto& r : dense_search(query, dense, embedder, pool))
        dense_ids.push_back(r.record_id);

    std::vector<RankedResult> scored;
    for (const auto& [id, score] : rrf_fuse({sparse_ids, dense_ids}))
        scored.push_back({id, score, 0, Method::hybrid});
    return take_top(std::move(scored), k, Method::hybrid);
}

GatedResults weak_evidence_gate(std::vector<RankedResult> results, double top_dense_similarity,
                                double min_similarity) {
    if (results.empty() || top_dense_similarity < min_similarity)
        return InsufficientEvidence{top_dense_similarity, min_similarity};
    return results;
}

// ---------------------------------------------------------------------------
// Needle in a haystack

namespace {

const char* const kNames[] = {"arthur", "beatrice", "clara",  "dennis",
                              "edith",  "frank",    "gloria", "harold"};
const char* const kActivities[] = {"breakfast in the dining room", "lunch with the other residents",
                                   "a walk around the garden",     "the afternoon quiz",
                                   "a game of cards",              "the singing group",
                                   "tea in the lounge",            "the morning stretches"};
const char* const kTemplates[] = {
    "helped %N with %A today",
    "%N enjoyed %A and seemed cheerful",
    "routine notes for %N after %A",
    "%N joined %A without any trouble",
    "staff assisted %N during %A",
    "%N had a quiet day and attended %A",
};

std::string fill_template(const std::string& tpl, const std::string& name,
                          const std::string& activity) {
    std::string out;
    for (std::size_t i = 0; i < tpl.size(); ++i) {
        if (tpl[i] == '%' && i + 1 < tpl.size()) {
            out += tpl[i + 1] == 'N' ? name : activity;
            ++i;
        } else {
            out += tpl[i];
        }
    }
    return out;
}

std::size_t rank_of(const std::vector<RankedResult>& results, const std::string& id) {
    for (const auto& r : results)
        if (r.record_id == id) return r.rank;
    return 0;
}

}  // namespace

std::vector<Doc> routine_docs(std::size_t count, uint64_t seed) {
    std::mt19937_64 rng(seed);
    // modulo draws keep the sequence identical across standard libraries
    const auto pick = [&rng](std::size_t n) { return static_cast<std::size_t>(rng() % n); };

    std::vector<Doc> docs;
    docs.reserve(count);
    for (std::size_t i = 0; i < count; ++i) {
        const std::string text =
            fill_template(kTemplates[pick(std::size(kTemplates))], kNames[pick(std::size(kNames))],
                          kActivities[pick(std::size(kActivities))]);
        char id[32];
        std::snprintf(id, sizeof id, "routine-%04zu", i + 1);
        docs.push_back({id, text});
    }
    return docs;
}

NeedleReport needle_harness(std::size_t routine_count, const std::string& needle_text,
                            const std::vector<std::string>& queries, const Embedder& embedder,
                            uint64_t seed, double min_similarity) {
    auto docs = routine_docs(routine_count, seed);
    docs.push_back({"needle", needle_text});

    const auto sparse = InvertedIndex::build(docs);
    const auto dense = DenseIndex::build(docs, embedder);
    const std::size_t all = docs.size();

    NeedleReport report;
    report.routine_count = routine_count;
    report.seed = seed;
    for (const auto& query : queries) {
        NeedleQueryOutcome outcome;
        outcome.query = query;

        const auto sparse_results = sparse_search(query, sparse, all);
        const auto dense_results = dense_search(query, dense, embedder, all);
        const auto hybrid_results = hybrid_search(query, sparse, dense, embedder, all);
        outcome.sparse_rank = rank_of(sparse_results, "needle");
        outcome.dense_rank = rank_of(dense_results, "needle");
        outcome.hybrid_rank = rank_of(hybrid_results, "needle");

        for (const auto& r : dense_results)
            if (r.record_id == "needle") outcome.needle_similarity = r.score;
        outcome.top_dense_similarity = dense_results.empty() ? 0.0 : dense_results.front().score;
        outcome.insufficient_evidence = std::holds_alternative<InsufficientEvidence>(
            weak_evidence_gate(hybrid_results, outcome.top_dense_similarity, min_similarity));

        report.queries.push_back(std::move(outcome));
    }
    return report;
}

}  // namespace carepipe::retrieval
