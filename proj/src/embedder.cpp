#include "carepipe/embedder.hpp"

#include <cmath>
#include <map>

#include "carepipe/text.hpp"

namespace carepipe {

uint64_t HashingEmbedder::fnv1a64(std::string_view s) {
    uint64_t h = 14695981039346656037ull;
    for (const char ch : s) {
        h ^= static_cast<unsigned char>(ch);
        h *= 1099511628211ull;
    }
    return h;
}

std::vector<double> HashingEmbedder::embed(const std::string& text) const {
    std::map<std::string, std::size_t> tf;
    for (auto& tok : tokenize(text)) ++tf[tok];

    std::vector<double> v(dim_, 0.0);
    for (const auto& [tok, count] : tf)
        v[fnv1a64(tok) % dim_] += std::log1p(static_cast<double>(count));

    double norm_sq = 0.0;
    for (const double x : v) norm_sq += x * x;
    if (norm_sq > 0.0) {
        const double inv = 1.0 / std::sqrt(norm_sq);
        for (double& x : v) x *= inv;
    }
    return v;
}

}  // namespace carepipe
