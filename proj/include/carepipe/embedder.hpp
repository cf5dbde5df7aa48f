#pragma once
// Text embedding boundary. The bundled embedder is a deterministic
// feature-hashing bag-of-words; model-backed embedders plug in behind
// the same interface.

#include <cstdint>
#include <string>
#include <vector>

namespace carepipe {

class Embedder {
public:
    virtual ~Embedder() = default;

    // Deterministic: same text -> identical vector.
    virtual std::vector<double> embed(const std::string& text) const = 0;
    virtual std::size_t dimension() const = 0;
};

// Each token is hashed (64-bit FNV-1a) into one of `dim` buckets with
// weight ln(1+tf); the result is unit-normalized. All components are
// non-negative, so cosine similarities land in [0, 1].
class HashingEmbedder final : public Embedder {
public:
    explicit HashingEmbedder(std::size_t dim = 256) : dim_(dim) {}

    std::vector<double> embed(const std::string& text) const override;
    std::size_t dimension() const override { return dim_; }

    static uint64_t fnv1a64(std::string_view s);

private:
    std::size_t dim_;
};

}  // namespace carepipe
