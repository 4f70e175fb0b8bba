#pragma once

#include <cstdint>
#include <memory>
#include <string>
#include <string_view>
#include <vector>

namespace dslq {

// Text -> unit-norm vector. Implementations must be deterministic for a
// fixed configuration; downstream search and datagen properties depend
// on it.
class Embedder {
public:
    virtual ~Embedder() = default;

    virtual std::size_t dimension() const = 0;
    virtual std::vector<float> embed(std::string_view text) const = 0;
};

// Character-n-gram feature hashing with signed buckets, L2-normalized.
// Stands in for a learned embedding model behind the same interface;
// short texts are padded with boundary sentinels so every input maps to
// a unit vector.
class HashingEmbedder : public Embedder {
public:
    explicit HashingEmbedder(std::uint64_t seed, std::size_t dimension = 256,
                             std::size_t ngram = 3);

    std::size_t dimension() const override { return dimension_; }
    std::vector<float> embed(std::string_view text) const override;

private:
    std::uint64_t seed_;
    std::size_t dimension_;
    std::size_t ngram_;
};

double cosine(const std::vector<float>& a, const std::vector<float>& b);

} // namespace dslq
