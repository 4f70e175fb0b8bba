#include "dslq/embedder.hpp"

#include <cmath>
#include <stdexcept>

namespace dslq {

namespace {

std::uint64_t hash_bytes(const char* data, std::size_t len, std::uint64_t seed) {
    std::uint64_t h = seed ^ 0xcbf29ce484222325ULL;
    for (std::size_t i = 0; i < len; ++i) {
        h ^= static_cast<unsigned char>(data[i]);
        h *= 0x100000001b3ULL;
    }
    // final avalanche, splitmix-style
    h = (h ^ (h >> 30)) * 0xbf58476d1ce4e5b9ULL;
    h = (h ^ (h >> 27)) * 0x94d049bb133111ebULL;
    return h ^ (h >> 31);
}

} // namespace

HashingEmbedder::HashingEmbedder(std::uint64_t seed, std::size_t dimension, std::size_t ngram)
    : seed_(seed), dimension_(dimension), ngram_(ngram) {
    if (dimension == 0 || ngram == 0)
        throw std::invalid_argument("HashingEmbedder: dimension and ngram must be positive");
}

std::vector<float> HashingEmbedder::embed(std::string_view text) const {
    // Boundary sentinels guarantee at least one n-gram for any input.
    std::string padded;
    padded.reserve(text.size() + ngram_ + 1);
    padded.push_back('\x02');
    padded.append(text);
    padded.push_back('\x03');
    while (padded.size() < ngram_)
        padded.push_back('\x00');

    std::vector<double> acc(dimension_, 0.0);
    for (std::size_t i = 0; i + ngram_ <= padded.size(); ++i) {
        const std::uint64_t h = hash_bytes(padded.data() + i, ngram_, seed_);
        const std::size_t bucket = static_cast<std::size_t>(h % dimension_);
        const double sign = (h >> 63) ? -1.0 : 1.0;
        acc[bucket] += sign;
    }
    double norm_sq = 0.0;
    for (double v : acc)
        norm_sq += v * v;
    std::vector<float> out(dimension_);
    if (norm_sq > 0.0) {
        const double inv = 1.0 / std::sqrt(norm_sq);
        for (std::size_t i = 0; i < dimension_; ++i)
            out[i] = static_cast<float>(acc[i] * inv);
    } else {
        // All grams cancelled; fall back to a fixed unit direction so the
        // norm invariant holds.
        out[hash_bytes(padded.data(), padded.size(), seed_) % dimension_] = 1.0f;
    }
    return out;
}

double cosine(const std::vector<float>& a, const std::vector<float>& b) {
    if (a.size() != b.size())
        throw std::invalid_argument("cosine: dimension mismatch");
    double dot = 0.0, na = 0.0, nb = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        dot += static_cast<double>(a[i]) * b[i];
        na += static_cast<double>(a[i]) * a[i];
        nb += static_cast<double>(b[i]) * b[i];
    }
    if (na == 0.0 || nb == 0.0)
        return 0.0;
    return dot / std::sqrt(na * nb);
}

} // namespace dslq
