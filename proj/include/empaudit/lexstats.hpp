#pragma once

#include <span>
#include <string>
#include <unordered_map>
#include <vector>

namespace empaudit::lexstats {

// Lowercase, split on non-alphanumeric, drop empties. Numerals survive
// ("25-34" -> ["25", "34"]).
std::vector<std::string> tokenize(std::string_view text);

struct TokenCounts {
    std::unordered_map<std::string, std::size_t> counts;
    std::size_t total = 0;

    void add(const std::string& token, std::size_t n = 1);
    void add_text(std::string_view text);
    std::size_t count(const std::string& token) const;

    static TokenCounts from_texts(std::span<const std::string> texts);
    static TokenCounts merged(const TokenCounts& a, const TokenCounts& b);
};

struct LogOddsResult {
    std::string token;
    double delta = 0.0;  // log-odds-ratio difference
    double z = 0.0;      // standardized score
};

// Log-odds ratio with an informative Dirichlet prior. The prior counts
// are rescaled so their total equals alpha_scale. For token w:
//   delta_w = log((y_w^a + a_w) / (n^a + a0 - y_w^a - a_w))
//           - log((y_w^b + a_w) / (n^b + a0 - y_w^b - a_w))
//   z_w     = delta_w / sqrt(1/(y_w^a + a_w) + 1/(y_w^b + a_w))
// Results cover the union vocabulary, sorted by z descending.
// A token with zero prior mass is a computation error.
std::vector<LogOddsResult> log_odds_dirichlet(const TokenCounts& counts_a,
                                              const TokenCounts& counts_b,
                                              const TokenCounts& prior,
                                              double alpha_scale);

enum class TavMode {
    Centroid,          // numerator: mean squared distance from the base centroid
    PairwiseVariance,  // numerator: mean squared distance over all cross pairs
};

// Topic-to-attribute variance ratio:
//   numerator / [mean squared distance of attr embeddings from their own mean]
// Ratio > 1 flags attribute-centric responses. Zero denominator (all
// attribute embeddings identical) is a degenerate-variance error.
double tav_ratio(const std::vector<std::vector<double>>& attr_embeddings,
                 const std::vector<std::vector<double>>& base_embeddings,
                 TavMode mode = TavMode::Centroid);

}  // namespace empaudit::lexstats
