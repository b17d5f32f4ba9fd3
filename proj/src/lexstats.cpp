#include "empaudit/lexstats.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <map>

#include "empaudit/errors.hpp"

namespace empaudit::lexstats {

std::vector<std::string> tokenize(std::string_view text) {
    std::vector<std::string> tokens;
    std::string current;
    for (char c : text) {
        if (std::isalnum(static_cast<unsigned char>(c))) {
            current += static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
        } else if (!current.empty()) {
            tokens.push_back(std::move(current));
            current.clear();
        }
    }
    if (!current.empty()) tokens.push_back(std::move(current));
    return tokens;
}

void TokenCounts::add(const std::string& token, std::size_t n) {
    counts[token] += n;
    total += n;
}

void TokenCounts::add_text(std::string_view text) {
    for (auto& token : tokenize(text)) add(token);
}

std::size_t TokenCounts::count(const std::string& token) const {
    auto it = counts.find(token);
    return it == counts.end() ? 0 : it->second;
}

TokenCounts TokenCounts::from_texts(std::span<const std::string> texts) {
    TokenCounts out;
    for (const auto& text : texts) out.add_text(text);
    return out;
}

TokenCounts TokenCounts::merged(const TokenCounts& a, const TokenCounts& b) {
    TokenCounts out = a;
    for (const auto& [token, n] : b.counts) out.add(token, n);
    return out;
}

std::vector<LogOddsResult> log_odds_dirichlet(const TokenCounts& counts_a,
                                              const TokenCounts& counts_b,
                                              const TokenCounts& prior,
                                              double alpha_scale) {
    if (alpha_scale <= 0.0) throw ArgumentError("log_odds: alpha_scale must be > 0");
    if (prior.total == 0) throw ArgumentError("log_odds: empty prior");

    // Union vocabulary, ordered for deterministic output.
    std::map<std::string, bool> vocabulary;
    for (const auto& [token, _] : counts_a.counts) vocabulary[token] = true;
    for (const auto& [token, _] : counts_b.counts) vocabulary[token] = true;

    const double alpha0 = alpha_scale;
    const double prior_total = static_cast<double>(prior.total);
    const double n_a = static_cast<double>(counts_a.total);
    const double n_b = static_cast<double>(counts_b.total);

    std::vector<LogOddsResult> results;
    results.reserve(vocabulary.size());
    for (const auto& [token, _] : vocabulary) {
        double prior_count = static_cast<double>(prior.count(token));
        if (prior_count <= 0.0) {
            throw ComputationError("log_odds: token '" + token +
                                   "' has zero prior mass");
        }
        double alpha_w = alpha_scale * prior_count / prior_total;
        double y_a = static_cast<double>(counts_a.count(token));
        double y_b = static_cast<double>(counts_b.count(token));

        double term_a = std::log((y_a + alpha_w) / (n_a + alpha0 - y_a - alpha_w));
        double term_b = std::log((y_b + alpha_w) / (n_b + alpha0 - y_b - alpha_w));
        LogOddsResult r;
        r.token = token;
        r.delta = term_a - term_b;
        r.z = r.delta / std::sqrt(1.0 / (y_a + alpha_w) + 1.0 / (y_b + alpha_w));
        results.push_back(std::move(r));
    }
    std::stable_sort(results.begin(), results.end(),
                     [](const LogOddsResult& x, const LogOddsResult& y) {
                         return x.z > y.z;
                     });
    return results;
}

namespace {

std::vector<double> mean_of(const std::vector<std::vector<double>>& points) {
    std::vector<double> mean(points.front().size(), 0.0);
    for (const auto& p : points) {
        for (std::size_t i = 0; i < mean.size(); ++i) mean[i] += p[i];
    }
    for (double& v : mean) v /= static_cast<double>(points.size());
    return mean;
}

double mean_sq_dist_from(const std::vector<std::vector<double>>& points,
                         const std::vector<double>& center) {
    double total = 0.0;
    for (const auto& p : points) {
        double d = 0.0;
        for (std::size_t i = 0; i < center.size(); ++i) {
            double diff = p[i] - center[i];
            d += diff * diff;
        }
        total += d;
    }
    return total / static_cast<double>(points.size());
}

}  // namespace

double tav_ratio(const std::vector<std::vector<double>>& attr_embeddings,
                 const std::vector<std::vector<double>>& base_embeddings,
                 TavMode mode) {
    if (attr_embeddings.empty() || base_embeddings.empty()) {
        throw ArgumentError("tav_ratio: empty embedding set");
    }
    const std::size_t width = attr_embeddings.front().size();
    for (const auto* set : {&attr_embeddings, &base_embeddings}) {
        for (const auto& e : *set) {
            if (e.size() != width) {
                throw ArgumentError("tav_ratio: inconsistent embedding widths");
            }
        }
    }

    std::vector<double> attr_mean = mean_of(attr_embeddings);
    double denominator = mean_sq_dist_from(attr_embeddings, attr_mean);
    if (denominator <= 0.0) {
        throw ComputationError("tav_ratio: degenerate variance, all attribute "
                               "embeddings identical");
    }

    double numerator = 0.0;
    switch (mode) {
        case TavMode::Centroid:
            numerator = mean_sq_dist_from(attr_embeddings, mean_of(base_embeddings));
            break;
        case TavMode::PairwiseVariance: {
            for (const auto& a : attr_embeddings) {
                for (const auto& b : base_embeddings) {
                    double d = 0.0;
                    for (std::size_t i = 0; i < width; ++i) {
                        double diff = a[i] - b[i];
                        d += diff * diff;
                    }
                    numerator += d;
                }
            }
            numerator /= static_cast<double>(attr_embeddings.size() *
                                             base_embeddings.size());
            break;
        }
    }
    return numerator / denominator;
}

}  // namespace empaudit::lexstats
