#include "empaudit/affect_metrics.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <sstream>

#include "empaudit/errors.hpp"

namespace empaudit::metrics {
namespace {

constexpr std::string_view kOutput1 = "[OUTPUT 1]:";
constexpr std::string_view kOutput2 = "[OUTPUT 2]:";

// Drops markdown code fences (``` or ```lang) wrapping the payload.
std::string strip_fences(const std::string& raw) {
    std::vector<std::string> lines;
    std::stringstream stream(raw);
    std::string line;
    while (std::getline(stream, line)) lines.push_back(line);
    while (!lines.empty() && trim(lines.front()).rfind("```", 0) == 0) {
        lines.erase(lines.begin());
    }
    while (!lines.empty() && trim(lines.back()).rfind("```", 0) == 0) {
        lines.pop_back();
    }
    std::string out;
    for (std::size_t i = 0; i < lines.size(); ++i) {
        if (i) out += '\n';
        out += lines[i];
    }
    return out;
}

std::string strip_punct(std::string_view token) {
    std::size_t begin = 0;
    std::size_t end = token.size();
    auto keep = [](unsigned char c) { return std::isalnum(c) != 0; };
    while (begin < end && !keep(static_cast<unsigned char>(token[begin]))) ++begin;
    while (end > begin && !keep(static_cast<unsigned char>(token[end - 1]))) --end;
    return std::string(token.substr(begin, end - begin));
}

std::vector<std::string> lower_tokens(const std::string& text) {
    std::vector<std::string> tokens;
    std::stringstream stream(text);
    std::string token;
    while (stream >> token) tokens.push_back(to_lower(token));
    return tokens;
}

}  // namespace

ParsedAffective parse_affective(const std::string& raw) {
    std::string text = strip_fences(raw);
    auto p1 = text.find(kOutput1);
    auto p2 = text.find(kOutput2);
    if (p1 == std::string::npos || p2 == std::string::npos || p2 < p1) {
        throw FormatError("affective output missing [OUTPUT 1]/[OUTPUT 2] markers: " + raw);
    }

    ParsedAffective parsed;
    parsed.persona_recall = trim(text.substr(p1 + kOutput1.size(),
                                             p2 - p1 - kOutput1.size()));

    std::string tail = trim(text.substr(p2 + kOutput2.size()));
    std::stringstream stream(tail);
    std::string word, extra;
    stream >> word;
    word = strip_punct(to_lower(word));
    if (word.empty()) {
        throw FormatError("affective output has an empty emotion slot: " + raw);
    }
    parsed.emotion_word = word;
    parsed.multi_word = static_cast<bool>(stream >> extra) && !strip_punct(extra).empty();
    return parsed;
}

ParsedCognitive parse_cognitive(const std::string& raw) {
    std::string text = trim(strip_fences(raw));
    if (text.empty()) throw FormatError("empty cognitive output");

    constexpr std::string_view marker = "Output:";
    auto pos = text.find(marker);
    ParsedCognitive parsed;
    if (pos == std::string::npos) {
        parsed.response = text;
        parsed.lenient = true;
    } else {
        parsed.response = trim(text.substr(pos + marker.size()));
        if (parsed.response.empty()) {
            throw FormatError("cognitive output has an empty response slot: " + raw);
        }
    }
    return parsed;
}

AffectiveShift affective_shift(const EmotionVector& with_attr,
                               const EmotionVector& without_attr) {
    AffectiveShift shift{};
    for (std::size_t i = 0; i < kEmotionCount; ++i) {
        shift[i] = with_attr[i] - without_attr[i];
    }
    return shift;
}

EmdResult emd_detail(const EmotionVector& a, const EmotionVector& b) {
    EmdResult result;
    std::array<double, kEmotionCount> pa{}, pb{};
    double sum_a = a.sum();
    double sum_b = b.sum();
    result.a_zero_mass = sum_a <= 0.0;
    result.b_zero_mass = sum_b <= 0.0;
    for (std::size_t i = 0; i < kEmotionCount; ++i) {
        pa[i] = result.a_zero_mass ? 1.0 / kEmotionCount : a[i] / sum_a;
        pb[i] = result.b_zero_mass ? 1.0 / kEmotionCount : b[i] / sum_b;
    }
    // Unit cost between distinct categories: optimal transport moves the
    // surplus mass once, i.e. half the L1 distance.
    double l1 = 0.0;
    for (std::size_t i = 0; i < kEmotionCount; ++i) l1 += std::abs(pa[i] - pb[i]);
    result.distance = 0.5 * l1;
    return result;
}

double emd(const EmotionVector& a, const EmotionVector& b) {
    return emd_detail(a, b).distance;
}

double lexical_accuracy(const std::vector<std::string>& predictions,
                        const std::vector<std::string>& golds) {
    if (predictions.size() != golds.size()) {
        throw ArgumentError("lexical_accuracy: length mismatch");
    }
    if (predictions.empty()) return 0.0;
    std::size_t hits = 0;
    for (std::size_t i = 0; i < predictions.size(); ++i) {
        if (strip_punct(to_lower(predictions[i])) == strip_punct(to_lower(golds[i]))) {
            ++hits;
        }
    }
    return static_cast<double>(hits) / static_cast<double>(predictions.size());
}

double intensity_mse(const std::vector<EmotionVector>& predictions,
                     const std::vector<EmotionVector>& golds) {
    if (predictions.size() != golds.size()) {
        throw ArgumentError("intensity_mse: length mismatch");
    }
    if (predictions.empty()) return 0.0;
    double total = 0.0;
    for (std::size_t i = 0; i < predictions.size(); ++i) {
        double sample = 0.0;
        for (std::size_t e = 0; e < kEmotionCount; ++e) {
            double diff = predictions[i][e] - golds[i][e];
            sample += diff * diff;
        }
        total += sample / static_cast<double>(kEmotionCount);
    }
    return total / static_cast<double>(predictions.size());
}

double cosine_similarity(std::span<const double> a, std::span<const double> b) {
    if (a.size() != b.size()) {
        throw ArgumentError("cosine_similarity: dimension mismatch");
    }
    double dot = 0.0, na = 0.0, nb = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        dot += a[i] * b[i];
        na += a[i] * a[i];
        nb += b[i] * b[i];
    }
    double denom = std::sqrt(na) * std::sqrt(nb);
    return denom > 0.0 ? dot / denom : 0.0;
}

double rouge_l_f1(const std::string& injected, const std::string& recalled) {
    auto ref = lower_tokens(injected);
    auto cand = lower_tokens(recalled);
    if (ref.empty() || cand.empty()) return 0.0;

    // LCS length by dynamic programming over token sequences.
    const std::size_t n = ref.size();
    const std::size_t m = cand.size();
    std::vector<std::size_t> prev(m + 1, 0), cur(m + 1, 0);
    for (std::size_t i = 1; i <= n; ++i) {
        for (std::size_t j = 1; j <= m; ++j) {
            cur[j] = ref[i - 1] == cand[j - 1]
                         ? prev[j - 1] + 1
                         : std::max(prev[j], cur[j - 1]);
        }
        std::swap(prev, cur);
    }
    double lcs = static_cast<double>(prev[m]);
    double precision = lcs / static_cast<double>(m);
    double recall = lcs / static_cast<double>(n);
    if (precision + recall <= 0.0) return 0.0;
    return 2.0 * precision * recall / (precision + recall);
}

RecallSimilarity recall_similarity(const std::string& injected,
                                   const std::string& recalled,
                                   EmbeddingProvider& embedder) {
    if (trim(injected).empty() || trim(recalled).empty()) {
        throw ArgumentError("recall_similarity: empty input string");
    }
    RecallSimilarity sim;
    std::vector<double> a = embedder.embed(injected);
    std::vector<double> b = embedder.embed(recalled);
    sim.cosine = cosine_similarity(a, b);
    sim.rouge_l_f1 = rouge_l_f1(injected, recalled);
    return sim;
}

}  // namespace empaudit::metrics
