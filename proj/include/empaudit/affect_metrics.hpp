#pragma once

#include <array>
#include <span>
#include <string>
#include <vector>

#include "empaudit/providers.hpp"
#include "empaudit/types.hpp"

namespace empaudit::metrics {

// Parsed output of the emotion-understanding task.
struct ParsedAffective {
    std::string persona_recall;  // text between [OUTPUT 1]: and [OUTPUT 2]:
    std::string emotion_word;    // first word after [OUTPUT 2]:, lowercased
    bool multi_word = false;     // model emitted more than one word; rest dropped
};

// Throws FormatError (carrying the raw output) when either marker is
// missing or the emotion slot is empty. Tolerates surrounding whitespace
// and markdown fences.
ParsedAffective parse_affective(const std::string& raw);

struct ParsedCognitive {
    std::string response;
    bool lenient = false;  // no "Output:" marker; whole text accepted
};

ParsedCognitive parse_cognitive(const std::string& raw);

// Componentwise I(emotion_a) - I(emotion_b); deltas in [-1,1].
using AffectiveShift = std::array<double, kEmotionCount>;
AffectiveShift affective_shift(const EmotionVector& with_attr,
                               const EmotionVector& without_attr);

struct EmdResult {
    double distance = 0.0;
    bool a_zero_mass = false;  // input had zero mass, treated as uniform
    bool b_zero_mass = false;
};

// Earth Mover's Distance between the two vectors normalized to unit mass,
// with unit ground distance between distinct emotion categories (so the
// optimum equals half the L1 distance of the normalized vectors).
EmdResult emd_detail(const EmotionVector& a, const EmotionVector& b);
double emd(const EmotionVector& a, const EmotionVector& b);

// Fraction of case-insensitive exact matches after trimming punctuation.
double lexical_accuracy(const std::vector<std::string>& predictions,
                        const std::vector<std::string>& golds);

// Mean over samples of the mean squared componentwise error.
double intensity_mse(const std::vector<EmotionVector>& predictions,
                     const std::vector<EmotionVector>& golds);

double cosine_similarity(std::span<const double> a, std::span<const double> b);

// ROUGE-L F1 from the longest common subsequence over lowercased word
// tokens: P = LCS/|recalled|, R = LCS/|injected|, F1 = 2PR/(P+R).
double rouge_l_f1(const std::string& injected, const std::string& recalled);

struct RecallSimilarity {
    double cosine = 0.0;
    double rouge_l_f1 = 0.0;
};

RecallSimilarity recall_similarity(const std::string& injected,
                                   const std::string& recalled,
                                   EmbeddingProvider& embedder);

}  // namespace empaudit::metrics
