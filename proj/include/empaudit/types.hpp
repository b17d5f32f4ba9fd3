#pragma once

#include <array>
#include <cstddef>
#include <string>
#include <string_view>

#include "empaudit/errors.hpp"

namespace empaudit {

// Fixed component order used by every vector, table and artifact.
inline constexpr std::size_t kEmotionCount = 8;
inline constexpr std::array<std::string_view, kEmotionCount> kEmotionNames = {
    "anger", "anticipation", "disgust", "fear",
    "joy",   "sadness",      "surprise", "trust"};

// Gold labels of the experience corpus (7-label set).
inline constexpr std::array<std::string_view, 7> kGoldLabels = {
    "anger", "disgust", "fear", "guilt", "joy", "sadness", "shame"};

// Outcome dimensions: 8 affect intensities followed by the 3
// communication levels.
inline constexpr std::size_t kDimensionCount = 11;
inline constexpr std::array<std::string_view, kDimensionCount> kDimensionNames = {
    "anger", "anticipation", "disgust", "fear",
    "joy",   "sadness",      "surprise", "trust",
    "ER",    "IP",           "EX"};

int emotion_index(std::string_view name);    // -1 when unknown
int dimension_index(std::string_view name);  // -1 when unknown
bool is_gold_label(std::string_view label);

// 8 non-negative intensities in [0,1], one per basic emotion.
class EmotionVector {
public:
    EmotionVector() : values_{} {}

    // Validating constructor; rejects components outside [0,1].
    static EmotionVector from(const std::array<double, kEmotionCount>& values);

    double operator[](std::size_t i) const { return values_[i]; }
    const std::array<double, kEmotionCount>& values() const { return values_; }

    // Sets one component, enforcing the [0,1] invariant.
    void set(std::size_t i, double value);

    double sum() const;

    friend bool operator==(const EmotionVector&, const EmotionVector&) = default;

private:
    std::array<double, kEmotionCount> values_;
};

// ER / IP / EX communication levels, each in {0, 1, 2}.
struct EpitomeScore {
    int er = 0;
    int ip = 0;
    int ex = 0;

    static EpitomeScore from(int er, int ip, int ex);  // validates range

    friend bool operator==(const EpitomeScore&, const EpitomeScore&) = default;
};

std::string to_lower(std::string_view s);
std::string trim(std::string_view s);

}  // namespace empaudit
