#include "empaudit/types.hpp"

#include <algorithm>
#include <cctype>
#include <numeric>

namespace empaudit {

int emotion_index(std::string_view name) {
    for (std::size_t i = 0; i < kEmotionNames.size(); ++i) {
        if (kEmotionNames[i] == name) return static_cast<int>(i);
    }
    return -1;
}

int dimension_index(std::string_view name) {
    for (std::size_t i = 0; i < kDimensionNames.size(); ++i) {
        if (kDimensionNames[i] == name) return static_cast<int>(i);
    }
    return -1;
}

bool is_gold_label(std::string_view label) {
    return std::find(kGoldLabels.begin(), kGoldLabels.end(), label) !=
           kGoldLabels.end();
}

EmotionVector EmotionVector::from(const std::array<double, kEmotionCount>& values) {
    EmotionVector v;
    for (std::size_t i = 0; i < kEmotionCount; ++i) v.set(i, values[i]);
    return v;
}

void EmotionVector::set(std::size_t i, double value) {
    if (!(value >= 0.0 && value <= 1.0)) {
        throw ValidationError("intensity for '" + std::string(kEmotionNames.at(i)) +
                              "' outside [0,1]: " + std::to_string(value));
    }
    values_.at(i) = value;
}

double EmotionVector::sum() const {
    return std::accumulate(values_.begin(), values_.end(), 0.0);
}

EpitomeScore EpitomeScore::from(int er, int ip, int ex) {
    for (int level : {er, ip, ex}) {
        if (level < 0 || level > 2) {
            throw ValidationError("communication level outside {0,1,2}: " +
                                  std::to_string(level));
        }
    }
    return EpitomeScore{er, ip, ex};
}

std::string to_lower(std::string_view s) {
    std::string out(s);
    std::transform(out.begin(), out.end(), out.begin(),
                   [](unsigned char c) { return std::tolower(c); });
    return out;
}

std::string trim(std::string_view s) {
    const char* ws = " \t\r\n";
    auto begin = s.find_first_not_of(ws);
    if (begin == std::string_view::npos) return {};
    auto end = s.find_last_not_of(ws);
    return std::string(s.substr(begin, end - begin + 1));
}

}  // namespace empaudit
