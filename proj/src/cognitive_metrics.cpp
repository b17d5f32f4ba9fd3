#include "empaudit/cognitive_metrics.hpp"

#include <fstream>
#include <sstream>

#include "empaudit/digest.hpp"
#include "empaudit/errors.hpp"

namespace empaudit::cognitive {

CognitiveShift cognitive_shift(const EpitomeScore& with_attr,
                               const EpitomeScore& without_attr) {
    return CognitiveShift{
        static_cast<double>(with_attr.er - without_attr.er),
        static_cast<double>(with_attr.ip - without_attr.ip),
        static_cast<double>(with_attr.ex - without_attr.ex),
    };
}

ScoreMap ingest_scores(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open score fixture: " + path.string());

    ScoreMap scores;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        std::string t = trim(line);
        if (t.empty() || t[0] == '#') continue;
        std::istringstream row(t);
        std::string post_digest, response_digest;
        int er, ip, ex;
        if (!(row >> post_digest >> response_digest >> er >> ip >> ex)) {
            throw ParseError("bad score row at line " + std::to_string(line_no) +
                             " of " + path.string());
        }
        EpitomeScore score = EpitomeScore::from(er, ip, ex);
        auto key = std::make_pair(post_digest, response_digest);
        auto [it, inserted] = scores.emplace(key, score);
        if (!inserted && !(it->second == score)) {
            throw ValidationError("conflicting duplicate scores for (" + post_digest +
                                  ", " + response_digest + ") at line " +
                                  std::to_string(line_no));
        }
    }
    return scores;
}

void write_scores(const std::filesystem::path& path, const ScoreMap& scores) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot write score fixture: " + path.string());
    for (const auto& [key, score] : scores) {
        out << key.first << '\t' << key.second << '\t' << score.er << '\t'
            << score.ip << '\t' << score.ex << '\n';
    }
}

EpitomeScore FixtureScorer::score(const std::string& seeker_post,
                                  const std::string& response) {
    auto key = std::make_pair(short_digest(seeker_post), short_digest(response));
    auto it = scores_.find(key);
    if (it == scores_.end()) {
        throw ProviderError("no fixture score for (" + key.first + ", " +
                            key.second + ")");
    }
    return it->second;
}

EpitomeScore KeywordScorer::score(const std::string& seeker_post,
                                  const std::string& response) {
    if (trim(seeker_post).empty() || trim(response).empty()) {
        throw ArgumentError("scorer requires non-empty post and response");
    }
    std::string post = to_lower(seeker_post);
    std::string text = to_lower(response);
    auto count_hits = [&](std::initializer_list<std::string_view> needles) {
        int hits = 0;
        for (auto needle : needles) {
            if (text.find(needle) != std::string::npos) ++hits;
        }
        return hits;
    };

    // ER: expressions of warmth or feeling-with the poster.
    int er = std::min(2, count_hits({"sorry", "feel", "hear", "understand",
                                     "glad", "happy for", "tough", "hard"}));

    // IP: restating the poster's situation; crude content-word overlap.
    int overlap = 0;
    std::istringstream words(post);
    std::string word;
    while (words >> word && overlap < 6) {
        if (word.size() >= 5 && text.find(word) != std::string::npos) ++overlap;
    }
    int ip = overlap >= 4 ? 2 : (overlap >= 2 ? 1 : 0);

    // EX: probing for feelings or details not in the post.
    int ex = std::min(2, count_hits({"?", "would you", "how do", "what do",
                                     "have you", "tell me more", "share"}));
    return EpitomeScore::from(er, ip, ex);
}

EpitomeScore CachingScorer::score(const std::string& seeker_post,
                                  const std::string& response) {
    auto key = std::make_pair(short_digest(seeker_post), short_digest(response));
    {
        std::lock_guard<std::mutex> lock(mutex_);
        auto it = cache_.find(key);
        if (it != cache_.end()) return it->second;
    }
    EpitomeScore result = inner_.score(seeker_post, response);
    std::lock_guard<std::mutex> lock(mutex_);
    return cache_.emplace(key, result).first->second;
}

}  // namespace empaudit::cognitive
