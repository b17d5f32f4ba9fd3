#pragma once

#include <array>
#include <filesystem>
#include <map>
#include <mutex>
#include <string>

#include "empaudit/providers.hpp"
#include "empaudit/types.hpp"

namespace empaudit::cognitive {

// Componentwise (ER, IP, EX) difference; deltas in [-2, 2].
using CognitiveShift = std::array<double, 3>;
CognitiveShift cognitive_shift(const EpitomeScore& with_attr,
                               const EpitomeScore& without_attr);

// key: (post digest, response digest)
using ScoreMap = std::map<std::pair<std::string, std::string>, EpitomeScore>;

// Fixture file, one row per line: `post_digest  response_digest  er ip ex`.
// Identical duplicates are deduplicated; conflicting duplicates rejected.
ScoreMap ingest_scores(const std::filesystem::path& path);

void write_scores(const std::filesystem::path& path, const ScoreMap& scores,
                  const std::string& stamp = {});

// Scores straight from a precomputed fixture file; unknown pairs are a
// provider error.
class FixtureScorer : public EpitomeScorer {
public:
    explicit FixtureScorer(ScoreMap scores) : scores_(std::move(scores)) {}
    static FixtureScorer load(const std::filesystem::path& path) {
        return FixtureScorer(ingest_scores(path));
    }

    std::string id() const override { return "fixture"; }
    EpitomeScore score(const std::string& seeker_post,
                       const std::string& response) override;

private:
    ScoreMap scores_;
};

// Offline keyword heuristic for exercising the pipeline end to end.
// NOT a faithful communication-level classifier; it only has to be
// deterministic and produce levels in {0,1,2}.
class KeywordScorer : public EpitomeScorer {
public:
    std::string id() const override { return "keyword-toy"; }
    EpitomeScore score(const std::string& seeker_post,
                       const std::string& response) override;
};

// Memoizes an inner scorer so each (post, response) pair is scored
// exactly once per run. Thread-safe.
class CachingScorer : public EpitomeScorer {
public:
    explicit CachingScorer(EpitomeScorer& inner) : inner_(inner) {}

    std::string id() const override { return inner_.id(); }
    EpitomeScore score(const std::string& seeker_post,
                       const std::string& response) override;

    const ScoreMap& seen() const { return cache_; }

private:
    EpitomeScorer& inner_;
    ScoreMap cache_;
    std::mutex mutex_;
};

}  // namespace empaudit::cognitive
