#pragma once

#include <chrono>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <mutex>
#include <optional>
#include <unordered_map>
#include <vector>

#include "empaudit/corpus.hpp"
#include "empaudit/persona.hpp"
#include "empaudit/providers.hpp"

namespace empaudit::gateway {

using corpus::ExperienceRecord;
using persona::Persona;

enum class Task { Affective, Cognitive };
std::string_view task_name(Task t);

// System text is the emotion-understanding prompt (masked variant when the
// record is masked). Turn 1 is the identity turn, omitted entirely for the
// base state; the final turn carries the experience sentence.
ChatRequest build_affective_prompt(const Persona& p, const ExperienceRecord& record);

// Response-generation prompt. The record must be unmasked (original text).
ChatRequest build_cognitive_prompt(const Persona& p, const ExperienceRecord& record);

// Digest of (model_id, system text, all turns, temperature, max_tokens).
std::string cache_key(std::string_view model_id, const ChatRequest& request);

struct PlanItem {
    ExperienceRecord record;
    Persona persona;
    Task task = Task::Affective;
};

// Builds the full request plan: every record x persona x task.
std::vector<PlanItem> build_plan(const std::vector<ExperienceRecord>& records,
                                 const std::vector<Persona>& personas,
                                 const std::vector<Task>& tasks);

struct RunResult {
    std::string record_id;
    Persona persona;
    Task task = Task::Affective;
    std::string model_id;
    std::string raw_output;
    bool cache_hit = false;
    bool failed = false;
    std::string error;
    std::int64_t timestamp_ms = 0;
};

// Append-only journal of provider responses. One JSON object per line:
// cache key, request digest, raw output, metadata. A partially written
// final line (crash) is ignored on load; a corrupt complete line is an
// error naming the entry. Single writer, many readers.
class ResponseCache {
public:
    explicit ResponseCache(const std::filesystem::path& directory);

    std::optional<std::string> lookup(const std::string& key) const;
    void insert(const std::string& key, const std::string& request_digest,
                const std::string& output, const std::string& meta = {});

    std::size_t size() const;
    const std::filesystem::path& directory() const { return directory_; }

private:
    void load_journal(const std::filesystem::path& file);

    std::filesystem::path directory_;
    std::filesystem::path journal_;
    std::unordered_map<std::string, std::string> entries_;
    mutable std::mutex mutex_;
};

struct ExecuteOptions {
    int parallelism = 4;
    int max_attempts = 3;
    std::chrono::milliseconds backoff_base{50};
};

// Runs the plan with bounded parallelism. The cache is consulted before
// the network; fresh responses are journaled as produced. Transient
// provider failures are retried with exponential backoff and then
// surfaced as failed items; a fatal provider error aborts the run with a
// summary of completed items. Results come back in plan order.
std::vector<RunResult> execute(
    const std::vector<PlanItem>& plan, ChatProvider& client, ResponseCache& cache,
    const ExecuteOptions& options = {},
    const std::function<void(const RunResult&)>& on_result = nullptr);

// Embeds each text, caching by (provider id, text digest).
std::vector<std::vector<double>> embed_all(const std::vector<std::string>& texts,
                                           EmbeddingProvider& provider,
                                           ResponseCache* cache = nullptr);

// ---------------------------------------------------------------------------
// Deterministic offline providers
// ---------------------------------------------------------------------------

// Seeded, template-based chat responses honoring the required output
// formats for both tasks. Same request + same seed => same output.
class MockChatProvider : public ChatProvider {
public:
    explicit MockChatProvider(std::uint64_t seed,
                              std::vector<std::string> emotion_words = {});

    std::string id() const override { return "mock-chat"; }
    std::string complete(const ChatRequest& request) override;

private:
    std::uint64_t seed_;
    std::vector<std::string> emotion_words_;
};

// Hashed bag-of-words embedding: deterministic, locality-sensitive enough
// that overlapping texts have positive cosine.
class MockEmbeddingProvider : public EmbeddingProvider {
public:
    explicit MockEmbeddingProvider(std::uint64_t seed, std::size_t width = 64);

    std::string id() const override;
    std::size_t dimension() const override { return width_; }
    std::vector<double> embed(const std::string& text) override;

private:
    std::uint64_t seed_;
    std::size_t width_;
};

// ---------------------------------------------------------------------------
// HTTP providers (chat-completion compatible wire protocol)
// ---------------------------------------------------------------------------

struct HttpConfig {
    std::string base_url;     // e.g. "http://127.0.0.1:8089" or "https://host"
    std::string model_id;
    std::string api_key;      // empty = no Authorization header
    int timeout_seconds = 60;
};

class HttpChatProvider : public ChatProvider {
public:
    explicit HttpChatProvider(HttpConfig config) : config_(std::move(config)) {}
    std::string id() const override { return config_.model_id; }
    std::string complete(const ChatRequest& request) override;

private:
    HttpConfig config_;
};

class HttpEmbeddingProvider : public EmbeddingProvider {
public:
    explicit HttpEmbeddingProvider(HttpConfig config, std::size_t width)
        : config_(std::move(config)), width_(width) {}
    std::string id() const override { return config_.model_id; }
    std::size_t dimension() const override { return width_; }
    std::vector<double> embed(const std::string& text) override;

private:
    HttpConfig config_;
    std::size_t width_;
};

class HttpScorer : public EpitomeScorer {
public:
    explicit HttpScorer(HttpConfig config) : config_(std::move(config)) {}
    std::string id() const override { return config_.model_id; }
    EpitomeScore score(const std::string& seeker_post,
                       const std::string& response) override;

private:
    HttpConfig config_;
};

}  // namespace empaudit::gateway
