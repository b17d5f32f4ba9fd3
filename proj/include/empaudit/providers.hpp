#pragma once

#include <string>
#include <vector>

#include "empaudit/types.hpp"

namespace empaudit {

// A single chat-completion request in the fixed two-turn protocol.
// Audit runs keep temperature at 0.0 and max_tokens at 2048.
struct ChatRequest {
    std::string system_text;
    std::vector<std::string> user_turns;  // 1 or 2 entries
    double temperature = 0.0;
    int max_tokens = 2048;

    friend bool operator==(const ChatRequest&, const ChatRequest&) = default;
};

class ChatProvider {
public:
    virtual ~ChatProvider() = default;
    virtual std::string id() const = 0;
    // Returns the raw assistant message. Throws ProviderError on failure.
    virtual std::string complete(const ChatRequest& request) = 0;
};

class EmbeddingProvider {
public:
    virtual ~EmbeddingProvider() = default;
    virtual std::string id() const = 0;
    virtual std::size_t dimension() const = 0;
    // Throws ProviderError on failure; rejects empty input.
    virtual std::vector<double> embed(const std::string& text) = 0;
};

// Scores one (seeker post, response) pair on the three communication
// levels. Implementations wrap an external classifier endpoint, a
// precomputed fixture file, or the offline keyword heuristic.
class EpitomeScorer {
public:
    virtual ~EpitomeScorer() = default;
    virtual std::string id() const = 0;
    virtual EpitomeScore score(const std::string& seeker_post,
                               const std::string& response) = 0;
};

}  // namespace empaudit
