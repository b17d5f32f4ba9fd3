#define CPPHTTPLIB_OPENSSL_SUPPORT
#include <httplib.h>

#include <nlohmann/json.hpp>

#include "empaudit/errors.hpp"
#include "empaudit/gateway.hpp"

namespace empaudit::gateway {
namespace {

using json = nlohmann::json;

bool fatal_status(int status) {
    // Auth and quota problems will not go away on retry.
    return status == 401 || status == 403 || status == 429;
}

// Splits "scheme://host:port/prefix" into the client target and the path
// prefix (httplib's universal client does not take a path).
std::pair<std::string, std::string> split_base_url(const std::string& base_url) {
    auto scheme_end = base_url.find("://");
    std::size_t host_start = scheme_end == std::string::npos ? 0 : scheme_end + 3;
    auto slash = base_url.find('/', host_start);
    if (slash == std::string::npos) return {base_url, ""};
    std::string prefix = base_url.substr(slash);
    while (!prefix.empty() && prefix.back() == '/') prefix.pop_back();
    return {base_url.substr(0, slash), prefix};
}

json post_json(const HttpConfig& config, const std::string& path, const json& body) {
    auto [target, prefix] = split_base_url(config.base_url);
    httplib::Client client(target);
    client.set_connection_timeout(config.timeout_seconds);
    client.set_read_timeout(config.timeout_seconds);
    httplib::Headers headers;
    if (!config.api_key.empty()) {
        headers.emplace("Authorization", "Bearer " + config.api_key);
    }

    auto response = client.Post(prefix + path, headers, body.dump(), "application/json");
    if (!response) {
        throw ProviderError("no response from " + config.base_url + path + ": " +
                            httplib::to_string(response.error()));
    }
    if (response->status < 200 || response->status >= 300) {
        throw ProviderError("HTTP " + std::to_string(response->status) + " from " +
                            config.base_url + path + ": " + response->body,
                            fatal_status(response->status));
    }
    try {
        return json::parse(response->body);
    } catch (const json::exception& e) {
        throw ProviderError("unparseable response from " + config.base_url + path +
                            ": " + e.what());
    }
}

}  // namespace

std::string HttpChatProvider::complete(const ChatRequest& request) {
    json messages = json::array();
    messages.push_back({{"role", "system"}, {"content", request.system_text}});
    for (const auto& turn : request.user_turns) {
        messages.push_back({{"role", "user"}, {"content", turn}});
    }
    json body = {
        {"model", config_.model_id},
        {"messages", messages},
        {"temperature", request.temperature},
        {"max_tokens", request.max_tokens},
    };

    json reply = post_json(config_, "/chat/completions", body);
    try {
        return reply.at("choices").at(0).at("message").at("content").get<std::string>();
    } catch (const json::exception& e) {
        throw ProviderError("chat response missing choices[0].message.content: " +
                            std::string(e.what()));
    }
}

std::vector<double> HttpEmbeddingProvider::embed(const std::string& text) {
    if (text.empty()) throw ProviderError("embedding provider rejects empty strings");
    json body = {{"model", config_.model_id}, {"input", json::array({text})}};
    json reply = post_json(config_, "/embeddings", body);
    try {
        auto vec = reply.at("data").at(0).at("embedding").get<std::vector<double>>();
        if (vec.size() != width_) {
            throw ProviderError("embedding width " + std::to_string(vec.size()) +
                                " != configured " + std::to_string(width_));
        }
        return vec;
    } catch (const json::exception& e) {
        throw ProviderError("embedding response missing data[0].embedding: " +
                            std::string(e.what()));
    }
}

EpitomeScore HttpScorer::score(const std::string& seeker_post,
                               const std::string& response) {
    json body = {{"post", seeker_post}, {"response", response}};
    json reply = post_json(config_, "/score", body);
    int er, ip, ex;
    try {
        er = reply.at("er").get<int>();
        ip = reply.at("ip").get<int>();
        ex = reply.at("ex").get<int>();
    } catch (const json::exception& e) {
        throw ProviderError("scorer response missing er/ip/ex: " + std::string(e.what()));
    }
    return EpitomeScore::from(er, ip, ex);  // out-of-range -> ValidationError
}

}  // namespace empaudit::gateway
