#include <cstdlib>
#include <fstream>

#include <nlohmann/json.hpp>

#include "empaudit/digest.hpp"
#include "empaudit/errors.hpp"
#include "empaudit/report.hpp"

namespace empaudit::report {
namespace {

using json = nlohmann::json;

std::filesystem::path resolve(const std::filesystem::path& base,
                              const std::string& path) {
    std::filesystem::path p(path);
    return p.is_absolute() ? p : base / p;
}

ProviderConfig provider_from_json(const json& j) {
    ProviderConfig config;
    config.kind = j.value("kind", std::string("mock"));
    if (j.contains("seed")) config.seed = j["seed"].get<std::uint64_t>();
    config.width = j.value("width", config.width);
    config.base_url = j.value("base_url", std::string());
    config.model_id = j.value("model_id", std::string());
    config.api_key_env = j.value("api_key_env", std::string());
    config.fixture_path = j.value("fixture_path", std::string());
    return config;
}

json provider_to_json(const ProviderConfig& config) {
    json j;
    j["kind"] = config.kind;
    if (config.seed) j["seed"] = *config.seed;
    j["width"] = config.width;
    if (!config.base_url.empty()) j["base_url"] = config.base_url;
    if (!config.model_id.empty()) j["model_id"] = config.model_id;
    if (!config.api_key_env.empty()) j["api_key_env"] = config.api_key_env;
    if (!config.fixture_path.empty()) j["fixture_path"] = config.fixture_path;
    return j;
}

}  // namespace

std::string_view persona_mode_name(PersonaMode m) {
    switch (m) {
        case PersonaMode::Isolation: return "isolation";
        case PersonaMode::Intersection: return "intersection";
        case PersonaMode::Full: return "full";
    }
    return "?";
}

PersonaMode persona_mode_from_name(std::string_view name) {
    if (name == "isolation") return PersonaMode::Isolation;
    if (name == "intersection") return PersonaMode::Intersection;
    if (name == "full") return PersonaMode::Full;
    throw ArgumentError("unknown persona mode: '" + std::string(name) + "'");
}

RunManifest RunManifest::load(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open manifest: " + path.string());
    json j;
    try {
        in >> j;
    } catch (const json::exception& e) {
        throw ParseError("manifest is not valid JSON (" + path.string() + "): " +
                         e.what());
    }
    return from_json(j, std::filesystem::absolute(path).parent_path());
}

RunManifest RunManifest::from_json(const json& j,
                                   const std::filesystem::path& base_dir) {
    RunManifest m;
    try {
        m.corpus_path = resolve(base_dir, j.at("corpus").get<std::string>());
        m.lexicon_path = resolve(base_dir, j.at("lexicon").get<std::string>());
        m.cache_dir = resolve(base_dir, j.at("cache_dir").get<std::string>());
        m.output_dir = resolve(base_dir, j.at("output_dir").get<std::string>());
    } catch (const json::exception& e) {
        throw ParseError(std::string("manifest missing required key: ") + e.what());
    }
    if (j.contains("disclosure_terms")) {
        m.disclosure_path = resolve(base_dir, j["disclosure_terms"].get<std::string>());
    }
    if (j.contains("baseline")) {
        m.baseline_path = resolve(base_dir, j["baseline"].get<std::string>());
    }
    if (j.contains("taxonomy")) {
        m.taxonomy_path = resolve(base_dir, j["taxonomy"].get<std::string>());
    }
    if (j.contains("oov_model")) {
        m.oov_model_path = resolve(base_dir, j["oov_model"].get<std::string>());
    }
    m.mode = persona_mode_from_name(j.value("mode", std::string("isolation")));
    if (j.contains("tasks")) {
        m.run_affective = false;
        m.run_cognitive = false;
        for (const auto& task : j["tasks"]) {
            std::string name = task.get<std::string>();
            if (name == "affective") m.run_affective = true;
            else if (name == "cognitive") m.run_cognitive = true;
            else throw ParseError("unknown task in manifest: '" + name + "'");
        }
    }
    if (j.contains("chat")) m.chat = provider_from_json(j["chat"]);
    if (j.contains("embedding")) m.embedding = provider_from_json(j["embedding"]);
    if (j.contains("scorer")) m.scorer = provider_from_json(j["scorer"]);
    m.seed = j.value("seed", m.seed);
    m.min_tokens = j.value("min_tokens", m.min_tokens);
    m.sample_k = j.value("sample_k", m.sample_k);
    m.parallelism = j.value("parallelism", m.parallelism);
    m.bootstrap_n = j.value("bootstrap_n", m.bootstrap_n);
    m.equivalence_margin = j.value("equivalence_margin", m.equivalence_margin);
    m.log_odds_alpha = j.value("log_odds_alpha", m.log_odds_alpha);
    m.log_odds_uniform_prior = j.value("log_odds_uniform_prior", m.log_odds_uniform_prior);
    m.log_odds_top_k = j.value("log_odds_top_k", m.log_odds_top_k);
    m.tav_mode = j.value("tav_mode", m.tav_mode);
    return m;
}

json RunManifest::to_json() const {
    json j;
    j["corpus"] = corpus_path.string();
    j["lexicon"] = lexicon_path.string();
    if (disclosure_path) j["disclosure_terms"] = disclosure_path->string();
    if (baseline_path) j["baseline"] = baseline_path->string();
    if (taxonomy_path) j["taxonomy"] = taxonomy_path->string();
    if (oov_model_path) j["oov_model"] = oov_model_path->string();
    j["mode"] = std::string(persona_mode_name(mode));
    json tasks = json::array();
    if (run_affective) tasks.push_back("affective");
    if (run_cognitive) tasks.push_back("cognitive");
    j["tasks"] = tasks;
    j["chat"] = provider_to_json(chat);
    j["embedding"] = provider_to_json(embedding);
    j["scorer"] = provider_to_json(scorer);
    j["cache_dir"] = cache_dir.string();
    j["output_dir"] = output_dir.string();
    j["seed"] = seed;
    j["min_tokens"] = min_tokens;
    j["sample_k"] = sample_k;
    j["parallelism"] = parallelism;
    j["bootstrap_n"] = bootstrap_n;
    j["equivalence_margin"] = equivalence_margin;
    j["log_odds_alpha"] = log_odds_alpha;
    j["log_odds_uniform_prior"] = log_odds_uniform_prior;
    j["log_odds_top_k"] = log_odds_top_k;
    j["tav_mode"] = tav_mode;
    return j;
}

std::vector<std::string> RunManifest::validate() const {
    std::vector<std::string> problems;
    auto must_exist = [&](const std::filesystem::path& path, const char* what) {
        if (!std::filesystem::exists(path)) {
            problems.push_back(std::string(what) + " not found: " + path.string());
        }
    };
    must_exist(corpus_path, "corpus file");
    must_exist(lexicon_path, "lexicon file");
    if (disclosure_path) must_exist(*disclosure_path, "disclosure-term file");
    if (baseline_path) must_exist(*baseline_path, "baseline table");
    if (taxonomy_path) must_exist(*taxonomy_path, "taxonomy file");
    if (oov_model_path) must_exist(*oov_model_path, "OOV model file");

    if (!run_affective && !run_cognitive) problems.push_back("no tasks selected");
    if (min_tokens < 0) problems.push_back("min_tokens must be >= 0");
    if (parallelism < 1) problems.push_back("parallelism must be >= 1");
    if (bootstrap_n < 1) problems.push_back("bootstrap_n must be >= 1");
    if (equivalence_margin <= 0) problems.push_back("equivalence_margin must be > 0");
    if (log_odds_alpha <= 0) problems.push_back("log_odds_alpha must be > 0");
    if (tav_mode != "centroid" && tav_mode != "pairwise") {
        problems.push_back("tav_mode must be 'centroid' or 'pairwise'");
    }

    for (const auto* provider : {&chat, &embedding}) {
        if (provider->kind != "mock" && provider->kind != "http") {
            problems.push_back("provider kind must be 'mock' or 'http', got '" +
                               provider->kind + "'");
        }
        if (provider->kind == "http" && provider->base_url.empty()) {
            problems.push_back("http provider needs base_url");
        }
    }
    if (scorer.kind != "keyword" && scorer.kind != "fixture" && scorer.kind != "http") {
        problems.push_back("scorer kind must be 'keyword', 'fixture' or 'http'");
    }
    if (scorer.kind == "fixture" && scorer.fixture_path.empty()) {
        problems.push_back("fixture scorer needs fixture_path");
    }
    if (scorer.kind == "http" && scorer.base_url.empty()) {
        problems.push_back("http scorer needs base_url");
    }
    return problems;
}

std::string RunManifest::digest() const {
    json j = to_json();
    j.erase("output_dir");
    j.erase("cache_dir");
    return short_digest(j.dump());
}

Taxonomy RunManifest::taxonomy() const {
    return taxonomy_path ? Taxonomy::load(*taxonomy_path) : Taxonomy::standard();
}

namespace {

std::string key_from_env(const std::string& env_name) {
    if (env_name.empty()) return {};
    const char* value = std::getenv(env_name.c_str());
    return value ? value : std::string();
}

gateway::HttpConfig http_config(const ProviderConfig& config) {
    gateway::HttpConfig http;
    http.base_url = config.base_url;
    http.model_id = config.model_id.empty() ? "default" : config.model_id;
    http.api_key = key_from_env(config.api_key_env);
    return http;
}

}  // namespace

std::unique_ptr<ChatProvider> make_chat_provider(const ProviderConfig& config,
                                                 std::uint64_t default_seed) {
    if (config.kind == "mock") {
        return std::make_unique<gateway::MockChatProvider>(
            config.seed.value_or(default_seed));
    }
    if (config.kind == "http") {
        return std::make_unique<gateway::HttpChatProvider>(http_config(config));
    }
    throw ArgumentError("unknown chat provider kind: '" + config.kind + "'");
}

std::unique_ptr<EmbeddingProvider> make_embedding_provider(
    const ProviderConfig& config, std::uint64_t default_seed) {
    if (config.kind == "mock") {
        return std::make_unique<gateway::MockEmbeddingProvider>(
            config.seed.value_or(default_seed) + 1, config.width);
    }
    if (config.kind == "http") {
        return std::make_unique<gateway::HttpEmbeddingProvider>(http_config(config),
                                                                config.width);
    }
    throw ArgumentError("unknown embedding provider kind: '" + config.kind + "'");
}

std::unique_ptr<EpitomeScorer> make_scorer(const ProviderConfig& config,
                                           const std::filesystem::path& base_dir) {
    if (config.kind == "keyword") return std::make_unique<cognitive::KeywordScorer>();
    if (config.kind == "fixture") {
        std::filesystem::path path(config.fixture_path);
        if (!path.is_absolute()) path = base_dir / path;
        return std::make_unique<cognitive::FixtureScorer>(
            cognitive::FixtureScorer::load(path));
    }
    if (config.kind == "http") {
        return std::make_unique<gateway::HttpScorer>(http_config(config));
    }
    throw ArgumentError("unknown scorer kind: '" + config.kind + "'");
}

}  // namespace empaudit::report
