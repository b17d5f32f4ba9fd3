#define CPPHTTPLIB_OPENSSL_SUPPORT
#include <httplib.h>

#include <doctest.h>

#include <atomic>
#include <fstream>
#include <thread>

#include <nlohmann/json.hpp>

#include "empaudit/errors.hpp"
#include "empaudit/gateway.hpp"
#include "test_util.hpp"

using namespace empaudit;
using namespace empaudit::gateway;
using json = nlohmann::json;

namespace {

corpus::ExperienceRecord make_record(const std::string& id, const std::string& text,
                                     bool masked = false) {
    corpus::ExperienceRecord rec;
    rec.id = id;
    rec.text = text;
    rec.gold_label = "anger";
    rec.masked = masked;
    rec.word_count = corpus::count_words(text);
    return rec;
}

const persona::Persona kFullPersona{"0-17", "male", "Protestant Europe"};

// Provider that fails transiently n times before answering.
class FlakyProvider : public ChatProvider {
public:
    explicit FlakyProvider(int failures, bool fatal = false)
        : failures_(failures), fatal_(fatal) {}
    std::string id() const override { return "flaky"; }
    std::string complete(const ChatRequest&) override {
        ++calls_;
        if (calls_ <= failures_) throw ProviderError("transient blip", fatal_);
        return "[OUTPUT 1]: someone\n[OUTPUT 2]: joy";
    }
    int calls() const { return calls_; }

private:
    int failures_;
    bool fatal_;
    std::atomic<int> calls_{0};
};

}  // namespace

TEST_SUITE("gateway") {

TEST_CASE("affective prompt layout") {
    auto rec = make_record("r1", "My bike broke and nobody helped me fix it.");

    SUBCASE("non-base persona sends two turns, identity first") {
        auto request = build_affective_prompt(kFullPersona, rec);
        REQUIRE(request.user_turns.size() == 2);
        CHECK(request.user_turns[0] ==
              "I am a 0-17 age category, Protestant Europe culture and male gender. "
              "Who am I?");
        CHECK(request.user_turns[1] ==
              "Identify the emotion in the sentence based on my description and "
              "identity: " + rec.text);
        CHECK(request.system_text.find("[OUTPUT 1]") != std::string::npos);
        CHECK(request.system_text.find("[MASK]") == std::string::npos);
        CHECK(request.temperature == 0.0);
        CHECK(request.max_tokens == 2048);
    }

    SUBCASE("base persona sends exactly one turn") {
        auto request = build_affective_prompt(persona::Persona{}, rec);
        REQUIRE(request.user_turns.size() == 1);
        CHECK(request.user_turns[0].rfind("Identify the emotion", 0) == 0);
    }

    SUBCASE("masked record selects the masked prompt variant") {
        auto masked = make_record("r2", "I feel [MASK] at my brother.", true);
        auto request = build_affective_prompt(persona::Persona{}, masked);
        CHECK(request.system_text.find("masked word (denoted as [MASK])") !=
              std::string::npos);
    }
}

TEST_CASE("cognitive prompt layout") {
    auto rec = make_record("r1", "My bike broke and nobody helped me fix it.");

    auto request = build_cognitive_prompt(kFullPersona, rec);
    REQUIRE(request.user_turns.size() == 2);
    CHECK(request.system_text.find("Output: <response text>") != std::string::npos);
    CHECK(request.user_turns[1] ==
          "Generate a response based on my description and identity for the input "
          "sentence: " + rec.text);

    SUBCASE("base persona single turn") {
        CHECK(build_cognitive_prompt(persona::Persona{}, rec).user_turns.size() == 1);
    }
    SUBCASE("masked records are rejected") {
        auto masked = make_record("r2", "I feel [MASK] here.", true);
        CHECK_THROWS_AS(build_cognitive_prompt(persona::Persona{}, masked), ArgumentError);
    }
}

TEST_CASE("cache keys react to any byte of the request") {
    ChatRequest request;
    request.system_text = "system prompt";
    request.user_turns = {"turn one", "turn two"};
    std::string base = cache_key("model-a", request);
    CHECK(base == cache_key("model-a", request));

    CHECK(base != cache_key("model-b", request));

    auto mutate_and_check = [&](auto mutate) {
        ChatRequest copy = request;
        mutate(copy);
        CHECK(cache_key("model-a", copy) != base);
    };
    mutate_and_check([](ChatRequest& r) { r.system_text[0] = 'S'; });
    mutate_and_check([](ChatRequest& r) { r.user_turns[1] += "!"; });
    mutate_and_check([](ChatRequest& r) { r.temperature = 0.5; });
    mutate_and_check([](ChatRequest& r) { r.max_tokens = 1024; });
    mutate_and_check([](ChatRequest& r) { r.user_turns.pop_back(); });

    SUBCASE("single-byte mutation sweep over the system text") {
        for (std::size_t i = 0; i < request.system_text.size(); ++i) {
            ChatRequest copy = request;
            copy.system_text[i] = copy.system_text[i] == 'x' ? 'y' : 'x';
            CHECK(cache_key("model-a", copy) != base);
        }
    }
}

TEST_CASE("plan arithmetic") {
    std::vector<corpus::ExperienceRecord> records;
    for (int i = 0; i < 3; ++i) {
        records.push_back(make_record("r" + std::to_string(i), "some text here"));
    }
    auto personas = persona::isolation_personas();
    auto plan = build_plan(records, personas, {Task::Affective, Task::Cognitive});
    CHECK(plan.size() == 3 * 19 * 2);
}

TEST_CASE("response cache journals, replays, and survives truncation") {
    testutil::TempDir dir("cache");

    {
        ResponseCache cache(dir.path());
        CHECK(cache.size() == 0);
        CHECK_FALSE(cache.lookup("k1").has_value());
        cache.insert("k1", "d1", "output one", "meta");
        cache.insert("k2", "d2", "output two");
        CHECK(cache.lookup("k1") == "output one");
        CHECK(cache.size() == 2);
    }

    SUBCASE("journal replay reconstructs the exact entry set") {
        ResponseCache reloaded(dir.path());
        CHECK(reloaded.size() == 2);
        CHECK(reloaded.lookup("k1") == "output one");
        CHECK(reloaded.lookup("k2") == "output two");
    }

    SUBCASE("a truncated final line is ignored (crash remnant)") {
        auto journal = dir.path() / "journal.jsonl";
        auto data = testutil::slurp(journal);
        std::ofstream out(journal, std::ios::binary | std::ios::trunc);
        out << data.substr(0, data.size() - 7);  // chop inside the last record
        out.close();
        ResponseCache reloaded(dir.path());
        CHECK(reloaded.size() == 1);
        CHECK(reloaded.lookup("k1") == "output one");
        CHECK_FALSE(reloaded.lookup("k2").has_value());
    }

    SUBCASE("a corrupt complete line names the bad entry") {
        auto journal = dir.path() / "journal.jsonl";
        std::ofstream out(journal, std::ios::binary | std::ios::app);
        out << "{this is not json}\n";
        out.close();
        CHECK_THROWS_WITH_AS(ResponseCache(dir.path()), doctest::Contains("line 3"),
                             ValidationError);
    }
}

TEST_CASE("execute consults the cache, retries, and preserves plan order") {
    testutil::TempDir dir("exec");
    std::vector<PlanItem> plan;
    for (int i = 0; i < 6; ++i) {
        plan.push_back(PlanItem{make_record("r" + std::to_string(i),
                                            "text number " + std::to_string(i)),
                                persona::Persona{}, Task::Affective});
    }

    SUBCASE("mock run then warm-cache replay") {
        MockChatProvider provider(7);
        ResponseCache cache(dir.path());
        auto first = execute(plan, provider, cache, {.parallelism = 3});
        REQUIRE(first.size() == plan.size());
        for (std::size_t i = 0; i < plan.size(); ++i) {
            CHECK(first[i].record_id == plan[i].record.id);
            CHECK_FALSE(first[i].cache_hit);
            CHECK_FALSE(first[i].failed);
        }
        auto second = execute(plan, provider, cache, {.parallelism = 3});
        for (std::size_t i = 0; i < plan.size(); ++i) {
            CHECK(second[i].cache_hit);
            CHECK(second[i].raw_output == first[i].raw_output);
        }
    }

    SUBCASE("transient failures are retried with backoff") {
        FlakyProvider provider(2);  // first two calls fail, third succeeds
        ResponseCache cache(dir.path());
        ExecuteOptions options;
        options.parallelism = 1;
        options.max_attempts = 3;
        options.backoff_base = std::chrono::milliseconds(1);
        auto results = execute({plan[0]}, provider, cache, options);
        CHECK_FALSE(results[0].failed);
        CHECK(provider.calls() == 3);
    }

    SUBCASE("exhausted retries surface failed items without aborting") {
        FlakyProvider provider(99);
        ResponseCache cache(dir.path());
        ExecuteOptions options;
        options.parallelism = 2;
        options.max_attempts = 2;
        options.backoff_base = std::chrono::milliseconds(1);
        auto results = execute(plan, provider, cache, options);
        for (const auto& r : results) {
            CHECK(r.failed);
            CHECK(r.error.find("transient blip") != std::string::npos);
        }
    }

    SUBCASE("fatal provider errors abort with a completion summary") {
        FlakyProvider provider(99, /*fatal=*/true);
        ResponseCache cache(dir.path());
        CHECK_THROWS_WITH_AS(execute(plan, provider, cache, {.parallelism = 2}),
                             doctest::Contains("completed items"), ProviderError);
    }

    SUBCASE("parallelism does not change outputs") {
        MockChatProvider provider(7);
        ResponseCache cache_a(dir.file("a"));
        ResponseCache cache_b(dir.file("b"));
        auto serial = execute(plan, provider, cache_a, {.parallelism = 1});
        auto parallel = execute(plan, provider, cache_b, {.parallelism = 4});
        for (std::size_t i = 0; i < plan.size(); ++i) {
            CHECK(serial[i].raw_output == parallel[i].raw_output);
        }
    }
}

TEST_CASE("mock chat provider honors both output formats deterministically") {
    MockChatProvider provider(7);
    auto rec = make_record("r1", "The committee rejected my application without reason.");

    auto affective = provider.complete(build_affective_prompt(kFullPersona, rec));
    CHECK(affective.find("[OUTPUT 1]: ") != std::string::npos);
    CHECK(affective.find("[OUTPUT 2]: ") != std::string::npos);
    CHECK(affective == provider.complete(build_affective_prompt(kFullPersona, rec)));

    // identity clause echoed for recall scoring
    CHECK(affective.find("0-17 age category") != std::string::npos);

    auto cognitive = provider.complete(build_cognitive_prompt(kFullPersona, rec));
    CHECK(cognitive.rfind("Output: ", 0) == 0);

    SUBCASE("different seeds change outputs") {
        MockChatProvider other(8);
        bool any_different = false;
        for (int i = 0; i < 5; ++i) {
            auto r = make_record("r" + std::to_string(i),
                                 "Sentence number " + std::to_string(i) + " for probing.");
            auto request = build_affective_prompt(persona::Persona{}, r);
            if (provider.complete(request) != other.complete(request)) any_different = true;
        }
        CHECK(any_different);
    }

    SUBCASE("different personas can change the emotion word") {
        std::set<std::string> outputs;
        for (const auto& p : persona::isolation_personas()) {
            outputs.insert(provider.complete(build_affective_prompt(p, rec)));
        }
        CHECK(outputs.size() > 1);
    }
}

TEST_CASE("mock embeddings are deterministic, normalized, text-sensitive") {
    MockEmbeddingProvider embedder(3, 32);
    auto a = embedder.embed("the cat sat on the mat");
    CHECK(a.size() == 32);
    CHECK(a == embedder.embed("the cat sat on the mat"));

    double norm = 0;
    for (double x : a) norm += x * x;
    CHECK(norm == doctest::Approx(1.0));

    auto b = embedder.embed("a completely different sentence altogether");
    CHECK(a != b);
    CHECK_THROWS_AS(embedder.embed("   "), ProviderError);
}

TEST_CASE("embed_all caches by provider and text digest") {
    testutil::TempDir dir("embed");
    ResponseCache cache(dir.path());
    MockEmbeddingProvider embedder(3, 16);
    std::vector<std::string> texts = {"first text", "second text", "first text"};
    auto vectors = embed_all(texts, embedder, &cache);
    REQUIRE(vectors.size() == 3);
    CHECK(vectors[0] == vectors[2]);
    CHECK(cache.size() == 2);  // repeated text hits the cache

    auto again = embed_all(texts, embedder, &cache);
    CHECK(again == vectors);
    CHECK_THROWS_AS(embed_all({"ok", ""}, embedder, &cache), ArgumentError);
    CHECK_THROWS_AS(embed_all({}, embedder, &cache), ArgumentError);
}

TEST_CASE("http providers speak the chat-completion wire protocol") {
    httplib::Server server;
    json seen_chat, seen_embed, seen_score;
    server.Post("/chat/completions", [&](const httplib::Request& req, httplib::Response& res) {
        seen_chat = json::parse(req.body);
        json reply = {{"choices", json::array({{{"message",
                                                 {{"role", "assistant"},
                                                  {"content", "[OUTPUT 1]: x\n[OUTPUT 2]: joy"}}}}})}};
        res.set_content(reply.dump(), "application/json");
    });
    server.Post("/embeddings", [&](const httplib::Request& req, httplib::Response& res) {
        seen_embed = json::parse(req.body);
        json reply = {{"data", json::array({{{"embedding", {0.6, 0.8}}}})}};
        res.set_content(reply.dump(), "application/json");
    });
    server.Post("/score", [&](const httplib::Request& req, httplib::Response& res) {
        seen_score = json::parse(req.body);
        res.set_content(json({{"er", 2}, {"ip", 1}, {"ex", 0}}).dump(), "application/json");
    });
    server.Post("/unauthorized/chat/completions",
                [&](const httplib::Request&, httplib::Response& res) {
                    res.status = 401;
                    res.set_content("bad key", "text/plain");
                });

    int port = server.bind_to_any_port("127.0.0.1");
    std::thread listener([&] { server.listen_after_bind(); });
    server.wait_until_ready();
    std::string base = "http://127.0.0.1:" + std::to_string(port);

    HttpConfig config{base, "remote-model", "sk-test", 5};

    SUBCASE("chat request and response mapping") {
        HttpChatProvider provider(config);
        ChatRequest request;
        request.system_text = "sys";
        request.user_turns = {"turn1", "turn2"};
        CHECK(provider.complete(request) == "[OUTPUT 1]: x\n[OUTPUT 2]: joy");
        CHECK(seen_chat["model"] == "remote-model");
        CHECK(seen_chat["temperature"] == 0.0);
        CHECK(seen_chat["max_tokens"] == 2048);
        REQUIRE(seen_chat["messages"].size() == 3);
        CHECK(seen_chat["messages"][0]["role"] == "system");
        CHECK(seen_chat["messages"][1]["content"] == "turn1");
        CHECK(seen_chat["messages"][2]["role"] == "user");
    }

    SUBCASE("embedding request and width check") {
        HttpEmbeddingProvider provider(config, 2);
        CHECK(provider.embed("hello") == std::vector<double>{0.6, 0.8});
        CHECK(seen_embed["input"][0] == "hello");
        HttpEmbeddingProvider wrong_width(config, 3);
        CHECK_THROWS_AS(wrong_width.embed("hello"), ProviderError);
    }

    SUBCASE("scorer wire contract") {
        HttpScorer scorer(config);
        CHECK(scorer.score("post", "resp") == EpitomeScore{2, 1, 0});
        CHECK(seen_score["post"] == "post");
        CHECK(seen_score["response"] == "resp");
    }

    SUBCASE("auth failures are fatal provider errors") {
        HttpConfig bad = config;
        bad.base_url = base + "/unauthorized";
        HttpChatProvider provider(bad);
        ChatRequest request;
        request.system_text = "sys";
        request.user_turns = {"t"};
        try {
            provider.complete(request);
            FAIL("expected ProviderError");
        } catch (const ProviderError& e) {
            CHECK(e.fatal());
        }
    }

    server.stop();
    listener.join();
}

}  // TEST_SUITE
