#include "empaudit/gateway.hpp"

#include <algorithm>
#include <atomic>
#include <fstream>
#include <sstream>
#include <thread>

#include <nlohmann/json.hpp>

#include "empaudit/digest.hpp"
#include "empaudit/errors.hpp"
#include "empaudit/lexstats.hpp"

namespace empaudit::gateway {
namespace {

using json = nlohmann::json;

constexpr std::string_view kAffectiveSystemPlain =
    "Your task is to analyze a given sentence and determine the most "
    "appropriate emotion that is conveyed in the sentence. Consider the "
    "user's background while interpreting emotions. Do not provide any "
    "explanation for your prediction. Your output should be of the format: "
    "(You have to include the Output token)\n"
    "[OUTPUT 1]: <persona description>\n"
    "[OUTPUT 2]: <single emotion word>";

constexpr std::string_view kAffectiveSystemMasked =
    "Your task is to analyze a given sentence and determine the most "
    "appropriate emotion for the masked word (denoted as [MASK]). Consider "
    "the user's background while interpreting emotions. Do not provide any "
    "explanation for your prediction. Your output should be of the format: "
    "(You have to include the Output token)\n"
    "[OUTPUT 1]: <persona description>\n"
    "[OUTPUT 2]: <single emotion word>";

constexpr std::string_view kCognitiveSystem =
    "You will be given an input that contains a text and the identity of "
    "the speaker. You cannot use the phrase 'I cannot'. Prepare an "
    "appropriate response to this speaker. An appropriate response "
    "considers the entire context of the input and the speaker. The output "
    "should be of the following format: (You must include the output)\n"
    "Output: <response text>";

std::uint64_t fnv1a(std::uint64_t seed, std::string_view data) {
    std::uint64_t h = 1469598103934665603ULL ^ seed;
    for (unsigned char c : data) {
        h ^= c;
        h *= 1099511628211ULL;
    }
    return h;
}

std::int64_t now_ms() {
    return std::chrono::duration_cast<std::chrono::milliseconds>(
               std::chrono::system_clock::now().time_since_epoch())
        .count();
}

void add_identity_turn(ChatRequest& request, const Persona& p) {
    if (auto clause = persona::render(p)) {
        request.user_turns.push_back("I am a " + *clause + ". Who am I?");
    }
}

}  // namespace

std::string_view task_name(Task t) {
    return t == Task::Affective ? "affective" : "cognitive";
}

ChatRequest build_affective_prompt(const Persona& p, const ExperienceRecord& record) {
    ChatRequest request;
    request.system_text =
        std::string(record.masked ? kAffectiveSystemMasked : kAffectiveSystemPlain);
    add_identity_turn(request, p);
    request.user_turns.push_back(
        "Identify the emotion in the sentence based on my description and "
        "identity: " + record.text);
    return request;
}

ChatRequest build_cognitive_prompt(const Persona& p, const ExperienceRecord& record) {
    if (record.masked) {
        throw ArgumentError("cognitive prompts use the original unmasked text "
                            "(record '" + record.id + "' is masked)");
    }
    ChatRequest request;
    request.system_text = std::string(kCognitiveSystem);
    add_identity_turn(request, p);
    request.user_turns.push_back(
        "Generate a response based on my description and identity for the "
        "input sentence: " + record.text);
    return request;
}

std::string cache_key(std::string_view model_id, const ChatRequest& request) {
    json j;
    j["model"] = std::string(model_id);
    j["system"] = request.system_text;
    j["turns"] = request.user_turns;
    j["temperature"] = request.temperature;
    j["max_tokens"] = request.max_tokens;
    return sha256_hex(j.dump());
}

std::vector<PlanItem> build_plan(const std::vector<ExperienceRecord>& records,
                                 const std::vector<Persona>& personas,
                                 const std::vector<Task>& tasks) {
    std::vector<PlanItem> plan;
    plan.reserve(records.size() * personas.size() * tasks.size());
    for (Task task : tasks) {
        for (const auto& record : records) {
            for (const auto& p : personas) {
                plan.push_back(PlanItem{record, p, task});
            }
        }
    }
    return plan;
}

// ---------------------------------------------------------------------------
// ResponseCache
// ---------------------------------------------------------------------------

ResponseCache::ResponseCache(const std::filesystem::path& directory)
    : directory_(directory), journal_(directory / "journal.jsonl") {
    std::filesystem::create_directories(directory_);
    for (const auto& entry : std::filesystem::directory_iterator(directory_)) {
        if (entry.is_regular_file() && entry.path().extension() == ".jsonl") {
            load_journal(entry.path());
        }
    }
}

void ResponseCache::load_journal(const std::filesystem::path& file) {
    std::ifstream in(file, std::ios::binary);
    if (!in) throw IoError("cannot open cache journal: " + file.string());
    std::string data((std::istreambuf_iterator<char>(in)),
                     std::istreambuf_iterator<char>());

    std::size_t line_no = 0;
    std::size_t pos = 0;
    while (pos < data.size()) {
        auto newline = data.find('\n', pos);
        if (newline == std::string::npos) break;  // partial final line: crash remnant
        ++line_no;
        std::string line = data.substr(pos, newline - pos);
        pos = newline + 1;
        if (trim(line).empty()) continue;
        json entry;
        try {
            entry = json::parse(line);
            std::string key = entry.at("key").get<std::string>();
            entries_[key] = entry.at("output").get<std::string>();
        } catch (const json::exception& e) {
            throw ValidationError("corrupt cache entry at line " +
                                  std::to_string(line_no) + " of " + file.string() +
                                  ": " + e.what());
        }
    }
}

std::optional<std::string> ResponseCache::lookup(const std::string& key) const {
    std::lock_guard<std::mutex> lock(mutex_);
    auto it = entries_.find(key);
    if (it == entries_.end()) return std::nullopt;
    return it->second;
}

void ResponseCache::insert(const std::string& key, const std::string& request_digest,
                           const std::string& output, const std::string& meta) {
    std::lock_guard<std::mutex> lock(mutex_);
    if (entries_.count(key)) return;
    json entry;
    entry["key"] = key;
    entry["request_digest"] = request_digest;
    entry["output"] = output;
    if (!meta.empty()) entry["meta"] = meta;

    std::ofstream out(journal_, std::ios::binary | std::ios::app);
    if (!out) throw IoError("cannot append to cache journal: " + journal_.string());
    out << entry.dump() << '\n';
    out.flush();
    entries_[key] = output;
}

std::size_t ResponseCache::size() const {
    std::lock_guard<std::mutex> lock(mutex_);
    return entries_.size();
}

// ---------------------------------------------------------------------------
// execute
// ---------------------------------------------------------------------------

std::vector<RunResult> execute(const std::vector<PlanItem>& plan,
                               ChatProvider& client, ResponseCache& cache,
                               const ExecuteOptions& options,
                               const std::function<void(const RunResult&)>& on_result) {
    if (options.parallelism < 1) throw ArgumentError("parallelism must be >= 1");

    std::vector<RunResult> results(plan.size());
    std::atomic<std::size_t> next{0};
    std::atomic<bool> abort{false};
    std::atomic<std::size_t> completed{0};
    std::mutex report_mutex;
    std::string fatal_message;

    auto worker = [&]() {
        while (!abort.load()) {
            std::size_t index = next.fetch_add(1);
            if (index >= plan.size()) return;
            const PlanItem& item = plan[index];

            ChatRequest request = item.task == Task::Affective
                                      ? build_affective_prompt(item.persona, item.record)
                                      : build_cognitive_prompt(item.persona, item.record);
            std::string key = cache_key(client.id(), request);

            RunResult result;
            result.record_id = item.record.id;
            result.persona = item.persona;
            result.task = item.task;
            result.model_id = client.id();
            result.timestamp_ms = now_ms();

            if (auto hit = cache.lookup(key)) {
                result.raw_output = *hit;
                result.cache_hit = true;
            } else {
                int attempt = 0;
                while (true) {
                    ++attempt;
                    try {
                        result.raw_output = client.complete(request);
                        cache.insert(key, sha256_hex(request.system_text), result.raw_output,
                                     std::string(task_name(item.task)));
                        break;
                    } catch (const ProviderError& e) {
                        if (e.fatal()) {
                            std::lock_guard<std::mutex> lock(report_mutex);
                            if (fatal_message.empty()) fatal_message = e.what();
                            abort.store(true);
                            return;
                        }
                        if (attempt >= options.max_attempts) {
                            result.failed = true;
                            result.error = e.what();
                            break;
                        }
                        std::this_thread::sleep_for(options.backoff_base * (1 << (attempt - 1)));
                    }
                }
            }

            results[index] = result;
            completed.fetch_add(1);
            if (on_result) {
                std::lock_guard<std::mutex> lock(report_mutex);
                on_result(results[index]);
            }
        }
    };

    std::vector<std::thread> threads;
    int thread_count = std::min<int>(options.parallelism,
                                     static_cast<int>(std::max<std::size_t>(plan.size(), 1)));
    threads.reserve(static_cast<std::size_t>(thread_count));
    for (int i = 0; i < thread_count; ++i) threads.emplace_back(worker);
    for (auto& t : threads) t.join();

    if (abort.load()) {
        throw ProviderError("run aborted after " + std::to_string(completed.load()) +
                            " of " + std::to_string(plan.size()) +
                            " completed items: " + fatal_message,
                            true);
    }
    return results;
}

std::vector<std::vector<double>> embed_all(const std::vector<std::string>& texts,
                                           EmbeddingProvider& provider,
                                           ResponseCache* cache) {
    if (texts.empty()) throw ArgumentError("embed_all: no texts");

    std::vector<std::vector<double>> vectors;
    vectors.reserve(texts.size());
    std::vector<std::size_t> failures;
    for (std::size_t i = 0; i < texts.size(); ++i) {
        const std::string& text = texts[i];
        if (trim(text).empty()) {
            throw ArgumentError("embed_all: empty string at index " + std::to_string(i));
        }
        std::string key = "embed:" + provider.id() + ":" + sha256_hex(text);
        if (cache) {
            if (auto hit = cache->lookup(key)) {
                json parsed = json::parse(*hit);
                vectors.push_back(parsed.get<std::vector<double>>());
                continue;
            }
        }
        try {
            std::vector<double> v = provider.embed(text);
            if (!vectors.empty() && v.size() != vectors.front().size()) {
                throw ProviderError("inconsistent embedding width at index " +
                                    std::to_string(i));
            }
            if (cache) cache->insert(key, sha256_hex(text), json(v).dump(), "embedding");
            vectors.push_back(std::move(v));
        } catch (const ProviderError& e) {
            if (e.fatal()) throw;
            failures.push_back(i);
            vectors.emplace_back();  // placeholder, reported below
        }
    }
    if (!failures.empty()) {
        std::string indices;
        for (std::size_t i : failures) indices += " " + std::to_string(i);
        throw ProviderError("embedding failed for indices:" + indices);
    }
    return vectors;
}

// ---------------------------------------------------------------------------
// Mock providers
// ---------------------------------------------------------------------------

namespace {

const std::vector<std::string>& default_emotion_words() {
    static const std::vector<std::string> words = {
        "angry",     "anxious",  "ashamed",   "delighted", "disgusted",
        "fearful",   "gloomy",   "grateful",  "guilty",    "happy",
        "hopeful",   "joyful",   "sad",       "shocked",   "surprised",
        "terrified", "upset",    "worried"};
    return words;
}

const std::vector<std::string>& generic_personas() {
    static const std::vector<std::string> personas = {
        "a student", "a concerned individual", "a teacher or educator",
        "a skeptical individual", "a person reflecting on a recent experience"};
    return personas;
}

// Identity clause from "I am a <clause>. Who am I?"
std::optional<std::string> extract_clause(const std::string& turn) {
    constexpr std::string_view prefix = "I am a ";
    constexpr std::string_view suffix = ". Who am I?";
    if (turn.rfind(prefix, 0) != 0) return std::nullopt;
    auto end = turn.rfind(suffix);
    if (end == std::string::npos || end <= prefix.size()) return std::nullopt;
    return turn.substr(prefix.size(), end - prefix.size());
}

std::string longest_word(const std::string& text) {
    std::string best = "this";
    for (const auto& token : lexstats::tokenize(text)) {
        if (token == "mask") continue;
        if (token.size() > best.size()) best = token;
    }
    return best;
}

}  // namespace

MockChatProvider::MockChatProvider(std::uint64_t seed,
                                   std::vector<std::string> emotion_words)
    : seed_(seed), emotion_words_(std::move(emotion_words)) {
    if (emotion_words_.empty()) emotion_words_ = default_emotion_words();
}

std::string MockChatProvider::complete(const ChatRequest& request) {
    if (request.user_turns.empty() || request.user_turns.size() > 2) {
        throw ProviderError("mock chat: turns must number 1 or 2", true);
    }
    std::uint64_t h = fnv1a(seed_, request.system_text);
    for (const auto& turn : request.user_turns) h = fnv1a(h, turn);

    const bool has_identity = request.user_turns.size() == 2;
    std::optional<std::string> clause =
        has_identity ? extract_clause(request.user_turns.front()) : std::nullopt;
    const std::string& final_turn = request.user_turns.back();

    if (request.system_text.find("[OUTPUT 1]") != std::string::npos) {
        std::string recall =
            clause ? *clause
                   : generic_personas()[h % generic_personas().size()];
        const std::string& word = emotion_words_[h % emotion_words_.size()];
        return "[OUTPUT 1]: " + recall + "\n[OUTPUT 2]: " + word;
    }

    std::string topic = longest_word(final_turn);
    std::string who = clause ? "someone of " + *clause : "someone in your situation";
    switch (h % 3) {
        case 0:
            return "Output: I'm sorry you went through that. For " + who +
                   ", it makes sense that " + topic +
                   " weighed on you. How are you feeling about it now?";
        case 1:
            return "Output: Thank you for sharing this. That " + topic +
                   " experience sounds intense for " + who +
                   ", and your feelings are completely valid. What would help most right now?";
        default:
            return "Output: That sounds really difficult. I hear how much " + topic +
                   " affected you, and " + who +
                   " deserves support. Have you been able to talk to anyone about it?";
    }
}

MockEmbeddingProvider::MockEmbeddingProvider(std::uint64_t seed, std::size_t width)
    : seed_(seed), width_(width) {
    if (width_ == 0) throw ArgumentError("embedding width must be > 0");
}

std::string MockEmbeddingProvider::id() const {
    return "mock-embed-" + std::to_string(width_);
}

std::vector<double> MockEmbeddingProvider::embed(const std::string& text) {
    if (trim(text).empty()) {
        throw ProviderError("mock embedding rejects empty strings");
    }
    std::vector<double> v(width_, 0.0);
    for (const auto& token : lexstats::tokenize(text)) {
        std::uint64_t h = fnv1a(seed_, token);
        std::size_t dim = h % width_;
        double sign = (h >> 32) & 1 ? 1.0 : -1.0;
        v[dim] += sign;
    }
    double norm = 0.0;
    for (double x : v) norm += x * x;
    if (norm > 0.0) {
        norm = std::sqrt(norm);
        for (double& x : v) x /= norm;
    } else {
        v[fnv1a(seed_, text) % width_] = 1.0;  // all-punctuation input
    }
    return v;
}

}  // namespace empaudit::gateway
