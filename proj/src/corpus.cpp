#include "empaudit/corpus.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <limits>
#include <set>
#include <sstream>

#include "csv.hpp"
#include "empaudit/errors.hpp"
#include "empaudit/types.hpp"

namespace empaudit::corpus {
namespace {

constexpr std::string_view kMaskToken = "[MASK]";

std::size_t count_occurrences(std::string_view text, std::string_view needle) {
    std::size_t count = 0;
    std::size_t pos = 0;
    while ((pos = text.find(needle, pos)) != std::string_view::npos) {
        ++count;
        pos += needle.size();
    }
    return count;
}

bool is_word_char(unsigned char c) { return std::isalnum(c) != 0; }

// Strips leading/trailing punctuation from a whitespace token and returns
// the core span [begin, end).
void token_core(const std::string& token, std::size_t& begin, std::size_t& end) {
    begin = 0;
    end = token.size();
    while (begin < end && !is_word_char(static_cast<unsigned char>(token[begin]))) ++begin;
    while (end > begin && !is_word_char(static_cast<unsigned char>(token[end - 1]))) --end;
}

}  // namespace

int count_words(std::string_view text) {
    int count = 0;
    bool in_word = false;
    for (char c : text) {
        bool ws = std::isspace(static_cast<unsigned char>(c)) != 0;
        if (!ws && !in_word) ++count;
        in_word = !ws;
    }
    return count;
}

std::vector<ExperienceRecord> ingest(const std::filesystem::path& path,
                                     int min_tokens) {
    if (!std::filesystem::exists(path)) {
        throw IoError("corpus file not found: " + path.string());
    }
    auto rows = csvio::read_data_rows(path);
    if (rows.empty()) throw ParseError("empty corpus file: " + path.string());

    const auto& header = rows.front();
    if (header.size() != 3 || to_lower(trim(header[0])) != "id" ||
        to_lower(trim(header[1])) != "text" || to_lower(trim(header[2])) != "label") {
        throw ParseError("corpus header must be 'id,text,label' in " + path.string());
    }

    std::vector<ExperienceRecord> records;
    std::set<std::string> seen_ids;
    for (std::size_t r = 1; r < rows.size(); ++r) {
        const auto& row = rows[r];
        std::string where = "row " + std::to_string(r + 1) + " of " + path.string();
        if (row.size() != 3) {
            throw ParseError("expected 3 fields, got " + std::to_string(row.size()) +
                             " at " + where);
        }
        ExperienceRecord rec;
        rec.id = trim(row[0]);
        rec.text = trim(row[1]);
        rec.gold_label = to_lower(trim(row[2]));
        if (rec.id.empty() || rec.text.empty()) {
            throw ParseError("empty id or text at " + where);
        }
        if (!is_gold_label(rec.gold_label)) {
            throw ValidationError("unknown gold label '" + rec.gold_label + "' at " + where);
        }
        if (!seen_ids.insert(rec.id).second) {
            throw ValidationError("duplicate record id '" + rec.id + "' at " + where);
        }
        std::size_t masks = count_occurrences(rec.text, kMaskToken);
        if (masks > 1) {
            throw ValidationError("more than one [MASK] token at " + where);
        }
        rec.masked = masks == 1;
        rec.word_count = count_words(rec.text);
        if (rec.word_count >= min_tokens) records.push_back(std::move(rec));
    }
    return records;
}

void write_records(const std::filesystem::path& path,
                   const std::vector<ExperienceRecord>& records,
                   const std::string& stamp) {
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot write corpus file: " + path.string());
    if (!stamp.empty()) out << "# " << stamp << '\n';
    out << "id,text,label\n";
    for (const auto& rec : records) {
        out << csvio::escape(rec.id) << ',' << csvio::escape(rec.text) << ','
            << rec.gold_label << '\n';
    }
}

DisclosureTerms default_disclosure_terms() {
    return DisclosureTerms{
        {"anger", {"angry", "anger", "angered", "furious", "mad"}},
        {"disgust", {"disgust", "disgusted", "disgusting"}},
        {"fear", {"fear", "afraid", "scared", "fearful", "frightened", "terrified"}},
        {"guilt", {"guilt", "guilty"}},
        {"joy", {"joy", "joyful", "happy", "happiness", "glad", "delighted"}},
        {"sadness", {"sad", "sadness", "unhappy", "sorrowful", "depressed"}},
        {"shame", {"shame", "ashamed", "embarrassed", "humiliated"}},
    };
}

DisclosureTerms load_disclosure_terms(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open disclosure-term file: " + path.string());
    DisclosureTerms terms;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        std::string t = trim(line);
        if (t.empty() || t[0] == '#') continue;
        auto colon = t.find(':');
        if (colon == std::string::npos) {
            throw ParseError("expected 'label: w1, w2, ...' at line " +
                             std::to_string(line_no) + " of " + path.string());
        }
        std::string label = to_lower(trim(t.substr(0, colon)));
        if (!is_gold_label(label)) {
            throw ValidationError("unknown gold label '" + label + "' at line " +
                                  std::to_string(line_no) + " of " + path.string());
        }
        std::vector<std::string> words;
        std::stringstream rest(t.substr(colon + 1));
        std::string word;
        while (std::getline(rest, word, ',')) {
            std::string w = to_lower(trim(word));
            if (!w.empty()) words.push_back(w);
        }
        terms[label] = std::move(words);
    }
    return terms;
}

ExperienceRecord mask_self_disclosure(const ExperienceRecord& record,
                                      const DisclosureTerms& terms) {
    if (record.masked) {
        throw ArgumentError("record '" + record.id + "' is already masked");
    }
    auto it = terms.find(record.gold_label);
    if (it == terms.end() || it->second.empty()) return record;

    std::set<std::string> lookup(it->second.begin(), it->second.end());

    // Scan whitespace tokens left to right; replace the core of the first
    // token whose lowercased, punctuation-stripped form is a term.
    std::string out;
    out.reserve(record.text.size());
    std::istringstream stream(record.text);
    std::string token;
    bool replaced = false;
    bool first = true;
    while (stream >> token) {
        if (!first) out += ' ';
        first = false;
        if (!replaced) {
            std::size_t begin, end;
            token_core(token, begin, end);
            if (end > begin &&
                lookup.count(to_lower(token.substr(begin, end - begin))) > 0) {
                out += token.substr(0, begin);
                out += kMaskToken;
                out += token.substr(end);
                replaced = true;
                continue;
            }
        }
        out += token;
    }
    if (!replaced) return record;

    ExperienceRecord masked = record;
    masked.text = out;
    masked.masked = true;
    masked.word_count = count_words(out);
    return masked;
}

std::vector<std::size_t> kcenter_sample(
    const std::vector<std::vector<double>>& points, std::size_t k,
    std::size_t start_index) {
    if (points.empty()) throw ArgumentError("kcenter_sample: empty point set");
    if (k > points.size()) {
        throw ArgumentError("kcenter_sample: k=" + std::to_string(k) +
                            " exceeds point count " + std::to_string(points.size()));
    }
    if (start_index >= points.size()) {
        throw ArgumentError("kcenter_sample: start index out of range");
    }
    const std::size_t dim = points.front().size();
    for (const auto& p : points) {
        if (p.size() != dim) {
            throw ArgumentError("kcenter_sample: inconsistent vector dimensions");
        }
    }

    auto sq_dist = [&](std::size_t a, std::size_t b) {
        double d = 0.0;
        for (std::size_t i = 0; i < dim; ++i) {
            double diff = points[a][i] - points[b][i];
            d += diff * diff;
        }
        return d;
    };

    std::vector<std::size_t> selected;
    selected.reserve(k);
    std::vector<bool> taken(points.size(), false);
    std::vector<double> min_sq(points.size(), std::numeric_limits<double>::infinity());

    selected.push_back(start_index);
    taken[start_index] = true;
    while (selected.size() < k) {
        std::size_t last = selected.back();
        for (std::size_t i = 0; i < points.size(); ++i) {
            if (taken[i]) continue;
            min_sq[i] = std::min(min_sq[i], sq_dist(i, last));
        }
        std::size_t best = points.size();
        double best_d = -1.0;
        for (std::size_t i = 0; i < points.size(); ++i) {
            if (taken[i]) continue;
            if (min_sq[i] > best_d) {  // strict ">" keeps the smallest index on ties
                best_d = min_sq[i];
                best = i;
            }
        }
        selected.push_back(best);
        taken[best] = true;
    }
    return selected;
}

std::vector<std::vector<double>> build_sampling_features(
    const std::vector<std::string>& texts,
    const std::vector<std::string>& gold_labels, EmbeddingProvider& embedder) {
    if (texts.size() != gold_labels.size()) {
        throw ArgumentError("build_sampling_features: texts and labels differ in length");
    }
    std::vector<std::vector<double>> features;
    features.reserve(texts.size());
    for (std::size_t i = 0; i < texts.size(); ++i) {
        try {
            std::vector<double> f = embedder.embed(texts[i]);
            std::vector<double> l = embedder.embed(gold_labels[i]);
            f.insert(f.end(), l.begin(), l.end());
            features.push_back(std::move(f));
        } catch (const ProviderError& e) {
            throw ProviderError("embedding failed for text index " +
                                std::to_string(i) + ": " + e.what(), e.fatal());
        }
    }
    return features;
}

int count_syllables(std::string_view word) {
    auto is_vowel = [](char c) {
        c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
        return c == 'a' || c == 'e' || c == 'i' || c == 'o' || c == 'u' || c == 'y';
    };
    std::string letters;
    for (char c : word) {
        if (std::isalpha(static_cast<unsigned char>(c))) {
            letters += static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
        }
    }
    if (letters.empty()) return 0;

    int groups = 0;
    bool prev_vowel = false;
    for (char c : letters) {
        bool v = is_vowel(c);
        if (v && !prev_vowel) ++groups;
        prev_vowel = v;
    }
    // Silent final e ("bike", "date") unless the word ends in a
    // consonant+le cluster ("table").
    if (letters.size() >= 2 && letters.back() == 'e' &&
        !is_vowel(letters[letters.size() - 2]) &&
        !(letters.size() >= 3 && letters[letters.size() - 2] == 'l' &&
          !is_vowel(letters[letters.size() - 3]))) {
        --groups;
    }
    return std::max(groups, 1);
}

CorpusStats readability_stats(const std::vector<ExperienceRecord>& records) {
    if (records.empty()) throw ArgumentError("readability_stats: no records");

    std::size_t words = 0;
    std::size_t sentences = 0;
    std::size_t syllables = 0;
    for (const auto& rec : records) {
        words += static_cast<std::size_t>(rec.word_count);

        // A run of sentence-ending punctuation counts as one sentence.
        std::size_t ends = 0;
        bool in_run = false;
        for (char c : rec.text) {
            bool end_char = c == '.' || c == '!' || c == '?';
            if (end_char && !in_run) ++ends;
            in_run = end_char;
        }
        sentences += std::max<std::size_t>(ends, 1);

        std::istringstream stream(rec.text);
        std::string token;
        while (stream >> token) syllables += static_cast<std::size_t>(count_syllables(token));
    }

    CorpusStats stats;
    stats.sample_count = records.size();
    stats.mean_words = static_cast<double>(words) / static_cast<double>(records.size());
    double wps = static_cast<double>(words) / static_cast<double>(sentences);
    double spw = static_cast<double>(syllables) / static_cast<double>(words);
    stats.flesch_reading_ease = 206.835 - 1.015 * wps - 84.6 * spw;
    stats.flesch_kincaid_grade = 0.39 * wps + 11.8 * spw - 15.59;
    return stats;
}

}  // namespace empaudit::corpus
