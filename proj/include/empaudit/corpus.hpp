#pragma once

#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "empaudit/providers.hpp"

namespace empaudit::corpus {

// One self-reported emotional experience.
// Invariants: masked <=> text contains exactly one [MASK] token;
// word_count is the whitespace-delimited token count of text.
struct ExperienceRecord {
    std::string id;
    std::string text;
    std::string gold_label;  // one of the 7 gold labels
    bool masked = false;
    int word_count = 0;

    friend bool operator==(const ExperienceRecord&, const ExperienceRecord&) = default;
};

struct CorpusStats {
    std::size_t sample_count = 0;
    double mean_words = 0.0;
    double flesch_reading_ease = 0.0;
    double flesch_kincaid_grade = 0.0;
};

// gold label -> self-disclosure words to mask.
using DisclosureTerms = std::map<std::string, std::vector<std::string>>;

int count_words(std::string_view text);

// Reads a CSV file with header `id,text,label` (RFC-4180 quoting) and
// keeps records with word_count >= min_tokens, in input order.
// Throws IoError / ParseError (naming the line) / ValidationError
// (unknown label, duplicate id, malformed [MASK] usage).
std::vector<ExperienceRecord> ingest(const std::filesystem::path& path,
                                     int min_tokens);

// Writes records back out in the ingest format. A nonempty stamp becomes
// a leading comment line (ingest skips comment rows).
void write_records(const std::filesystem::path& path,
                   const std::vector<ExperienceRecord>& records,
                   const std::string& stamp = {});

// Shipped default: each gold label mapped to its word plus common
// inflections.
DisclosureTerms default_disclosure_terms();

// Override file, one line per label: `label: w1, w2, ...`.
DisclosureTerms load_disclosure_terms(const std::filesystem::path& path);

// If the text contains (case-insensitive, word-boundary) any disclosure
// term for the record's gold label, the FIRST occurrence is replaced by
// [MASK]. Word count is preserved; no-op when nothing matches.
// Precondition: record.masked == false.
ExperienceRecord mask_self_disclosure(const ExperienceRecord& record,
                                      const DisclosureTerms& terms);

// Farthest-point-first subset selection. Returns k indices starting at
// start_index; each next pick maximizes the minimum Euclidean distance to
// the already-selected set, ties broken by smallest index.
std::vector<std::size_t> kcenter_sample(
    const std::vector<std::vector<double>>& points, std::size_t k,
    std::size_t start_index);

// Per text: concat(text embedding, gold-label-word embedding).
std::vector<std::vector<double>> build_sampling_features(
    const std::vector<std::string>& texts,
    const std::vector<std::string>& gold_labels, EmbeddingProvider& embedder);

// Contiguous-vowel-group heuristic with silent-e correction, minimum 1.
int count_syllables(std::string_view word);

// Flesch Reading Ease / Flesch-Kincaid Grade over the whole record set.
CorpusStats readability_stats(const std::vector<ExperienceRecord>& records);

}  // namespace empaudit::corpus
