#include <algorithm>
#include <cmath>
#include <fstream>
#include <iostream>
#include <set>

#include <nlohmann/json.hpp>

#include "csv.hpp"
#include "empaudit/affect_metrics.hpp"
#include "empaudit/digest.hpp"
#include "empaudit/errors.hpp"
#include "empaudit/lexicon.hpp"
#include "empaudit/lexstats.hpp"
#include "empaudit/report.hpp"

namespace empaudit::report {
namespace {

using corpus::ExperienceRecord;
using gateway::PlanItem;
using gateway::RunResult;
using gateway::Task;
using json = nlohmann::json;
using persona::Persona;

Persona persona_from_key(const std::string& key) {
    std::vector<std::string> parts;
    std::size_t start = 0;
    while (true) {
        auto bar = key.find('|', start);
        if (bar == std::string::npos) {
            parts.push_back(key.substr(start));
            break;
        }
        parts.push_back(key.substr(start, bar - start));
        start = bar + 1;
    }
    if (parts.size() != 3) throw ParseError("bad persona key: '" + key + "'");
    Persona p;
    if (parts[0] != "Base") p.age = parts[0];
    if (parts[1] != "Base") p.gender = parts[1];
    if (parts[2] != "Base") p.culture = parts[2];
    return p;
}

std::string run_stamp(const RunManifest& manifest) {
    return "manifest=" + manifest.digest() + " seed=" + std::to_string(manifest.seed);
}

RunManifest load_stored_manifest(const std::filesystem::path& output_dir) {
    return RunManifest::load(output_dir / "manifest.json");
}

std::ofstream open_artifact(const std::filesystem::path& path, const std::string& stamp) {
    std::filesystem::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot write artifact: " + path.string());
    out << "# " << stamp << '\n';
    return out;
}

// ---- parsed-artifact rows -------------------------------------------------

struct AffectiveRow {
    std::string record_id;
    Persona persona;
    std::string status;  // ok | format_error | oov
    std::string emotion_word;
    bool multi_word = false;
    std::optional<EmotionVector> intensity;
    std::string persona_recall;
};

struct CognitiveRow {
    std::string record_id;
    Persona persona;
    std::string status;  // ok | format_error
    bool lenient = false;
    std::string response;
};

void write_affective_rows(const std::filesystem::path& path,
                          const std::vector<AffectiveRow>& rows,
                          const std::string& stamp) {
    auto out = open_artifact(path, stamp);
    std::string header = "record_id,persona,status,emotion_word,multi_word";
    for (auto name : kEmotionNames) header += "," + std::string(name);
    header += ",persona_recall";
    out << header << '\n';
    for (const auto& row : rows) {
        std::vector<std::string> fields = {row.record_id, row.persona.key(),
                                           row.status, row.emotion_word,
                                           row.multi_word ? "1" : "0"};
        for (std::size_t e = 0; e < kEmotionCount; ++e) {
            fields.push_back(row.intensity ? csvio::format_double((*row.intensity)[e])
                                           : std::string());
        }
        fields.push_back(row.persona_recall);
        out << csvio::join(fields) << '\n';
    }
}

std::vector<AffectiveRow> load_affective_rows(const std::filesystem::path& path) {
    auto raw = csvio::read_data_rows(path);
    std::vector<AffectiveRow> rows;
    for (std::size_t r = 1; r < raw.size(); ++r) {
        const auto& fields = raw[r];
        if (fields.size() != 6 + kEmotionCount) {
            throw ParseError("bad affective artifact row in " + path.string());
        }
        AffectiveRow row;
        row.record_id = fields[0];
        row.persona = persona_from_key(fields[1]);
        row.status = fields[2];
        row.emotion_word = fields[3];
        row.multi_word = fields[4] == "1";
        if (!fields[5].empty()) {
            std::array<double, kEmotionCount> values{};
            for (std::size_t e = 0; e < kEmotionCount; ++e) {
                values[e] = std::stod(fields[5 + e]);
            }
            row.intensity = EmotionVector::from(values);
        }
        row.persona_recall = fields[5 + kEmotionCount];
        rows.push_back(std::move(row));
    }
    return rows;
}

void write_cognitive_rows(const std::filesystem::path& path,
                          const std::vector<CognitiveRow>& rows,
                          const std::string& stamp) {
    auto out = open_artifact(path, stamp);
    out << "record_id,persona,status,lenient,response\n";
    for (const auto& row : rows) {
        out << csvio::join({row.record_id, row.persona.key(), row.status,
                            row.lenient ? "1" : "0", row.response})
            << '\n';
    }
}

std::vector<CognitiveRow> load_cognitive_rows(const std::filesystem::path& path) {
    auto raw = csvio::read_data_rows(path);
    std::vector<CognitiveRow> rows;
    for (std::size_t r = 1; r < raw.size(); ++r) {
        const auto& fields = raw[r];
        if (fields.size() != 5) {
            throw ParseError("bad cognitive artifact row in " + path.string());
        }
        rows.push_back(CognitiveRow{fields[0], persona_from_key(fields[1]), fields[2],
                                    fields[3] == "1", fields[4]});
    }
    return rows;
}

std::map<std::string, ExperienceRecord> record_index(
    const std::vector<ExperienceRecord>& records) {
    std::map<std::string, ExperienceRecord> index;
    for (const auto& rec : records) index[rec.id] = rec;
    return index;
}

// ---- run bookkeeping -------------------------------------------------------

struct RejectKey {
    std::string persona_key;
    std::string task;
    bool operator<(const RejectKey& other) const {
        return std::tie(persona_key, task) < std::tie(other.persona_key, other.task);
    }
};

struct RejectTally {
    std::size_t total = 0;
    std::size_t rejected = 0;
};

double mean_of(const std::vector<double>& values) {
    if (values.empty()) return 0.0;
    double sum = 0.0;
    for (double v : values) sum += v;
    return sum / static_cast<double>(values.size());
}

double stddev_of(const std::vector<double>& values) {
    if (values.size() < 2) return 0.0;
    double mean = mean_of(values);
    double var = 0.0;
    for (double v : values) var += (v - mean) * (v - mean);
    return std::sqrt(var / static_cast<double>(values.size()));
}

}  // namespace

// ---------------------------------------------------------------------------
// run
// ---------------------------------------------------------------------------

RunReport run(const RunManifest& manifest) {
    auto problems = manifest.validate();
    if (!problems.empty()) {
        std::string message = "manifest validation failed:";
        for (const auto& p : problems) message += "\n  - " + p;
        throw ValidationError(message);
    }

    const std::string stamp = run_stamp(manifest);
    const auto& out_dir = manifest.output_dir;
    std::filesystem::create_directories(out_dir);

    {
        json j = manifest.to_json();
        j["digest"] = manifest.digest();
        std::ofstream out(out_dir / "manifest.json", std::ios::binary);
        if (!out) throw IoError("cannot write manifest copy");
        out << j.dump(2) << '\n';
    }

    RunReport report;
    report.output_dir = out_dir;

    // --- corpus stage ---
    auto records = corpus::ingest(manifest.corpus_path, manifest.min_tokens);
    if (records.empty()) {
        throw ValidationError("no records passed the min-token filter");
    }

    auto embedder = make_embedding_provider(manifest.embedding, manifest.seed);
    gateway::ResponseCache cache(manifest.cache_dir);

    if (manifest.sample_k > 0 && manifest.sample_k < records.size()) {
        std::vector<std::string> texts, labels;
        for (const auto& rec : records) {
            texts.push_back(rec.text);
            labels.push_back(rec.gold_label);
        }
        auto features = corpus::build_sampling_features(texts, labels, *embedder);
        auto picked = corpus::kcenter_sample(features, manifest.sample_k, 0);
        std::sort(picked.begin(), picked.end());  // keep input order
        std::vector<ExperienceRecord> subset;
        for (std::size_t index : picked) subset.push_back(records[index]);
        records = std::move(subset);
    }

    corpus::DisclosureTerms terms =
        manifest.disclosure_path ? corpus::load_disclosure_terms(*manifest.disclosure_path)
                                 : corpus::default_disclosure_terms();
    std::vector<ExperienceRecord> masked_records;
    for (const auto& rec : records) {
        masked_records.push_back(rec.masked ? rec : corpus::mask_self_disclosure(rec, terms));
    }

    corpus::write_records(out_dir / "corpus" / "records.csv", records);
    corpus::write_records(out_dir / "corpus" / "masked.csv", masked_records);
    {
        auto out = open_artifact(out_dir / "corpus" / "sampled_ids.txt", stamp);
        for (const auto& rec : records) out << rec.id << '\n';
    }
    {
        auto stats = corpus::readability_stats(records);
        auto out = open_artifact(out_dir / "corpus" / "stats.csv", stamp);
        out << "sample_count,mean_words,flesch_reading_ease,flesch_kincaid_grade\n";
        out << stats.sample_count << ',' << csvio::format_double(stats.mean_words)
            << ',' << csvio::format_double(stats.flesch_reading_ease) << ','
            << csvio::format_double(stats.flesch_kincaid_grade) << '\n';
    }

    // --- gateway stage ---
    Taxonomy taxonomy = manifest.taxonomy();
    std::vector<Persona> personas = manifest.mode == PersonaMode::Isolation
                                        ? persona::isolation_personas(taxonomy)
                                        : persona::build_grid(taxonomy);

    std::vector<PlanItem> plan;
    if (manifest.run_affective) {
        auto part = gateway::build_plan(masked_records, personas, {Task::Affective});
        plan.insert(plan.end(), part.begin(), part.end());
    }
    if (manifest.run_cognitive) {
        std::vector<ExperienceRecord> unmasked;
        for (const auto& rec : records) {
            if (rec.masked) {
                report.problems.push_back("record '" + rec.id +
                                          "' arrived pre-masked; skipped for the "
                                          "cognitive task (needs original text)");
                continue;
            }
            unmasked.push_back(rec);
        }
        auto part = gateway::build_plan(unmasked, personas, {Task::Cognitive});
        plan.insert(plan.end(), part.begin(), part.end());
    }
    report.plan_size = plan.size();

    auto chat = make_chat_provider(manifest.chat, manifest.seed);
    gateway::ExecuteOptions options;
    options.parallelism = manifest.parallelism;
    auto results = gateway::execute(plan, *chat, cache, options);

    for (Task task : {Task::Affective, Task::Cognitive}) {
        auto out = open_artifact(
            out_dir / "runs" / (std::string(gateway::task_name(task)) + ".jsonl"), stamp);
        for (const auto& result : results) {
            if (result.task != task) continue;
            json j;
            j["record_id"] = result.record_id;
            j["persona"] = result.persona.key();
            j["task"] = std::string(gateway::task_name(result.task));
            j["model_id"] = result.model_id;
            j["raw_output"] = result.raw_output;
            j["failed"] = result.failed;
            if (result.failed) j["error"] = result.error;
            out << j.dump() << '\n';
        }
    }
    for (const auto& result : results) {
        if (result.failed) ++report.failed;
        else ++report.completed;
    }

    // --- parse stage ---
    lex::IntensityLexicon lexicon = lex::load_lexicon(manifest.lexicon_path);
    lex::OovModel oov_model;
    lex::OovFallback fallback;
    const lex::OovFallback* fallback_ptr = nullptr;
    if (manifest.oov_model_path) {
        oov_model = lex::OovModel::load(*manifest.oov_model_path);
        fallback.model = &oov_model;
        fallback.embedder = embedder.get();
        fallback_ptr = &fallback;
    }

    std::vector<AffectiveRow> affective_rows;
    std::vector<CognitiveRow> cognitive_rows;
    for (const auto& result : results) {
        if (result.task == Task::Affective) {
            AffectiveRow row;
            row.record_id = result.record_id;
            row.persona = result.persona;
            if (result.failed) {
                row.status = "format_error";
                affective_rows.push_back(std::move(row));
                continue;
            }
            try {
                auto parsed = metrics::parse_affective(result.raw_output);
                row.emotion_word = parsed.emotion_word;
                row.multi_word = parsed.multi_word;
                row.persona_recall = parsed.persona_recall;
                try {
                    row.intensity = lex::intensity(parsed.emotion_word, lexicon, fallback_ptr);
                    row.status = "ok";
                } catch (const OovError&) {
                    row.status = "oov";
                    ++report.oov_misses;
                }
            } catch (const FormatError&) {
                row.status = "format_error";
                ++report.affective_rejects;
            }
            affective_rows.push_back(std::move(row));
        } else {
            CognitiveRow row;
            row.record_id = result.record_id;
            row.persona = result.persona;
            if (result.failed) {
                row.status = "format_error";
                cognitive_rows.push_back(std::move(row));
                continue;
            }
            try {
                auto parsed = metrics::parse_cognitive(result.raw_output);
                row.status = "ok";
                row.lenient = parsed.lenient;
                row.response = parsed.response;
            } catch (const FormatError&) {
                row.status = "format_error";
                ++report.cognitive_rejects;
            }
            cognitive_rows.push_back(std::move(row));
        }
    }
    if (manifest.run_affective) {
        write_affective_rows(out_dir / "parsed" / "affective.csv", affective_rows, stamp);
    }
    if (manifest.run_cognitive) {
        write_cognitive_rows(out_dir / "parsed" / "cognitive.csv", cognitive_rows, stamp);
    }

    score_stage(out_dir);
    analyze_stage(out_dir);
    report_stage(out_dir);
    return report;
}

// ---------------------------------------------------------------------------
// score stage
// ---------------------------------------------------------------------------

void score_stage(const std::filesystem::path& output_dir) {
    RunManifest manifest = load_stored_manifest(output_dir);
    const std::string stamp = run_stamp(manifest);

    auto parsed_path = output_dir / "parsed" / "cognitive.csv";
    if (!std::filesystem::exists(parsed_path)) return;  // cognitive task not run

    auto rows = load_cognitive_rows(parsed_path);
    auto records = record_index(corpus::ingest(output_dir / "corpus" / "records.csv", 0));

    auto scorer = make_scorer(manifest.scorer, output_dir);
    cognitive::CachingScorer caching(*scorer);

    auto csv = open_artifact(output_dir / "scores" / "epitome.csv", stamp);
    csv << "record_id,persona,er,ip,ex\n";
    cognitive::ScoreMap fixture;
    for (const auto& row : rows) {
        if (row.status != "ok") continue;
        auto it = records.find(row.record_id);
        if (it == records.end()) continue;
        EpitomeScore score = caching.score(it->second.text, row.response);
        csv << csvio::join({row.record_id, row.persona.key(), std::to_string(score.er),
                            std::to_string(score.ip), std::to_string(score.ex)})
            << '\n';
        fixture[{short_digest(it->second.text), short_digest(row.response)}] = score;
    }
    cognitive::write_scores(output_dir / "scores" / "epitome.tsv", fixture);
}

// ---------------------------------------------------------------------------
// analyze stage
// ---------------------------------------------------------------------------

namespace {

std::map<std::pair<std::string, std::string>, EpitomeScore> load_score_rows(
    const std::filesystem::path& path) {
    std::map<std::pair<std::string, std::string>, EpitomeScore> scores;
    if (!std::filesystem::exists(path)) return scores;
    auto raw = csvio::read_data_rows(path);
    for (std::size_t r = 1; r < raw.size(); ++r) {
        const auto& fields = raw[r];
        if (fields.size() != 5) throw ParseError("bad score row in " + path.string());
        scores[{fields[0], fields[1]}] =
            EpitomeScore::from(std::stoi(fields[2]), std::stoi(fields[3]),
                               std::stoi(fields[4]));
    }
    return scores;
}

}  // namespace

void analyze_stage(const std::filesystem::path& output_dir) {
    RunManifest manifest = load_stored_manifest(output_dir);
    const std::string stamp = run_stamp(manifest);
    Taxonomy taxonomy = manifest.taxonomy();
    std::vector<std::string> problems;

    auto records = record_index(corpus::ingest(output_dir / "corpus" / "records.csv", 0));

    std::vector<AffectiveRow> affective_rows;
    if (std::filesystem::exists(output_dir / "parsed" / "affective.csv")) {
        affective_rows = load_affective_rows(output_dir / "parsed" / "affective.csv");
    }
    std::vector<CognitiveRow> cognitive_rows;
    if (std::filesystem::exists(output_dir / "parsed" / "cognitive.csv")) {
        cognitive_rows = load_cognitive_rows(output_dir / "parsed" / "cognitive.csv");
    }
    auto scores = load_score_rows(output_dir / "scores" / "epitome.csv");

    auto embedder = make_embedding_provider(manifest.embedding, manifest.seed);
    gateway::ResponseCache cache(manifest.cache_dir);
    auto chat = make_chat_provider(manifest.chat, manifest.seed);
    const std::string model_id = chat->id();

    // --- outcome table ---
    causal::OutcomeTable outcomes(model_id);
    for (const auto& row : affective_rows) {
        if (row.status == "ok" && row.intensity) {
            outcomes.set_affect(row.record_id, row.persona, *row.intensity);
        } else {
            outcomes.mark_missing(row.record_id, row.persona);
        }
    }
    for (const auto& [key, score] : scores) {
        outcomes.set_epitome(key.first, persona_from_key(key.second), score);
    }
    for (const auto& row : cognitive_rows) {
        if (row.status != "ok") outcomes.mark_missing(row.record_id, row.persona);
    }

    {
        auto out = open_artifact(output_dir / "analysis" / "outcomes.csv", stamp);
        std::string header = "record_id,persona";
        for (auto name : kDimensionNames) header += "," + std::string(name);
        out << header << '\n';
        for (const auto& record_id : outcomes.record_ids()) {
            for (const auto& p : outcomes.personas()) {
                const causal::OutcomeCell* cell = outcomes.find(record_id, p);
                if (!cell) continue;
                std::vector<std::string> fields = {record_id, p.key()};
                for (std::size_t dim = 0; dim < kDimensionCount; ++dim) {
                    auto value = cell->dimension(dim);
                    fields.push_back(value ? csvio::format_double(*value) : std::string());
                }
                out << csvio::join(fields) << '\n';
            }
        }
    }

    // --- treatment effects ---
    causal::BootstrapConfig bootstrap;
    bootstrap.bootstrap_n = manifest.bootstrap_n;
    bootstrap.seed = manifest.seed;
    bootstrap.equivalence_margin = manifest.equivalence_margin;

    // Only estimate dimensions the executed tasks can populate.
    std::vector<std::size_t> dims;
    bool have_affect = !affective_rows.empty();
    bool have_epitome = !scores.empty();
    for (std::size_t dim = 0; dim < kDimensionCount; ++dim) {
        if (dim < kEmotionCount ? have_affect : have_epitome) dims.push_back(dim);
    }

    std::vector<AteEstimate> isolation_estimates, intersection_estimates;
    bool want_isolation = manifest.mode != PersonaMode::Intersection;
    bool want_intersection = manifest.mode != PersonaMode::Isolation;
    for (persona::Category category : persona::kCategories) {
        for (const auto& value : taxonomy.values(category)) {
            causal::Attribute attribute{category, value};
            if (want_isolation) {
                try {
                    auto estimates =
                        causal::ate_isolation(outcomes, attribute, bootstrap, dims);
                    isolation_estimates.insert(isolation_estimates.end(),
                                               estimates.begin(), estimates.end());
                } catch (const EstimationError& e) {
                    problems.push_back(e.what());
                }
            }
            if (want_intersection) {
                try {
                    auto estimates = causal::ate_intersection(outcomes, attribute,
                                                              taxonomy, bootstrap, dims);
                    intersection_estimates.insert(intersection_estimates.end(),
                                                  estimates.begin(), estimates.end());
                } catch (const EstimationError& e) {
                    problems.push_back(e.what());
                }
            }
        }
    }
    if (!isolation_estimates.empty()) {
        write_estimates(output_dir / "analysis" / "ate_isolation.csv",
                        isolation_estimates, model_id, stamp);
    }
    if (!intersection_estimates.empty()) {
        write_estimates(output_dir / "analysis" / "ate_intersection.csv",
                        intersection_estimates, model_id, stamp);
    }

    std::vector<AteEstimate> all_estimates = isolation_estimates;
    all_estimates.insert(all_estimates.end(), intersection_estimates.begin(),
                         intersection_estimates.end());

    if (!all_estimates.empty()) {
        auto winners = causal::least_aligned(all_estimates);
        auto out = open_artifact(output_dir / "analysis" / "least_aligned.csv", stamp);
        out << "dimension,attribute,category\n";
        for (const auto& [dim, attribute] : winners) {
            out << csvio::join({std::string(kDimensionNames[dim]),
                                attribute ? attribute->value : "NONE",
                                attribute ? std::string(persona::category_name(
                                                attribute->category))
                                          : ""})
                << '\n';
        }
    }

    if (manifest.baseline_path) {
        const auto& culture_source =
            !isolation_estimates.empty() ? isolation_estimates : intersection_estimates;
        try {
            auto baseline = causal::BaselineTable::load(*manifest.baseline_path);
            auto correlations = causal::baseline_alignment(culture_source, baseline);
            auto out = open_artifact(output_dir / "analysis" / "baseline_alignment.csv",
                                     stamp);
            out << "emotion,spearman_rho\n";
            for (const auto& [emotion, rho] : correlations) {
                out << kEmotionNames[emotion] << ',' << csvio::format_double(rho) << '\n';
            }
        } catch (const Error& e) {
            problems.push_back(std::string("baseline alignment skipped: ") + e.what());
        }
    }

    // --- accuracy vs gold labels ---
    if (!affective_rows.empty()) {
        lex::IntensityLexicon lexicon = lex::load_lexicon(manifest.lexicon_path);
        struct Bucket {
            std::vector<std::string> predictions, golds;
            std::vector<EmotionVector> predicted_vecs, gold_vecs;
        };
        std::map<std::string, Bucket> buckets;  // "overall" + persona keys
        for (const auto& row : affective_rows) {
            if (row.status != "ok" || !row.intensity) continue;
            auto it = records.find(row.record_id);
            if (it == records.end()) continue;
            auto gold_it = lexicon.find(it->second.gold_label);
            for (const std::string key : {std::string("overall"), row.persona.key()}) {
                auto& bucket = buckets[key];
                bucket.predictions.push_back(row.emotion_word);
                bucket.golds.push_back(it->second.gold_label);
                if (gold_it != lexicon.end()) {
                    bucket.predicted_vecs.push_back(*row.intensity);
                    bucket.gold_vecs.push_back(gold_it->second);
                }
            }
        }
        auto out = open_artifact(output_dir / "analysis" / "accuracy.csv", stamp);
        out << "group,n,lexical_accuracy,intensity_mse\n";
        for (const auto& [key, bucket] : buckets) {
            double accuracy = metrics::lexical_accuracy(bucket.predictions, bucket.golds);
            double mse = metrics::intensity_mse(bucket.predicted_vecs, bucket.gold_vecs);
            out << csvio::join({key, std::to_string(bucket.predictions.size()),
                                csvio::format_double(accuracy),
                                csvio::format_double(mse)})
                << '\n';
        }
    }

    // --- EMD of each persona's predictions vs the base state ---
    if (!affective_rows.empty()) {
        std::map<std::pair<std::string, Persona>, EmotionVector> affect_cells;
        for (const auto& row : affective_rows) {
            if (row.status == "ok" && row.intensity) {
                affect_cells[{row.record_id, row.persona}] = *row.intensity;
            }
        }
        std::map<Persona, std::vector<double>> emds;
        for (const auto& [key, vec] : affect_cells) {
            const auto& [record_id, p] = key;
            if (p.is_base()) continue;
            auto base_it = affect_cells.find({record_id, Persona{}});
            if (base_it == affect_cells.end()) continue;
            emds[p].push_back(metrics::emd(vec, base_it->second));
        }
        auto out = open_artifact(output_dir / "analysis" / "emd_vs_base.csv", stamp);
        out << "persona,n,mean_emd\n";
        for (const auto& [p, values] : emds) {
            out << csvio::join({p.key(), std::to_string(values.size()),
                                csvio::format_double(mean_of(values))})
                << '\n';
        }
    }

    // --- persona recall ---
    if (!affective_rows.empty()) {
        std::vector<double> cosines, rouges;
        auto sim_out = open_artifact(output_dir / "recall" / "similarity.csv", stamp);
        sim_out << "record_id,persona,cosine,rouge_l_f1\n";
        auto base_out = open_artifact(output_dir / "recall" / "base_state_recalls.txt",
                                      stamp);
        for (const auto& row : affective_rows) {
            if (row.status == "format_error") continue;
            if (row.persona.is_base()) {
                if (!row.persona_recall.empty()) base_out << row.persona_recall << '\n';
                continue;
            }
            auto clause = persona::render(row.persona);
            if (!clause || row.persona_recall.empty()) continue;
            auto sim = metrics::recall_similarity(*clause, row.persona_recall, *embedder);
            cosines.push_back(sim.cosine);
            rouges.push_back(sim.rouge_l_f1);
            sim_out << csvio::join({row.record_id, row.persona.key(),
                                    csvio::format_double(sim.cosine),
                                    csvio::format_double(sim.rouge_l_f1)})
                    << '\n';
        }
        auto summary = open_artifact(output_dir / "recall" / "summary.csv", stamp);
        summary << "model,n,cosine_mean,cosine_std,rouge_mean,rouge_std\n";
        summary << csvio::join({model_id, std::to_string(cosines.size()),
                                csvio::format_double(mean_of(cosines)),
                                csvio::format_double(stddev_of(cosines)),
                                csvio::format_double(mean_of(rouges)),
                                csvio::format_double(stddev_of(rouges))})
                << '\n';
    }

    // --- lexical statistics over generated responses ---
    if (!cognitive_rows.empty()) {
        std::map<std::string, std::vector<std::string>> responses_by_attr;
        std::vector<std::string> base_responses;
        for (const auto& row : cognitive_rows) {
            if (row.status != "ok") continue;
            if (row.persona.is_base()) {
                base_responses.push_back(row.response);
                continue;
            }
            for (persona::Category category : persona::kCategories) {
                const auto& component = row.persona.component(category);
                if (component) responses_by_attr[*component].push_back(row.response);
            }
        }

        if (!base_responses.empty()) {
            lexstats::TokenCounts base_counts =
                lexstats::TokenCounts::from_texts(base_responses);

            auto odds_out = open_artifact(output_dir / "lexstats" / "log_odds.csv", stamp);
            odds_out << "category,attribute,token,delta,z\n";
            auto tav_out = open_artifact(output_dir / "lexstats" / "tav.csv", stamp);
            tav_out << "category,attribute,ratio,n_attr,n_base,mode\n";

            lexstats::TavMode tav_mode = manifest.tav_mode == "pairwise"
                                             ? lexstats::TavMode::PairwiseVariance
                                             : lexstats::TavMode::Centroid;
            std::vector<std::vector<double>> base_embeddings;
            if (base_responses.size() >= 2) {
                base_embeddings = gateway::embed_all(base_responses, *embedder, &cache);
            }

            for (persona::Category category : persona::kCategories) {
                for (const auto& value : taxonomy.values(category)) {
                    auto it = responses_by_attr.find(value);
                    if (it == responses_by_attr.end() || it->second.empty()) continue;

                    lexstats::TokenCounts attr_counts =
                        lexstats::TokenCounts::from_texts(it->second);
                    lexstats::TokenCounts prior;
                    if (manifest.log_odds_uniform_prior) {
                        for (const auto& [token, _] :
                             lexstats::TokenCounts::merged(attr_counts, base_counts).counts) {
                            prior.add(token);
                        }
                    } else {
                        prior = lexstats::TokenCounts::merged(attr_counts, base_counts);
                    }
                    auto odds = lexstats::log_odds_dirichlet(attr_counts, base_counts,
                                                             prior, manifest.log_odds_alpha);
                    std::stable_sort(odds.begin(), odds.end(),
                                     [](const auto& a, const auto& b) {
                                         return std::abs(a.z) > std::abs(b.z);
                                     });
                    for (std::size_t i = 0;
                         i < std::min(manifest.log_odds_top_k, odds.size()); ++i) {
                        odds_out << csvio::join(
                                        {std::string(persona::category_name(category)),
                                         value, odds[i].token,
                                         csvio::format_double(odds[i].delta),
                                         csvio::format_double(odds[i].z)})
                                 << '\n';
                    }

                    if (base_embeddings.empty() || it->second.size() < 2) continue;
                    try {
                        auto attr_embeddings =
                            gateway::embed_all(it->second, *embedder, &cache);
                        double ratio =
                            lexstats::tav_ratio(attr_embeddings, base_embeddings, tav_mode);
                        tav_out << csvio::join(
                                       {std::string(persona::category_name(category)),
                                        value, csvio::format_double(ratio),
                                        std::to_string(attr_embeddings.size()),
                                        std::to_string(base_embeddings.size()),
                                        manifest.tav_mode})
                                << '\n';
                    } catch (const ComputationError& e) {
                        problems.push_back(e.what());
                    }
                }
            }
        } else {
            problems.push_back("no base-state responses; log-odds and TAV skipped");
        }
    }

    // --- reject rates per (persona, task) ---
    {
        std::map<RejectKey, RejectTally> tallies;
        for (const auto& row : affective_rows) {
            auto& tally = tallies[{row.persona.key(), "affective"}];
            ++tally.total;
            if (row.status != "ok") ++tally.rejected;
        }
        for (const auto& row : cognitive_rows) {
            auto& tally = tallies[{row.persona.key(), "cognitive"}];
            ++tally.total;
            if (row.status != "ok") ++tally.rejected;
        }
        auto out = open_artifact(output_dir / "reports" / "reject_rates.csv", stamp);
        out << "model,persona,task,total,rejected,reject_rate\n";
        for (const auto& [key, tally] : tallies) {
            double rate = tally.total == 0
                              ? 0.0
                              : static_cast<double>(tally.rejected) /
                                    static_cast<double>(tally.total);
            out << csvio::join({model_id, key.persona_key, key.task,
                                std::to_string(tally.total),
                                std::to_string(tally.rejected),
                                csvio::format_double(rate)})
                << '\n';
        }
    }

    {
        auto out = open_artifact(output_dir / "analysis" / "problems.txt", stamp);
        for (const auto& p : problems) out << p << '\n';
    }
}

// ---------------------------------------------------------------------------
// report stage
// ---------------------------------------------------------------------------

void report_stage(const std::filesystem::path& output_dir) {
    RunManifest manifest = load_stored_manifest(output_dir);
    const std::string stamp = run_stamp(manifest);
    Taxonomy taxonomy = manifest.taxonomy();

    std::vector<AteEstimate> isolation_estimates, intersection_estimates;
    std::string model;
    auto iso_path = output_dir / "analysis" / "ate_isolation.csv";
    auto inter_path = output_dir / "analysis" / "ate_intersection.csv";
    if (std::filesystem::exists(iso_path)) {
        isolation_estimates = load_estimates(iso_path, &model);
    }
    if (std::filesystem::exists(inter_path)) {
        intersection_estimates = load_estimates(inter_path, &model);
    }

    std::vector<AteEstimate> all_estimates = isolation_estimates;
    all_estimates.insert(all_estimates.end(), intersection_estimates.begin(),
                         intersection_estimates.end());
    if (!all_estimates.empty()) {
        auto rows = build_shift_rows(model, all_estimates, taxonomy);
        emit_shift_tables(rows, output_dir / "reports" / "shift_tables.txt",
                          output_dir / "reports" / "shift_tables.csv", stamp);
    }
    if (!isolation_estimates.empty() && !intersection_estimates.empty()) {
        auto summary = build_summary(isolation_estimates, intersection_estimates);
        emit_summary(summary, output_dir / "reports" / "summary.txt",
                     output_dir / "reports" / "summary.csv", stamp);
    }

    // Completion report: stage counts and the artifact inventory.
    auto out = open_artifact(output_dir / "reports" / "completion.txt", stamp);
    out << "completion report\n";
    auto count_rows = [&](const std::filesystem::path& path) -> std::size_t {
        if (!std::filesystem::exists(path)) return 0;
        auto rows = csvio::read_data_rows(path);
        return rows.empty() ? 0 : rows.size() - 1;
    };
    out << "affective results: " << count_rows(output_dir / "parsed" / "affective.csv")
        << '\n';
    out << "cognitive results: " << count_rows(output_dir / "parsed" / "cognitive.csv")
        << '\n';
    out << "epitome scores: " << count_rows(output_dir / "scores" / "epitome.csv")
        << '\n';
    out << "isolation estimates: " << isolation_estimates.size() << '\n';
    out << "intersection estimates: " << intersection_estimates.size() << '\n';

    auto problems_path = output_dir / "analysis" / "problems.txt";
    out << "problems:\n";
    if (std::filesystem::exists(problems_path)) {
        std::ifstream in(problems_path);
        std::string line;
        std::getline(in, line);  // stamp
        while (std::getline(in, line)) {
            if (!trim(line).empty()) out << "  - " << line << '\n';
        }
    }

    out << "artifacts:\n";
    std::vector<std::string> names;
    for (const auto& entry : std::filesystem::recursive_directory_iterator(output_dir)) {
        if (entry.is_regular_file()) {
            names.push_back(std::filesystem::relative(entry.path(), output_dir).string());
        }
    }
    std::sort(names.begin(), names.end());
    for (const auto& name : names) {
        if (name != "reports/completion.txt") out << "  " << name << '\n';
    }
}

}  // namespace empaudit::report
