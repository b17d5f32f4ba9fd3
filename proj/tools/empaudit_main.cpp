#include <CLI11.hpp>

#include <fstream>
#include <iostream>

#include "empaudit/corpus.hpp"
#include "empaudit/errors.hpp"
#include "empaudit/gateway.hpp"
#include "empaudit/persona.hpp"
#include "empaudit/report.hpp"

namespace {

using namespace empaudit;

int cmd_grid(const std::string& taxonomy_path, const std::string& mode, bool render) {
    persona::Taxonomy taxonomy = taxonomy_path.empty()
                                     ? persona::Taxonomy::standard()
                                     : persona::Taxonomy::load(taxonomy_path);
    std::vector<persona::Persona> personas =
        mode == "isolation" ? persona::isolation_personas(taxonomy)
                            : persona::build_grid(taxonomy);
    for (const auto& p : personas) {
        std::cout << p.key();
        if (render) {
            auto clause = persona::render(p);
            std::cout << '\t' << (clause ? *clause : "<base state: no identity turn>");
        }
        std::cout << '\n';
    }
    std::cerr << personas.size() << " personas\n";
    return 0;
}

int cmd_sample(const std::string& corpus_path, std::size_t k, int min_tokens,
               std::uint64_t seed, std::size_t width, std::size_t start,
               const std::string& out_path) {
    auto records = corpus::ingest(corpus_path, min_tokens);
    if (k == 0 || k > records.size()) {
        throw ArgumentError("sample size must be in 1.." + std::to_string(records.size()));
    }
    std::vector<std::string> texts, labels;
    for (const auto& rec : records) {
        texts.push_back(rec.text);
        labels.push_back(rec.gold_label);
    }
    gateway::MockEmbeddingProvider embedder(seed, width);
    auto features = corpus::build_sampling_features(texts, labels, embedder);
    auto picked = corpus::kcenter_sample(features, k, start);
    std::sort(picked.begin(), picked.end());

    std::ostream* out = &std::cout;
    std::ofstream file;
    if (!out_path.empty()) {
        file.open(out_path, std::ios::binary);
        if (!file) throw IoError("cannot write " + out_path);
        out = &file;
    }
    for (std::size_t index : picked) *out << records[index].id << '\n';
    std::cerr << "selected " << picked.size() << " of " << records.size() << " records\n";
    return 0;
}

int cmd_mask(const std::string& corpus_path, const std::string& terms_path,
             const std::string& out_path, int min_tokens) {
    auto records = corpus::ingest(corpus_path, min_tokens);
    corpus::DisclosureTerms terms = terms_path.empty()
                                        ? corpus::default_disclosure_terms()
                                        : corpus::load_disclosure_terms(terms_path);
    std::size_t masked = 0;
    std::vector<corpus::ExperienceRecord> out;
    for (const auto& rec : records) {
        auto result = rec.masked ? rec : corpus::mask_self_disclosure(rec, terms);
        if (result.masked) ++masked;
        out.push_back(std::move(result));
    }
    corpus::write_records(out_path, out);
    std::cerr << masked << " of " << out.size() << " records carry [MASK]\n";
    return 0;
}

int cmd_run(const std::string& manifest_path) {
    auto manifest = report::RunManifest::load(manifest_path);
    auto result = report::run(manifest);
    std::cerr << "plan items: " << result.plan_size << ", completed: " << result.completed
              << ", failed: " << result.failed << '\n';
    std::cerr << "rejects: affective " << result.affective_rejects << ", cognitive "
              << result.cognitive_rejects << ", oov " << result.oov_misses << '\n';
    for (const auto& p : result.problems) std::cerr << "note: " << p << '\n';
    std::cout << result.output_dir.string() << '\n';
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"persona-conditioned empathy audit harness"};
    app.require_subcommand(1);

    auto* grid = app.add_subcommand("grid", "enumerate the persona grid");
    std::string grid_taxonomy, grid_mode = "full";
    bool grid_render = false;
    grid->add_option("--taxonomy", grid_taxonomy, "attribute list config file");
    grid->add_option("--mode", grid_mode, "full|isolation")
        ->check(CLI::IsMember({"full", "isolation"}));
    grid->add_flag("--render", grid_render, "also print identity clauses");

    auto* sample = app.add_subcommand("sample", "diversity-sample record ids");
    std::string sample_corpus, sample_out;
    std::size_t sample_k = 300, sample_width = 64, sample_start = 0;
    int sample_min_tokens = 10;
    std::uint64_t sample_seed = 42;
    sample->add_option("--corpus", sample_corpus, "corpus CSV (id,text,label)")->required();
    sample->add_option("--k", sample_k, "subset size")->required();
    sample->add_option("--min-tokens", sample_min_tokens, "minimum word count");
    sample->add_option("--seed", sample_seed, "embedding seed");
    sample->add_option("--width", sample_width, "embedding width");
    sample->add_option("--start", sample_start, "first selected index");
    sample->add_option("--out", sample_out, "output file (default stdout)");

    auto* mask = app.add_subcommand("mask", "mask self-disclosed emotion words");
    std::string mask_corpus, mask_terms, mask_out;
    int mask_min_tokens = 0;
    mask->add_option("--corpus", mask_corpus, "corpus CSV")->required();
    mask->add_option("--terms", mask_terms, "disclosure-term override file");
    mask->add_option("--out", mask_out, "masked corpus output")->required();
    mask->add_option("--min-tokens", mask_min_tokens, "minimum word count");

    auto* run = app.add_subcommand("run", "drive the full pipeline from a manifest");
    std::string run_manifest;
    run->add_option("--manifest", run_manifest, "manifest JSON")->required();

    auto* score = app.add_subcommand("score", "re-score responses in an output directory");
    auto* analyze = app.add_subcommand("analyze", "recompute metrics and effects");
    auto* report_cmd = app.add_subcommand("report", "re-emit tables from estimates");
    std::string score_dir, analyze_dir, report_dir;
    score->add_option("--output-dir", score_dir, "existing run output directory")->required();
    analyze->add_option("--output-dir", analyze_dir, "existing run output directory")->required();
    report_cmd->add_option("--output-dir", report_dir, "existing run output directory")->required();

    CLI11_PARSE(app, argc, argv);

    try {
        if (grid->parsed()) return cmd_grid(grid_taxonomy, grid_mode, grid_render);
        if (sample->parsed()) {
            return cmd_sample(sample_corpus, sample_k, sample_min_tokens, sample_seed,
                              sample_width, sample_start, sample_out);
        }
        if (mask->parsed()) return cmd_mask(mask_corpus, mask_terms, mask_out, mask_min_tokens);
        if (run->parsed()) return cmd_run(run_manifest);
        if (score->parsed()) {
            report::score_stage(score_dir);
            return 0;
        }
        if (analyze->parsed()) {
            report::analyze_stage(analyze_dir);
            return 0;
        }
        if (report_cmd->parsed()) {
            report::report_stage(report_dir);
            return 0;
        }
    } catch (const empaudit::Error& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "unexpected error: " << e.what() << '\n';
        return 2;
    }
    return 0;
}
