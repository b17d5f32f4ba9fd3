#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "empaudit/causal.hpp"
#include "empaudit/cognitive_metrics.hpp"
#include "empaudit/gateway.hpp"

namespace empaudit::report {

using causal::AteEstimate;
using causal::Setting;
using persona::Category;
using persona::Taxonomy;

enum class PersonaMode { Isolation, Intersection, Full };
std::string_view persona_mode_name(PersonaMode m);
PersonaMode persona_mode_from_name(std::string_view name);

struct ProviderConfig {
    std::string kind;  // chat/embedding: "mock"|"http"; scorer: "keyword"|"fixture"|"http"
    std::optional<std::uint64_t> seed;  // mock providers; defaults to run seed
    std::size_t width = 64;             // embedding width
    std::string base_url;
    std::string model_id;
    std::string api_key_env;  // environment variable holding the key
    std::string fixture_path; // fixture scorer
};

// Everything needed to drive one audit run. Loaded from a JSON file; see
// README for the schema.
struct RunManifest {
    std::filesystem::path corpus_path;
    std::filesystem::path lexicon_path;
    std::optional<std::filesystem::path> disclosure_path;
    std::optional<std::filesystem::path> baseline_path;
    std::optional<std::filesystem::path> taxonomy_path;
    std::optional<std::filesystem::path> oov_model_path;  // OOV fallback; absent = strict
    PersonaMode mode = PersonaMode::Isolation;
    bool run_affective = true;
    bool run_cognitive = true;
    ProviderConfig chat{.kind = "mock"};
    ProviderConfig embedding{.kind = "mock"};
    ProviderConfig scorer{.kind = "keyword"};
    std::filesystem::path cache_dir;
    std::filesystem::path output_dir;
    std::uint64_t seed = 42;
    int min_tokens = 10;
    std::size_t sample_k = 0;  // 0 = keep all records
    int parallelism = 4;
    int bootstrap_n = 2000;
    double equivalence_margin = 0.005;
    double log_odds_alpha = 10.0;
    bool log_odds_uniform_prior = false;
    std::size_t log_odds_top_k = 3;
    std::string tav_mode = "centroid";  // or "pairwise"

    static RunManifest load(const std::filesystem::path& path);
    static RunManifest from_json(const nlohmann::json& j,
                                 const std::filesystem::path& base_dir);
    nlohmann::json to_json() const;

    // All problems at once; empty when the manifest is runnable.
    std::vector<std::string> validate() const;

    // Digest over the experiment definition (paths to outputs and cache
    // excluded, seed included): two runs with different seeds never share
    // a digest, while re-running the same experiment elsewhere does.
    std::string digest() const;

    Taxonomy taxonomy() const;
};

std::unique_ptr<ChatProvider> make_chat_provider(const ProviderConfig& config,
                                                 std::uint64_t default_seed);
std::unique_ptr<EmbeddingProvider> make_embedding_provider(
    const ProviderConfig& config, std::uint64_t default_seed);
std::unique_ptr<EpitomeScorer> make_scorer(const ProviderConfig& config,
                                           const std::filesystem::path& base_dir);

// ---------------------------------------------------------------------------
// Shift tables
// ---------------------------------------------------------------------------

enum class CellMark { None, SigHigh, SigLow };

struct ShiftTableRow {
    std::string model;
    Setting setting = Setting::Isolation;
    Category category = Category::Age;
    std::string attribute;
    std::array<double, kDimensionCount> values{};
    std::array<bool, kDimensionCount> present{};
    std::array<bool, kDimensionCount> significant{};
    std::array<CellMark, kDimensionCount> marks{};
    std::array<bool, kDimensionCount> equivalent{};
};

// Groups estimates by (setting, category) and computes the per-column
// marks: among significant cells (p < 0.05) the maximum value cells get
// SigHigh and the minimum value cells SigLow; a lone significant value is
// marked by its sign. Equivalence flags pass through. Pure function of
// the estimates.
std::vector<ShiftTableRow> build_shift_rows(const std::string& model,
                                            const std::vector<AteEstimate>& estimates,
                                            const Taxonomy& taxonomy);

// Writes the human-readable table (3-decimal cells with mark suffixes)
// and the machine-readable mirror (full precision).
void emit_shift_tables(const std::vector<ShiftTableRow>& rows,
                       const std::filesystem::path& human_path,
                       const std::filesystem::path& machine_path,
                       const std::string& stamp);

// ---------------------------------------------------------------------------
// Summary table (isolation vs intersection)
// ---------------------------------------------------------------------------

// Direction of range-width change; `same` within +-5 % of the isolation
// width. UTF-8 arrows in the emitted files.
enum class Direction { Up, Down, Same };
std::string_view direction_glyph(Direction d);

Direction range_direction(double iso_width, double inter_width,
                          double rel_threshold = 0.05);
Direction value_direction(double iso_value, double inter_value,
                          double rel_threshold = 0.05);

struct SummaryRow {
    std::string family;  // e.g. "Affective Age", "Cognitive Culture"
    double iso_low = 0.0, iso_high = 0.0;
    double inter_low = 0.0, inter_high = 0.0;
    Direction direction = Direction::Same;
};

std::vector<SummaryRow> build_summary(const std::vector<AteEstimate>& isolation,
                                      const std::vector<AteEstimate>& intersection);

void emit_summary(const std::vector<SummaryRow>& rows,
                  const std::filesystem::path& human_path,
                  const std::filesystem::path& machine_path,
                  const std::string& stamp);

// ---------------------------------------------------------------------------
// Estimate table persistence
// ---------------------------------------------------------------------------

void write_estimates(const std::filesystem::path& path,
                     const std::vector<AteEstimate>& estimates,
                     const std::string& model, const std::string& stamp);
// model name out-param may be null when not needed.
std::vector<AteEstimate> load_estimates(const std::filesystem::path& path,
                                        std::string* model = nullptr);

// Appendix-table fixture: per cell the paper's shift value, whether the
// paper marks it significant-high / significant-low, and whether it is
// highlighted as equivalent to the base state.
struct FixtureCell {
    std::string model;
    Setting setting = Setting::Isolation;
    Category category = Category::Age;
    std::string attribute;
    std::size_t dimension = 0;
    double value = 0.0;
    CellMark paper_mark = CellMark::None;
    bool paper_equivalent = false;
};

std::vector<FixtureCell> load_shift_fixture(const std::filesystem::path& path);

// Fixture cells -> estimates suitable for build_shift_rows (marked cells
// become significant at p = 0.01, the rest p = 0.5).
std::vector<AteEstimate> fixture_to_estimates(const std::vector<FixtureCell>& cells,
                                              const std::string& model);

// ---------------------------------------------------------------------------
// Pipeline
// ---------------------------------------------------------------------------

struct RunReport {
    std::filesystem::path output_dir;
    std::size_t plan_size = 0;
    std::size_t completed = 0;
    std::size_t failed = 0;
    std::size_t affective_rejects = 0;
    std::size_t cognitive_rejects = 0;
    std::size_t oov_misses = 0;
    std::vector<std::string> problems;  // non-fatal issues, also in completion.txt
};

// corpus -> personas -> gateway -> parsing -> scoring -> analysis ->
// lexstats -> reports. Every artifact is stamped with the manifest digest
// and seed. Partial failures produce a completion report.
RunReport run(const RunManifest& manifest);

// Stage entry points over an existing output directory (they read the
// stored manifest copy).
void score_stage(const std::filesystem::path& output_dir);
void analyze_stage(const std::filesystem::path& output_dir);
void report_stage(const std::filesystem::path& output_dir);

}  // namespace empaudit::report
