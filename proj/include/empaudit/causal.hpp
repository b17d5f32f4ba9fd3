#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "empaudit/persona.hpp"
#include "empaudit/types.hpp"

namespace empaudit::causal {

using persona::Attribute;
using persona::Category;
using persona::Persona;
using persona::Taxonomy;

enum class Setting { Isolation, Intersection };
std::string_view setting_name(Setting s);

// Per-(record, persona) outcome cell: 8 affect intensities and the 3
// communication levels, either side possibly missing (failed parse or
// unscored response). Missing cells stay visible so pairwise deletion can
// be reported.
struct OutcomeCell {
    std::optional<EmotionVector> affect;
    std::optional<EpitomeScore> epitome;

    std::optional<double> dimension(std::size_t dim) const;
};

class OutcomeTable {
public:
    OutcomeTable() = default;
    explicit OutcomeTable(std::string model_id) : model_id_(std::move(model_id)) {}

    const std::string& model_id() const { return model_id_; }

    void set_affect(const std::string& record_id, const Persona& p,
                    const EmotionVector& v);
    void set_epitome(const std::string& record_id, const Persona& p,
                     const EpitomeScore& s);
    // Registers a cell whose value could not be produced (format error,
    // OOV without fallback). Keeps the cell present-but-missing.
    void mark_missing(const std::string& record_id, const Persona& p);

    const OutcomeCell* find(const std::string& record_id, const Persona& p) const;
    std::optional<double> value(const std::string& record_id, const Persona& p,
                                std::size_t dim) const;

    std::vector<std::string> record_ids() const;
    std::set<Persona> personas() const;
    std::size_t cell_count() const { return cells_.size(); }

private:
    std::string model_id_;
    std::map<std::pair<std::string, Persona>, OutcomeCell> cells_;
};

struct BootstrapConfig {
    int bootstrap_n = 2000;
    std::uint64_t seed = 0;
    double equivalence_margin = 0.005;
};

// One treatment effect tau(a) for one outcome dimension.
struct AteEstimate {
    Attribute attribute;
    std::size_t dimension = 0;  // index into kDimensionNames
    Setting setting = Setting::Isolation;
    double mean_shift = 0.0;
    std::size_t n = 0;        // paired samples used
    std::size_t skipped = 0;  // pairs dropped for missing cells
    double ci_low = 0.0;
    double ci_high = 0.0;
    double p_value = 1.0;
    bool equivalent_to_base = false;
    double equivalence_p = 1.0;
};

// All 11 outcome dimensions.
std::vector<std::size_t> all_dimensions();

// Isolation effect: mean over records of
// Y(s, a-only persona) - Y(s, base persona), per dimension. A dimension
// with zero usable pairs is an estimation error.
std::vector<AteEstimate> ate_isolation(const OutcomeTable& outcomes,
                                       const Attribute& attribute,
                                       const BootstrapConfig& config = {},
                                       const std::vector<std::size_t>& dims = all_dimensions());

// Intersection effect: for every combination K of the other two
// categories' values (including Base), pair Y(s, a, K) against
// Y(s, Base_c, K), then average with equal weight per (record, K) pair.
std::vector<AteEstimate> ate_intersection(const OutcomeTable& outcomes,
                                          const Attribute& attribute,
                                          const Taxonomy& taxonomy,
                                          const BootstrapConfig& config = {},
                                          const std::vector<std::size_t>& dims = all_dimensions());

struct SignificanceResult {
    double p_value = 1.0;
    double ci_low = 0.0;
    double ci_high = 0.0;
};

// Seeded paired bootstrap of the mean. Two-sided p: twice the fraction of
// resampled means on the opposite side of zero, clamped to [0,1]; the CI
// is the 2.5/97.5 bootstrap percentile interval. Deterministic per seed.
SignificanceResult significance(const std::vector<double>& paired_diffs,
                                int bootstrap_n, std::uint64_t seed);

struct EquivalenceResult {
    bool equivalent = false;
    double p_value = 1.0;  // max of the two one-sided p-values
};

// Two one-sided bootstrap tests (TOST) that |mean| < margin; equivalent
// iff both one-sided p-values are < 0.05.
EquivalenceResult equivalence_to_base(const std::vector<double>& paired_diffs,
                                      double margin, int bootstrap_n,
                                      std::uint64_t seed);

// Per dimension, the attribute with the largest |mean_shift| among
// estimates with p < 0.05; nullopt when no estimate is significant.
std::map<std::size_t, std::optional<Attribute>> least_aligned(
    const std::vector<AteEstimate>& estimates);

// culture -> real-world affective scores.
class BaselineTable {
public:
    static BaselineTable load(const std::filesystem::path& path);

    void set(const std::string& culture, const EmotionVector& scores);
    const std::map<std::string, EmotionVector>& rows() const { return rows_; }

private:
    std::map<std::string, EmotionVector> rows_;
};

// Spearman rank correlation with averaged tied ranks.
double spearman(const std::vector<double>& a, const std::vector<double>& b);

// Per emotion: Spearman correlation between culture mean shifts and the
// real-world baseline across shared cultures. Emotions whose baseline
// column is all-zero are skipped. Requires >= 3 shared cultures.
std::map<std::size_t, double> baseline_alignment(
    const std::vector<AteEstimate>& culture_estimates,
    const BaselineTable& baseline);

}  // namespace empaudit::causal
