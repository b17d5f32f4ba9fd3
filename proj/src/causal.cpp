#include "empaudit/causal.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <random>
#include <sstream>

#include "empaudit/errors.hpp"

namespace empaudit::causal {

std::string_view setting_name(Setting s) {
    return s == Setting::Isolation ? "isolation" : "intersection";
}

std::optional<double> OutcomeCell::dimension(std::size_t dim) const {
    if (dim < kEmotionCount) {
        if (!affect) return std::nullopt;
        return (*affect)[dim];
    }
    if (!epitome) return std::nullopt;
    switch (dim) {
        case kEmotionCount + 0: return static_cast<double>(epitome->er);
        case kEmotionCount + 1: return static_cast<double>(epitome->ip);
        case kEmotionCount + 2: return static_cast<double>(epitome->ex);
        default: throw ArgumentError("outcome dimension out of range");
    }
}

void OutcomeTable::set_affect(const std::string& record_id, const Persona& p,
                              const EmotionVector& v) {
    cells_[{record_id, p}].affect = v;
}

void OutcomeTable::set_epitome(const std::string& record_id, const Persona& p,
                               const EpitomeScore& s) {
    cells_[{record_id, p}].epitome = s;
}

void OutcomeTable::mark_missing(const std::string& record_id, const Persona& p) {
    cells_.try_emplace({record_id, p});
}

const OutcomeCell* OutcomeTable::find(const std::string& record_id,
                                      const Persona& p) const {
    auto it = cells_.find({record_id, p});
    return it == cells_.end() ? nullptr : &it->second;
}

std::optional<double> OutcomeTable::value(const std::string& record_id,
                                          const Persona& p, std::size_t dim) const {
    const OutcomeCell* cell = find(record_id, p);
    if (!cell) return std::nullopt;
    return cell->dimension(dim);
}

std::vector<std::string> OutcomeTable::record_ids() const {
    std::vector<std::string> ids;
    for (const auto& [key, _] : cells_) {
        if (ids.empty() || ids.back() != key.first) ids.push_back(key.first);
    }
    std::sort(ids.begin(), ids.end());
    ids.erase(std::unique(ids.begin(), ids.end()), ids.end());
    return ids;
}

std::set<Persona> OutcomeTable::personas() const {
    std::set<Persona> out;
    for (const auto& [key, _] : cells_) out.insert(key.second);
    return out;
}

namespace {

// Stable per-estimate bootstrap seed so estimates are independent of
// evaluation order.
std::uint64_t derive_seed(std::uint64_t base, const Attribute& attribute,
                          std::size_t dim, Setting setting) {
    std::uint64_t h = base ^ 0x9e3779b97f4a7c15ULL;
    auto mix = [&h](std::uint64_t v) {
        h ^= v + 0x9e3779b97f4a7c15ULL + (h << 6) + (h >> 2);
    };
    for (char c : attribute.value) mix(static_cast<std::uint64_t>(c));
    mix(static_cast<std::uint64_t>(attribute.category));
    mix(dim);
    mix(setting == Setting::Isolation ? 1 : 2);
    return h;
}

AteEstimate finish_estimate(const Attribute& attribute, std::size_t dim,
                            Setting setting, std::vector<double> diffs,
                            std::size_t skipped, const BootstrapConfig& config) {
    if (diffs.empty()) {
        throw EstimationError("no usable pairs for attribute '" + attribute.value +
                              "' dimension " + std::string(kDimensionNames[dim]));
    }
    AteEstimate est;
    est.attribute = attribute;
    est.dimension = dim;
    est.setting = setting;
    est.n = diffs.size();
    est.skipped = skipped;
    est.mean_shift = std::accumulate(diffs.begin(), diffs.end(), 0.0) /
                     static_cast<double>(diffs.size());

    std::uint64_t seed = derive_seed(config.seed, attribute, dim, setting);
    if (diffs.size() >= 2) {
        SignificanceResult sig = significance(diffs, config.bootstrap_n, seed);
        est.p_value = sig.p_value;
        est.ci_low = sig.ci_low;
        est.ci_high = sig.ci_high;
        EquivalenceResult equiv = equivalence_to_base(
            diffs, config.equivalence_margin, config.bootstrap_n, seed + 1);
        est.equivalent_to_base = equiv.equivalent;
        est.equivalence_p = equiv.p_value;
    } else {
        est.ci_low = est.ci_high = est.mean_shift;
        est.p_value = 1.0;
    }
    return est;
}

}  // namespace

std::vector<std::size_t> all_dimensions() {
    std::vector<std::size_t> dims(kDimensionCount);
    std::iota(dims.begin(), dims.end(), 0);
    return dims;
}

std::vector<AteEstimate> ate_isolation(const OutcomeTable& outcomes,
                                       const Attribute& attribute,
                                       const BootstrapConfig& config,
                                       const std::vector<std::size_t>& dims) {
    Persona treated = persona::single_attribute_persona(attribute);
    Persona base;  // all-Base

    std::vector<AteEstimate> estimates;
    for (std::size_t dim : dims) {
        std::vector<double> diffs;
        std::size_t skipped = 0;
        for (const auto& record_id : outcomes.record_ids()) {
            auto with = outcomes.value(record_id, treated, dim);
            auto without = outcomes.value(record_id, base, dim);
            if (with && without) {
                diffs.push_back(*with - *without);
            } else {
                ++skipped;
            }
        }
        estimates.push_back(finish_estimate(attribute, dim, Setting::Isolation,
                                            std::move(diffs), skipped, config));
    }
    return estimates;
}

std::vector<AteEstimate> ate_intersection(const OutcomeTable& outcomes,
                                          const Attribute& attribute,
                                          const Taxonomy& taxonomy,
                                          const BootstrapConfig& config,
                                          const std::vector<std::size_t>& dims) {
    // Combinations of the other two categories' values, Base included.
    std::vector<Category> others;
    for (Category c : persona::kCategories) {
        if (c != attribute.category) others.push_back(c);
    }
    auto values_with_base = [&](Category c) {
        std::vector<std::optional<std::string>> out;
        for (const auto& v : taxonomy.values(c)) out.emplace_back(v);
        out.emplace_back(std::nullopt);
        return out;
    };
    const auto first_values = values_with_base(others[0]);
    const auto second_values = values_with_base(others[1]);

    std::vector<AteEstimate> estimates;
    for (std::size_t dim : dims) {
        std::vector<double> diffs;
        std::size_t skipped = 0;
        std::vector<std::string> missing_examples;
        for (const auto& first : first_values) {
            for (const auto& second : second_values) {
                Persona treated;
                treated.component(attribute.category) = attribute.value;
                treated.component(others[0]) = first;
                treated.component(others[1]) = second;

                Persona control = treated;
                control.component(attribute.category) = std::nullopt;

                for (const auto& record_id : outcomes.record_ids()) {
                    auto with = outcomes.value(record_id, treated, dim);
                    auto without = outcomes.value(record_id, control, dim);
                    if (with && without) {
                        diffs.push_back(*with - *without);
                    } else {
                        ++skipped;
                        if (missing_examples.size() < 5) {
                            missing_examples.push_back(record_id + "/" + treated.key());
                        }
                    }
                }
            }
        }
        if (diffs.empty()) {
            std::string detail;
            for (const auto& m : missing_examples) detail += " " + m;
            throw EstimationError("no complete intersection pair for attribute '" +
                                  attribute.value + "' dimension " +
                                  std::string(kDimensionNames[dim]) +
                                  "; missing cells include:" + detail);
        }
        estimates.push_back(finish_estimate(attribute, dim, Setting::Intersection,
                                            std::move(diffs), skipped, config));
    }
    return estimates;
}

SignificanceResult significance(const std::vector<double>& paired_diffs,
                                int bootstrap_n, std::uint64_t seed) {
    if (paired_diffs.size() < 2) {
        throw ArgumentError("significance needs at least 2 paired diffs");
    }
    if (bootstrap_n < 1) throw ArgumentError("bootstrap_n must be >= 1");

    const std::size_t n = paired_diffs.size();
    std::mt19937_64 rng(seed);
    std::uniform_int_distribution<std::size_t> pick(0, n - 1);

    std::vector<double> means(static_cast<std::size_t>(bootstrap_n));
    std::size_t at_or_below = 0;
    std::size_t at_or_above = 0;
    for (auto& mean : means) {
        double sum = 0.0;
        for (std::size_t i = 0; i < n; ++i) sum += paired_diffs[pick(rng)];
        mean = sum / static_cast<double>(n);
        if (mean <= 0.0) ++at_or_below;
        if (mean >= 0.0) ++at_or_above;
    }

    SignificanceResult result;
    double b = static_cast<double>(bootstrap_n);
    double frac_low = static_cast<double>(at_or_below) / b;
    double frac_high = static_cast<double>(at_or_above) / b;
    result.p_value = std::clamp(2.0 * std::min(frac_low, frac_high), 0.0, 1.0);

    std::sort(means.begin(), means.end());
    auto quantile = [&](double q) {
        double pos = q * static_cast<double>(means.size() - 1);
        auto lo = static_cast<std::size_t>(std::floor(pos));
        auto hi = std::min(lo + 1, means.size() - 1);
        double frac = pos - static_cast<double>(lo);
        return means[lo] * (1.0 - frac) + means[hi] * frac;
    };
    result.ci_low = quantile(0.025);
    result.ci_high = quantile(0.975);
    return result;
}

EquivalenceResult equivalence_to_base(const std::vector<double>& paired_diffs,
                                      double margin, int bootstrap_n,
                                      std::uint64_t seed) {
    if (margin <= 0.0) throw ArgumentError("equivalence margin must be > 0");
    if (paired_diffs.empty()) throw ArgumentError("equivalence needs diffs");
    if (bootstrap_n < 1) throw ArgumentError("bootstrap_n must be >= 1");

    const std::size_t n = paired_diffs.size();
    std::mt19937_64 rng(seed);
    std::uniform_int_distribution<std::size_t> pick(0, n - 1);

    std::size_t above = 0;  // evidence against mean < +margin
    std::size_t below = 0;  // evidence against mean > -margin
    for (int b = 0; b < bootstrap_n; ++b) {
        double sum = 0.0;
        for (std::size_t i = 0; i < n; ++i) sum += paired_diffs[pick(rng)];
        double mean = sum / static_cast<double>(n);
        if (mean >= margin) ++above;
        if (mean <= -margin) ++below;
    }
    double p_upper = static_cast<double>(above) / static_cast<double>(bootstrap_n);
    double p_lower = static_cast<double>(below) / static_cast<double>(bootstrap_n);

    EquivalenceResult result;
    result.p_value = std::max(p_upper, p_lower);
    result.equivalent = p_upper < 0.05 && p_lower < 0.05;
    return result;
}

std::map<std::size_t, std::optional<Attribute>> least_aligned(
    const std::vector<AteEstimate>& estimates) {
    if (estimates.empty()) throw ArgumentError("least_aligned: no estimates");

    std::map<std::size_t, std::optional<Attribute>> winners;
    std::map<std::size_t, double> best;
    for (std::size_t dim = 0; dim < kDimensionCount; ++dim) {
        winners[dim] = std::nullopt;
    }
    for (const auto& est : estimates) {
        if (est.p_value >= 0.05) continue;
        double magnitude = std::abs(est.mean_shift);
        auto it = best.find(est.dimension);
        if (it == best.end() || magnitude > it->second) {
            best[est.dimension] = magnitude;
            winners[est.dimension] = est.attribute;
        }
    }
    return winners;
}

BaselineTable BaselineTable::load(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open baseline table: " + path.string());

    BaselineTable table;
    std::string line;
    std::size_t line_no = 0;
    bool header_seen = false;
    while (std::getline(in, line)) {
        ++line_no;
        std::string t = trim(line);
        if (t.empty() || t[0] == '#') continue;
        if (!header_seen) {  // culture,anger,...,trust
            header_seen = true;
            continue;
        }
        std::vector<std::string> fields;
        std::stringstream row(t);
        std::string field;
        while (std::getline(row, field, ',')) fields.push_back(trim(field));
        if (fields.size() != 1 + kEmotionCount) {
            throw ParseError("baseline row needs culture + 8 scores at line " +
                             std::to_string(line_no) + " of " + path.string());
        }
        std::array<double, kEmotionCount> scores{};
        for (std::size_t e = 0; e < kEmotionCount; ++e) {
            scores[e] = std::stod(fields[e + 1]);
        }
        table.set(fields[0], EmotionVector::from(scores));
    }
    if (table.rows_.empty()) {
        throw ParseError("baseline table has no rows: " + path.string());
    }
    return table;
}

void BaselineTable::set(const std::string& culture, const EmotionVector& scores) {
    rows_[culture] = scores;
}

namespace {

std::vector<double> ranks_with_ties(const std::vector<double>& values) {
    const std::size_t n = values.size();
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(),
              [&](std::size_t a, std::size_t b) { return values[a] < values[b]; });

    std::vector<double> ranks(n, 0.0);
    std::size_t i = 0;
    while (i < n) {
        std::size_t j = i;
        while (j + 1 < n && values[order[j + 1]] == values[order[i]]) ++j;
        double avg = (static_cast<double>(i) + static_cast<double>(j)) / 2.0 + 1.0;
        for (std::size_t k = i; k <= j; ++k) ranks[order[k]] = avg;
        i = j + 1;
    }
    return ranks;
}

double pearson(const std::vector<double>& a, const std::vector<double>& b) {
    const double n = static_cast<double>(a.size());
    double ma = std::accumulate(a.begin(), a.end(), 0.0) / n;
    double mb = std::accumulate(b.begin(), b.end(), 0.0) / n;
    double cov = 0.0, va = 0.0, vb = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        cov += (a[i] - ma) * (b[i] - mb);
        va += (a[i] - ma) * (a[i] - ma);
        vb += (b[i] - mb) * (b[i] - mb);
    }
    double denom = std::sqrt(va) * std::sqrt(vb);
    if (denom <= 0.0) {
        throw ComputationError("rank correlation undefined: constant input");
    }
    return cov / denom;
}

}  // namespace

double spearman(const std::vector<double>& a, const std::vector<double>& b) {
    if (a.size() != b.size()) throw ArgumentError("spearman: length mismatch");
    if (a.size() < 2) throw ArgumentError("spearman: need at least 2 points");
    return pearson(ranks_with_ties(a), ranks_with_ties(b));
}

std::map<std::size_t, double> baseline_alignment(
    const std::vector<AteEstimate>& culture_estimates,
    const BaselineTable& baseline) {
    // culture -> per-emotion mean shift
    std::map<std::string, std::array<std::optional<double>, kEmotionCount>> shifts;
    for (const auto& est : culture_estimates) {
        if (est.attribute.category != Category::Culture) continue;
        if (est.dimension >= kEmotionCount) continue;
        shifts[est.attribute.value][est.dimension] = est.mean_shift;
    }

    std::vector<std::string> shared;
    for (const auto& [culture, _] : shifts) {
        if (baseline.rows().count(culture)) shared.push_back(culture);
    }
    if (shared.size() < 3) {
        throw ArgumentError("baseline_alignment needs >= 3 shared cultures, have " +
                            std::to_string(shared.size()));
    }

    std::map<std::size_t, double> correlations;
    for (std::size_t e = 0; e < kEmotionCount; ++e) {
        bool all_zero = true;
        for (const auto& culture : shared) {
            if (baseline.rows().at(culture)[e] != 0.0) all_zero = false;
        }
        if (all_zero) continue;  // no real-world signal for this emotion

        std::vector<double> model_values, baseline_values;
        for (const auto& culture : shared) {
            const auto& shift = shifts.at(culture)[e];
            if (!shift) continue;
            model_values.push_back(*shift);
            baseline_values.push_back(baseline.rows().at(culture)[e]);
        }
        if (model_values.size() < 3) continue;
        correlations[e] = spearman(model_values, baseline_values);
    }
    return correlations;
}

}  // namespace empaudit::causal
