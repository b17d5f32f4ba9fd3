// Acceptance suite: runs every gate criterion at its stated tolerance and
// prints one PASS/FAIL line per criterion. Exit code = number of failures.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <iostream>
#include <random>
#include <set>
#include <sstream>

#include "../oracles.hpp"
#include "../test_util.hpp"
#include "empaudit/affect_metrics.hpp"
#include "empaudit/causal.hpp"
#include "empaudit/corpus.hpp"
#include "empaudit/errors.hpp"
#include "empaudit/gateway.hpp"
#include "empaudit/lexicon.hpp"
#include "empaudit/lexstats.hpp"
#include "empaudit/persona.hpp"
#include "empaudit/report.hpp"

using namespace empaudit;

namespace {

struct Criterion {
    int number;
    std::string name;
    std::function<void(std::string&)> body;  // throws or appends detail
};

std::filesystem::path data_path(const std::string& relative) {
    return std::filesystem::path(EMPAUDIT_DATA_DIR) / relative;
}

void require(bool condition, const std::string& message) {
    if (!condition) throw std::runtime_error(message);
}

struct SummaryFixtureRow {
    std::string label, kind, direction;
    double iso_low, iso_high, inter_low, inter_high;
};

std::vector<SummaryFixtureRow> load_summary_fixture(const std::filesystem::path& path) {
    std::ifstream in(path);
    require(static_cast<bool>(in), "cannot open " + path.string());
    std::vector<SummaryFixtureRow> rows;
    std::string line;
    std::getline(in, line);  // header
    while (std::getline(in, line)) {
        if (trim(line).empty()) continue;
        std::stringstream stream(line);
        std::vector<std::string> fields;
        std::string field;
        while (std::getline(stream, field, ',')) fields.push_back(field);
        require(fields.size() == 7, "bad summary fixture row: " + line);
        rows.push_back(SummaryFixtureRow{fields[0], fields[1], fields[6],
                                         std::stod(fields[2]), std::stod(fields[3]),
                                         std::stod(fields[4]), std::stod(fields[5])});
    }
    return rows;
}

// ---------------------------------------------------------------------------

void criterion_grid(std::string& detail) {
    auto grid = persona::build_grid();
    require(grid.size() == 315, "grid size != 315");
    require(std::set<persona::Persona>(grid.begin(), grid.end()).size() == 315,
            "grid personas not unique");
    require(persona::isolation_set(persona::Category::Age).size() == 6, "age set != 6");
    require(persona::isolation_set(persona::Category::Gender).size() == 4,
            "gender set != 4");
    require(persona::isolation_set(persona::Category::Culture).size() == 8,
            "culture set != 8");

    std::vector<corpus::ExperienceRecord> records(300);
    for (int i = 0; i < 300; ++i) {
        records[static_cast<std::size_t>(i)].id = "r" + std::to_string(i);
        records[static_cast<std::size_t>(i)].text = "placeholder text";
    }
    auto plan = gateway::build_plan(records, grid, {gateway::Task::Affective});
    require(plan.size() == 94500, "plan size != 94500");
    detail = "315 personas, 6/4/8 isolation sets, 94500-interaction plan";
}

void criterion_lexicon(std::string& detail) {
    auto lexicon = lex::load_lexicon(data_path("lexicon/nrc_intensity_sample.txt"));
    auto angry = lexicon.at("angry");
    auto expected_angry = EmotionVector::from({0.824, 0, 0.469, 0, 0, 0, 0, 0});
    require(angry == expected_angry, "'angry' vector mismatch");
    auto ashamed = lexicon.at("ashamed");
    auto expected_ashamed = EmotionVector::from({0, 0, 0.438, 0, 0, 0.719, 0, 0});
    require(ashamed == expected_ashamed, "'ashamed' vector mismatch");
    detail = "angry=[0.824,0,0.469,...], ashamed=[0,0,0.438,0,0,0.719,...] exact";
}

void criterion_ate_oracle(std::string& detail) {
    using causal::Category;
    const persona::Taxonomy taxonomy({"A1", "A2", "A3"}, {"G1", "G2"},
                                     {"C1", "C2", "C3"});
    const std::array<int, 3> sizes = {3, 2, 3};
    std::mt19937_64 rng(471100);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    causal::BootstrapConfig config;
    config.bootstrap_n = 20;

    int tables = 0, comparisons = 0;
    double worst = 0.0;
    while (tables < 200) {
        ++tables;
        int record_count = 2 + static_cast<int>(rng() % 9);  // <= 10 records
        causal::OutcomeTable table("m");
        oracles::SyntheticTable affect_oracle, epitome_oracle;
        for (int record = 0; record < record_count; ++record) {
            std::string id = "r" + std::to_string(record);
            for (int a = 0; a <= sizes[0]; ++a) {
                for (int g = 0; g <= sizes[1]; ++g) {
                    for (int c = 0; c <= sizes[2]; ++c) {
                        persona::Persona p;
                        if (a > 0) p.age = taxonomy.values(Category::Age)[static_cast<std::size_t>(a - 1)];
                        if (g > 0) p.gender = taxonomy.values(Category::Gender)[static_cast<std::size_t>(g - 1)];
                        if (c > 0) p.culture = taxonomy.values(Category::Culture)[static_cast<std::size_t>(c - 1)];
                        std::array<int, 4> key{record, a, g, c};
                        if (unit(rng) < 0.8) {
                            double v = unit(rng);
                            std::array<double, kEmotionCount> values{};
                            values[0] = v;
                            table.set_affect(id, p, EmotionVector::from(values));
                            affect_oracle[key] = v;
                        }
                        if (unit(rng) < 0.8) {
                            int level = static_cast<int>(rng() % 3);
                            table.set_epitome(id, p, EpitomeScore{level, 0, 0});
                            epitome_oracle[key] = level;
                        }
                    }
                }
            }
        }
        for (Category category : persona::kCategories) {
            int cat = category == Category::Age ? 0 : category == Category::Gender ? 1 : 2;
            const auto& values = taxonomy.values(category);
            for (std::size_t vi = 0; vi < values.size(); ++vi) {
                causal::Attribute attribute{category, values[vi]};
                for (std::size_t dim : {std::size_t{0}, std::size_t{8}}) {
                    const auto& oracle =
                        dim == 0 ? affect_oracle : epitome_oracle;
                    auto expect_iso = oracles::synthetic_isolation(
                        oracle, cat, static_cast<int>(vi) + 1, record_count);
                    if (expect_iso) {
                        auto est = causal::ate_isolation(table, attribute, config, {dim});
                        worst = std::max(worst, std::abs(est[0].mean_shift - *expect_iso));
                        ++comparisons;
                    }
                    auto expect_inter = oracles::synthetic_intersection(
                        oracle, cat, static_cast<int>(vi) + 1, record_count, sizes);
                    if (expect_inter) {
                        auto est = causal::ate_intersection(table, attribute, taxonomy,
                                                            config, {dim});
                        worst = std::max(worst,
                                         std::abs(est[0].mean_shift - *expect_inter));
                        ++comparisons;
                    }
                }
            }
        }
    }
    require(worst <= 1e-9, "estimator deviates from enumeration oracle by " +
                               std::to_string(worst));
    std::ostringstream out;
    out << tables << " tables, " << comparisons << " comparisons, max |error| "
        << worst;
    detail = out.str();
}

void criterion_fixture_reproduction(std::string& detail) {
    using report::CellMark;
    auto cells = report::load_shift_fixture(data_path("fixtures/paper_shift_tables.csv"));
    require(cells.size() == 1584, "fixture cell count");

    std::set<std::string> models;
    for (const auto& cell : cells) models.insert(cell.model);

    // Per column: the set of extreme-marked cells must match the source
    // tables. Mark polarity is compared separately because the source
    // tables carry a handful of swapped-color cells (e.g. a column whose
    // "highest positive" mark sits below its "highest negative" one);
    // polarity is still enforced on the named anchor cells below.
    int columns = 0, matched_cells = 0, matched_polarity = 0;
    for (const auto& model : models) {
        auto estimates = report::fixture_to_estimates(cells, model);
        auto rows = report::build_shift_rows(model, estimates,
                                             persona::Taxonomy::standard());
        for (causal::Setting setting :
             {causal::Setting::Isolation, causal::Setting::Intersection}) {
            for (persona::Category category : persona::kCategories) {
                for (std::size_t dim = 0; dim < kDimensionCount; ++dim) {
                    std::set<std::string> paper_high, paper_low, mine_high, mine_low;
                    for (const auto& cell : cells) {
                        if (cell.model != model || cell.setting != setting ||
                            cell.category != category || cell.dimension != dim) {
                            continue;
                        }
                        if (cell.paper_mark == CellMark::SigHigh) paper_high.insert(cell.attribute);
                        if (cell.paper_mark == CellMark::SigLow) paper_low.insert(cell.attribute);
                    }
                    for (const auto& row : rows) {
                        if (row.setting != setting || row.category != category) continue;
                        if (row.marks[dim] == CellMark::SigHigh) mine_high.insert(row.attribute);
                        if (row.marks[dim] == CellMark::SigLow) mine_low.insert(row.attribute);
                    }
                    ++columns;
                    std::set<std::string> paper_all = paper_high, mine_all = mine_high;
                    paper_all.insert(paper_low.begin(), paper_low.end());
                    mine_all.insert(mine_low.begin(), mine_low.end());
                    if (paper_all == mine_all) ++matched_cells;
                    if (paper_high == mine_high && paper_low == mine_low) ++matched_polarity;
                }
            }
        }
    }
    double rate = static_cast<double>(matched_cells) / static_cast<double>(columns);
    require(rate >= 0.95, "extreme-cell mark reproduction below 95%: " +
                              std::to_string(rate));

    // Named anchors, with polarity: Confucian is the most-negative
    // significant anger cell in the culture tables for the first model.
    {
        auto estimates = report::fixture_to_estimates(cells, "llama-3-70b");
        auto rows = report::build_shift_rows("llama-3-70b", estimates,
                                             persona::Taxonomy::standard());
        bool iso_anchor = false, inter_anchor = false;
        for (const auto& row : rows) {
            if (row.category != persona::Category::Culture || row.attribute != "Confucian") continue;
            if (row.setting == causal::Setting::Isolation &&
                row.marks[0] == CellMark::SigLow && row.values[0] == -0.035) {
                iso_anchor = true;
            }
            if (row.setting == causal::Setting::Intersection &&
                row.marks[0] == CellMark::SigLow && row.values[0] == -0.041) {
                inter_anchor = true;
            }
        }
        require(iso_anchor, "Confucian anger not most-negative in culture isolation");
        require(inter_anchor, "Confucian anger not most-negative in culture intersection");
    }

    // Table-3 summary fixture: re-derive every direction glyph.
    auto summary_rows = load_summary_fixture(data_path("fixtures/paper_summary.csv"));
    int summary_total = 0, summary_matched = 0;
    bool confucian_down = false;
    for (const auto& row : summary_rows) {
        report::Direction direction;
        if (row.kind == "range") {
            direction = report::range_direction(row.iso_high - row.iso_low,
                                                row.inter_high - row.inter_low);
        } else {
            direction = report::value_direction(row.iso_low, row.inter_low);
        }
        ++summary_total;
        std::string glyph = direction == report::Direction::Up     ? "up"
                            : direction == report::Direction::Down ? "down"
                                                                   : "same";
        if (glyph == row.direction) ++summary_matched;
        if (row.label == "Confucian Anger") {
            confucian_down = direction == report::Direction::Down;
        }
    }
    require(summary_total == 11, "summary fixture row count");
    require(summary_matched >= 11, "summary glyph mismatch: " +
                                       std::to_string(summary_matched) + "/11");
    require(confucian_down, "Confucian -0.035 -> -0.041 not rendered as down");

    std::ostringstream out;
    out << matched_cells << "/" << columns << " columns by marked-cell set ("
        << 100.0 * rate << "%), " << matched_polarity
        << " also polarity-exact; anchors ok; " << summary_matched
        << "/11 summary glyphs";
    detail = out.str();
}

void criterion_emd(std::string& detail) {
    std::mt19937_64 rng(9090);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    auto random_vector = [&]() {
        std::array<double, kEmotionCount> values{};
        for (auto& v : values) v = unit(rng);
        return EmotionVector::from(values);
    };
    auto normalized = [](const EmotionVector& v) {
        std::array<double, 8> out{};
        double sum = v.sum();
        for (std::size_t i = 0; i < 8; ++i) out[i] = sum > 0 ? v[i] / sum : 0.125;
        return out;
    };

    double worst = 0.0;
    for (int pair = 0; pair < 1000; ++pair) {
        auto a = random_vector();
        auto b = random_vector();
        double oracle = oracles::emd_transport(normalized(a), normalized(b));
        worst = std::max(worst, std::abs(metrics::emd(a, b) - oracle));
    }
    require(worst <= 1e-9, "emd deviates from transportation oracle by " +
                               std::to_string(worst));

    for (int triple = 0; triple < 1000; ++triple) {
        auto a = random_vector();
        auto b = random_vector();
        auto c = random_vector();
        double ab = metrics::emd(a, b);
        require(ab >= 0.0, "emd negative");
        require(std::abs(ab - metrics::emd(b, a)) <= 1e-12, "emd asymmetric");
        require(metrics::emd(a, a) == 0.0, "emd(a,a) != 0");
        require(ab <= metrics::emd(a, c) + metrics::emd(c, b) + 1e-12,
                "triangle inequality violated");
    }
    std::ostringstream out;
    out << "1000 oracle pairs (max |error| " << worst << "), 1000 axiom triples";
    detail = out.str();
}

void criterion_log_odds(std::string& detail) {
    using lexstats::TokenCounts;
    TokenCounts a, b, prior;
    a.add("x", 5);
    a.add("other", 5);
    b.add("x", 1);
    b.add("other", 9);
    prior.add("x", 1);
    prior.add("other", 1);
    auto results = lexstats::log_odds_dirichlet(a, b, prior, 1.0);
    double delta_x = 0;
    for (const auto& r : results) {
        if (r.token == "x") delta_x = r.delta;
    }
    double expected = std::log(19.0 / 3.0);
    require(std::abs(delta_x - expected) <= 1e-9, "hand example deviates");

    std::mt19937_64 rng(33);
    for (int trial = 0; trial < 100; ++trial) {
        TokenCounts ca, cb;
        std::size_t vocab = 2 + rng() % 10;
        for (std::size_t v = 0; v < vocab; ++v) {
            std::string token = "t" + std::to_string(v);
            if (auto n = rng() % 7) ca.add(token, n);
            if (auto n = rng() % 7) cb.add(token, n);
        }
        if (ca.total == 0 || cb.total == 0) continue;
        auto p = TokenCounts::merged(ca, cb);
        auto forward = lexstats::log_odds_dirichlet(ca, cb, p, 10.0);
        auto backward = lexstats::log_odds_dirichlet(cb, ca, p, 10.0);
        std::map<std::string, double> reverse_delta, reverse_z;
        for (const auto& r : backward) {
            reverse_delta[r.token] = r.delta;
            reverse_z[r.token] = r.z;
        }
        for (const auto& r : forward) {
            require(r.delta == -reverse_delta.at(r.token), "delta antisymmetry broken");
            require(r.z == -reverse_z.at(r.token), "z antisymmetry broken");
        }
    }
    std::ostringstream out;
    out << "hand delta " << delta_x << " vs " << expected
        << "; antisymmetry exact on 100 corpora";
    detail = out.str();
}

void criterion_statistics(std::string& detail) {
    std::vector<double> probe = {0.4, -0.1, 0.3, 0.2, -0.05, 0.15, 0.25, 0.1};
    auto a = causal::significance(probe, 5000, 77);
    auto b = causal::significance(probe, 5000, 77);
    require(a.p_value == b.p_value && a.ci_low == b.ci_low && a.ci_high == b.ci_high,
            "significance not deterministic per seed");

    std::mt19937_64 rng(20250811);
    std::normal_distribution<double> noise(0.0, 1.0);
    int within = 0;
    const int cases = 100;
    double worst = 0.0;
    for (int t = 0; t < cases; ++t) {
        const std::size_t n = 12;  // largest size the exact oracle allows
        double shift = 0.3 * static_cast<double>(rng() % 8);
        std::vector<double> diffs(n);
        for (auto& d : diffs) d = noise(rng) + shift;
        double boot =
            causal::significance(diffs, 20000, 5000 + static_cast<std::uint64_t>(t)).p_value;
        double exact = oracles::permutation_p(diffs);
        double gap = std::abs(boot - exact);
        worst = std::max(worst, gap);
        if (gap <= 0.05) ++within;
    }
    require(within >= 95, "bootstrap/permutation agreement " + std::to_string(within) +
                              "/100 below 95");
    std::ostringstream out;
    out << "deterministic per seed; " << within << "/100 within 0.05 of exact "
        << "permutation (max gap " << worst << ")";
    detail = out.str();
}

void criterion_rouge(std::string& detail) {
    require(metrics::rouge_l_f1("the cat sat", "the cat") == 0.8,
            "reference F1 not exactly 0.8");
    std::mt19937_64 rng(606);
    for (int t = 0; t < 100; ++t) {
        std::string s;
        int words = 1 + static_cast<int>(rng() % 12);
        for (int w = 0; w < words; ++w) s += "tok" + std::to_string(rng() % 30) + " ";
        require(metrics::rouge_l_f1(s, s) == 1.0, "self-similarity != 1");
    }
    detail = "F1('the cat sat','the cat') = 0.8 exact; 100 self-similarity checks";
}

void criterion_end_to_end(std::string& detail) {
    testutil::TempDir dir("acceptance_e2e");
    report::RunManifest manifest;
    manifest.corpus_path = data_path("corpus/sample_experiences.csv");
    manifest.lexicon_path = data_path("lexicon/nrc_intensity_sample.txt");
    manifest.baseline_path = data_path("baselines/real_world_affective.csv");
    manifest.mode = report::PersonaMode::Isolation;
    manifest.cache_dir = dir.file("cache");
    manifest.output_dir = dir.file("out");
    manifest.seed = 20250811;
    manifest.sample_k = 5;  // 5 records x 19 isolation personas x 2 tasks
    manifest.parallelism = 2;
    manifest.bootstrap_n = 300;

    auto first = report::run(manifest);
    require(first.plan_size == 5 * 19 * 2, "plan size != 190");
    require(first.failed == 0, "mock run had failures");

    const char* expected_artifacts[] = {
        "corpus/records.csv",       "corpus/masked.csv",
        "corpus/sampled_ids.txt",   "corpus/stats.csv",
        "runs/affective.jsonl",     "runs/cognitive.jsonl",
        "parsed/affective.csv",     "parsed/cognitive.csv",
        "scores/epitome.csv",       "scores/epitome.tsv",
        "analysis/outcomes.csv",    "analysis/ate_isolation.csv",
        "analysis/least_aligned.csv","analysis/baseline_alignment.csv",
        "analysis/accuracy.csv",    "analysis/emd_vs_base.csv",
        "recall/similarity.csv",    "recall/summary.csv",
        "lexstats/log_odds.csv",    "lexstats/tav.csv",
        "reports/shift_tables.txt", "reports/shift_tables.csv",
        "reports/reject_rates.csv", "reports/completion.txt",
    };
    for (const char* name : expected_artifacts) {
        require(std::filesystem::exists(manifest.output_dir / name),
                std::string("missing artifact: ") + name);
    }

    // Snapshot, rerun against the warm cache, byte-compare.
    std::map<std::string, std::string> snapshot;
    for (const auto& entry :
         std::filesystem::recursive_directory_iterator(manifest.output_dir)) {
        if (entry.is_regular_file()) {
            snapshot[entry.path().string()] = testutil::slurp(entry.path());
        }
    }
    report::run(manifest);
    std::size_t compared = 0;
    for (const auto& [path, content] : snapshot) {
        require(testutil::slurp(path) == content,
                "artifact changed on warm-cache rerun: " + path);
        ++compared;
    }
    std::ostringstream out;
    out << "190-item mock run, " << compared << " artifacts byte-identical on rerun";
    detail = out.str();
}

void criterion_oov(std::string& detail) {
    const std::size_t n = 2400, width = 16;
    std::mt19937_64 rng(424242);
    std::uniform_real_distribution<double> unit(-1.0, 1.0);
    Eigen::MatrixXd map(width, kEmotionCount);
    for (int i = 0; i < map.rows(); ++i) {
        for (int j = 0; j < map.cols(); ++j) map(i, j) = unit(rng) * 0.4;
    }
    Eigen::MatrixXd x(n, width);
    for (int i = 0; i < x.rows(); ++i) {
        for (int j = 0; j < x.cols(); ++j) x(i, j) = unit(rng);
    }
    Eigen::MatrixXd y = x * map;
    double lo = y.minCoeff(), hi = y.maxCoeff();
    y = ((y.array() - lo) / (hi - lo)) * 0.8 + 0.1;  // inside [0.1, 0.9]

    // 90/10 split with the standard layer sizes (512, 256, 128).
    const auto train_n = static_cast<Eigen::Index>(n * 9 / 10);
    lex::OovTrainingConfig config;
    config.max_epochs = 400;
    config.tol = 1e-8;
    lex::RegressionMetrics metrics;
    auto model = lex::OovModel::train(x.topRows(train_n), y.topRows(train_n), config,
                                      424242, &metrics);

    Eigen::MatrixXd hold_x = x.bottomRows(static_cast<Eigen::Index>(n) - train_n);
    Eigen::MatrixXd hold_y = y.bottomRows(static_cast<Eigen::Index>(n) - train_n);
    Eigen::MatrixXd pred = model.predict_matrix(hold_x);
    double min_r2 = 1.0;
    for (std::size_t e = 0; e < kEmotionCount; ++e) {
        auto col = static_cast<Eigen::Index>(e);
        double mean = hold_y.col(col).mean();
        double ss_tot = (hold_y.col(col).array() - mean).square().sum();
        double ss_res = (pred.col(col) - hold_y.col(col)).squaredNorm();
        min_r2 = std::min(min_r2, 1.0 - ss_res / ss_tot);
    }
    require(min_r2 > 0.9, "held-out R^2 per emotion " + std::to_string(min_r2));

    // Clamping invariant on wild inputs.
    std::uniform_real_distribution<double> wild(-30.0, 30.0);
    for (int t = 0; t < 200; ++t) {
        std::vector<double> probe(width);
        for (auto& v : probe) v = wild(rng);
        auto out = model.predict(probe);
        for (std::size_t e = 0; e < kEmotionCount; ++e) {
            require(out[e] >= 0.0 && out[e] <= 1.0, "prediction escaped [0,1]");
        }
    }
    std::ostringstream out;
    out << "held-out R^2 >= " << min_r2 << " per emotion after " << metrics.epochs_run
        << " epochs; outputs clamped";
    detail = out.str();
}

void criterion_tav(std::string& detail) {
    std::mt19937_64 rng(5150);
    std::uniform_real_distribution<double> unit(-1.0, 1.0);
    auto random_set = [&](std::size_t n, std::size_t width) {
        std::vector<std::vector<double>> out(n, std::vector<double>(width));
        for (auto& e : out) {
            for (auto& v : e) v = unit(rng);
        }
        return out;
    };

    double worst = 0.0;
    for (int trial = 0; trial < 100; ++trial) {
        std::size_t width = 3 + rng() % 5;
        auto attr = random_set(3 + rng() % 6, width);
        auto base = random_set(2 + rng() % 6, width);
        double ratio = lexstats::tav_ratio(attr, base);

        std::vector<double> shift(width);
        for (auto& v : shift) v = unit(rng) * 20.0;
        auto translate = [&](std::vector<std::vector<double>> set) {
            for (auto& e : set) {
                for (std::size_t i = 0; i < e.size(); ++i) e[i] += shift[i];
            }
            return set;
        };
        double translated = lexstats::tav_ratio(translate(attr), translate(base));
        worst = std::max(worst, std::abs(translated - ratio));
    }
    require(worst <= 1e-9, "translation invariance violated by " + std::to_string(worst));

    // Coincident centers: attr symmetric around c, base mean exactly c.
    std::vector<double> center = {2.0, -1.0, 0.5};
    auto place = [&](std::vector<double> offset) {
        for (std::size_t i = 0; i < center.size(); ++i) offset[i] += center[i];
        return offset;
    };
    std::vector<std::vector<double>> attr = {place({0.4, 0.1, -0.3}), place({-0.4, -0.1, 0.3}),
                                             place({0.2, -0.5, 0.1}), place({-0.2, 0.5, -0.1})};
    std::vector<std::vector<double>> base = {place({1.5, 0.0, 0.0}), place({-1.5, 0.0, 0.0})};
    double coincident = lexstats::tav_ratio(attr, base);
    require(std::abs(coincident - 1.0) <= 1e-9,
            "coincident-centers ratio " + std::to_string(coincident));
    std::ostringstream out;
    out << "translation max |delta| " << worst << "; coincident-centers ratio "
        << coincident;
    detail = out.str();
}

}  // namespace

int main() {
    std::vector<Criterion> criteria = {
        {1, "grid cardinality and plan arithmetic", criterion_grid},
        {2, "lexicon fidelity (reference vectors byte-exact)", criterion_lexicon},
        {3, "ATE oracle equivalence on 200 random tables", criterion_ate_oracle},
        {4, "fixture reproduction of shift-table marks and summary glyphs",
         criterion_fixture_reproduction},
        {5, "EMD vs transportation oracle + metric axioms", criterion_emd},
        {6, "log-odds exact arithmetic and antisymmetry", criterion_log_odds},
        {7, "statistics determinism and permutation calibration", criterion_statistics},
        {8, "ROUGE-L reference value and self-similarity", criterion_rouge},
        {9, "end-to-end mock run with byte-identical warm rerun", criterion_end_to_end},
        {10, "OOV regressor sanity on planted linear map", criterion_oov},
        {11, "TAV invariances", criterion_tav},
    };

    int failures = 0;
    for (auto& criterion : criteria) {
        auto start = std::chrono::steady_clock::now();
        std::string detail;
        bool passed = true;
        std::string error;
        try {
            criterion.body(detail);
        } catch (const std::exception& e) {
            passed = false;
            error = e.what();
        }
        auto ms = std::chrono::duration_cast<std::chrono::milliseconds>(
                      std::chrono::steady_clock::now() - start)
                      .count();
        std::printf("%s criterion %2d: %s [%lld ms]%s%s\n", passed ? "PASS" : "FAIL",
                    criterion.number, criterion.name.c_str(),
                    static_cast<long long>(ms),
                    (passed ? (detail.empty() ? "" : " -- ") : " -- "),
                    passed ? detail.c_str() : error.c_str());
        if (!passed) ++failures;
    }
    if (failures) std::printf("%d criterion(s) FAILED\n", failures);
    else std::printf("all %zu criteria passed\n", criteria.size());
    return failures;
}
