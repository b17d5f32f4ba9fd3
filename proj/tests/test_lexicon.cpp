#include <doctest.h>

#include "empaudit/errors.hpp"
#include "empaudit/gateway.hpp"
#include "empaudit/lexicon.hpp"
#include "test_util.hpp"

using namespace empaudit;
using namespace empaudit::lex;

namespace {

const IntensityLexicon& shipped_lexicon() {
    static const IntensityLexicon lexicon = load_lexicon(
        std::filesystem::path(testutil::data_dir()) / "lexicon" /
        "nrc_intensity_sample.txt");
    return lexicon;
}

}  // namespace

TEST_SUITE("lexicon") {

TEST_CASE("shipped lexicon carries the documented reference vectors") {
    const auto& lexicon = shipped_lexicon();
    auto angry = lexicon.at("angry");
    CHECK(angry == EmotionVector::from({0.824, 0, 0.469, 0, 0, 0, 0, 0}));
    auto ashamed = lexicon.at("ashamed");
    CHECK(ashamed == EmotionVector::from({0, 0, 0.438, 0, 0, 0.719, 0, 0}));
    CHECK(lexicon.count("notaword") == 0);
}

TEST_CASE("lexicon parser validates format and ranges") {
    testutil::TempDir dir("lex");
    auto ok = dir.write("ok.txt", "word\tanger\t0.5\nword\tjoy\t0.25\n");
    auto lexicon = load_lexicon(ok);
    CHECK(lexicon.at("word")[0] == 0.5);
    CHECK(lexicon.at("word")[4] == 0.25);
    CHECK(lexicon.at("word")[7] == 0.0);  // absent emotions zero-filled

    CHECK_THROWS_AS(load_lexicon(dir.write("bad1.txt", "word\tboredom\t0.5\n")), ParseError);
    CHECK_THROWS_AS(load_lexicon(dir.write("bad2.txt", "word\tanger\t1.5\n")),
                    ValidationError);
    CHECK_THROWS_AS(load_lexicon(dir.write("bad3.txt", "word anger 0.5\n")), ParseError);
    CHECK_THROWS_AS(load_lexicon(dir.write("bad4.txt", "word\tanger\tx\n")), ParseError);
    CHECK_THROWS_AS(
        load_lexicon(dir.write("dup.txt", "word\tanger\t0.5\nword\tanger\t0.6\n")),
        ValidationError);
    // identical duplicate rows are tolerated
    CHECK(load_lexicon(dir.write("dup2.txt", "word\tanger\t0.5\nword\tanger\t0.5\n"))
              .at("word")[0] == 0.5);
    CHECK_THROWS_AS(load_lexicon(dir.file("missing.txt")), IoError);
}

TEST_CASE("intensity lookup round-trips every lexicon word") {
    const auto& lexicon = shipped_lexicon();
    for (const auto& [word, vec] : lexicon) {
        CHECK(intensity(word, lexicon) == vec);
    }
}

TEST_CASE("intensity is case-normalized and OOV-strict without fallback") {
    const auto& lexicon = shipped_lexicon();
    CHECK(intensity("Angry", lexicon) == intensity("angry", lexicon));
    CHECK(intensity("  ANGRY  ", lexicon) == intensity("angry", lexicon));
    CHECK_THROWS_AS(intensity("zzzunknown", lexicon), OovError);
    try {
        intensity("zzzunknown", lexicon);
    } catch (const OovError& e) {
        CHECK(e.word() == "zzzunknown");
    }
    CHECK_THROWS_AS(intensity("", lexicon), ArgumentError);
}

TEST_CASE("intensity prefers the lexicon over the fallback") {
    const auto& lexicon = shipped_lexicon();
    // A deliberately broken fallback: if it were consulted the lookup
    // would throw, so lexicon hits must never reach it.
    OovFallback fallback;  // null model/embedder
    CHECK(intensity("angry", lexicon, &fallback) == lexicon.at("angry"));
}

TEST_CASE("fallback predictions stay inside [0,1]^8") {
    Eigen::MatrixXd x(40, 6);
    Eigen::MatrixXd y(40, 8);
    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    for (int i = 0; i < x.rows(); ++i) {
        for (int j = 0; j < x.cols(); ++j) x(i, j) = unit(rng) * 4 - 2;
        for (int j = 0; j < y.cols(); ++j) y(i, j) = unit(rng);
    }
    OovTrainingConfig config;
    config.hidden_sizes = {16};
    config.max_epochs = 30;
    auto model = OovModel::train(x, y, config, 11);

    gateway::MockEmbeddingProvider embedder(3, 6);
    IntensityLexicon empty_lexicon = {{"known", EmotionVector{}}};
    OovFallback fallback{&model, &embedder};
    for (const char* word : {"novel", "unseen", "rare", "weird"}) {
        auto v = intensity(word, empty_lexicon, &fallback);
        for (std::size_t e = 0; e < kEmotionCount; ++e) {
            CHECK(v[e] >= 0.0);
            CHECK(v[e] <= 1.0);
        }
    }
}

TEST_CASE("distribution bins nonzero intensities at width 0.05") {
    testutil::TempDir dir("dist");
    auto path = dir.write("one.txt", "w\tanger\t0.5\n");
    auto dist = lexicon_distribution(load_lexicon(path));
    CHECK(dist.bins[0][10] == 1);  // [0.50, 0.55)
    CHECK(dist.nonzero_counts[0] == 1);
    CHECK(dist.nonzero_counts[4] == 0);

    SUBCASE("counts conserve per emotion") {
        const auto& lexicon = shipped_lexicon();
        auto full = lexicon_distribution(lexicon);
        for (std::size_t e = 0; e < kEmotionCount; ++e) {
            std::size_t total = 0;
            for (auto count : full.bins[e]) total += count;
            CHECK(total == full.nonzero_counts[e]);
        }
    }

    SUBCASE("fraction_low counts scores in (0, 0.2]") {
        auto mixed = dir.write("mixed.txt",
                               "a\tanger\t0.1\nb\tanger\t0.15\nc\tanger\t0.8\n");
        auto d = lexicon_distribution(load_lexicon(mixed));
        CHECK(d.fraction_low[0] == doctest::Approx(2.0 / 3.0));
    }

    SUBCASE("empty lexicon be an argument error") {
        CHECK_THROWS_AS(lexicon_distribution({}), ArgumentError);
    }
}

TEST_CASE("distribution is invariant under input row permutation") {
    testutil::TempDir dir("perm");
    auto a = dir.write("a.txt", "w1\tanger\t0.3\nw2\tjoy\t0.6\nw3\tanger\t0.12\n");
    auto b = dir.write("b.txt", "w3\tanger\t0.12\nw1\tanger\t0.3\nw2\tjoy\t0.6\n");
    auto da = lexicon_distribution(load_lexicon(a));
    auto db = lexicon_distribution(load_lexicon(b));
    CHECK(da.bins == db.bins);
    CHECK(da.nonzero_counts == db.nonzero_counts);
}

TEST_CASE("model serialization round-trips weights and metadata") {
    Eigen::MatrixXd x(25, 4);
    Eigen::MatrixXd y(25, 8);
    std::mt19937_64 rng(17);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    for (int i = 0; i < x.rows(); ++i) {
        for (int j = 0; j < x.cols(); ++j) x(i, j) = unit(rng);
        for (int j = 0; j < y.cols(); ++j) y(i, j) = unit(rng);
    }
    OovTrainingConfig config;
    config.hidden_sizes = {8, 4};
    config.max_epochs = 10;
    auto model = OovModel::train(x, y, config, 3);

    testutil::TempDir dir("model");
    auto path = dir.file("oov.bin");
    model.save(path);
    auto loaded = OovModel::load(path);
    CHECK(loaded.layer_sizes() == model.layer_sizes());
    CHECK(loaded.iterations() == model.iterations());

    std::vector<double> probe = {0.1, 0.9, 0.4, 0.2};
    CHECK(loaded.predict(probe) == model.predict(probe));

    CHECK_THROWS_AS(OovModel::load(dir.write("junk.bin", "not a model\n")), ParseError);
}

}  // TEST_SUITE
