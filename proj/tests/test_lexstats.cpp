#include <doctest.h>

#include <cmath>
#include <map>
#include <random>

#include "empaudit/errors.hpp"
#include "empaudit/lexstats.hpp"

using namespace empaudit;
using namespace empaudit::lexstats;

namespace {

TokenCounts counts_of(std::initializer_list<std::pair<const char*, std::size_t>> items) {
    TokenCounts counts;
    for (const auto& [token, n] : items) counts.add(token, n);
    return counts;
}

std::vector<std::vector<double>> random_embeddings(std::mt19937_64& rng, std::size_t n,
                                                   std::size_t width) {
    std::uniform_real_distribution<double> unit(-1.0, 1.0);
    std::vector<std::vector<double>> out(n, std::vector<double>(width));
    for (auto& e : out) {
        for (auto& x : e) x = unit(rng);
    }
    return out;
}

}  // namespace

TEST_SUITE("lexstats") {

TEST_CASE("tokenizer lowercases and splits on non-alphanumerics") {
    CHECK(tokenize("Filial piety matters.") ==
          std::vector<std::string>{"filial", "piety", "matters"});
    CHECK(tokenize("25-34") == std::vector<std::string>{"25", "34"});
    CHECK(tokenize("") == std::vector<std::string>{});
    CHECK(tokenize("...") == std::vector<std::string>{});
    CHECK(tokenize("don't stop") == std::vector<std::string>{"don", "t", "stop"});
}

TEST_CASE("token counts accumulate with a conserved total") {
    TokenCounts counts;
    counts.add_text("a a b");
    counts.add_text("b c");
    CHECK(counts.total == 5);
    CHECK(counts.count("a") == 2);
    CHECK(counts.count("b") == 2);
    CHECK(counts.count("z") == 0);
    std::size_t sum = 0;
    for (const auto& [_, n] : counts.counts) sum += n;
    CHECK(sum == counts.total);
}

TEST_CASE("log-odds hand example matches exact arithmetic") {
    // a = {x:5, other:5}, b = {x:1, other:9}, uniform prior alpha_w = 0.5
    // (alpha0 = 1): delta_x = log(5.5/5.5) - log(1.5/9.5) = log(19/3)
    auto a = counts_of({{"x", 5}, {"other", 5}});
    auto b = counts_of({{"x", 1}, {"other", 9}});
    auto prior = counts_of({{"x", 1}, {"other", 1}});
    auto results = log_odds_dirichlet(a, b, prior, 1.0);
    REQUIRE(results.size() == 2);
    const auto* x = &results[0];
    if (x->token != "x") x = &results[1];
    double expected = std::log(19.0 / 3.0);
    CHECK(std::abs(x->delta - expected) <= 1e-9);
    double expected_z = expected / std::sqrt(1.0 / 5.5 + 1.0 / 1.5);
    CHECK(std::abs(x->z - expected_z) <= 1e-12);
}

TEST_CASE("log-odds of identical corpora is zero everywhere") {
    auto a = counts_of({{"u", 3}, {"v", 7}, {"w", 2}});
    auto prior = counts_of({{"u", 1}, {"v", 1}, {"w", 1}});
    for (const auto& r : log_odds_dirichlet(a, a, prior, 3.0)) {
        CHECK(r.delta == 0.0);
        CHECK(r.z == 0.0);
    }
}

TEST_CASE("log-odds antisymmetry under corpus swap is exact") {
    std::mt19937_64 rng(606);
    for (int trial = 0; trial < 100; ++trial) {
        TokenCounts a, b;
        std::size_t vocab = 2 + rng() % 8;
        for (std::size_t v = 0; v < vocab; ++v) {
            std::string token = "t" + std::to_string(v);
            if (auto n = rng() % 9) a.add(token, n);
            if (auto n = rng() % 9) b.add(token, n);
        }
        if (a.total == 0 || b.total == 0) continue;
        auto prior = TokenCounts::merged(a, b);
        auto forward = log_odds_dirichlet(a, b, prior, 10.0);
        auto backward = log_odds_dirichlet(b, a, prior, 10.0);
        REQUIRE(forward.size() == backward.size());
        std::map<std::string, const LogOddsResult*> reverse_index;
        for (const auto& r : backward) reverse_index[r.token] = &r;
        for (const auto& r : forward) {
            const auto* other = reverse_index.at(r.token);
            CHECK(r.delta == -other->delta);
            CHECK(r.z == -other->z);
        }
    }
}

TEST_CASE("log-odds results are sorted by z descending") {
    auto a = counts_of({{"hi", 9}, {"lo", 1}, {"mid", 5}});
    auto b = counts_of({{"hi", 1}, {"lo", 9}, {"mid", 5}});
    auto prior = TokenCounts::merged(a, b);
    auto results = log_odds_dirichlet(a, b, prior, 10.0);
    for (std::size_t i = 1; i < results.size(); ++i) {
        CHECK(results[i - 1].z >= results[i].z);
    }
    CHECK(results.front().token == "hi");
    CHECK(results.back().token == "lo");
}

TEST_CASE("equalizing a token's counts pulls its delta toward zero") {
    auto prior = counts_of({{"x", 1}, {"pad", 1}});
    auto unequal = log_odds_dirichlet(counts_of({{"x", 8}, {"pad", 2}}),
                                      counts_of({{"x", 2}, {"pad", 8}}), prior, 2.0);
    auto equal = log_odds_dirichlet(counts_of({{"x", 5}, {"pad", 5}}),
                                    counts_of({{"x", 5}, {"pad", 5}}), prior, 2.0);
    auto find = [](const std::vector<LogOddsResult>& rs, const std::string& t) {
        for (const auto& r : rs) {
            if (r.token == t) return r.delta;
        }
        return 0.0;
    };
    CHECK(std::abs(find(equal, "x")) < std::abs(find(unequal, "x")));
}

TEST_CASE("log-odds error paths") {
    auto a = counts_of({{"x", 1}});
    auto b = counts_of({{"y", 1}});
    auto bad_prior = counts_of({{"x", 1}});  // no mass for y
    CHECK_THROWS_AS(log_odds_dirichlet(a, b, bad_prior, 1.0), ComputationError);
    CHECK_THROWS_AS(log_odds_dirichlet(a, b, TokenCounts::merged(a, b), 0.0), ArgumentError);
    CHECK_THROWS_AS(log_odds_dirichlet(a, b, TokenCounts{}, 1.0), ArgumentError);
}

TEST_CASE("tav ratio: coincident centers give exactly 1") {
    // attr set symmetric around c, base set with mean exactly c.
    std::vector<double> c = {1.0, -2.0, 0.5};
    auto plus = [&](std::vector<double> v) {
        for (std::size_t i = 0; i < c.size(); ++i) v[i] += c[i];
        return v;
    };
    std::vector<std::vector<double>> attr = {plus({0.3, 0.1, -0.2}), plus({-0.3, -0.1, 0.2}),
                                             plus({0.5, -0.4, 0.0}), plus({-0.5, 0.4, 0.0})};
    std::vector<std::vector<double>> base = {plus({1.0, 0.0, 0.0}), plus({-1.0, 0.0, 0.0})};
    CHECK(tav_ratio(attr, base) == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("tav ratio flags attribute-centric sets with ratio > 1") {
    std::vector<std::vector<double>> base = {{0.1, 0.0}, {-0.1, 0.0}};
    std::vector<std::vector<double>> attr = {{5.0, 1.0}, {5.2, 0.8}, {4.8, 1.2}};
    CHECK(tav_ratio(attr, base) > 1.0);
}

TEST_CASE("tav ratio degenerate variance raises") {
    std::vector<std::vector<double>> attr = {{3.0, 3.0}, {3.0, 3.0}};
    std::vector<std::vector<double>> base = {{0.0, 0.0}, {1.0, 1.0}};
    CHECK_THROWS_AS(tav_ratio(attr, base), ComputationError);
    CHECK_THROWS_AS(tav_ratio({}, base), ArgumentError);
    CHECK_THROWS_AS(tav_ratio(attr, {}), ArgumentError);
    CHECK_THROWS_AS(tav_ratio({{1.0}, {2.0, 3.0}}, base), ArgumentError);
}

TEST_CASE("tav ratio invariances") {
    std::mt19937_64 rng(7777);
    for (int trial = 0; trial < 50; ++trial) {
        auto attr = random_embeddings(rng, 3 + rng() % 5, 4);
        auto base = random_embeddings(rng, 2 + rng() % 5, 4);
        double ratio = tav_ratio(attr, base);

        // translation of ALL embeddings by a constant vector
        std::vector<double> shift = {10.0, -3.0, 0.25, 8.0};
        auto translate = [&](std::vector<std::vector<double>> set) {
            for (auto& e : set) {
                for (std::size_t i = 0; i < e.size(); ++i) e[i] += shift[i];
            }
            return set;
        };
        double translated = tav_ratio(translate(attr), translate(base));
        CHECK(std::abs(translated - ratio) <= 1e-9 * std::max(1.0, std::abs(ratio)));

        // uniform scaling of all embeddings
        auto scale = [&](std::vector<std::vector<double>> set) {
            for (auto& e : set) {
                for (auto& x : e) x *= 3.5;
            }
            return set;
        };
        double scaled = tav_ratio(scale(attr), scale(base));
        CHECK(scaled == doctest::Approx(ratio).epsilon(1e-9));
    }
}

TEST_CASE("pairwise tav mode exists and differs in general") {
    std::mt19937_64 rng(12);
    auto attr = random_embeddings(rng, 5, 3);
    auto base = random_embeddings(rng, 4, 3);
    double centroid = tav_ratio(attr, base, TavMode::Centroid);
    double pairwise = tav_ratio(attr, base, TavMode::PairwiseVariance);
    CHECK(centroid > 0.0);
    CHECK(pairwise > 0.0);
    CHECK(pairwise >= centroid);  // cross-pair spread adds the base's own variance
}

}  // TEST_SUITE
