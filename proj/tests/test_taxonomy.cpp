#include "fixtures.hpp"
#include "oracles.hpp"

#include "ncdkit/error.hpp"
#include "ncdkit/taxonomy.hpp"

#include <doctest.h>

#include <random>

using namespace ncdkit;

namespace {

std::vector<std::string> labels(int n)
{
    std::vector<std::string> out;
    for (int i = 0; i < n; ++i)
        out.push_back("s" + std::to_string(i));
    return out;
}

} // namespace

TEST_CASE("topology enumeration counts")
{
    CHECK(oracles::all_topologies(4).size() == 3);
    CHECK(oracles::all_topologies(5).size() == 15);
    CHECK(oracles::all_topologies(6).size() == 105);
}

TEST_CASE("random trees and mutations keep a valid topology")
{
    std::mt19937_64 rng(1);
    for (int n = 4; n <= 12; ++n) {
        UnrootedTree t = UnrootedTree::random(labels(n), rng);
        REQUIRE_NOTHROW(t.validate());
        CHECK(t.node_count() == static_cast<std::size_t>(2 * n - 2));
        for (int k = 0; k < 200; ++k) {
            t.mutate(rng);
            REQUIRE_NOTHROW(t.validate());
        }
    }
}

TEST_CASE("from_edges rejects malformed topologies")
{
    CHECK_THROWS_AS(UnrootedTree::from_edges(labels(4), {{0, 4}, {1, 4}, {2, 5}, {3, 5}}), TopologyError);
    CHECK_THROWS_AS(UnrootedTree::from_edges({"a", "a", "b", "c"}, {{0, 4}, {1, 4}, {4, 5}, {2, 5}, {3, 5}}),
                    TopologyError);
}

TEST_CASE("newick export")
{
    auto t = UnrootedTree::from_edges({"a", "b", "c", "d e"}, {{0, 4}, {1, 4}, {4, 5}, {2, 5}, {3, 5}});
    CHECK(t.to_newick() == "(a,b,(c,'d e'));");
    CHECK(newick_label("it's") == "'it''s'");
}

TEST_CASE("quartet scoring agrees with the path-disjoint oracle on every topology")
{
    std::mt19937_64 rng(2);
    for (int n = 4; n <= 6; ++n) {
        for (int rep = 0; rep < 5; ++rep) {
            DistanceMatrix m = oracles::random_matrix(n, rng);
            for (const auto& et : oracles::all_topologies(n)) {
                QuartetScore s = quartet_score(oracles::to_unrooted(et, m.labels), m);
                REQUIRE(s.raw_cost == doctest::Approx(oracles::path_disjoint_raw_cost(et, m)).epsilon(1e-12));
                REQUIRE(s.normalized == doctest::Approx(oracles::brute_normalized(et, m)).epsilon(1e-12));
                REQUIRE(s.min_cost <= s.raw_cost + 1e-12);
                REQUIRE(s.raw_cost <= s.max_cost + 1e-12);
                REQUIRE(s.normalized >= 0.0);
                REQUIRE(s.normalized <= 1.0);
            }
        }
    }
}

TEST_CASE("additive n=4 matrix: generating topology scores 1, the others less")
{
    auto topologies = oracles::all_topologies(4);
    const auto& truth = topologies[0];
    DistanceMatrix m = oracles::additive_matrix(truth, {0.3, 0.5, 0.2, 0.7, 0.4}, labels(4));
    CHECK(quartet_score(oracles::to_unrooted(truth, m.labels), m).normalized == 1.0);
    for (std::size_t k = 1; k < topologies.size(); ++k)
        CHECK(quartet_score(oracles::to_unrooted(topologies[k], m.labels), m).normalized < 1.0);
}

TEST_CASE("equal distances: degenerate score is 1 for every topology")
{
    DistanceMatrix m;
    m.labels = labels(4);
    m.values.assign(16, 0.5);
    for (int i = 0; i < 4; ++i)
        m.at(i, i) = 0.0;
    for (const auto& et : oracles::all_topologies(4)) {
        QuartetScore s = quartet_score(oracles::to_unrooted(et, m.labels), m);
        CHECK(s.raw_cost == s.min_cost);
        CHECK(s.raw_cost == s.max_cost);
        CHECK(s.normalized == 1.0);
    }
}

TEST_CASE("quartet_score label checks")
{
    std::mt19937_64 rng(4);
    DistanceMatrix m = oracles::random_matrix(5, rng);
    auto t = UnrootedTree::random({"s0", "s1", "s2", "s3", "zz"}, rng);
    CHECK_THROWS_AS(quartet_score(t, m), TopologyError);
    auto t4 = UnrootedTree::random(labels(4), rng);
    CHECK_THROWS_AS(quartet_score(t4, m), TopologyError);
}

TEST_CASE("fit_tree matches exhaustive search for small n")
{
    std::mt19937_64 rng(6);
    SearchParams params;
    params.restarts = 10;
    params.mutation_cap = 500;
    for (int n = 4; n <= 6; ++n) {
        for (int rep = 0; rep < 8; ++rep) {
            DistanceMatrix m = oracles::random_matrix(n, rng);
            params.seed = rng();
            FitResult fit = fit_tree(m, params);
            REQUIRE(fit.score.normalized >= oracles::exhaustive_best(m) - 1e-9);
        }
    }
}

TEST_CASE("fit_tree is deterministic and parallel equals serial")
{
    auto corpus = fixtures::family_corpus(3, 3, 4096, 0.03, 12);
    DistanceMatrix m = distance_matrix(corpus, CompressorKind::deflate);
    SearchParams params;
    params.restarts = 6;
    params.mutation_cap = 300;
    params.seed = 99;
    FitResult ref = fit_tree_serial(m, params);
    for (int workers : {1, 3}) {
        params.workers = workers;
        FitResult fit = fit_tree(m, params);
        CHECK(fit.tree == ref.tree);
        CHECK(fit.score.raw_cost == ref.score.raw_cost);
        CHECK(fit.restart == ref.restart);
    }
}

TEST_CASE("fit_tree separates two tight clusters")
{
    auto corpus = fixtures::family_corpus(2, 5, 20480, 0.03, 21);
    DistanceMatrix m = distance_matrix(corpus, CompressorKind::deflate);
    SearchParams params;
    params.restarts = 8;
    params.mutation_cap = 1000;
    FitResult fit = fit_tree(m, params);
    CHECK(fit.tree.has_split({"A1", "A2", "A3", "A4", "A5"}));
    CHECK(fit.tree.leaf_count() == 10);
}

TEST_CASE("fit_tree needs four leaves")
{
    std::mt19937_64 rng(1);
    DistanceMatrix m = oracles::random_matrix(3, rng);
    CHECK_THROWS_AS(fit_tree(m), TopologyError);
}

TEST_CASE("neighbor joining recovers an additive tree")
{
    auto topologies = oracles::all_topologies(6);
    std::mt19937_64 rng(8);
    std::uniform_real_distribution<double> w(0.1, 1.0);
    for (int rep = 0; rep < 10; ++rep) {
        const auto& truth = topologies[rng() % topologies.size()];
        std::vector<double> weights(truth.edges.size());
        for (auto& x : weights)
            x = w(rng);
        DistanceMatrix m = oracles::additive_matrix(truth, weights, labels(6));
        CHECK(quartet_score(neighbor_joining(m), m).normalized == doctest::Approx(1.0));
    }
}

// ---------------------------------------------------------------------------

TEST_CASE("classify: identical copy lands in its family")
{
    auto corpus = fixtures::family_corpus(2, 2, 8192, 0.02, 3);
    Sample query = corpus[2]; // B1
    query.id = "query";
    auto r = classify(query, corpus, CompressorKind::deflate);
    CHECK(r.best_match_id == "B1");
    CHECK(r.assigned_family == std::optional<std::string>("B"));
    CHECK(r.ncd_value <= 0.15);
}

TEST_CASE("classify: mutated member and random query")
{
    Bytes base = fixtures::family_base(20480, 77);
    std::vector<Sample> corpus{
        make_sample("A1", fixtures::mutate(base, 0.02, 1), "famA"),
        make_sample("A2", fixtures::mutate(base, 0.02, 2), "famA"),
        make_sample("B1", fixtures::family_base(20480, 78), "famB"),
    };
    Sample q = make_sample("q", fixtures::mutate(corpus[0].data, 0.02, 9));
    auto r = classify(q, corpus, CompressorKind::deflate);
    CHECK(r.assigned_family == std::optional<std::string>("famA"));

    Sample noise = make_sample("noise", fixtures::random_bytes(20480, 5));
    auto u = classify(noise, corpus, CompressorKind::deflate);
    CHECK_FALSE(u.assigned_family.has_value());
    CHECK(u.ncd_value >= 0.65);

    auto lenient = classify(noise, corpus, CompressorKind::deflate, 1.5);
    CHECK(lenient.assigned_family.has_value());
}

TEST_CASE("classify excludes the query by id and rejects empty corpora")
{
    std::vector<Sample> corpus{make_sample("only", Bytes(100, 'a'), "F")};
    CHECK_THROWS_AS(classify(corpus[0], corpus, CompressorKind::rle), CorpusError);
    CHECK_THROWS_AS(classify(corpus[0], {}, CompressorKind::rle), CorpusError);
}

TEST_CASE("classify ties resolve to the smallest id")
{
    Bytes data = fixtures::english_text(4096, 3);
    std::vector<Sample> corpus{make_sample("zeta", data, "Z"), make_sample("alpha", data, "A"),
                               make_sample("other", fixtures::random_bytes(4096, 1), "O")};
    Sample q = make_sample("q", fixtures::english_text(4096, 4));
    for (int i = 0; i < 3; ++i)
        CHECK(classify(q, corpus, CompressorKind::deflate).best_match_id == "alpha");
}

TEST_CASE("classify depends only on distance ordering")
{
    auto corpus = fixtures::family_corpus(3, 3, 4096, 0.03, 5);
    Sample q = make_sample("q", fixtures::mutate(corpus[4].data, 0.02, 1));
    auto base = [](const Sample& a, const Sample& b) { return ncd(a, b, CompressorKind::deflate); };
    auto plain = classify_with(q, corpus, base, 10.0);
    for (double scale : {0.01, 0.5, 3.0, 1000.0}) {
        auto scaled = classify_with(q, corpus, [&](const Sample& a, const Sample& b) { return scale * base(a, b); },
                                    10.0 * scale);
        CHECK(scaled.best_match_id == plain.best_match_id);
    }
}

TEST_CASE("leave-one-out evaluation")
{
    auto corpus = fixtures::family_corpus(3, 3, 8192, 0.03, 17);
    auto report = evaluate_classifier(corpus, CompressorKind::deflate);
    CHECK(report.total() == 9);
    CHECK(report.good_family.count == 9);
    CHECK(report.bad_family.count == 0);

    std::vector<Sample> noise;
    for (int i = 0; i < 5; ++i)
        noise.push_back(make_sample("r" + std::to_string(i), fixtures::random_bytes(8192, 50 + i),
                                    "f" + std::to_string(i)));
    auto none = evaluate_classifier(noise, CompressorKind::deflate);
    CHECK(none.no_family.count == 5);
    CHECK(none.total() == 5);

    std::vector<Sample> unlabeled{make_sample("a", Bytes(10, 1)), make_sample("b", Bytes(10, 2))};
    CHECK_THROWS_AS(evaluate_classifier(unlabeled, CompressorKind::rle), CorpusError);

    auto text = format_report_table(report);
    CHECK(text.find("good family") != std::string::npos);
    CHECK(report_to_json(report)["good_family"]["count"] == 9);
}
