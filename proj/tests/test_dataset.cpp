#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <random>
#include <set>

#include "guardrec/dataset.hpp"
#include "oracles.hpp"

using namespace guardrec;
namespace fs = std::filesystem;

namespace {

fs::path temp_dir() {
    auto dir = fs::temp_directory_path() / ("guardrec_test_" + std::to_string(::getpid()));
    fs::create_directories(dir);
    return dir;
}

std::string write_file(const fs::path& p, const std::string& content) {
    std::ofstream out(p);
    out << content;
    return p.string();
}

}  // namespace

TEST_CASE("load_interactions collapses duplicates and indexes in first-appearance order") {
    auto path = write_file(temp_dir() / "x.tsv", "g1\tu1\ng2\tu2\ng1\tu1\n");
    auto m = load_interactions(path, InteractionFormat::tsv);
    CHECK(m.n_guardians() == 2);
    CHECK(m.n_urls() == 2);
    CHECK(m.nnz() == 2);
    CHECK(m.guardian_ids().id(0) == "g1");
    CHECK(m.url_ids().id(1) == "u2");
}

TEST_CASE("load_interactions reports malformed rows with line numbers") {
    auto path = write_file(temp_dir() / "bad.tsv", "g1\t\n");
    CHECK_THROWS_WITH_AS(load_interactions(path, InteractionFormat::tsv),
                         doctest::Contains(":1:"), ParseError);
    auto path2 = write_file(temp_dir() / "bad2.tsv", "g1\tu1\ng2\n");
    try {
        load_interactions(path2, InteractionFormat::tsv);
        FAIL("expected ParseError");
    } catch (const ParseError& e) {
        CHECK(e.line == 2);
    }
}

TEST_CASE("load_interactions rejects an empty file") {
    auto path = write_file(temp_dir() / "empty.tsv", "");
    CHECK_THROWS_AS(load_interactions(path, InteractionFormat::tsv), Error);
}

TEST_CASE("jsonl interactions parse with optional timestamps") {
    auto path = write_file(temp_dir() / "x.jsonl",
                           "{\"guardian\":\"a\",\"url\":\"u\",\"ts\":100}\n"
                           "{\"guardian\":\"b\",\"url\":\"v\"}\n");
    auto m = load_interactions(path, InteractionFormat::jsonl);
    CHECK(m.nnz() == 2);
    CHECK(m.has_timestamps());
    CHECK(m.row_timestamps(0)[0] == 100);
    CHECK(m.row_timestamps(1)[0] == InteractionTriplet::kNoTimestamp);
}

TEST_CASE("save/load round-trips losslessly in both formats") {
    std::mt19937_64 rng(11);
    auto m = oracle::random_interactions(rng, 8, 12, 0.3);
    // attach ids
    IdIndex gids, uids;
    for (Index g = 0; g < 8; ++g) gids.add("g" + std::to_string(g * 7));
    for (Index u = 0; u < 12; ++u) uids.add("url" + std::to_string(u));
    m = InteractionMatrix(8, 12, m.triplets(), gids, uids);

    for (auto format : {InteractionFormat::tsv, InteractionFormat::jsonl}) {
        auto path = (temp_dir() / "rt.dat").string();
        save_interactions(m, path, format);
        auto back = load_interactions(path, format);
        REQUIRE(back.nnz() == m.nnz());
        std::set<std::pair<std::string, std::string>> orig, reloaded;
        for (const auto& t : m.triplets())
            orig.insert({m.guardian_ids().id(t.guardian), m.url_ids().id(t.url)});
        for (const auto& t : back.triplets())
            reloaded.insert({back.guardian_ids().id(t.guardian), back.url_ids().id(t.url)});
        CHECK(orig == reloaded);
    }
}

TEST_CASE("filter_min_urls drops light guardians and orphaned URLs") {
    // g0: 2 urls, g1: 3 urls; url 0 only used by g0
    std::vector<InteractionTriplet> trips = {
        {0, 0, InteractionTriplet::kNoTimestamp}, {0, 1, InteractionTriplet::kNoTimestamp},
        {1, 1, InteractionTriplet::kNoTimestamp}, {1, 2, InteractionTriplet::kNoTimestamp},
        {1, 3, InteractionTriplet::kNoTimestamp}};
    InteractionMatrix m(2, 4, trips);
    auto f = filter_min_urls(m, 3);
    CHECK(f.n_guardians() == 1);
    CHECK(f.n_urls() == 3);  // url 0 dropped
    CHECK(f.nnz() == 3);
}

TEST_CASE("filter_min_urls is the identity when all guardians qualify") {
    std::mt19937_64 rng(3);
    auto m = oracle::random_interactions(rng, 10, 10, 0.5, 3);
    auto f = filter_min_urls(m, 3);
    CHECK(f == m);
}

TEST_CASE("filter_min_urls agrees with a brute-force recount and is idempotent") {
    std::mt19937_64 rng(17);
    for (int trial = 0; trial < 20; ++trial) {
        auto m = oracle::random_interactions(rng, 15, 12, 0.15);
        std::set<Index> expect_kept;
        for (Index g = 0; g < m.n_guardians(); ++g) {
            std::set<Index> distinct(m.row(g).begin(), m.row(g).end());
            if (distinct.size() >= 3) expect_kept.insert(g);
        }
        if (expect_kept.empty()) {
            CHECK_THROWS_AS(filter_min_urls(m, 3), Error);
            continue;
        }
        auto f = filter_min_urls(m, 3);
        CHECK(f.n_guardians() == static_cast<Index>(expect_kept.size()));
        auto ff = filter_min_urls(f, 3);
        CHECK(ff == f);
    }
}

TEST_CASE("filter_min_urls on an all-light matrix errors") {
    std::vector<InteractionTriplet> trips = {{0, 0, InteractionTriplet::kNoTimestamp}};
    InteractionMatrix m(1, 1, trips);
    CHECK_THROWS_AS(filter_min_urls(m, 3), Error);
}

TEST_CASE("split_per_guardian applies the documented rounding rule") {
    // 3 urls -> 2/0/1, 10 urls -> 7/1/2
    std::vector<InteractionTriplet> trips;
    for (Index u = 0; u < 3; ++u) trips.push_back({0, u, InteractionTriplet::kNoTimestamp});
    for (Index u = 0; u < 10; ++u) trips.push_back({1, u, InteractionTriplet::kNoTimestamp});
    InteractionMatrix m(2, 10, trips);
    auto split = split_per_guardian(m, SplitRatios{}, 5);
    CHECK(split.train.row(0).size() == 2);
    CHECK(split.validation.row(0).size() == 0);
    CHECK(split.test.row(0).size() == 1);
    CHECK(split.train.row(1).size() == 7);
    CHECK(split.validation.row(1).size() == 1);
    CHECK(split.test.row(1).size() == 2);
}

TEST_CASE("split_per_guardian is deterministic and partitions each row") {
    std::mt19937_64 rng(23);
    auto m = oracle::random_interactions(rng, 12, 20, 0.4, 3);
    auto a = split_per_guardian(m, SplitRatios{}, 99);
    auto b = split_per_guardian(m, SplitRatios{}, 99);
    CHECK(a.train == b.train);
    CHECK(a.validation == b.validation);
    CHECK(a.test == b.test);

    for (Index g = 0; g < m.n_guardians(); ++g) {
        std::set<Index> all(m.row(g).begin(), m.row(g).end());
        std::set<Index> merged;
        for (const auto* part : {&a.train, &a.validation, &a.test}) {
            for (Index u : part->row(g)) {
                CHECK(merged.insert(u).second);  // disjoint
                CHECK(all.count(u) == 1);
            }
        }
        CHECK(merged == all);
        CHECK(a.train.row(g).size() >= 1);
        CHECK(a.test.row(g).size() >= 1);
    }
}

TEST_CASE("split_per_guardian rejects guardians with fewer than 3 entries") {
    std::vector<InteractionTriplet> trips = {{0, 0, InteractionTriplet::kNoTimestamp},
                                             {0, 1, InteractionTriplet::kNoTimestamp}};
    InteractionMatrix m(1, 2, trips);
    CHECK_THROWS_AS(split_per_guardian(m, SplitRatios{}, 1), Error);
}

TEST_CASE("load_social_edges symmetrizes, drops self-edges and skips unknown ids") {
    IdIndex gids;
    gids.add("a");
    gids.add("b");
    gids.add("c");
    auto path = write_file(temp_dir() / "edges.tsv", "a\tb\na\ta\nz\tb\n");
    auto res = load_social_edges(path, gids);
    CHECK(res.graph.n_edges() == 1);
    CHECK(res.dropped_self == 1);
    CHECK(res.skipped_unknown == 1);
    auto s = res.graph.to_sparse();
    CHECK(s.coeff(0, 1) == 1.0);
    CHECK(s.coeff(1, 0) == 1.0);
    CHECK(s.coeff(0, 0) == 0.0);
}

TEST_CASE("a triangle has off-diagonal density 1") {
    IdIndex gids;
    gids.add("a");
    gids.add("b");
    gids.add("c");
    auto path = write_file(temp_dir() / "tri.tsv", "a\tb\nb\tc\na\tc\n");
    auto res = load_social_edges(path, gids);
    CHECK(res.graph.offdiag_density() == doctest::Approx(1.0));
}

TEST_CASE("social graph stays symmetric with zero diagonal after any load") {
    std::mt19937_64 rng(31);
    auto g = oracle::random_social(rng, 20, 0.2);
    auto s = g.to_sparse();
    for (int k = 0; k < s.outerSize(); ++k)
        for (Eigen::SparseMatrix<double>::InnerIterator it(s, k); it; ++it) {
            CHECK(it.row() != it.col());
            CHECK(s.coeff(it.col(), it.row()) == it.value());
        }
}

TEST_CASE("synthetic bundle with zero cross rate keeps interactions within blocks") {
    SyntheticConfig cfg;
    cfg.n_guardians = 30;
    cfg.n_urls = 20;
    cfg.in_block_rate = 0.6;
    cfg.cross_block_rate = 0.0;
    auto b = generate_synthetic(cfg, 7);
    for (Index g = 0; g < b.interactions.n_guardians(); ++g)
        for (Index u : b.interactions.row(g))
            CHECK(b.guardian_block[static_cast<std::size_t>(g)] ==
                  b.url_block[static_cast<std::size_t>(u)]);
}

TEST_CASE("synthetic bundle is bit-identical for a fixed seed") {
    SyntheticConfig cfg;
    cfg.n_guardians = 40;
    cfg.n_urls = 25;
    auto a = generate_synthetic(cfg, 42);
    auto b = generate_synthetic(cfg, 42);
    CHECK(a.interactions == b.interactions);
    CHECK(a.social == b.social);
    REQUIRE(a.guardian_docs.size() == b.guardian_docs.size());
    for (std::size_t i = 0; i < a.guardian_docs.size(); ++i)
        CHECK(a.guardian_docs[i].text == b.guardian_docs[i].text);
}

TEST_CASE("synthetic within-block share lands near the planted fraction") {
    SyntheticConfig cfg;
    cfg.n_guardians = 200;
    cfg.n_urls = 100;
    cfg.n_blocks = 2;
    cfg.in_block_rate = 0.5;
    cfg.cross_block_rate = 0.05;
    auto b = generate_synthetic(cfg, 123);
    // independent recount
    std::size_t within = 0, total = 0;
    for (Index g = 0; g < b.interactions.n_guardians(); ++g)
        for (Index u : b.interactions.row(g)) {
            ++total;
            if (b.guardian_block[static_cast<std::size_t>(g)] ==
                b.url_block[static_cast<std::size_t>(u)])
                ++within;
        }
    double fraction = static_cast<double>(within) / static_cast<double>(total);
    CHECK(fraction == doctest::Approx(b.planted_within_fraction).epsilon(0.05));
    CHECK(fraction == doctest::Approx(b.empirical_within_fraction).epsilon(1e-12));
}

TEST_CASE("synthetic generation validates its rates") {
    SyntheticConfig cfg;
    cfg.in_block_rate = 0.1;
    cfg.cross_block_rate = 0.2;
    CHECK_THROWS_AS(generate_synthetic(cfg, 1), Error);
}

TEST_CASE("documents round-trip through jsonl") {
    std::vector<Document> docs = {{"a", "hello world"}, {"b", "tabs\tand \"quotes\""}};
    auto path = (temp_dir() / "docs.jsonl").string();
    save_documents(docs, path);
    auto back = load_documents(path);
    REQUIRE(back.size() == 2);
    CHECK(back[1].text == docs[1].text);
}
