#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <random>
#include <set>

#include "guardrec/cooccurrence.hpp"
#include "oracles.hpp"

using namespace guardrec;

namespace {

InteractionMatrix from_rows(const std::vector<std::vector<Index>>& rows, Index n_urls) {
    std::vector<InteractionTriplet> trips;
    for (std::size_t g = 0; g < rows.size(); ++g)
        for (Index u : rows[g])
            trips.push_back({static_cast<Index>(g), u, InteractionTriplet::kNoTimestamp});
    return InteractionMatrix(static_cast<Index>(rows.size()), n_urls, std::move(trips));
}

InteractionMatrix transposed(const InteractionMatrix& m) {
    std::vector<InteractionTriplet> trips;
    for (Index g = 0; g < m.n_guardians(); ++g)
        for (Index u : m.row(g)) trips.push_back({u, g, InteractionTriplet::kNoTimestamp});
    return InteractionMatrix(m.n_urls(), m.n_guardians(), std::move(trips));
}

}  // namespace

TEST_CASE("two guardians posting the same pair give count 2") {
    auto x = from_rows({{0, 1}, {0, 1}}, 2);
    auto c = url_cooccurrence_counts(x);
    CHECK(c.at(0, 1) == 2);
    CHECK(c.at(1, 0) == 2);
    CHECK(c.row_sums[0] == 2);
    CHECK(c.row_sums[1] == 2);
    CHECK(c.total == 4);
}

TEST_CASE("singleton rows contribute no pairs") {
    auto x = from_rows({{0}, {1}, {2}}, 3);
    auto c = url_cooccurrence_counts(x);
    CHECK(c.upper.empty());
    CHECK(c.total == 0);
}

TEST_CASE("disjoint URL sets leave counts empty") {
    auto x = from_rows({{0, 1}, {2, 3}}, 4);
    auto c = url_cooccurrence_counts(x);
    CHECK(c.at(0, 2) == 0);
    CHECK(c.at(0, 1) == 1);
    CHECK(c.at(2, 3) == 1);
}

TEST_CASE("guardian co-occurrence counts shared URLs") {
    auto x = from_rows({{0, 1}, {0, 1}}, 2);
    auto c = guardian_cooccurrence_counts(x);
    CHECK(c.at(0, 1) == 2);
}

TEST_CASE("guardian counts equal URL counts of the transpose") {
    std::mt19937_64 rng(5);
    for (int trial = 0; trial < 10; ++trial) {
        auto x = oracle::random_interactions(rng, 9, 7, 0.35);
        auto a = guardian_cooccurrence_counts(x);
        auto b = url_cooccurrence_counts(transposed(x));
        REQUIRE(a.upper.size() == b.upper.size());
        for (std::size_t i = 0; i < a.upper.size(); ++i) {
            CHECK(a.upper[i].i == b.upper[i].i);
            CHECK(a.upper[i].j == b.upper[i].j);
            CHECK(a.upper[i].count == b.upper[i].count);
        }
        CHECK(a.total == b.total);
    }
}

TEST_CASE("sppmi matches the hand-computed two-guardian example") {
    auto x = from_rows({{0, 1}, {0, 1}}, 2);
    auto c = url_cooccurrence_counts(x);
    // #(a,b)=2, #(a)=#(b)=2, |D|=4: PMI = ln(2*4/(2*2)) = ln 2
    auto s1 = sppmi(c, 1);
    REQUIRE(s1.upper.size() == 1);
    CHECK(s1.upper[0].value == doctest::Approx(std::log(2.0)).epsilon(1e-12));
    CHECK(s1.at(0, 1) == doctest::Approx(0.6931).epsilon(1e-4));
    // shift 2 cancels it: entry absent, mask empty
    auto s2 = sppmi(c, 2);
    CHECK(s2.upper.empty());
    CHECK(s2.mask_sparse().nonZeros() == 0);
}

TEST_CASE("sppmi diagonal is always absent") {
    std::mt19937_64 rng(8);
    auto x = oracle::random_interactions(rng, 10, 6, 0.5);
    auto s = sppmi(url_cooccurrence_counts(x), 1);
    for (const auto& e : s.upper) CHECK(e.i != e.j);
    auto d = s.to_sparse();
    for (Index i = 0; i < d.rows(); ++i) CHECK(d.coeff(i, i) == 0.0);
}

TEST_CASE("sppmi with no co-occurrence data errors") {
    auto x = from_rows({{0}, {1}}, 2);
    auto c = url_cooccurrence_counts(x);
    CHECK_THROWS_AS(sppmi(c, 1), Error);
    CHECK_THROWS_AS(sppmi(url_cooccurrence_counts(x), 0), Error);
}

TEST_CASE("sppmi equals the brute-force oracle on random small instances") {
    std::mt19937_64 rng(13);
    for (int trial = 0; trial < 50; ++trial) {
        Index n = 3 + static_cast<Index>(rng() % 10);  // up to 12 guardians
        Index m = 2 + static_cast<Index>(rng() % 10);
        auto x = oracle::random_interactions(rng, n, m, 0.4);
        auto counts = url_cooccurrence_counts(x);
        if (counts.total == 0) continue;
        for (int s : {1, 2, 5}) {
            auto got = sppmi(counts, s);
            std::vector<std::set<Index>> rows;
            for (Index g = 0; g < n; ++g) rows.emplace_back(x.row(g).begin(), x.row(g).end());
            auto want = oracle::bruteforce_url_sppmi(rows, m, s);
            Eigen::MatrixXd dense = Eigen::MatrixXd(got.to_sparse());
            CHECK((dense - want).cwiseAbs().maxCoeff() < 1e-12);
        }
    }
}

TEST_CASE("raising the shift never increases entries and shrinks support") {
    std::mt19937_64 rng(21);
    auto x = oracle::random_interactions(rng, 12, 8, 0.5);
    auto counts = url_cooccurrence_counts(x);
    SppmiMatrix prev = sppmi(counts, 1);
    for (int s : {2, 5, 10, 50}) {
        auto cur = sppmi(counts, s);
        CHECK(cur.upper.size() <= prev.upper.size());
        for (const auto& e : cur.upper) CHECK(e.value <= prev.at(e.i, e.j) + 1e-15);
        prev = cur;
    }
}

TEST_CASE("sppmi values are symmetric and the mask tracks the support") {
    std::mt19937_64 rng(34);
    auto x = oracle::random_interactions(rng, 10, 10, 0.4);
    auto s = sppmi(url_cooccurrence_counts(x), 2);
    auto dense = s.to_sparse();
    auto mask = s.mask_sparse();
    CHECK(dense.nonZeros() == mask.nonZeros());
    for (int k = 0; k < dense.outerSize(); ++k)
        for (Eigen::SparseMatrix<double>::InnerIterator it(dense, k); it; ++it) {
            CHECK(it.value() > 0.0);
            CHECK(dense.coeff(it.col(), it.row()) == it.value());
            CHECK(mask.coeff(it.row(), it.col()) == 1.0);
        }
}

TEST_CASE("sppmi TSV export round-trips") {
    std::mt19937_64 rng(55);
    auto x = oracle::random_interactions(rng, 8, 8, 0.5);
    auto s = sppmi(url_cooccurrence_counts(x), 1);
    auto path = (std::filesystem::temp_directory_path() / "sppmi_rt.tsv").string();
    save_sppmi_tsv(s, path);
    auto back = load_sppmi_tsv(path, s.dim, s.shift);
    REQUIRE(back.upper.size() == s.upper.size());
    for (std::size_t i = 0; i < s.upper.size(); ++i) {
        CHECK(back.upper[i].i == s.upper[i].i);
        CHECK(back.upper[i].j == s.upper[i].j);
        CHECK(back.upper[i].value == doctest::Approx(s.upper[i].value).epsilon(1e-15));
    }
}
