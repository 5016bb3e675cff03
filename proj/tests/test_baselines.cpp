#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <random>
#include <set>

#include "guardrec/baselines.hpp"
#include "guardrec/metrics.hpp"
#include "oracles.hpp"

using namespace guardrec;

TEST_CASE("fit_basic_mf equals the joint model with every flag off, bitwise") {
    std::mt19937_64 rng(1);
    auto x = oracle::random_interactions(rng, 10, 8, 0.4);
    auto [basic, tb] = fit_basic_mf(x, 1e-5, 4, 0.001, 60, 17);
    ModelInputs in;
    in.interactions = &x;
    Hyperparams h;
    h.latent_dim = 4;
    h.lambda = 1e-5;
    h.eta = 0.001;
    h.max_iters = 60;
    h.flags = VariantFlags::none();
    auto [joint, tj] = fit(in, h, 17);
    CHECK(basic.U == joint.U);
    CHECK(basic.V == joint.V);
    CHECK(tb.loss_history == tj.loss_history);
}

TEST_CASE("a huge lambda shrinks the factors below their initialization") {
    std::mt19937_64 rng(2);
    auto x = oracle::random_interactions(rng, 12, 10, 0.4);
    auto init = init_params(12, 10, 4, 5);
    auto [p, trace] = fit_basic_mf(x, 1e3, 4, 1e-4, 200, 5);
    CHECK(p.U.norm() < init.U.norm());
    CHECK(p.V.norm() < init.V.norm());
}

TEST_CASE("rank-1 structure is recovered with a single latent dimension") {
    // every observed entry is 1, so u_i * v_j = 1 is attainable at D = 1
    std::mt19937_64 rng(3);
    auto x = oracle::random_interactions(rng, 20, 10, 0.3);
    auto [p, trace] = fit_basic_mf(x, 0.0, 1, 0.02, 3000, 9, 1e-12);
    double se = 0.0;
    std::size_t n = 0;
    for (Index g = 0; g < x.n_guardians(); ++g)
        for (Index u : x.row(g)) {
            double r = 1.0 - p.U.row(g).dot(p.V.col(u));
            se += r * r;
            ++n;
        }
    CHECK(std::sqrt(se / static_cast<double>(n)) < 0.05);
}

TEST_CASE("BPR with zero epochs returns the initialization") {
    std::mt19937_64 rng(4);
    auto x = oracle::random_interactions(rng, 8, 6, 0.4);
    BprHyper h;
    h.latent_dim = 3;
    h.epochs = 0;
    auto p = fit_bprmf(x, h, 21);
    auto init = init_params(8, 6, 3, 21);
    CHECK(p.U == init.U);
    CHECK(p.V == init.V);
}

TEST_CASE("BPR is deterministic under a fixed seed") {
    std::mt19937_64 rng(5);
    auto x = oracle::random_interactions(rng, 10, 8, 0.35);
    BprHyper h;
    h.latent_dim = 4;
    h.epochs = 5;
    auto a = fit_bprmf(x, h, 33);
    auto b = fit_bprmf(x, h, 33);
    CHECK(a.U == b.U);
    CHECK(a.V == b.V);
}

TEST_CASE("a single BPR step widens the sampled preference gap") {
    // one guardian, one positive: epochs=1 performs exactly one update on
    // the triple (g0, u0, u1)
    std::vector<InteractionTriplet> trips = {{0, 0, InteractionTriplet::kNoTimestamp}};
    InteractionMatrix x(1, 2, trips);
    BprHyper h;
    h.latent_dim = 3;
    h.epochs = 1;
    h.lambda = 0.0;
    for (std::uint64_t seed : {1ull, 2ull, 3ull, 4ull, 5ull}) {
        auto init = init_params(1, 2, 3, seed);
        double before = init.U.row(0).dot(init.V.col(0) - init.V.col(1));
        auto p = fit_bprmf(x, h, seed);
        double after = p.U.row(0).dot(p.V.col(0) - p.V.col(1));
        CHECK(after > before);
    }
}

TEST_CASE("BPR separates the blocks of a synthetic dataset (held-out AUC > 0.5)") {
    SyntheticConfig cfg;
    cfg.n_guardians = 60;
    cfg.n_urls = 40;
    cfg.in_block_rate = 0.45;
    cfg.cross_block_rate = 0.03;
    auto bundle = generate_synthetic(cfg, 11);
    auto split = split_per_guardian(bundle.interactions, SplitRatios{}, 2);
    BprHyper h;
    h.latent_dim = 8;
    h.epochs = 60;
    auto p = fit_bprmf(split.train, h, 7);

    // AUC: P(score(test positive) > score(unobserved)) averaged per guardian
    double auc_sum = 0.0;
    std::size_t n_guardians = 0;
    for (Index g = 0; g < split.train.n_guardians(); ++g) {
        auto test_row = split.test.row(g);
        if (test_row.empty()) continue;
        std::set<Index> seen(split.train.row(g).begin(), split.train.row(g).end());
        for (Index u : split.validation.row(g)) seen.insert(u);
        for (Index u : test_row) seen.insert(u);
        auto scores = predict_scores(p, g);
        std::size_t wins = 0, pairs = 0;
        for (Index pos : test_row)
            for (Index neg = 0; neg < split.train.n_urls(); ++neg) {
                if (seen.count(neg)) continue;
                ++pairs;
                if (scores(pos) > scores(neg)) ++wins;
            }
        if (pairs == 0) continue;
        auc_sum += static_cast<double>(wins) / static_cast<double>(pairs);
        ++n_guardians;
    }
    REQUIRE(n_guardians > 0);
    CHECK(auc_sum / static_cast<double>(n_guardians) > 0.5);
}

TEST_CASE("weighted MF with unit weights equals the unmasked Frobenius objective") {
    std::mt19937_64 rng(6);
    auto x = oracle::random_interactions(rng, 8, 7, 0.4);
    auto p = oracle::random_params(rng, 8, 7, 3);
    ConfidenceWeights w{1.0, 1.0};
    double got = weighted_mf_loss(p, x, w, 2e-4);
    Eigen::MatrixXd dense = oracle::dense_interactions(x);
    double want = (dense - p.U * p.V).squaredNorm() +
                  2e-4 * (p.U.squaredNorm() + p.V.squaredNorm());
    CHECK(got == doctest::Approx(want).epsilon(1e-9));
}

TEST_CASE("weighted MF with zero negative weight equals the masked objective") {
    std::mt19937_64 rng(7);
    auto x = oracle::random_interactions(rng, 9, 6, 0.4);
    auto p = oracle::random_params(rng, 9, 6, 3);
    ConfidenceWeights w{1.0, 0.0};
    ModelInputs in;
    in.interactions = &x;
    Hyperparams h;
    h.latent_dim = 3;
    h.lambda = 1e-4;
    CHECK(weighted_mf_loss(p, x, w, 1e-4) == doctest::Approx(loss(p, in, h)).epsilon(1e-9));
}

TEST_CASE("weighted MF gradient matches finite differences of its loss") {
    std::mt19937_64 rng(8);
    auto x = oracle::random_interactions(rng, 6, 5, 0.45);
    auto r = sppmi(url_cooccurrence_counts(x), 1);
    ConfidenceWeights w{1.0, 0.01};
    const double lambda = 1e-4, eta = 1e-3;
    // one descent step recovers the gradient: grad = (init - after) / eta
    auto init = init_params(6, 5, 3, 41);
    auto [after, trace] = fit_weighted_mf(x, w, lambda, 3, eta, 1, 41, &r);
    Eigen::MatrixXd grad_u = (init.U - after.U) / eta;
    Eigen::MatrixXd grad_v = (init.V - after.V) / eta;
    Eigen::MatrixXd grad_k = (init.K - after.K) / eta;

    const double step = 1e-6;
    auto fd = [&](auto accessor) {
        ModelParams probe = init;
        Eigen::MatrixXd& block = accessor(probe);
        Eigen::MatrixXd out(block.rows(), block.cols());
        for (Eigen::Index i = 0; i < block.rows(); ++i)
            for (Eigen::Index j = 0; j < block.cols(); ++j) {
                double saved = block(i, j);
                block(i, j) = saved + step;
                double up = weighted_mf_loss(probe, x, w, lambda, &r);
                block(i, j) = saved - step;
                double down = weighted_mf_loss(probe, x, w, lambda, &r);
                block(i, j) = saved;
                out(i, j) = (up - down) / (2.0 * step);
            }
        return out;
    };
    CHECK(oracle::rel_error(grad_u, fd([](ModelParams& p) -> Eigen::MatrixXd& { return p.U; })) <
          1e-4);
    CHECK(oracle::rel_error(grad_v, fd([](ModelParams& p) -> Eigen::MatrixXd& { return p.V; })) <
          1e-4);
    CHECK(oracle::rel_error(grad_k, fd([](ModelParams& p) -> Eigen::MatrixXd& { return p.K; })) <
          1e-4);
}

TEST_CASE("weighted MF with the published confidence values converges on synthetic data") {
    SyntheticConfig cfg;
    cfg.n_guardians = 50;
    cfg.n_urls = 30;
    auto bundle = generate_synthetic(cfg, 19);
    auto r = sppmi(url_cooccurrence_counts(bundle.interactions), 2);
    ConfidenceWeights w{1.0, 0.01};
    auto [p, trace] = fit_weighted_mf(bundle.interactions, w, 1e-5, 8, 0.002, 300, 3, &r);
    CHECK(trace.loss_history.back() < trace.loss_history.front());
    CHECK(p.U.allFinite());
}

TEST_CASE("weighted MF validates its confidence weights") {
    std::mt19937_64 rng(9);
    auto x = oracle::random_interactions(rng, 4, 4, 0.5);
    CHECK_THROWS_AS(fit_weighted_mf(x, ConfidenceWeights{0.01, 1.0}, 0, 2, 1e-3, 1, 1), Error);
}
