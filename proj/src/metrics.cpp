#include "guardrec/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "guardrec/gau.hpp"

namespace guardrec {

double recall_at_k(const std::vector<Index>& ranked, const std::unordered_set<Index>& relevant,
                   int k) {
    if (relevant.empty()) throw Error("recall_at_k: empty relevant set");
    if (k < 1) throw Error("recall_at_k: k must be >= 1");
    std::size_t hits = 0;
    const std::size_t limit = std::min<std::size_t>(static_cast<std::size_t>(k), ranked.size());
    for (std::size_t r = 0; r < limit; ++r)
        if (relevant.count(ranked[r])) ++hits;
    return static_cast<double>(hits) / static_cast<double>(relevant.size());
}

double ndcg_at_k(const std::vector<Index>& ranked, const std::unordered_set<Index>& relevant,
                 int k) {
    if (relevant.empty()) throw Error("ndcg_at_k: empty relevant set");
    if (k < 1) throw Error("ndcg_at_k: k must be >= 1");
    double dcg = 0.0;
    const std::size_t limit = std::min<std::size_t>(static_cast<std::size_t>(k), ranked.size());
    for (std::size_t r = 0; r < limit; ++r)
        if (relevant.count(ranked[r])) dcg += 1.0 / std::log2(static_cast<double>(r) + 2.0);
    double idcg = 0.0;
    const std::size_t ideal = std::min<std::size_t>(relevant.size(), static_cast<std::size_t>(k));
    for (std::size_t r = 0; r < ideal; ++r) idcg += 1.0 / std::log2(static_cast<double>(r) + 2.0);
    return idcg > 0.0 ? dcg / idcg : 0.0;
}

double average_precision_at_k(const std::vector<Index>& ranked,
                              const std::unordered_set<Index>& relevant, int k,
                              ApDenominator denom) {
    if (relevant.empty()) throw Error("average_precision_at_k: empty relevant set");
    if (k < 1) throw Error("average_precision_at_k: k must be >= 1");
    double sum = 0.0;
    std::size_t hits = 0;
    const std::size_t limit = std::min<std::size_t>(static_cast<std::size_t>(k), ranked.size());
    for (std::size_t r = 0; r < limit; ++r) {
        if (relevant.count(ranked[r])) {
            ++hits;
            sum += static_cast<double>(hits) / static_cast<double>(r + 1);
        }
    }
    double d = denom == ApDenominator::truncated
                   ? static_cast<double>(std::min<std::size_t>(relevant.size(),
                                                               static_cast<std::size_t>(k)))
                   : static_cast<double>(relevant.size());
    return sum / d;
}

namespace {

// Full descending ranking of the guardian's candidate URLs, ties by index.
std::vector<Index> rank_candidates(const ModelParams& p, Index guardian,
                                   const std::vector<bool>& excluded) {
    Eigen::VectorXd scores = predict_scores(p, guardian);
    std::vector<Index> order;
    order.reserve(static_cast<std::size_t>(p.n_urls()));
    for (Index u = 0; u < p.n_urls(); ++u)
        if (!excluded[static_cast<std::size_t>(u)]) order.push_back(u);
    std::sort(order.begin(), order.end(), [&](Index a, Index b) {
        return scores(a) != scores(b) ? scores(a) > scores(b) : a < b;
    });
    return order;
}

MetricsSummary evaluate_impl(const ModelParams& p, const SplitTriple& split,
                             const std::vector<Index>& guardians, const EvalOptions& opts) {
    MetricsSummary out;
    out.ks = opts.ks;
    for (int k : opts.ks) {
        out.recall[k] = 0.0;
        out.ndcg[k] = 0.0;
        out.map[k] = 0.0;
    }
    std::vector<bool> excluded(static_cast<std::size_t>(split.train.n_urls()), false);
    for (Index g : guardians) {
        auto test_row = split.test.row(g);
        if (test_row.empty()) {
            ++out.n_skipped_empty_test;
            continue;
        }
        std::fill(excluded.begin(), excluded.end(), false);
        if (opts.policy != CandidatePolicy::all)
            for (Index u : split.train.row(g)) excluded[static_cast<std::size_t>(u)] = true;
        if (opts.policy == CandidatePolicy::exclude_train_val)
            for (Index u : split.validation.row(g)) excluded[static_cast<std::size_t>(u)] = true;
        std::vector<Index> ranked = rank_candidates(p, g, excluded);
        std::unordered_set<Index> relevant(test_row.begin(), test_row.end());
        for (int k : opts.ks) {
            out.recall[k] += recall_at_k(ranked, relevant, k);
            out.ndcg[k] += ndcg_at_k(ranked, relevant, k);
            out.map[k] += average_precision_at_k(ranked, relevant, k, opts.ap_denominator);
        }
        ++out.n_evaluated;
    }
    if (out.n_evaluated > 0) {
        for (int k : opts.ks) {
            out.recall[k] /= static_cast<double>(out.n_evaluated);
            out.ndcg[k] /= static_cast<double>(out.n_evaluated);
            out.map[k] /= static_cast<double>(out.n_evaluated);
        }
    }
    return out;
}

}  // namespace

MetricsSummary evaluate(const ModelParams& p, const SplitTriple& split, const EvalOptions& opts) {
    if (p.n_urls() != split.train.n_urls() || p.n_guardians() != split.train.n_guardians())
        throw Error("evaluate: model and split dimensions differ");
    std::vector<Index> all(static_cast<std::size_t>(split.train.n_guardians()));
    std::iota(all.begin(), all.end(), 0);
    return evaluate_impl(p, split, all, opts);
}

MetricsSummary evaluate_subset(const ModelParams& p, const SplitTriple& split,
                               const std::vector<Index>& guardians, const EvalOptions& opts) {
    return evaluate_impl(p, split, guardians, opts);
}

double mean_validation_recall(const ModelParams& p, const InteractionMatrix& train,
                              const InteractionMatrix& validation, int k) {
    double sum = 0.0;
    std::size_t n = 0;
    std::vector<bool> excluded(static_cast<std::size_t>(train.n_urls()), false);
    for (Index g = 0; g < train.n_guardians(); ++g) {
        auto val_row = validation.row(g);
        if (val_row.empty()) continue;
        std::fill(excluded.begin(), excluded.end(), false);
        for (Index u : train.row(g)) excluded[static_cast<std::size_t>(u)] = true;
        std::vector<Index> ranked = rank_candidates(p, g, excluded);
        std::unordered_set<Index> relevant(val_row.begin(), val_row.end());
        sum += recall_at_k(ranked, relevant, k);
        ++n;
    }
    return n > 0 ? sum / static_cast<double>(n) : 0.0;
}

CohortAssignment cohort_split(const InteractionMatrix& train, const CohortSpec& spec) {
    const double total = spec.cold + spec.warm + spec.active;
    if (std::abs(total - 1.0) > 1e-9) throw Error("cohort fractions must sum to 1");
    const Index n = train.n_guardians();
    std::vector<Index> order(static_cast<std::size_t>(n));
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](Index a, Index b) {
        auto ca = train.row(a).size(), cb = train.row(b).size();
        return ca != cb ? ca < cb : a < b;
    });
    auto b1 = static_cast<std::size_t>(std::llround(spec.cold * n));
    auto b2 = static_cast<std::size_t>(std::llround((spec.cold + spec.warm) * n));
    CohortAssignment out;
    out.cold.assign(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(b1));
    out.warm.assign(order.begin() + static_cast<std::ptrdiff_t>(b1),
                    order.begin() + static_cast<std::ptrdiff_t>(b2));
    out.active.assign(order.begin() + static_cast<std::ptrdiff_t>(b2), order.end());
    if (out.cold.empty() || out.warm.empty() || out.active.empty())
        throw Error("cohort_split: a cohort came out empty; too few guardians");
    return out;
}

CohortReport cohort_breakdown(const ModelParams& p, const SplitTriple& split,
                              const CohortSpec& spec, const EvalOptions& opts) {
    CohortAssignment a = cohort_split(split.train, spec);
    CohortReport r;
    r.cold = evaluate_subset(p, split, a.cold, opts);
    r.warm = evaluate_subset(p, split, a.warm, opts);
    r.active = evaluate_subset(p, split, a.active, opts);
    return r;
}

}  // namespace guardrec
