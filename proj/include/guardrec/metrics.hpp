#pragma once

#include <map>
#include <string>
#include <unordered_set>
#include <vector>

#include "guardrec/dataset.hpp"

namespace guardrec {

struct ModelParams;  // gau.hpp

// |top-k intersect relevant| / |relevant|; relevant must be nonempty.
double recall_at_k(const std::vector<Index>& ranked, const std::unordered_set<Index>& relevant,
                   int k);

// Binary relevance: DCG = sum over hits of 1/log2(rank+1) (ranks 1-based),
// IDCG over the first min(|relevant|, k) positions.
double ndcg_at_k(const std::vector<Index>& ranked, const std::unordered_set<Index>& relevant,
                 int k);

enum class ApDenominator { truncated, full };  // min(|relevant|, k) vs |relevant|

double average_precision_at_k(const std::vector<Index>& ranked,
                              const std::unordered_set<Index>& relevant, int k,
                              ApDenominator denom = ApDenominator::truncated);

enum class CandidatePolicy {
    exclude_train_val,  // rank everything but the guardian's train+validation URLs
    exclude_train,
    all
};

struct EvalOptions {
    std::vector<int> ks = {5, 10, 15};
    CandidatePolicy policy = CandidatePolicy::exclude_train_val;
    ApDenominator ap_denominator = ApDenominator::truncated;
};

// Mean-over-guardians metrics for one trained model on one split.
struct MetricsSummary {
    std::vector<int> ks;
    std::map<int, double> recall;
    std::map<int, double> ndcg;
    std::map<int, double> map;
    std::size_t n_evaluated = 0;
    std::size_t n_skipped_empty_test = 0;
};

MetricsSummary evaluate(const ModelParams& p, const SplitTriple& split,
                        const EvalOptions& opts = {});

// Restricted to a subset of guardians (cohort evaluation).
MetricsSummary evaluate_subset(const ModelParams& p, const SplitTriple& split,
                               const std::vector<Index>& guardians, const EvalOptions& opts = {});

// Validation Recall@k averaged over guardians with a nonempty validation set;
// candidates exclude each guardian's training URLs. Used for model selection.
double mean_validation_recall(const ModelParams& p, const InteractionMatrix& train,
                              const InteractionMatrix& validation, int k);

struct CohortSpec {
    double cold = 0.20;
    double warm = 0.60;
    double active = 0.20;
};

// Guardians sorted by training-URL count ascending (ties by index) and cut at
// the cold/warm/active boundaries.
struct CohortAssignment {
    std::vector<Index> cold, warm, active;
};

CohortAssignment cohort_split(const InteractionMatrix& train, const CohortSpec& spec = {});

struct CohortReport {
    MetricsSummary cold, warm, active;
};

CohortReport cohort_breakdown(const ModelParams& p, const SplitTriple& split,
                              const CohortSpec& spec = {}, const EvalOptions& opts = {});

}  // namespace guardrec
