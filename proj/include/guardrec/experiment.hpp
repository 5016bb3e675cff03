#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "guardrec/gau.hpp"
#include "guardrec/metrics.hpp"

namespace guardrec {

// The six ablation variants. NW = social network, UC = URL content
// similarity, CSU/CSG = URL/guardian co-occurrence SPPMI; the full model adds
// guardian tweet similarity on top.
enum class VariantKind { basic, nw_uc, nw_uc_csu, csu_csg, nw_uc_csu_csg, gau };

const std::vector<VariantKind>& all_variants();
std::string variant_name(VariantKind v);
VariantFlags variant_flags(VariantKind v);
VariantKind variant_from_name(const std::string& name);

// Side data shared by every split repetition; similarity bundles and the
// social graph do not depend on the split.
struct ExperimentData {
    const InteractionMatrix* interactions = nullptr;  // filtered, full support
    const SocialGraph* social = nullptr;
    const SimilarityBundle* guardian_sim = nullptr;
    const SimilarityBundle* url_sim = nullptr;
};

struct GridSpec {
    std::vector<double> alphas;
    std::vector<double> betas;
    std::vector<double> gammas;
    std::vector<double> lambdas;
    std::vector<int> shifts;
};

// Cartesian product of the supplied value lists (base values where a list is
// empty). Parameters that do not affect the active terms are zeroed first so
// equivalent points collapse to one fit.
std::vector<Hyperparams> expand_grid(const Hyperparams& base, const GridSpec& grid);

struct RepeatResult {
    std::uint64_t split_seed = 0;
    Hyperparams best;
    double best_validation_recall = 0.0;
    MetricsSummary test;
    std::size_t failed_points = 0;
};

struct MetricAggregate {
    double mean = 0.0;
    double ci95 = 0.0;  // Student-t halfwidth over repeats
};

struct ExperimentReport {
    std::string model;
    std::vector<int> ks;
    std::vector<RepeatResult> repeats;
    std::map<int, MetricAggregate> recall, ndcg, map;

    nlohmann::ordered_json to_json() const;
    std::string to_text() const;
};

struct ExperimentConfig {
    Hyperparams base;
    GridSpec grid;
    int n_repeats = 5;
    std::uint64_t seed = 0;
    int jobs = 0;  // 0 = hardware concurrency
    EvalOptions eval;
    SplitRatios ratios;
    int min_distinct_urls = 3;  // 0 disables re-filtering
};

ExperimentReport run_experiment(const ExperimentData& data, const VariantFlags& flags,
                                const ExperimentConfig& cfg);

struct AblationRow {
    std::string name;
    std::map<int, double> recall, ndcg, map;     // means over repeats
    std::map<int, double> recall_ci, ndcg_ci, map_ci;
    std::vector<int> ranks;  // one per metric column, Table-3 column order
    double avg_rank = 0.0;
};

struct AblationReport {
    std::vector<int> ks;
    int n_repeats = 0;
    std::uint64_t seed = 0;
    std::vector<AblationRow> rows;

    nlohmann::ordered_json to_json() const;
    std::string to_text() const;
};

// Runs all six variants over shared split repetitions and ranks them per
// metric column.
AblationReport run_ablation(const ExperimentData& data, const ExperimentConfig& cfg);

// Mean over guardians of k / |candidates|: the Recall@k a uniformly random
// ranking attains in expectation.
double random_ranking_recall_expectation(const SplitTriple& split, int k,
                                         CandidatePolicy policy = CandidatePolicy::exclude_train_val);

double student_t_975(int dof);

}  // namespace guardrec
