#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Core>
#include <Eigen/SparseCore>

#include "guardrec/cooccurrence.hpp"
#include "guardrec/dataset.hpp"
#include "guardrec/similarity.hpp"

namespace guardrec {

// Which loss terms participate. The SPPMI reconstruction terms carry no
// weight hyperparameter, so they can only be switched off here.
struct VariantFlags {
    bool use_url_sppmi = false;       // R term
    bool use_guardian_sppmi = false;  // G term
    bool use_social = false;          // alpha * ||S - U U^T||_F^2
    bool use_guardian_sim = false;    // gamma * Tr(U^T L_uu U)
    bool use_url_sim = false;         // beta * Tr(V L_ll V^T)

    static VariantFlags none() { return {}; }
    static VariantFlags all() { return {true, true, true, true, true}; }
};

struct Hyperparams {
    int latent_dim = 100;
    double lambda = 1e-5;  // L2 on U, V (K and L stay unregularized)
    double alpha = 0.0;    // social structure weight
    double gamma = 0.0;    // guardian tweet-similarity weight
    double beta = 0.0;     // URL content-similarity weight
    int shift = 1;         // SPPMI negative-sample shift s
    double eta = 0.001;
    int max_iters = 500;
    double convergence_tol = 1e-5;
    VariantFlags flags;
};

// U: N x D guardian factors, V: D x M URL factors, K/L: SPPMI context factors.
struct ModelParams {
    Eigen::MatrixXd U;
    Eigen::MatrixXd V;
    Eigen::MatrixXd K;  // D x M
    Eigen::MatrixXd L;  // D x N

    Index n_guardians() const { return static_cast<Index>(U.rows()); }
    Index n_urls() const { return static_cast<Index>(V.cols()); }
    int latent_dim() const { return static_cast<int>(U.cols()); }
    bool all_finite() const;
};

// Non-owning views of the training inputs; optional pointers may be null when
// the matching flag is off.
struct ModelInputs {
    const InteractionMatrix* interactions = nullptr;
    const SppmiMatrix* url_sppmi = nullptr;        // R
    const SppmiMatrix* guardian_sppmi = nullptr;   // G
    const SocialGraph* social = nullptr;           // S
    const SimilarityBundle* guardian_sim = nullptr;  // X_uu bundle
    const SimilarityBundle* url_sim = nullptr;       // X_ll bundle
};

struct LossTerms {
    double interaction = 0.0;
    double l2 = 0.0;
    double url_sppmi = 0.0;
    double guardian_sppmi = 0.0;
    double social = 0.0;
    double guardian_sim = 0.0;
    double url_sim = 0.0;

    double total() const {
        return interaction + l2 + url_sppmi + guardian_sppmi + social + guardian_sim + url_sim;
    }
};

struct Gradients {
    Eigen::MatrixXd U, V, K, L;
};

LossTerms loss_terms(const ModelParams& p, const ModelInputs& in, const Hyperparams& h);
double loss(const ModelParams& p, const ModelInputs& in, const Hyperparams& h);
Gradients gradients(const ModelParams& p, const ModelInputs& in, const Hyperparams& h);

struct TrainTrace {
    std::vector<double> loss_history;      // [0] = loss at init, then per iteration
    std::vector<LossTerms> term_history;   // aligned with loss_history
    int iterations = 0;
    std::string stop_reason;               // converged | max_iters | early_stop
    double wall_time_seconds = 0.0;
};

struct FitOptions {
    // Early stopping on validation Recall@10; off unless validation is given
    // and enabled explicitly.
    bool early_stop = false;
    const InteractionMatrix* validation = nullptr;
    int eval_every = 25;
    int patience = 2;
    int early_stop_k = 10;
};

// Full-batch gradient descent with fixed rate eta; parameters start from
// seeded N(0, 0.01^2) draws, filled row by row in the order U, V, K, L.
std::pair<ModelParams, TrainTrace> fit(const ModelInputs& in, const Hyperparams& h,
                                       std::uint64_t seed, const FitOptions& opts = {});

ModelParams init_params(Index n_guardians, Index n_urls, int latent_dim, std::uint64_t seed);

// Scores of every URL for one guardian: row U_i times V.
Eigen::VectorXd predict_scores(const ModelParams& p, Index guardian);

// Descending score, ties broken by ascending URL index; excluded URLs are
// never returned.
std::vector<std::pair<Index, double>> recommend_topk(const ModelParams& p, Index guardian, int k,
                                                     const std::vector<Index>& exclude = {});

void validate_inputs(const ModelInputs& in, const Hyperparams& h);

}  // namespace guardrec
