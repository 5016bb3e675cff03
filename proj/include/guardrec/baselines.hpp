#pragma once

#include <cstdint>
#include <utility>

#include "guardrec/gau.hpp"

namespace guardrec {

// Gradient descent on the plain masked factorization objective. Identical
// optimizer path to the joint model with every auxiliary term switched off,
// so the same seed yields bitwise-equal factors.
std::pair<ModelParams, TrainTrace> fit_basic_mf(const InteractionMatrix& x, double lambda, int dim,
                                                double eta, int iters, std::uint64_t seed,
                                                double tol = 1e-5);

struct BprHyper {
    int latent_dim = 100;
    double eta = 0.05;
    double lambda = 1e-4;
    int epochs = 200;
};

// Pairwise ranking: per step sample an observed (u, i) and an unobserved j,
// push sigma(r_ui - r_uj) up. epochs * nnz sampled triples per run; guardians
// with every URL observed are skipped in sampling.
ModelParams fit_bprmf(const InteractionMatrix& x, const BprHyper& h, std::uint64_t seed);

struct ConfidenceWeights {
    double c_pos = 1.0;
    double c_neg = 0.01;
};

// Confidence-weighted factorization over all N*M cells, optionally decomposing
// a URL co-occurrence SPPMI matrix alongside. Full-batch gradient descent.
std::pair<ModelParams, TrainTrace> fit_weighted_mf(const InteractionMatrix& x,
                                                   const ConfidenceWeights& w, double lambda,
                                                   int dim, double eta, int iters,
                                                   std::uint64_t seed,
                                                   const SppmiMatrix* url_sppmi = nullptr,
                                                   double tol = 1e-5);

double weighted_mf_loss(const ModelParams& p, const InteractionMatrix& x,
                        const ConfidenceWeights& w, double lambda,
                        const SppmiMatrix* url_sppmi = nullptr);

}  // namespace guardrec
