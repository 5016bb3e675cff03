#include "guardrec/gau.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <random>

#include "guardrec/metrics.hpp"

namespace guardrec {

bool ModelParams::all_finite() const {
    return U.allFinite() && V.allFinite() && K.allFinite() && L.allFinite();
}

void validate_inputs(const ModelInputs& in, const Hyperparams& h) {
    if (!in.interactions) throw Error("interaction matrix is required");
    if (h.latent_dim < 1) throw Error("latent_dim must be >= 1");
    if (h.eta < 0) throw Error("eta must be >= 0");
    if (h.lambda < 0 || h.alpha < 0 || h.beta < 0 || h.gamma < 0)
        throw Error("weights must be >= 0");
    const Index n = in.interactions->n_guardians();
    const Index m = in.interactions->n_urls();
    const auto& f = h.flags;
    if (f.use_url_sppmi) {
        if (!in.url_sppmi) throw Error("use_url_sppmi set but no URL SPPMI matrix provided");
        if (in.url_sppmi->dim != m) throw Error("URL SPPMI dimension mismatch");
    }
    if (f.use_guardian_sppmi) {
        if (!in.guardian_sppmi)
            throw Error("use_guardian_sppmi set but no guardian SPPMI matrix provided");
        if (in.guardian_sppmi->dim != n) throw Error("guardian SPPMI dimension mismatch");
    }
    if (f.use_social) {
        if (!in.social) throw Error("use_social set but no social graph provided");
        if (in.social->size() != n) throw Error("social graph dimension mismatch");
    }
    if (f.use_guardian_sim) {
        if (!in.guardian_sim)
            throw Error("use_guardian_sim set but no guardian similarity bundle provided");
        if (in.guardian_sim->size() != n) throw Error("guardian similarity dimension mismatch");
    }
    if (f.use_url_sim) {
        if (!in.url_sim) throw Error("use_url_sim set but no URL similarity bundle provided");
        if (in.url_sim->size() != m) throw Error("URL similarity dimension mismatch");
    }
}

namespace {

void check_param_dims(const ModelParams& p, const ModelInputs& in, const Hyperparams& h) {
    const Index n = in.interactions->n_guardians();
    const Index m = in.interactions->n_urls();
    const int d = h.latent_dim;
    if (p.U.rows() != n || p.U.cols() != d) throw Error("U dimension mismatch");
    if (p.V.rows() != d || p.V.cols() != m) throw Error("V dimension mismatch");
    if (h.flags.use_url_sppmi && (p.K.rows() != d || p.K.cols() != m))
        throw Error("K dimension mismatch");
    if (h.flags.use_guardian_sppmi && (p.L.rows() != d || p.L.cols() != n))
        throw Error("L dimension mismatch");
}

// Residual X - UV on Omega's support only.
Eigen::SparseMatrix<double> masked_interaction_residual(const ModelParams& p,
                                                        const InteractionMatrix& x) {
    std::vector<Eigen::Triplet<double>> trips;
    trips.reserve(x.nnz());
    for (Index g = 0; g < x.n_guardians(); ++g)
        for (Index u : x.row(g))
            trips.emplace_back(g, u, 1.0 - p.U.row(g).dot(p.V.col(u)));
    Eigen::SparseMatrix<double> r(x.n_guardians(), x.n_urls());
    r.setFromTriplets(trips.begin(), trips.end());
    return r;
}

// R^mask .* (R - V^T K) over R's support; not symmetric since V^T K is not.
Eigen::SparseMatrix<double> masked_sppmi_residual_vk(const ModelParams& p, const SppmiMatrix& r) {
    std::vector<Eigen::Triplet<double>> trips;
    trips.reserve(r.support_size());
    for (const auto& e : r.upper) {
        trips.emplace_back(e.i, e.j, e.value - p.V.col(e.i).dot(p.K.col(e.j)));
        trips.emplace_back(e.j, e.i, e.value - p.V.col(e.j).dot(p.K.col(e.i)));
    }
    Eigen::SparseMatrix<double> out(r.dim, r.dim);
    out.setFromTriplets(trips.begin(), trips.end());
    return out;
}

// G^mask .* (G - U L) over G's support.
Eigen::SparseMatrix<double> masked_sppmi_residual_ul(const ModelParams& p, const SppmiMatrix& g) {
    std::vector<Eigen::Triplet<double>> trips;
    trips.reserve(g.support_size());
    for (const auto& e : g.upper) {
        trips.emplace_back(e.i, e.j, e.value - p.U.row(e.i).dot(p.L.col(e.j)));
        trips.emplace_back(e.j, e.i, e.value - p.U.row(e.j).dot(p.L.col(e.i)));
    }
    Eigen::SparseMatrix<double> out(g.dim, g.dim);
    out.setFromTriplets(trips.begin(), trips.end());
    return out;
}

double sparse_sq_norm(const Eigen::SparseMatrix<double>& m) {
    double s = 0.0;
    for (int k = 0; k < m.outerSize(); ++k)
        for (Eigen::SparseMatrix<double>::InnerIterator it(m, k); it; ++it)
            s += it.value() * it.value();
    return s;
}

// ||S - U U^T||_F^2 without materializing U U^T:
// nnz(S) - 2 sum_{(i,j) in S} U_i . U_j + ||U^T U||_F^2 (S is binary).
double social_loss(const Eigen::MatrixXd& u, const SocialGraph& s) {
    double cross = 0.0;
    for (Index i = 0; i < s.size(); ++i)
        for (Index j : s.neighbors(i)) cross += u.row(i).dot(u.row(j));
    Eigen::MatrixXd gram = u.transpose() * u;
    return static_cast<double>(2 * s.n_edges()) - 2.0 * cross + gram.squaredNorm();
}

// 1/2 sum_ij sim(i,j) ||A_i - A_j||^2 over the rows of A; equals Tr(A^T L A)
// but is a sum of nonnegative terms.
double laplacian_quadratic_rows(const Eigen::MatrixXd& a,
                                const Eigen::SparseMatrix<double>& sim) {
    double s = 0.0;
    for (int k = 0; k < sim.outerSize(); ++k)
        for (Eigen::SparseMatrix<double>::InnerIterator it(sim, k); it; ++it)
            s += it.value() * (a.row(it.row()) - a.row(it.col())).squaredNorm();
    return 0.5 * s;
}

// Same over the columns of A (for V, whose URL vectors are columns).
double laplacian_quadratic_cols(const Eigen::MatrixXd& a,
                                const Eigen::SparseMatrix<double>& sim) {
    double s = 0.0;
    for (int k = 0; k < sim.outerSize(); ++k)
        for (Eigen::SparseMatrix<double>::InnerIterator it(sim, k); it; ++it)
            s += it.value() * (a.col(it.row()) - a.col(it.col())).squaredNorm();
    return 0.5 * s;
}

}  // namespace

LossTerms loss_terms(const ModelParams& p, const ModelInputs& in, const Hyperparams& h) {
    validate_inputs(in, h);
    check_param_dims(p, in, h);
    LossTerms t;
    t.interaction = sparse_sq_norm(masked_interaction_residual(p, *in.interactions));
    t.l2 = h.lambda * (p.U.squaredNorm() + p.V.squaredNorm());
    if (h.flags.use_url_sppmi)
        t.url_sppmi = sparse_sq_norm(masked_sppmi_residual_vk(p, *in.url_sppmi));
    if (h.flags.use_guardian_sppmi)
        t.guardian_sppmi = sparse_sq_norm(masked_sppmi_residual_ul(p, *in.guardian_sppmi));
    if (h.flags.use_social) t.social = h.alpha * social_loss(p.U, *in.social);
    if (h.flags.use_guardian_sim)
        t.guardian_sim = h.gamma * laplacian_quadratic_rows(p.U, in.guardian_sim->sim);
    if (h.flags.use_url_sim)
        t.url_sim = h.beta * laplacian_quadratic_cols(p.V, in.url_sim->sim);
    return t;
}

double loss(const ModelParams& p, const ModelInputs& in, const Hyperparams& h) {
    return loss_terms(p, in, h).total();
}

Gradients gradients(const ModelParams& p, const ModelInputs& in, const Hyperparams& h) {
    validate_inputs(in, h);
    check_param_dims(p, in, h);
    Gradients g;
    g.U = Eigen::MatrixXd::Zero(p.U.rows(), p.U.cols());
    g.V = Eigen::MatrixXd::Zero(p.V.rows(), p.V.cols());
    g.K = Eigen::MatrixXd::Zero(p.K.rows(), p.K.cols());
    g.L = Eigen::MatrixXd::Zero(p.L.rows(), p.L.cols());

    // interaction + L2 (Omega .* Omega = Omega for a binary mask)
    Eigen::SparseMatrix<double> res = masked_interaction_residual(p, *in.interactions);
    g.U.noalias() = -2.0 * (res * p.V.transpose());
    g.U += 2.0 * h.lambda * p.U;
    g.V.noalias() = -2.0 * (p.U.transpose() * res).eval();
    g.V += 2.0 * h.lambda * p.V;

    if (h.flags.use_url_sppmi) {
        Eigen::SparseMatrix<double> er = masked_sppmi_residual_vk(p, *in.url_sppmi);
        g.V.noalias() += -2.0 * (p.K * Eigen::MatrixXd(er.transpose()));
        g.K.noalias() = -2.0 * (p.V * Eigen::MatrixXd(er));
    }
    if (h.flags.use_guardian_sppmi) {
        Eigen::SparseMatrix<double> eg = masked_sppmi_residual_ul(p, *in.guardian_sppmi);
        g.U.noalias() += -2.0 * (eg * p.L.transpose());
        g.L.noalias() = -2.0 * (p.U.transpose() * eg).eval();
    }
    if (h.flags.use_social) {
        // -2a((S - UU^T) + (S - UU^T)^T)U = -2a(SU + S^T U - 2 U (U^T U))
        Eigen::SparseMatrix<double> s = in.social->to_sparse();
        Eigen::MatrixXd su = s * p.U;
        Eigen::MatrixXd stu = s.transpose() * p.U;
        Eigen::MatrixXd gram = p.U.transpose() * p.U;
        g.U.noalias() += -2.0 * h.alpha * (su + stu - 2.0 * (p.U * gram));
    }
    if (h.flags.use_guardian_sim) {
        const auto& lap = in.guardian_sim->laplacian;
        g.U.noalias() += h.gamma * (lap * p.U + lap.transpose() * p.U);
    }
    if (h.flags.use_url_sim) {
        const auto& lap = in.url_sim->laplacian;
        g.V.noalias() += h.beta * (p.V * lap + p.V * Eigen::SparseMatrix<double>(lap.transpose()));
    }
    return g;
}

ModelParams init_params(Index n_guardians, Index n_urls, int latent_dim, std::uint64_t seed) {
    std::mt19937_64 rng(mix_seed(seed, "gaussian-init"));
    std::normal_distribution<double> gauss(0.0, 0.01);
    ModelParams p;
    p.U.resize(n_guardians, latent_dim);
    p.V.resize(latent_dim, n_urls);
    p.K.resize(latent_dim, n_urls);
    p.L.resize(latent_dim, n_guardians);
    auto fill = [&](Eigen::MatrixXd& m) {
        for (Eigen::Index i = 0; i < m.rows(); ++i)
            for (Eigen::Index j = 0; j < m.cols(); ++j) m(i, j) = gauss(rng);
    };
    fill(p.U);
    fill(p.V);
    fill(p.K);
    fill(p.L);
    return p;
}

std::pair<ModelParams, TrainTrace> fit(const ModelInputs& in, const Hyperparams& h,
                                       std::uint64_t seed, const FitOptions& opts) {
    validate_inputs(in, h);
    const auto t0 = std::chrono::steady_clock::now();
    ModelParams p = init_params(in.interactions->n_guardians(), in.interactions->n_urls(),
                                h.latent_dim, seed);
    TrainTrace trace;
    LossTerms cur = loss_terms(p, in, h);
    trace.loss_history.push_back(cur.total());
    trace.term_history.push_back(cur);
    trace.stop_reason = "max_iters";

    double best_val_metric = -1.0;
    int bad_evals = 0;

    for (int iter = 1; iter <= h.max_iters; ++iter) {
        Gradients g = gradients(p, in, h);
        p.U -= h.eta * g.U;
        p.V -= h.eta * g.V;
        if (h.flags.use_url_sppmi) p.K -= h.eta * g.K;
        if (h.flags.use_guardian_sppmi) p.L -= h.eta * g.L;
        if (!p.all_finite())
            throw DivergenceError(iter, "parameters diverged (NaN/Inf); lower eta");

        double prev = trace.loss_history.back();
        cur = loss_terms(p, in, h);
        if (!std::isfinite(cur.total()))
            throw DivergenceError(iter, "loss diverged (NaN/Inf); lower eta");
        trace.loss_history.push_back(cur.total());
        trace.term_history.push_back(cur);
        trace.iterations = iter;

        double rel = std::abs(prev - cur.total()) / std::max(std::abs(prev), 1e-12);
        if (rel < h.convergence_tol) {
            trace.stop_reason = "converged";
            break;
        }

        if (opts.early_stop && opts.validation && iter % opts.eval_every == 0) {
            double metric = mean_validation_recall(p, *in.interactions, *opts.validation,
                                                   opts.early_stop_k);
            if (metric > best_val_metric) {
                best_val_metric = metric;
                bad_evals = 0;
            } else if (++bad_evals >= opts.patience) {
                trace.stop_reason = "early_stop";
                break;
            }
        }
    }
    trace.wall_time_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return {std::move(p), std::move(trace)};
}

Eigen::VectorXd predict_scores(const ModelParams& p, Index guardian) {
    if (guardian < 0 || guardian >= p.n_guardians())
        throw Error("guardian index out of range: " + std::to_string(guardian));
    return (p.U.row(guardian) * p.V).transpose();
}

std::vector<std::pair<Index, double>> recommend_topk(const ModelParams& p, Index guardian, int k,
                                                     const std::vector<Index>& exclude) {
    if (k < 1) throw Error("k must be >= 1");
    Eigen::VectorXd scores = predict_scores(p, guardian);
    std::vector<bool> excluded(static_cast<std::size_t>(p.n_urls()), false);
    for (Index u : exclude) {
        if (u < 0 || u >= p.n_urls()) throw Error("exclude index out of range");
        excluded[static_cast<std::size_t>(u)] = true;
    }
    std::vector<std::pair<Index, double>> items;
    items.reserve(static_cast<std::size_t>(p.n_urls()));
    for (Index u = 0; u < p.n_urls(); ++u)
        if (!excluded[static_cast<std::size_t>(u)]) items.emplace_back(u, scores(u));
    auto cmp = [](const auto& a, const auto& b) {
        return a.second != b.second ? a.second > b.second : a.first < b.first;
    };
    auto take = std::min<std::size_t>(static_cast<std::size_t>(k), items.size());
    std::partial_sort(items.begin(), items.begin() + static_cast<std::ptrdiff_t>(take),
                      items.end(), cmp);
    items.resize(take);
    return items;
}

}  // namespace guardrec
