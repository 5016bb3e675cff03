#include "guardrec/baselines.hpp"

#include <cmath>
#include <random>

namespace guardrec {

std::pair<ModelParams, TrainTrace> fit_basic_mf(const InteractionMatrix& x, double lambda, int dim,
                                                double eta, int iters, std::uint64_t seed,
                                                double tol) {
    Hyperparams h;
    h.latent_dim = dim;
    h.lambda = lambda;
    h.eta = eta;
    h.max_iters = iters;
    h.convergence_tol = tol;
    h.flags = VariantFlags::none();
    ModelInputs in;
    in.interactions = &x;
    return fit(in, h, seed);
}

ModelParams fit_bprmf(const InteractionMatrix& x, const BprHyper& h, std::uint64_t seed) {
    if (h.latent_dim < 1) throw Error("latent_dim must be >= 1");
    if (h.epochs < 0) throw Error("epochs must be >= 0");
    ModelParams p = init_params(x.n_guardians(), x.n_urls(), h.latent_dim, seed);

    // flat positives list for uniform (u, i) sampling
    std::vector<std::pair<Index, Index>> positives;
    positives.reserve(x.nnz());
    for (Index g = 0; g < x.n_guardians(); ++g) {
        if (x.row(g).empty())
            throw Error("guardian " + std::to_string(g) + " has no positives");
        for (Index u : x.row(g)) positives.emplace_back(g, u);
    }

    std::mt19937_64 rng(mix_seed(seed, "bpr-sampler"));
    std::uniform_int_distribution<std::size_t> pick_pos(0, positives.size() - 1);
    std::uniform_int_distribution<Index> pick_url(0, x.n_urls() - 1);

    const std::size_t steps = static_cast<std::size_t>(h.epochs) * positives.size();
    Eigen::VectorXd u_old(h.latent_dim);
    for (std::size_t step = 0; step < steps; ++step) {
        auto [g, i] = positives[pick_pos(rng)];
        if (static_cast<Index>(x.row(g).size()) >= x.n_urls()) continue;  // nothing negative
        Index j = pick_url(rng);
        while (x.contains(g, j)) j = pick_url(rng);

        double x_uij = p.U.row(g).dot(p.V.col(i) - p.V.col(j));
        double coeff = 1.0 / (1.0 + std::exp(x_uij));  // sigma(-x_uij)
        u_old = p.U.row(g);
        p.U.row(g) += h.eta * (coeff * (p.V.col(i) - p.V.col(j)).transpose() -
                               h.lambda * p.U.row(g));
        p.V.col(i) += h.eta * (coeff * u_old - h.lambda * p.V.col(i));
        p.V.col(j) += h.eta * (-coeff * u_old - h.lambda * p.V.col(j));
    }
    if (!p.U.allFinite() || !p.V.allFinite())
        throw DivergenceError(static_cast<int>(steps), "BPR parameters diverged; lower eta");
    return p;
}

double weighted_mf_loss(const ModelParams& p, const InteractionMatrix& x,
                        const ConfidenceWeights& w, double lambda, const SppmiMatrix* url_sppmi) {
    // sum_ij c_ij (X - UV)_ij^2 with c = c_neg everywhere plus (c_pos - c_neg)
    // on the support:
    //   c_neg * ||X - UV||_F^2 + (c_pos - c_neg) * sum_Omega (X - UV)_ij^2
    // ||X - UV||^2 = ||X||^2 - 2<X, UV> + <U^T U, V V^T> (no dense N x M pass).
    double cross = 0.0, masked = 0.0;
    for (Index g = 0; g < x.n_guardians(); ++g)
        for (Index u : x.row(g)) {
            double pred = p.U.row(g).dot(p.V.col(u));
            cross += pred;
            double r = 1.0 - pred;
            masked += r * r;
        }
    Eigen::MatrixXd gram_u = p.U.transpose() * p.U;
    Eigen::MatrixXd gram_v = p.V * p.V.transpose();
    double full = static_cast<double>(x.nnz()) - 2.0 * cross + gram_u.cwiseProduct(gram_v).sum();
    double total = w.c_neg * full + (w.c_pos - w.c_neg) * masked +
                   lambda * (p.U.squaredNorm() + p.V.squaredNorm());
    if (url_sppmi) {
        for (const auto& e : url_sppmi->upper) {
            double r1 = e.value - p.V.col(e.i).dot(p.K.col(e.j));
            double r2 = e.value - p.V.col(e.j).dot(p.K.col(e.i));
            total += r1 * r1 + r2 * r2;
        }
    }
    return total;
}

std::pair<ModelParams, TrainTrace> fit_weighted_mf(const InteractionMatrix& x,
                                                   const ConfidenceWeights& w, double lambda,
                                                   int dim, double eta, int iters,
                                                   std::uint64_t seed,
                                                   const SppmiMatrix* url_sppmi, double tol) {
    if (!(w.c_pos >= w.c_neg) || !(w.c_neg >= 0.0) || !(w.c_pos > 0.0))
        throw Error("confidence weights need c_pos >= c_neg >= 0 and c_pos > 0");
    if (url_sppmi && url_sppmi->dim != x.n_urls())
        throw Error("URL SPPMI dimension mismatch");
    ModelParams p = init_params(x.n_guardians(), x.n_urls(), dim, seed);
    Eigen::SparseMatrix<double> xs = x.to_sparse();
    const double dc = w.c_pos - w.c_neg;

    TrainTrace trace;
    trace.stop_reason = "max_iters";
    trace.loss_history.push_back(weighted_mf_loss(p, x, w, lambda, url_sppmi));

    for (int iter = 1; iter <= iters; ++iter) {
        // masked residual on the support (reused by the dense-equivalent form)
        std::vector<Eigen::Triplet<double>> trips;
        trips.reserve(x.nnz());
        for (Index g = 0; g < x.n_guardians(); ++g)
            for (Index u : x.row(g)) trips.emplace_back(g, u, 1.0 - p.U.row(g).dot(p.V.col(u)));
        Eigen::SparseMatrix<double> res(x.n_guardians(), x.n_urls());
        res.setFromTriplets(trips.begin(), trips.end());

        Eigen::MatrixXd gram_v = p.V * p.V.transpose();
        Eigen::MatrixXd gram_u = p.U.transpose() * p.U;
        // dC/dU = -2[c_neg (X V^T - U (V V^T)) + dc * (Omega .* (X-UV)) V^T] + 2 lambda U
        Eigen::MatrixXd grad_u = -2.0 * (w.c_neg * (xs * p.V.transpose() - p.U * gram_v) +
                                         dc * (res * p.V.transpose()));
        grad_u += 2.0 * lambda * p.U;
        Eigen::MatrixXd grad_v = -2.0 * (w.c_neg * (p.U.transpose() * xs - gram_u * p.V) +
                                         dc * (p.U.transpose() * res));
        grad_v += 2.0 * lambda * p.V;

        Eigen::MatrixXd grad_k;
        if (url_sppmi) {
            std::vector<Eigen::Triplet<double>> strips;
            strips.reserve(url_sppmi->support_size());
            for (const auto& e : url_sppmi->upper) {
                strips.emplace_back(e.i, e.j, e.value - p.V.col(e.i).dot(p.K.col(e.j)));
                strips.emplace_back(e.j, e.i, e.value - p.V.col(e.j).dot(p.K.col(e.i)));
            }
            Eigen::SparseMatrix<double> er(url_sppmi->dim, url_sppmi->dim);
            er.setFromTriplets(strips.begin(), strips.end());
            grad_v.noalias() += -2.0 * (p.K * Eigen::MatrixXd(er.transpose()));
            grad_k = -2.0 * (p.V * Eigen::MatrixXd(er));
        }

        p.U -= eta * grad_u;
        p.V -= eta * grad_v;
        if (url_sppmi) p.K -= eta * grad_k;
        if (!p.U.allFinite() || !p.V.allFinite() || !p.K.allFinite())
            throw DivergenceError(iter, "weighted MF diverged; lower eta");

        double prev = trace.loss_history.back();
        double cur = weighted_mf_loss(p, x, w, lambda, url_sppmi);
        if (!std::isfinite(cur)) throw DivergenceError(iter, "weighted MF loss diverged");
        trace.loss_history.push_back(cur);
        trace.iterations = iter;
        if (std::abs(prev - cur) / std::max(std::abs(prev), 1e-12) < tol) {
            trace.stop_reason = "converged";
            break;
        }
    }
    return {std::move(p), std::move(trace)};
}

}  // namespace guardrec
