#include "guardrec/experiment.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <functional>
#include <mutex>
#include <numeric>
#include <sstream>
#include <thread>

namespace guardrec {

const std::vector<VariantKind>& all_variants() {
    static const std::vector<VariantKind> v = {
        VariantKind::basic,        VariantKind::nw_uc,  VariantKind::nw_uc_csu,
        VariantKind::csu_csg,      VariantKind::nw_uc_csu_csg, VariantKind::gau};
    return v;
}

std::string variant_name(VariantKind v) {
    switch (v) {
        case VariantKind::basic: return "BASIC";
        case VariantKind::nw_uc: return "BASIC+NW+UC";
        case VariantKind::nw_uc_csu: return "BASIC+NW+UC+CSU";
        case VariantKind::csu_csg: return "BASIC+CSU+CSG";
        case VariantKind::nw_uc_csu_csg: return "BASIC+NW+UC+CSU+CSG";
        case VariantKind::gau: return "GAU";
    }
    throw Error("unknown variant");
}

VariantFlags variant_flags(VariantKind v) {
    VariantFlags f;
    switch (v) {
        case VariantKind::basic:
            break;
        case VariantKind::nw_uc:
            f.use_social = f.use_url_sim = true;
            break;
        case VariantKind::nw_uc_csu:
            f.use_social = f.use_url_sim = f.use_url_sppmi = true;
            break;
        case VariantKind::csu_csg:
            f.use_url_sppmi = f.use_guardian_sppmi = true;
            break;
        case VariantKind::nw_uc_csu_csg:
            f.use_social = f.use_url_sim = f.use_url_sppmi = f.use_guardian_sppmi = true;
            break;
        case VariantKind::gau:
            f = VariantFlags::all();
            break;
    }
    return f;
}

VariantKind variant_from_name(const std::string& name) {
    for (VariantKind v : all_variants())
        if (variant_name(v) == name) return v;
    throw Error("unknown variant '" + name + "'");
}

std::vector<Hyperparams> expand_grid(const Hyperparams& base, const GridSpec& grid) {
    auto values = [](const std::vector<double>& v, double fallback) {
        return v.empty() ? std::vector<double>{fallback} : v;
    };
    auto ivalues = [](const std::vector<int>& v, int fallback) {
        return v.empty() ? std::vector<int>{fallback} : v;
    };
    std::vector<Hyperparams> points;
    for (double a : values(grid.alphas, base.alpha))
        for (double b : values(grid.betas, base.beta))
            for (double g : values(grid.gammas, base.gamma))
                for (double l : values(grid.lambdas, base.lambda))
                    for (int s : ivalues(grid.shifts, base.shift)) {
                        Hyperparams h = base;
                        h.alpha = h.flags.use_social ? a : 0.0;
                        h.beta = h.flags.use_url_sim ? b : 0.0;
                        h.gamma = h.flags.use_guardian_sim ? g : 0.0;
                        h.lambda = l;
                        h.shift = (h.flags.use_url_sppmi || h.flags.use_guardian_sppmi) ? s : 1;
                        points.push_back(h);
                    }
    // collapse points that differ only in zeroed-out parameters
    auto key = [](const Hyperparams& h) {
        std::ostringstream os;
        os << h.alpha << '|' << h.beta << '|' << h.gamma << '|' << h.lambda << '|' << h.shift;
        return os.str();
    };
    std::vector<Hyperparams> unique;
    std::vector<std::string> seen;
    for (const auto& h : points) {
        std::string k = key(h);
        if (std::find(seen.begin(), seen.end(), k) == seen.end()) {
            seen.push_back(k);
            unique.push_back(h);
        }
    }
    return unique;
}

namespace {

// Fixed-size pool over an indexed task list; results land in caller-owned
// slots so the outcome is independent of scheduling.
void parallel_for(std::size_t n_tasks, int jobs, const std::function<void(std::size_t)>& task) {
    if (n_tasks == 0) return;
    unsigned n_workers = jobs > 0 ? static_cast<unsigned>(jobs)
                                  : std::max(1u, std::thread::hardware_concurrency());
    n_workers = std::min<unsigned>(n_workers, static_cast<unsigned>(n_tasks));
    if (n_workers <= 1) {
        for (std::size_t i = 0; i < n_tasks; ++i) task(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::vector<std::thread> workers;
    std::exception_ptr first_error;
    std::mutex error_mutex;
    for (unsigned w = 0; w < n_workers; ++w) {
        workers.emplace_back([&] {
            while (true) {
                std::size_t i = next.fetch_add(1);
                if (i >= n_tasks) return;
                try {
                    task(i);
                } catch (...) {
                    std::lock_guard<std::mutex> lock(error_mutex);
                    if (!first_error) first_error = std::current_exception();
                }
            }
        });
    }
    for (auto& t : workers) t.join();
    if (first_error) std::rethrow_exception(first_error);
}

struct SplitArtifacts {
    SplitTriple split;
    CountMatrix url_counts;
    CountMatrix guardian_counts;
    std::map<int, SppmiMatrix> url_sppmi_by_shift;
    std::map<int, SppmiMatrix> guardian_sppmi_by_shift;
};

SplitArtifacts build_split_artifacts(const InteractionMatrix& interactions,
                                     const SplitRatios& ratios, std::uint64_t split_seed,
                                     const std::vector<int>& shifts, bool need_url,
                                     bool need_guardian) {
    SplitArtifacts a;
    a.split = split_per_guardian(interactions, ratios, split_seed);
    if (need_url) a.url_counts = url_cooccurrence_counts(a.split.train);
    if (need_guardian) a.guardian_counts = guardian_cooccurrence_counts(a.split.train);
    for (int s : shifts) {
        if (need_url) a.url_sppmi_by_shift.emplace(s, sppmi(a.url_counts, s));
        if (need_guardian) a.guardian_sppmi_by_shift.emplace(s, sppmi(a.guardian_counts, s));
    }
    return a;
}

struct FitOutcome {
    bool failed = false;
    ModelParams params;
    double validation_recall = -1.0;
};

MetricAggregate aggregate(const std::vector<double>& xs) {
    MetricAggregate a;
    if (xs.empty()) return a;
    a.mean = std::accumulate(xs.begin(), xs.end(), 0.0) / static_cast<double>(xs.size());
    if (xs.size() > 1) {
        double var = 0.0;
        for (double x : xs) var += (x - a.mean) * (x - a.mean);
        var /= static_cast<double>(xs.size() - 1);
        a.ci95 = student_t_975(static_cast<int>(xs.size()) - 1) *
                 std::sqrt(var / static_cast<double>(xs.size()));
    }
    return a;
}

std::string fmt5(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.5f", v);
    return buf;
}

}  // namespace

double student_t_975(int dof) {
    // two-sided 95% quantiles; 1.96 beyond the tabulated range
    static const double table[] = {12.706, 4.303, 3.182, 2.776, 2.571, 2.447, 2.365,
                                   2.306,  2.262, 2.228, 2.201, 2.179, 2.160, 2.145,
                                   2.131,  2.120, 2.110, 2.101, 2.093, 2.086};
    if (dof < 1) return 0.0;
    if (dof <= 20) return table[dof - 1];
    if (dof <= 30) return 2.042;
    return 1.96;
}

double random_ranking_recall_expectation(const SplitTriple& split, int k, CandidatePolicy policy) {
    double sum = 0.0;
    std::size_t n = 0;
    const Index m = split.train.n_urls();
    for (Index g = 0; g < split.train.n_guardians(); ++g) {
        if (split.test.row(g).empty()) continue;
        std::size_t excluded = 0;
        if (policy != CandidatePolicy::all) excluded += split.train.row(g).size();
        if (policy == CandidatePolicy::exclude_train_val) excluded += split.validation.row(g).size();
        double candidates = static_cast<double>(m) - static_cast<double>(excluded);
        if (candidates <= 0) continue;
        sum += std::min(1.0, static_cast<double>(k) / candidates);
        ++n;
    }
    return n > 0 ? sum / static_cast<double>(n) : 0.0;
}

namespace {

// One variant evaluated against prebuilt split artifacts. Grid points are
// fitted in parallel; selection is by validation Recall@10.
RepeatResult run_variant_on_split(const ExperimentData& data, const SplitArtifacts& arts,
                                  const std::vector<Hyperparams>& points, int jobs,
                                  const EvalOptions& eval, std::uint64_t master_seed,
                                  std::uint64_t fit_salt) {
    RepeatResult rr;
    rr.split_seed = arts.split.seed;
    std::vector<FitOutcome> outcomes(points.size());
    parallel_for(points.size(), jobs, [&](std::size_t pi) {
        const Hyperparams& h = points[pi];
        ModelInputs in;
        in.interactions = &arts.split.train;
        if (h.flags.use_url_sppmi) in.url_sppmi = &arts.url_sppmi_by_shift.at(h.shift);
        if (h.flags.use_guardian_sppmi)
            in.guardian_sppmi = &arts.guardian_sppmi_by_shift.at(h.shift);
        if (h.flags.use_social) in.social = data.social;
        if (h.flags.use_guardian_sim) in.guardian_sim = data.guardian_sim;
        if (h.flags.use_url_sim) in.url_sim = data.url_sim;
        try {
            auto [params, trace] = fit(in, h, mix_seed(master_seed, "fit", fit_salt + pi));
            outcomes[pi].params = std::move(params);
            outcomes[pi].validation_recall =
                mean_validation_recall(outcomes[pi].params, arts.split.train,
                                       arts.split.validation, 10);
        } catch (const DivergenceError& e) {
            outcomes[pi].failed = true;
            log_warn("grid point " + std::to_string(pi) + " diverged: " + e.what());
        }
    });

    std::size_t best = points.size();
    for (std::size_t pi = 0; pi < points.size(); ++pi) {
        if (outcomes[pi].failed) {
            ++rr.failed_points;
            continue;
        }
        if (best == points.size() ||
            outcomes[pi].validation_recall > outcomes[best].validation_recall)
            best = pi;
    }
    if (best == points.size()) throw Error("every grid point diverged");
    rr.best = points[best];
    rr.best_validation_recall = outcomes[best].validation_recall;
    rr.test = evaluate(outcomes[best].params, arts.split, eval);
    return rr;
}

std::vector<int> grid_shifts(const std::vector<Hyperparams>& points) {
    std::vector<int> shifts;
    for (const auto& h : points)
        if (std::find(shifts.begin(), shifts.end(), h.shift) == shifts.end())
            shifts.push_back(h.shift);
    return shifts;
}

void check_data_for_flags(const ExperimentData& data, const VariantFlags& f) {
    if (f.use_social && !data.social) throw Error("variant needs --edges (social graph missing)");
    if (f.use_guardian_sim && !data.guardian_sim)
        throw Error("variant needs --guardian-docs (guardian similarity missing)");
    if (f.use_url_sim && !data.url_sim)
        throw Error("variant needs --url-docs (URL similarity missing)");
}

}  // namespace

ExperimentReport run_experiment(const ExperimentData& data, const VariantFlags& flags,
                                const ExperimentConfig& cfg) {
    if (!data.interactions) throw Error("run_experiment: interactions required");
    if (cfg.n_repeats < 1) throw Error("n_repeats must be >= 1");
    check_data_for_flags(data, flags);
    Hyperparams base = cfg.base;
    base.flags = flags;
    std::vector<Hyperparams> points = expand_grid(base, cfg.grid);
    if (points.empty()) throw Error("empty hyperparameter grid");

    // Side matrices are indexed against the input space, so the matrix must
    // already be min-URL filtered; splitting needs >= 3 entries per guardian.
    if (cfg.min_distinct_urls > 0)
        for (Index g = 0; g < data.interactions->n_guardians(); ++g)
            if (static_cast<int>(data.interactions->row(g).size()) < cfg.min_distinct_urls)
                throw Error("guardian " + std::to_string(g) + " has fewer than " +
                            std::to_string(cfg.min_distinct_urls) +
                            " URLs; run filter_min_urls (prepare step) first");
    const InteractionMatrix* interactions = data.interactions;

    ExperimentReport report;
    report.model = "custom";
    report.ks = cfg.eval.ks;
    const bool need_url = flags.use_url_sppmi;
    const bool need_guardian = flags.use_guardian_sppmi;
    const auto shifts = grid_shifts(points);
    for (int r = 0; r < cfg.n_repeats; ++r) {
        SplitArtifacts arts = build_split_artifacts(
            *interactions, cfg.ratios, mix_seed(cfg.seed, "split", static_cast<std::uint64_t>(r)),
            shifts, need_url, need_guardian);
        report.repeats.push_back(run_variant_on_split(
            data, arts, points, cfg.jobs, cfg.eval, cfg.seed,
            static_cast<std::uint64_t>(r) * 1000003ull));
    }
    for (int k : report.ks) {
        std::vector<double> rec, nd, mp;
        for (const auto& rr : report.repeats) {
            rec.push_back(rr.test.recall.at(k));
            nd.push_back(rr.test.ndcg.at(k));
            mp.push_back(rr.test.map.at(k));
        }
        report.recall[k] = aggregate(rec);
        report.ndcg[k] = aggregate(nd);
        report.map[k] = aggregate(mp);
    }
    return report;
}

AblationReport run_ablation(const ExperimentData& data, const ExperimentConfig& cfg) {
    if (!data.interactions) throw Error("run_ablation: interactions required");
    for (VariantKind v : all_variants()) check_data_for_flags(data, variant_flags(v));

    AblationReport report;
    report.ks = cfg.eval.ks;
    report.n_repeats = cfg.n_repeats;
    report.seed = cfg.seed;

    // one grid per variant (inactive parameters collapse)
    std::vector<std::vector<Hyperparams>> grids;
    std::vector<int> shifts;
    for (VariantKind v : all_variants()) {
        Hyperparams base = cfg.base;
        base.flags = variant_flags(v);
        grids.push_back(expand_grid(base, cfg.grid));
        for (int s : grid_shifts(grids.back()))
            if (std::find(shifts.begin(), shifts.end(), s) == shifts.end()) shifts.push_back(s);
    }

    std::vector<std::vector<RepeatResult>> results(all_variants().size());
    for (int r = 0; r < cfg.n_repeats; ++r) {
        SplitArtifacts arts = build_split_artifacts(
            *data.interactions, cfg.ratios,
            mix_seed(cfg.seed, "split", static_cast<std::uint64_t>(r)), shifts, true, true);
        for (std::size_t vi = 0; vi < all_variants().size(); ++vi) {
            results[vi].push_back(run_variant_on_split(
                data, arts, grids[vi], cfg.jobs, cfg.eval, cfg.seed,
                (static_cast<std::uint64_t>(r) * 101 + vi) * 1000003ull));
        }
    }

    for (std::size_t vi = 0; vi < all_variants().size(); ++vi) {
        AblationRow row;
        row.name = variant_name(all_variants()[vi]);
        for (int k : report.ks) {
            std::vector<double> rec, nd, mp;
            for (const auto& rr : results[vi]) {
                rec.push_back(rr.test.recall.at(k));
                nd.push_back(rr.test.ndcg.at(k));
                mp.push_back(rr.test.map.at(k));
            }
            auto ar = aggregate(rec), an = aggregate(nd), am = aggregate(mp);
            row.recall[k] = ar.mean;
            row.recall_ci[k] = ar.ci95;
            row.ndcg[k] = an.mean;
            row.ndcg_ci[k] = an.ci95;
            row.map[k] = am.mean;
            row.map_ci[k] = am.ci95;
        }
        report.rows.push_back(std::move(row));
    }

    // per-column ranks (1 = best); ties share the better rank
    const std::size_t n_rows = report.rows.size();
    std::vector<std::vector<double>> columns;
    for (int k : report.ks) {
        std::vector<double> rec, nd, mp;
        for (const auto& row : report.rows) {
            rec.push_back(row.recall.at(k));
            nd.push_back(row.ndcg.at(k));
            mp.push_back(row.map.at(k));
        }
        columns.push_back(rec);
        columns.push_back(nd);
        columns.push_back(mp);
    }
    for (auto& row : report.rows) row.ranks.assign(columns.size(), 0);
    for (std::size_t c = 0; c < columns.size(); ++c) {
        for (std::size_t i = 0; i < n_rows; ++i) {
            int rank = 1;
            for (std::size_t j = 0; j < n_rows; ++j)
                if (columns[c][j] > columns[c][i]) ++rank;
            report.rows[i].ranks[c] = rank;
        }
    }
    for (auto& row : report.rows) {
        double s = 0.0;
        for (int r : row.ranks) s += r;
        row.avg_rank = s / static_cast<double>(row.ranks.size());
    }
    return report;
}

nlohmann::ordered_json ExperimentReport::to_json() const {
    nlohmann::ordered_json j;
    j["model"] = model;
    j["ks"] = ks;
    nlohmann::ordered_json reps = nlohmann::ordered_json::array();
    for (const auto& r : repeats) {
        nlohmann::ordered_json jr;
        jr["split_seed"] = r.split_seed;
        jr["best"] = {{"alpha", r.best.alpha},   {"beta", r.best.beta},
                      {"gamma", r.best.gamma},   {"lambda", r.best.lambda},
                      {"shift", r.best.shift},   {"latent_dim", r.best.latent_dim},
                      {"eta", r.best.eta}};
        jr["validation_recall10"] = r.best_validation_recall;
        jr["failed_points"] = r.failed_points;
        nlohmann::ordered_json jm;
        for (int k : ks) {
            jm["recall@" + std::to_string(k)] = r.test.recall.at(k);
            jm["ndcg@" + std::to_string(k)] = r.test.ndcg.at(k);
            jm["map@" + std::to_string(k)] = r.test.map.at(k);
        }
        jr["test"] = jm;
        reps.push_back(jr);
    }
    j["repeats"] = reps;
    nlohmann::ordered_json agg;
    for (int k : ks) {
        agg["recall@" + std::to_string(k)] = {{"mean", recall.at(k).mean}, {"ci95", recall.at(k).ci95}};
        agg["ndcg@" + std::to_string(k)] = {{"mean", ndcg.at(k).mean}, {"ci95", ndcg.at(k).ci95}};
        agg["map@" + std::to_string(k)] = {{"mean", map.at(k).mean}, {"ci95", map.at(k).ci95}};
    }
    j["aggregate"] = agg;
    return j;
}

std::string ExperimentReport::to_text() const {
    std::ostringstream os;
    os << "model: " << model << "  (" << repeats.size() << " repeats)\n";
    os << "metric            mean      ci95\n";
    for (int k : ks) {
        os << "recall@" << k << (k < 10 ? "         " : "        ") << fmt5(recall.at(k).mean)
           << "   " << fmt5(recall.at(k).ci95) << "\n";
        os << "ndcg@" << k << (k < 10 ? "           " : "          ") << fmt5(ndcg.at(k).mean)
           << "   " << fmt5(ndcg.at(k).ci95) << "\n";
        os << "map@" << k << (k < 10 ? "            " : "           ") << fmt5(map.at(k).mean)
           << "   " << fmt5(map.at(k).ci95) << "\n";
    }
    return os.str();
}

nlohmann::ordered_json AblationReport::to_json() const {
    nlohmann::ordered_json j;
    j["ks"] = ks;
    j["n_repeats"] = n_repeats;
    j["seed"] = seed;
    nlohmann::ordered_json jrows = nlohmann::ordered_json::array();
    for (const auto& row : rows) {
        nlohmann::ordered_json jr;
        jr["model"] = row.name;
        nlohmann::ordered_json jm;
        std::size_t c = 0;
        for (int k : ks) {
            jm["recall@" + std::to_string(k)] = {{"mean", row.recall.at(k)},
                                                 {"ci95", row.recall_ci.at(k)},
                                                 {"rank", row.ranks[c++]}};
            jm["ndcg@" + std::to_string(k)] = {{"mean", row.ndcg.at(k)},
                                               {"ci95", row.ndcg_ci.at(k)},
                                               {"rank", row.ranks[c++]}};
            jm["map@" + std::to_string(k)] = {{"mean", row.map.at(k)},
                                              {"ci95", row.map_ci.at(k)},
                                              {"rank", row.ranks[c++]}};
        }
        jr["metrics"] = jm;
        jr["avg_rank"] = row.avg_rank;
        jrows.push_back(jr);
    }
    j["rows"] = jrows;
    return j;
}

std::string AblationReport::to_text() const {
    std::ostringstream os;
    os << "ablation over " << n_repeats << " splits (seed " << seed << ")\n";
    os << std::left;
    os.width(22);
    os << "model";
    for (int k : ks) {
        for (const char* m : {"Recall@", "NDCG@", "MAP@"}) {
            std::string h = m + std::to_string(k);
            os.width(14);
            os << h;
        }
    }
    os << "Avg.Rank\n";
    for (const auto& row : rows) {
        os.width(22);
        os << row.name;
        std::size_t c = 0;
        for (int k : ks) {
            for (double v : {row.recall.at(k), row.ndcg.at(k), row.map.at(k)}) {
                std::string cell = fmt5(v) + " (" + std::to_string(row.ranks[c++]) + ")";
                os.width(14);
                os << cell;
            }
        }
        char buf[16];
        std::snprintf(buf, sizeof(buf), "%.1f", row.avg_rank);
        os << buf << "\n";
    }
    return os.str();
}

}  // namespace guardrec
