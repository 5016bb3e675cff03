#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>

#include <nlohmann/json.hpp>

#include "guardrec/analytics.hpp"
#include "guardrec/baselines.hpp"
#include "guardrec/experiment.hpp"
#include "guardrec/io.hpp"

namespace fs = std::filesystem;
using namespace guardrec;
using nlohmann::ordered_json;

namespace {

void write_text(const fs::path& path, const std::string& content) {
    std::ofstream out(path);
    if (!out) throw Error("cannot write " + path.string());
    out << content;
}

void write_json(const fs::path& path, const ordered_json& j) {
    write_text(path, j.dump(2) + "\n");
}

ordered_json read_json(const fs::path& path) {
    std::ifstream in(path);
    if (!in) throw Error("cannot open " + path.string());
    ordered_json j;
    in >> j;
    return j;
}

std::vector<int> parse_int_list(const std::string& s) {
    std::vector<int> out;
    std::stringstream ss(s);
    std::string item;
    while (std::getline(ss, item, ','))
        if (!item.empty()) out.push_back(std::stoi(item));
    if (out.empty()) throw Error("empty list: '" + s + "'");
    return out;
}

std::vector<double> parse_double_list(const std::string& s) {
    std::vector<double> out;
    std::stringstream ss(s);
    std::string item;
    while (std::getline(ss, item, ','))
        if (!item.empty()) out.push_back(std::stod(item));
    return out;
}

std::vector<std::string> parse_string_list(const std::string& s) {
    std::vector<std::string> out;
    std::stringstream ss(s);
    std::string item;
    while (std::getline(ss, item, ','))
        if (!item.empty()) out.push_back(item);
    return out;
}

// ---------------------------------------------------------------- synth ----

struct SynthArgs {
    std::string out;
    SyntheticConfig cfg;
    std::uint64_t seed = 42;
};

int cmd_synth(const SynthArgs& a) {
    fs::create_directories(a.out);
    auto bundle = generate_synthetic(a.cfg, a.seed);
    fs::path dir(a.out);
    save_interactions(bundle.interactions, (dir / "interactions.tsv").string(),
                      InteractionFormat::tsv);
    save_social_edges(bundle.social, bundle.interactions.guardian_ids(),
                      (dir / "edges.tsv").string());
    save_documents(bundle.guardian_docs, (dir / "guardian_docs.jsonl").string());
    save_documents(bundle.url_docs, (dir / "url_docs.jsonl").string());

    ordered_json j;
    j["tool"] = "guardrec synth";
    j["seed"] = a.seed;
    j["config"] = {{"n_guardians", a.cfg.n_guardians},
                   {"n_urls", a.cfg.n_urls},
                   {"blocks", a.cfg.n_blocks},
                   {"in_rate", a.cfg.in_block_rate},
                   {"cross_rate", a.cfg.cross_block_rate},
                   {"social_in_rate", a.cfg.social_in_rate},
                   {"social_cross_rate", a.cfg.social_cross_rate}};
    j["planted_within_fraction"] = bundle.planted_within_fraction;
    j["empirical_within_fraction"] = bundle.empirical_within_fraction;
    j["guardian_block"] = bundle.guardian_block;
    j["url_block"] = bundle.url_block;
    write_json(dir / "bundle.json", j);
    std::cout << "wrote synthetic bundle (" << bundle.interactions.nnz() << " interactions) to "
              << a.out << "\n";
    return 0;
}

// -------------------------------------------------------------- prepare ----

struct PrepareArgs {
    std::string interactions;
    std::string format = "tsv";
    std::string edges, guardian_docs, url_docs;
    std::string guardian_vectors, url_vectors;
    int min_urls = 3;
    int shift = 1;
    int topk_sim = 50;
    int vocab_size = 8000;
    std::uint64_t seed = 0;
    std::string out;
};

std::string fold_name(int f) { return f == 0 ? "train" : (f == 1 ? "validation" : "test"); }

int cmd_prepare(const PrepareArgs& a) {
    fs::create_directories(a.out);
    fs::path dir(a.out);

    auto format = a.format == "jsonl" ? InteractionFormat::jsonl : InteractionFormat::tsv;
    auto raw = load_interactions(a.interactions, format);
    auto interactions = filter_min_urls(raw, a.min_urls);
    log_info("filtered " + std::to_string(raw.n_guardians()) + " -> " +
             std::to_string(interactions.n_guardians()) + " guardians, " +
             std::to_string(raw.n_urls()) + " -> " + std::to_string(interactions.n_urls()) +
             " urls");

    ordered_json manifest;
    manifest["tool"] = "guardrec prepare";
    manifest["seed"] = a.seed;
    manifest["config"] = {{"interactions", a.interactions},
                          {"format", a.format},
                          {"edges", a.edges},
                          {"guardian_docs", a.guardian_docs},
                          {"url_docs", a.url_docs},
                          {"guardian_vectors", a.guardian_vectors},
                          {"url_vectors", a.url_vectors},
                          {"min_urls", a.min_urls},
                          {"shift", a.shift},
                          {"topk_sim", a.topk_sim},
                          {"vocab_size", a.vocab_size}};
    ordered_json counts;
    counts["n_guardians"] = interactions.n_guardians();
    counts["n_urls"] = interactions.n_urls();
    counts["interactions"] = interactions.nnz();

    std::vector<std::string> artifact_names;

    save_interactions(interactions, (dir / "interactions.tsv").string(), InteractionFormat::tsv);
    artifact_names.push_back("interactions.tsv");

    auto split = split_per_guardian(interactions, SplitRatios{}, a.seed);
    {
        std::ofstream out(dir / "splits.tsv");
        if (!out) throw Error("cannot write splits.tsv");
        int fold = 0;
        for (const auto* part : {&split.train, &split.validation, &split.test}) {
            for (const auto& t : part->triplets())
                out << interactions.guardian_ids().id(t.guardian) << '\t'
                    << interactions.url_ids().id(t.url) << '\t' << fold_name(fold) << '\n';
            ++fold;
        }
    }
    artifact_names.push_back("splits.tsv");
    counts["train"] = split.train.nnz();
    counts["validation"] = split.validation.nnz();
    counts["test"] = split.test.nnz();

    // co-occurrence comes from the training fold only
    save_sppmi_tsv(sppmi(url_cooccurrence_counts(split.train), a.shift),
                   (dir / "url_sppmi.tsv").string());
    artifact_names.push_back("url_sppmi.tsv");
    save_sppmi_tsv(sppmi(guardian_cooccurrence_counts(split.train), a.shift),
                   (dir / "guardian_sppmi.tsv").string());
    artifact_names.push_back("guardian_sppmi.tsv");

    if (!a.edges.empty()) {
        auto res = load_social_edges(a.edges, interactions.guardian_ids());
        counts["social_edges"] = res.graph.n_edges();
        counts["skipped_unknown_edges"] = res.skipped_unknown;
        save_social_edges(res.graph, interactions.guardian_ids(), (dir / "social.tsv").string());
        artifact_names.push_back("social.tsv");
    }

    auto build_sim = [&](const std::string& docs_path, const std::string& vectors_path,
                         const IdIndex& space, const std::string& artifact) {
        DocVectors vecs;
        if (!vectors_path.empty())
            vecs = load_precomputed_vectors(vectors_path);
        else if (!docs_path.empty())
            vecs = tfidf_vectors(load_documents(docs_path), a.vocab_size);
        else
            return;
        std::size_t skipped = 0;
        auto aligned = align_to_index(vecs, space, &skipped);
        counts["skipped_" + artifact] = skipped;
        auto bundle = cosine_similarity_matrix(aligned, a.topk_sim);
        save_similarity_tsv(bundle, (dir / (artifact + ".tsv")).string());
        artifact_names.push_back(artifact + ".tsv");
    };
    build_sim(a.guardian_docs, a.guardian_vectors, interactions.guardian_ids(), "guardian_sim");
    build_sim(a.url_docs, a.url_vectors, interactions.url_ids(), "url_sim");

    manifest["counts"] = counts;
    ordered_json artifacts = ordered_json::array();
    for (const auto& name : artifact_names)
        artifacts.push_back({{"name", name}, {"hash", file_hash_hex((dir / name).string())}});
    manifest["artifacts"] = artifacts;
    write_json(dir / "manifest.json", manifest);
    std::cout << "prepared " << artifact_names.size() << " artifacts in " << a.out << "\n";
    return 0;
}

// ------------------------------------------------------- prepared loader ---

struct PreparedData {
    InteractionMatrix interactions;
    SplitTriple split;
    std::optional<SocialGraph> social;
    std::optional<SimilarityBundle> guardian_sim;
    std::optional<SimilarityBundle> url_sim;
    int prepare_shift = 1;
    std::uint64_t prepare_seed = 0;
};

PreparedData load_prepared(const std::string& data_dir) {
    fs::path dir(data_dir);
    if (!fs::exists(dir / "manifest.json"))
        throw Error(data_dir + " has no manifest.json; run `guardrec prepare` first");
    auto manifest = read_json(dir / "manifest.json");
    PreparedData d;
    d.prepare_shift = manifest["config"].value("shift", 1);
    d.prepare_seed = manifest.value("seed", 0ull);
    d.interactions =
        load_interactions((dir / "interactions.tsv").string(), InteractionFormat::tsv);

    std::ifstream in(dir / "splits.tsv");
    if (!in) throw Error("cannot open " + (dir / "splits.tsv").string());
    std::vector<InteractionTriplet> train, val, test;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        std::istringstream ss(line);
        std::string gid, uid, fold;
        if (!std::getline(ss, gid, '\t') || !std::getline(ss, uid, '\t') ||
            !std::getline(ss, fold))
            throw ParseError((dir / "splits.tsv").string(), line_no, "expected 3 fields");
        auto g = d.interactions.guardian_ids().find(gid);
        auto u = d.interactions.url_ids().find(uid);
        if (!g || !u)
            throw ParseError((dir / "splits.tsv").string(), line_no,
                             "unknown id " + gid + "/" + uid);
        InteractionTriplet t{*g, *u, InteractionTriplet::kNoTimestamp};
        if (fold == "train")
            train.push_back(t);
        else if (fold == "validation")
            val.push_back(t);
        else if (fold == "test")
            test.push_back(t);
        else
            throw ParseError((dir / "splits.tsv").string(), line_no, "bad fold '" + fold + "'");
    }
    const Index n = d.interactions.n_guardians(), m = d.interactions.n_urls();
    d.split.seed = d.prepare_seed;
    d.split.train = InteractionMatrix(n, m, std::move(train), d.interactions.guardian_ids(),
                                      d.interactions.url_ids());
    d.split.validation = InteractionMatrix(n, m, std::move(val), d.interactions.guardian_ids(),
                                           d.interactions.url_ids());
    d.split.test = InteractionMatrix(n, m, std::move(test), d.interactions.guardian_ids(),
                                     d.interactions.url_ids());

    if (fs::exists(dir / "social.tsv"))
        d.social =
            load_social_edges((dir / "social.tsv").string(), d.interactions.guardian_ids()).graph;
    if (fs::exists(dir / "guardian_sim.tsv"))
        d.guardian_sim = load_similarity_tsv((dir / "guardian_sim.tsv").string(), n);
    if (fs::exists(dir / "url_sim.tsv"))
        d.url_sim = load_similarity_tsv((dir / "url_sim.tsv").string(), m);
    return d;
}

// ---------------------------------------------------------------- train ----

struct TrainArgs {
    std::string data;
    std::string model = "gau";  // gau | bpr | wmf
    std::string variant = "GAU";
    double alpha = 0.05, beta = 0.05, gamma = 0.05, lambda = 1e-5;
    int shift = -1;  // -1 keeps the prepare-time shift
    int dim = 100;
    double eta = 0.001;
    int max_iters = 500;
    double tol = 1e-5;
    bool early_stop = false;
    int epochs = 200;
    double bpr_eta = 0.05, bpr_lambda = 1e-4;
    double c_pos = 1.0, c_neg = 0.01;
    std::uint64_t seed = 0;
    std::string out;
};

int cmd_train(const TrainArgs& a) {
    auto d = load_prepared(a.data);
    fs::create_directories(a.out);
    fs::path dir(a.out);
    const int shift = a.shift > 0 ? a.shift : d.prepare_shift;

    ordered_json tj;
    tj["tool"] = "guardrec train";
    tj["seed"] = a.seed;

    if (a.model == "bpr") {
        BprHyper h;
        h.latent_dim = a.dim;
        h.eta = a.bpr_eta;
        h.lambda = a.bpr_lambda;
        h.epochs = a.epochs;
        auto params = fit_bprmf(d.split.train, h, a.seed);
        save_model(params, (dir / "model.bin").string());
        tj["model"] = "bpr";
        tj["config"] = {{"dim", a.dim},
                        {"eta", a.bpr_eta},
                        {"lambda", a.bpr_lambda},
                        {"epochs", a.epochs}};
        write_json(dir / "trace.json", tj);
        std::cout << "trained bpr model -> " << (dir / "model.bin").string() << "\n";
        return 0;
    }

    if (a.model == "wmf") {
        SppmiMatrix r = sppmi(url_cooccurrence_counts(d.split.train), shift);
        auto [params, trace] = fit_weighted_mf(d.split.train, {a.c_pos, a.c_neg}, a.lambda, a.dim,
                                               a.eta, a.max_iters, a.seed, &r, a.tol);
        save_model(params, (dir / "model.bin").string());
        tj["model"] = "wmf";
        tj["config"] = {{"dim", a.dim},     {"eta", a.eta},     {"lambda", a.lambda},
                        {"c_pos", a.c_pos}, {"c_neg", a.c_neg}, {"shift", shift},
                        {"max_iters", a.max_iters}};
        tj["iterations"] = trace.iterations;
        tj["stop_reason"] = trace.stop_reason;
        tj["loss"] = {{"initial", trace.loss_history.front()},
                      {"final", trace.loss_history.back()}};
        write_json(dir / "trace.json", tj);
        std::cout << "trained wmf model -> " << (dir / "model.bin").string() << "\n";
        return 0;
    }

    Hyperparams h;
    h.latent_dim = a.dim;
    h.lambda = a.lambda;
    h.alpha = a.alpha;
    h.beta = a.beta;
    h.gamma = a.gamma;
    h.shift = shift;
    h.eta = a.eta;
    h.max_iters = a.max_iters;
    h.convergence_tol = a.tol;
    h.flags = variant_flags(variant_from_name(a.variant));

    SppmiMatrix r, g;
    ModelInputs in;
    in.interactions = &d.split.train;
    if (h.flags.use_url_sppmi) {
        r = sppmi(url_cooccurrence_counts(d.split.train), shift);
        in.url_sppmi = &r;
    }
    if (h.flags.use_guardian_sppmi) {
        g = sppmi(guardian_cooccurrence_counts(d.split.train), shift);
        in.guardian_sppmi = &g;
    }
    if (h.flags.use_social) {
        if (!d.social)
            throw Error("variant " + a.variant +
                        " needs the social graph; re-run prepare with --edges");
        in.social = &*d.social;
    }
    if (h.flags.use_guardian_sim) {
        if (!d.guardian_sim)
            throw Error("variant " + a.variant +
                        " needs guardian similarity; re-run prepare with --guardian-docs");
        in.guardian_sim = &*d.guardian_sim;
    }
    if (h.flags.use_url_sim) {
        if (!d.url_sim)
            throw Error("variant " + a.variant +
                        " needs URL similarity; re-run prepare with --url-docs");
        in.url_sim = &*d.url_sim;
    }

    FitOptions opts;
    opts.early_stop = a.early_stop;
    if (a.early_stop) opts.validation = &d.split.validation;
    auto [params, trace] = fit(in, h, a.seed, opts);
    save_model(params, (dir / "model.bin").string());

    tj["model"] = "gau";
    tj["variant"] = a.variant;
    tj["config"] = {{"dim", a.dim},   {"lambda", a.lambda},       {"alpha", a.alpha},
                    {"beta", a.beta}, {"gamma", a.gamma},         {"shift", shift},
                    {"eta", a.eta},   {"max_iters", a.max_iters}, {"tol", a.tol},
                    {"early_stop", a.early_stop}};
    tj["iterations"] = trace.iterations;
    tj["stop_reason"] = trace.stop_reason;
    ordered_json losses = ordered_json::array();
    for (double v : trace.loss_history) losses.push_back(v);
    tj["loss_history"] = losses;
    const auto& last = trace.term_history.back();
    tj["final_terms"] = {{"interaction", last.interaction},
                         {"l2", last.l2},
                         {"url_sppmi", last.url_sppmi},
                         {"guardian_sppmi", last.guardian_sppmi},
                         {"social", last.social},
                         {"guardian_sim", last.guardian_sim},
                         {"url_sim", last.url_sim}};
    write_json(dir / "trace.json", tj);
    std::cout << "trained " << a.variant << " (" << trace.iterations << " iterations, "
              << trace.stop_reason << ") -> " << (dir / "model.bin").string() << "\n";
    return 0;
}

// ------------------------------------------------------------- evaluate ----

struct EvaluateArgs {
    std::string data;
    std::string model;
    std::string ks = "5,10,15";
    bool cohorts = false;
    bool include_seen = false;
    std::string out;
};

int cmd_evaluate(const EvaluateArgs& a) {
    auto d = load_prepared(a.data);
    auto params = load_model(a.model);
    if (params.n_guardians() != d.interactions.n_guardians() ||
        params.n_urls() != d.interactions.n_urls())
        throw Error("model dimensions do not match the prepared data");
    EvalOptions opts;
    opts.ks = parse_int_list(a.ks);
    if (a.include_seen) opts.policy = CandidatePolicy::all;
    auto summary = evaluate(params, d.split, opts);

    fs::create_directories(a.out);
    fs::path dir(a.out);
    ordered_json j;
    j["tool"] = "guardrec evaluate";
    j["model_file"] = a.model;
    j["ks"] = opts.ks;
    j["candidate_policy"] = a.include_seen ? "all" : "exclude_train_val";
    j["n_evaluated"] = summary.n_evaluated;
    j["n_skipped_empty_test"] = summary.n_skipped_empty_test;
    ordered_json metrics;
    std::ostringstream text;
    text << "metric        value\n";
    for (int k : opts.ks) {
        metrics["recall@" + std::to_string(k)] = summary.recall.at(k);
        metrics["ndcg@" + std::to_string(k)] = summary.ndcg.at(k);
        metrics["map@" + std::to_string(k)] = summary.map.at(k);
        char buf[120];
        std::snprintf(buf, sizeof(buf),
                      "recall@%-4d   %.5f\nndcg@%-4d     %.5f\nmap@%-4d      %.5f\n", k,
                      summary.recall.at(k), k, summary.ndcg.at(k), k, summary.map.at(k));
        text << buf;
    }
    j["metrics"] = metrics;
    if (a.cohorts) {
        auto rep = cohort_breakdown(params, d.split, CohortSpec{}, opts);
        ordered_json jc;
        auto dump = [&](const char* name, const MetricsSummary& s) {
            ordered_json m;
            for (int k : opts.ks) {
                m["recall@" + std::to_string(k)] = s.recall.at(k);
                m["ndcg@" + std::to_string(k)] = s.ndcg.at(k);
                m["map@" + std::to_string(k)] = s.map.at(k);
            }
            m["n_evaluated"] = s.n_evaluated;
            jc[name] = m;
        };
        dump("cold", rep.cold);
        dump("warm", rep.warm);
        dump("active", rep.active);
        j["cohorts"] = jc;
    }
    write_json(dir / "report.json", j);
    write_text(dir / "report.txt", text.str());
    std::cout << text.str();
    return 0;
}

// ------------------------------------------------------------ recommend ----

struct RecommendArgs {
    std::string data;
    std::string model;
    std::string guardians;
    int k = 5;
    bool include_seen = false;
};

int cmd_recommend(const RecommendArgs& a) {
    auto d = load_prepared(a.data);
    auto params = load_model(a.model);
    if (params.n_guardians() != d.interactions.n_guardians() ||
        params.n_urls() != d.interactions.n_urls())
        throw Error("model dimensions do not match the prepared data");
    for (const auto& gid : parse_string_list(a.guardians)) {
        auto g = d.interactions.guardian_ids().find(gid);
        if (!g) throw Error("unknown guardian id '" + gid + "'");
        std::vector<Index> exclude;
        if (!a.include_seen) {
            auto row = d.interactions.row(*g);
            exclude.assign(row.begin(), row.end());
        }
        for (const auto& [u, score] : recommend_topk(params, *g, a.k, exclude)) {
            char buf[32];
            std::snprintf(buf, sizeof(buf), "%.6f", score);
            std::cout << gid << '\t' << d.interactions.url_ids().id(u) << '\t' << buf << "\n";
        }
    }
    return 0;
}

// --------------------------------------------------------------- ablate ----

struct AblateArgs {
    std::string data;
    int repeats = 5;
    int dim = 32;
    double alpha = 0.05, beta = 0.05, gamma = 0.05, lambda = 1e-5;
    std::string grid_alpha, grid_beta, grid_gamma, grid_lambda;
    std::string grid_shift = "1,50";
    double eta = 0.001;
    int max_iters = 1500;
    double tol = 1e-5;
    std::string ks = "5,10,15";
    std::uint64_t seed = 0;
    int jobs = 0;
    std::string out;
};

int cmd_ablate(const AblateArgs& a) {
    auto d = load_prepared(a.data);
    if (!d.social) throw Error("ablation needs the social graph; re-run prepare with --edges");
    if (!d.guardian_sim)
        throw Error("ablation needs guardian similarity; re-run prepare with --guardian-docs");
    if (!d.url_sim) throw Error("ablation needs URL similarity; re-run prepare with --url-docs");

    ExperimentData data;
    data.interactions = &d.interactions;
    data.social = &*d.social;
    data.guardian_sim = &*d.guardian_sim;
    data.url_sim = &*d.url_sim;

    ExperimentConfig cfg;
    cfg.base.latent_dim = a.dim;
    cfg.base.lambda = a.lambda;
    cfg.base.alpha = a.alpha;
    cfg.base.beta = a.beta;
    cfg.base.gamma = a.gamma;
    cfg.base.eta = a.eta;
    cfg.base.max_iters = a.max_iters;
    cfg.base.convergence_tol = a.tol;
    cfg.grid.alphas = parse_double_list(a.grid_alpha);
    cfg.grid.betas = parse_double_list(a.grid_beta);
    cfg.grid.gammas = parse_double_list(a.grid_gamma);
    cfg.grid.lambdas = parse_double_list(a.grid_lambda);
    cfg.grid.shifts = parse_int_list(a.grid_shift);
    cfg.n_repeats = a.repeats;
    cfg.seed = a.seed;
    cfg.jobs = a.jobs;
    cfg.eval.ks = parse_int_list(a.ks);

    auto report = run_ablation(data, cfg);

    fs::create_directories(a.out);
    fs::path dir(a.out);
    ordered_json j = report.to_json();
    j["config"] = {{"dim", a.dim},
                   {"alpha", a.alpha},
                   {"beta", a.beta},
                   {"gamma", a.gamma},
                   {"lambda", a.lambda},
                   {"grid_alpha", a.grid_alpha},
                   {"grid_beta", a.grid_beta},
                   {"grid_gamma", a.grid_gamma},
                   {"grid_lambda", a.grid_lambda},
                   {"grid_shift", a.grid_shift},
                   {"eta", a.eta},
                   {"max_iters", a.max_iters},
                   {"tol", a.tol},
                   {"repeats", a.repeats},
                   {"seed", a.seed}};
    write_json(dir / "ablation.json", j);
    write_text(dir / "ablation.txt", report.to_text());
    std::cout << report.to_text();
    return 0;
}

// -------------------------------------------------------------- analyze ----

struct AnalyzeArgs {
    std::string tweets;
    int top_n = 250;
    std::string out;
};

int cmd_analyze(const AnalyzeArgs& a) {
    auto loaded = load_tweets(a.tweets);
    auto conversations = build_conversations(loaded.tweets);

    fs::create_directories(a.out);
    fs::path dir(a.out);
    ordered_json j;
    j["tool"] = "guardrec analyze";
    j["tweets"] = {{"accepted", loaded.tweets.size()}, {"skipped", loaded.skipped}};
    j["conversations"] = {{"records", conversations.records.size()},
                          {"orphan_s_tweets", conversations.orphan_s_tweets},
                          {"d_without_parent", conversations.d_without_parent}};

    if (!conversations.records.empty()) {
        auto stats = d_response_times(conversations.records);
        ordered_json js;
        js["mean_seconds"] = stats.mean_seconds;
        js["median_seconds"] = stats.median_seconds;
        js["n"] = stats.n;
        js["rejected_negative"] = stats.rejected_negative;
        js["within_1h"] = stats.fraction_within(3600);
        js["within_1d"] = stats.fraction_within(86400);
        js["within_1w"] = stats.fraction_within(604800);
        j["d_response_times"] = js;

        auto inter = s_inter_posting_pairs(conversations.records);
        j["s_inter_posting"] = {{"mean_delta_seconds", inter.mean_delta_seconds},
                                {"n_deltas", inter.n_deltas},
                                {"n_pairs", inter.pairs.size()}};

        // raw samples so external tools can run the significance tests
        std::ofstream gaps(dir / "d_response_gaps.csv");
        gaps << "gap_seconds\n";
        for (const auto& rec : conversations.records) {
            auto gap = rec.d_tweet_time - rec.original_post_time;
            if (gap >= 0) gaps << gap << "\n";
        }
        std::ofstream deltas(dir / "s_inter_posting_deltas.csv");
        deltas << "delta_i,delta_next\n";
        for (const auto& [d1, d2] : inter.pairs) deltas << d1 << "," << d2 << "\n";
    }

    auto monthly = monthly_counts(loaded.tweets);
    {
        std::ofstream csv(dir / "monthly_counts.csv");
        csv << "month,d_tweets,s_tweets\n";
        for (std::size_t i = 0; i < monthly.months.size(); ++i)
            csv << monthly.months[i] << "," << monthly.d_counts[i] << "," << monthly.s_counts[i]
                << "\n";
    }
    j["monthly"] = {{"months", monthly.months},
                    {"d_counts", monthly.d_counts},
                    {"s_counts", monthly.s_counts},
                    {"skipped", monthly.skipped}};

    std::vector<Document> docs;
    for (const auto& t : loaded.tweets)
        if (!t.text.empty()) docs.push_back({t.id, t.text});
    if (!docs.empty()) {
        auto top = top_terms(docs, a.top_n);
        ordered_json jt = ordered_json::array();
        for (const auto& [term, score] : top) jt.push_back({{"term", term}, {"score", score}});
        j["top_terms"] = jt;
    }

    write_json(dir / "analytics.json", j);
    std::cout << "analyzed " << loaded.tweets.size() << " tweets -> "
              << (dir / "analytics.json").string() << "\n";
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"guardrec: fact-checking URL recommendation toolkit"};
    app.require_subcommand(1);

    SynthArgs synth;
    auto* s = app.add_subcommand("synth", "generate a synthetic block-structured dataset");
    s->add_option("--out", synth.out, "output directory")->required();
    s->add_option("--n-guardians", synth.cfg.n_guardians);
    s->add_option("--n-urls", synth.cfg.n_urls);
    s->add_option("--blocks", synth.cfg.n_blocks);
    s->add_option("--in-rate", synth.cfg.in_block_rate);
    s->add_option("--cross-rate", synth.cfg.cross_block_rate);
    s->add_option("--social-in-rate", synth.cfg.social_in_rate);
    s->add_option("--social-cross-rate", synth.cfg.social_cross_rate);
    s->add_option("--seed", synth.seed);

    PrepareArgs prep;
    auto* p = app.add_subcommand("prepare", "build matrices, splits and similarity bundles");
    p->add_option("--interactions", prep.interactions, "interaction file")->required();
    p->add_option("--format", prep.format)->check(CLI::IsMember({"tsv", "jsonl"}));
    p->add_option("--edges", prep.edges, "social edge list (tsv)");
    p->add_option("--guardian-docs", prep.guardian_docs, "guardian documents (jsonl)");
    p->add_option("--url-docs", prep.url_docs, "URL documents (jsonl)");
    p->add_option("--guardian-vectors", prep.guardian_vectors,
                  "precomputed guardian vectors (tsv)");
    p->add_option("--url-vectors", prep.url_vectors, "precomputed URL vectors (tsv)");
    p->add_option("--min-urls", prep.min_urls);
    p->add_option("--shift", prep.shift);
    p->add_option("--topk-sim", prep.topk_sim);
    p->add_option("--vocab-size", prep.vocab_size);
    p->add_option("--seed", prep.seed);
    p->add_option("--out", prep.out)->required();

    TrainArgs train;
    auto* t = app.add_subcommand("train", "fit a model on the prepared training fold");
    t->add_option("--data", train.data, "prepare output directory")->required();
    t->add_option("--model", train.model)->check(CLI::IsMember({"gau", "bpr", "wmf"}));
    t->add_option("--variant", train.variant, "GAU, BASIC, BASIC+NW+UC, ...");
    t->add_option("--alpha", train.alpha);
    t->add_option("--beta", train.beta);
    t->add_option("--gamma", train.gamma);
    t->add_option("--lambda", train.lambda);
    t->add_option("--shift", train.shift);
    t->add_option("--dim", train.dim);
    t->add_option("--eta", train.eta);
    t->add_option("--max-iters", train.max_iters);
    t->add_option("--tol", train.tol);
    t->add_flag("--early-stop", train.early_stop, "stop on validation Recall@10");
    t->add_option("--epochs", train.epochs, "bpr epochs");
    t->add_option("--bpr-eta", train.bpr_eta);
    t->add_option("--bpr-lambda", train.bpr_lambda);
    t->add_option("--c-pos", train.c_pos, "wmf positive confidence");
    t->add_option("--c-neg", train.c_neg, "wmf negative confidence");
    t->add_option("--seed", train.seed);
    t->add_option("--out", train.out)->required();

    EvaluateArgs eval;
    auto* e = app.add_subcommand("evaluate", "score a trained model on the test fold");
    e->add_option("--data", eval.data)->required();
    e->add_option("--model", eval.model)->required();
    e->add_option("--k", eval.ks, "comma-separated cutoffs");
    e->add_flag("--cohorts", eval.cohorts, "add cold/warm/active breakdown");
    e->add_flag("--include-seen", eval.include_seen, "rank seen URLs as candidates too");
    e->add_option("--out", eval.out)->required();

    RecommendArgs rec;
    auto* r = app.add_subcommand("recommend", "print top-k URLs for guardians");
    r->add_option("--data", rec.data)->required();
    r->add_option("--model", rec.model)->required();
    r->add_option("--guardian", rec.guardians, "comma-separated guardian ids")->required();
    r->add_option("-k,--k", rec.k);
    r->add_flag("--include-seen", rec.include_seen);

    AblateArgs abl;
    auto* b = app.add_subcommand("ablate", "run the six-variant ablation study");
    b->add_option("--data", abl.data)->required();
    b->add_option("--repeats", abl.repeats);
    b->add_option("--dim", abl.dim);
    b->add_option("--alpha", abl.alpha);
    b->add_option("--beta", abl.beta);
    b->add_option("--gamma", abl.gamma);
    b->add_option("--lambda", abl.lambda);
    b->add_option("--grid-alpha", abl.grid_alpha, "comma-separated alpha grid");
    b->add_option("--grid-beta", abl.grid_beta);
    b->add_option("--grid-gamma", abl.grid_gamma);
    b->add_option("--grid-lambda", abl.grid_lambda);
    b->add_option("--grid-shift", abl.grid_shift);
    b->add_option("--eta", abl.eta);
    b->add_option("--max-iters", abl.max_iters);
    b->add_option("--tol", abl.tol);
    b->add_option("--k", abl.ks);
    b->add_option("--seed", abl.seed);
    b->add_option("--jobs", abl.jobs, "parallel fits (0 = all cores)");
    b->add_option("--out", abl.out)->required();

    AnalyzeArgs ana;
    auto* n = app.add_subcommand("analyze", "descriptive statistics from tweets.jsonl");
    n->add_option("--tweets", ana.tweets)->required();
    n->add_option("--top-terms", ana.top_n);
    n->add_option("--out", ana.out)->required();

    CLI11_PARSE(app, argc, argv);

    try {
        if (*s) return cmd_synth(synth);
        if (*p) return cmd_prepare(prep);
        if (*t) return cmd_train(train);
        if (*e) return cmd_evaluate(eval);
        if (*r) return cmd_recommend(rec);
        if (*b) return cmd_ablate(abl);
        if (*n) return cmd_analyze(ana);
    } catch (const ParseError& ex) {
        std::cerr << "error (input): " << ex.what() << "\n";
        return 2;
    } catch (const DivergenceError& ex) {
        std::cerr << "error (divergence): " << ex.what() << "\n";
        return 3;
    } catch (const Error& ex) {
        std::cerr << "error: " << ex.what() << "\n";
        return 1;
    } catch (const std::exception& ex) {
        std::cerr << "error: " << ex.what() << "\n";
        return 1;
    }
    return 0;
}
