#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

// End-to-end checks that drive the installed binary through its subcommands.

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

namespace fs = std::filesystem;

namespace {

std::string cli_path() {
    const char* p = std::getenv("GUARDREC_CLI");
    REQUIRE_MESSAGE(p != nullptr, "GUARDREC_CLI must point at the guardrec binary");
    return p;
}

int run(const std::string& args, const fs::path& stdout_file = {}) {
    std::string cmd = cli_path() + " " + args + " 2>/dev/null";
    if (!stdout_file.empty()) cmd += " > " + stdout_file.string();
    else cmd += " > /dev/null";
    int rc = std::system(cmd.c_str());
    return WEXITSTATUS(rc);
}

fs::path fresh_dir(const std::string& name) {
    auto dir = fs::temp_directory_path() / ("guardrec_cli_" + std::to_string(::getpid())) / name;
    fs::remove_all(dir);
    fs::create_directories(dir);
    return dir;
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

nlohmann::json load_json(const fs::path& p) { return nlohmann::json::parse(slurp(p)); }

struct Workspace {
    fs::path raw, prep;
    Workspace() {
        raw = fresh_dir("raw");
        prep = fresh_dir("prep");
        REQUIRE(run("synth --out " + raw.string() +
                    " --n-guardians 60 --n-urls 40 --seed 5") == 0);
        REQUIRE(run("prepare --interactions " + (raw / "interactions.tsv").string() +
                    " --edges " + (raw / "edges.tsv").string() + " --guardian-docs " +
                    (raw / "guardian_docs.jsonl").string() + " --url-docs " +
                    (raw / "url_docs.jsonl").string() + " --vocab-size 500 --topk-sim 10" +
                    " --seed 9 --out " + prep.string()) == 0);
    }
};

Workspace& workspace() {
    static Workspace ws;
    return ws;
}

}  // namespace

TEST_CASE("prepare materializes seven artifacts with stable hashes") {
    auto& ws = workspace();
    auto manifest = load_json(ws.prep / "manifest.json");
    REQUIRE(manifest["artifacts"].size() == 7);
    for (const auto& a : manifest["artifacts"])
        CHECK(fs::exists(ws.prep / a["name"].get<std::string>()));

    // rerun into a second directory: hashes identical (idempotent)
    auto prep2 = fresh_dir("prep2");
    auto& raw = ws.raw;
    REQUIRE(run("prepare --interactions " + (raw / "interactions.tsv").string() + " --edges " +
                (raw / "edges.tsv").string() + " --guardian-docs " +
                (raw / "guardian_docs.jsonl").string() + " --url-docs " +
                (raw / "url_docs.jsonl").string() + " --vocab-size 500 --topk-sim 10" +
                " --seed 9 --out " + prep2.string()) == 0);
    auto manifest2 = load_json(prep2 / "manifest.json");
    CHECK(manifest["artifacts"] == manifest2["artifacts"]);
}

TEST_CASE("train, evaluate and recommend round-trip through the filesystem") {
    auto& ws = workspace();
    auto model_dir = fresh_dir("model");
    REQUIRE(run("train --data " + ws.prep.string() + " --variant GAU --dim 8 --max-iters 150" +
                " --seed 3 --out " + model_dir.string()) == 0);
    CHECK(fs::exists(model_dir / "model.bin"));
    auto trace = load_json(model_dir / "trace.json");
    CHECK(trace["stop_reason"].is_string());
    double first = trace["loss_history"].front().get<double>();
    double last = trace["loss_history"].back().get<double>();
    CHECK(last < first);

    auto eval_dir = fresh_dir("eval");
    REQUIRE(run("evaluate --data " + ws.prep.string() + " --model " +
                (model_dir / "model.bin").string() + " --cohorts --out " +
                eval_dir.string()) == 0);
    auto report = load_json(eval_dir / "report.json");
    for (const char* m : {"recall@5", "ndcg@10", "map@15"})
        CHECK(report["metrics"][m].is_number());
    CHECK(report["cohorts"]["cold"]["n_evaluated"].is_number());
    CHECK(fs::exists(eval_dir / "report.txt"));

    // recommend prints exactly k lines for one guardian
    auto out_file = fs::temp_directory_path() / "rec_out.txt";
    REQUIRE(run("recommend --data " + ws.prep.string() + " --model " +
                (model_dir / "model.bin").string() + " --guardian g0 -k 5", out_file) == 0);
    std::istringstream lines(slurp(out_file));
    std::string line;
    int count = 0;
    while (std::getline(lines, line))
        if (!line.empty()) ++count;
    CHECK(count == 5);
}

TEST_CASE("recommend rejects unknown guardian ids with a nonzero exit") {
    auto& ws = workspace();
    auto model_dir = fresh_dir("model_unknown");
    REQUIRE(run("train --data " + ws.prep.string() +
                " --variant BASIC --dim 4 --max-iters 20 --out " + model_dir.string()) == 0);
    CHECK(run("recommend --data " + ws.prep.string() + " --model " +
              (model_dir / "model.bin").string() + " --guardian nobody -k 3") != 0);
}

TEST_CASE("evaluate without a model file fails without writing a report") {
    auto& ws = workspace();
    auto eval_dir = fresh_dir("eval_missing");
    CHECK(run("evaluate --data " + ws.prep.string() + " --model /nonexistent/model.bin --out " +
              eval_dir.string()) != 0);
    CHECK(!fs::exists(eval_dir / "report.json"));
}

TEST_CASE("training a social variant without prepared edges names the missing input") {
    auto& ws = workspace();
    auto prep_noedges = fresh_dir("prep_noedges");
    REQUIRE(run("prepare --interactions " + (ws.raw / "interactions.tsv").string() +
                " --vocab-size 500 --out " + prep_noedges.string()) == 0);
    auto model_dir = fresh_dir("model_noedges");
    std::string cmd = cli_path() + " train --data " + prep_noedges.string() +
                      " --variant BASIC+NW+UC --out " + model_dir.string() + " 2>&1";
    FILE* pipe = popen(cmd.c_str(), "r");
    REQUIRE(pipe != nullptr);
    std::string output;
    char buf[256];
    while (fgets(buf, sizeof(buf), pipe)) output += buf;
    int rc = pclose(pipe);
    CHECK(WEXITSTATUS(rc) != 0);
    CHECK(output.find("--edges") != std::string::npos);
}

TEST_CASE("ablate emits the six-variant table and is byte-identical under one seed") {
    auto& ws = workspace();
    auto run_ablate = [&](const fs::path& dir) {
        return run("ablate --data " + ws.prep.string() +
                   " --repeats 2 --dim 6 --max-iters 120 --grid-shift 1 --seed 13 --jobs 2" +
                   " --out " + dir.string());
    };
    auto a_dir = fresh_dir("ablate_a");
    auto b_dir = fresh_dir("ablate_b");
    REQUIRE(run_ablate(a_dir) == 0);
    REQUIRE(run_ablate(b_dir) == 0);
    CHECK(slurp(a_dir / "ablation.json") == slurp(b_dir / "ablation.json"));
    CHECK(slurp(a_dir / "ablation.txt") == slurp(b_dir / "ablation.txt"));

    auto report = load_json(a_dir / "ablation.json");
    REQUIRE(report["rows"].size() == 6);
    int metric_cols = 0;
    for (const auto& [key, val] : report["rows"][0]["metrics"].items()) {
        (void)key;
        CHECK(val.contains("rank"));
        ++metric_cols;
    }
    CHECK(metric_cols == 9);
    CHECK(report["rows"][0]["avg_rank"].is_number());
}

TEST_CASE("analyze writes stats json and csv series") {
    auto raw = fresh_dir("tweets");
    {
        std::ofstream out(raw / "tweets.jsonl");
        out << R"({"id":"d1","kind":"D","ts":1478001000,"parent_ts":1478000000,"text":"fake claim debunked"})"
            << "\n";
        out << R"({"id":"d2","kind":"D","ts":1479000000,"parent_ts":1478990000,"text":"election rumor checked"})"
            << "\n";
        out << R"({"id":"s1","kind":"S","ts":1478002000,"parent_id":"d1"})" << "\n";
        out << R"({"id":"s2","kind":"S","ts":1478003000,"parent_id":"d1"})" << "\n";
        out << R"({"id":"s3","kind":"S","ts":1478004500,"parent_id":"d1"})" << "\n";
    }
    auto out_dir = fresh_dir("analytics");
    REQUIRE(run("analyze --tweets " + (raw / "tweets.jsonl").string() + " --out " +
                out_dir.string()) == 0);
    auto j = load_json(out_dir / "analytics.json");
    CHECK(j["d_response_times"]["n"] == 2);
    CHECK(j["d_response_times"]["median_seconds"].get<double>() > 0);
    CHECK(j["s_inter_posting"]["n_deltas"] == 2);
    CHECK(j["s_inter_posting"]["n_pairs"] == 1);
    CHECK(j["monthly"]["months"].size() == 1);  // everything lands in 2016-11
    CHECK(fs::exists(out_dir / "monthly_counts.csv"));
    CHECK(fs::exists(out_dir / "d_response_gaps.csv"));
}

TEST_CASE("synth rerun with one seed is bit-identical on disk") {
    auto a = fresh_dir("synth_a");
    auto b = fresh_dir("synth_b");
    REQUIRE(run("synth --out " + a.string() + " --n-guardians 30 --n-urls 20 --seed 77") == 0);
    REQUIRE(run("synth --out " + b.string() + " --n-guardians 30 --n-urls 20 --seed 77") == 0);
    for (const char* f : {"interactions.tsv", "edges.tsv", "guardian_docs.jsonl", "bundle.json"})
        CHECK(slurp(a / f) == slurp(b / f));
}
