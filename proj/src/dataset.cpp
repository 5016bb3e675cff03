#include "guardrec/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <random>
#include <sstream>

#include <nlohmann/json.hpp>

namespace guardrec {

Index IdIndex::add(const std::string& id) {
    auto it = lookup_.find(id);
    if (it != lookup_.end()) return it->second;
    Index idx = static_cast<Index>(ids_.size());
    ids_.push_back(id);
    lookup_.emplace(id, idx);
    return idx;
}

std::optional<Index> IdIndex::find(const std::string& id) const {
    auto it = lookup_.find(id);
    if (it == lookup_.end()) return std::nullopt;
    return it->second;
}

InteractionMatrix::InteractionMatrix(Index n_guardians, Index n_urls,
                                     std::vector<InteractionTriplet> triplets, IdIndex guardians,
                                     IdIndex urls)
    : n_guardians_(n_guardians),
      n_urls_(n_urls),
      guardian_ids_(std::move(guardians)),
      url_ids_(std::move(urls)) {
    for (const auto& t : triplets) {
        if (t.guardian < 0 || t.guardian >= n_guardians_ || t.url < 0 || t.url >= n_urls_)
            throw Error("interaction index out of range: (" + std::to_string(t.guardian) + "," +
                        std::to_string(t.url) + ")");
    }
    // Stable sort keeps the first-seen duplicate (and its timestamp) in front.
    std::stable_sort(triplets.begin(), triplets.end(), [](const auto& a, const auto& b) {
        return a.guardian != b.guardian ? a.guardian < b.guardian : a.url < b.url;
    });
    row_ptr_.assign(static_cast<std::size_t>(n_guardians_) + 1, 0);
    cols_.reserve(triplets.size());
    ts_.reserve(triplets.size());
    Index prev_g = -1, prev_u = -1;
    for (const auto& t : triplets) {
        if (t.guardian == prev_g && t.url == prev_u) continue;  // duplicate collapses
        prev_g = t.guardian;
        prev_u = t.url;
        cols_.push_back(t.url);
        ts_.push_back(t.ts);
        if (t.ts != InteractionTriplet::kNoTimestamp) has_timestamps_ = true;
        ++row_ptr_[static_cast<std::size_t>(t.guardian) + 1];
    }
    for (std::size_t i = 1; i < row_ptr_.size(); ++i) row_ptr_[i] += row_ptr_[i - 1];
}

std::span<const Index> InteractionMatrix::row(Index guardian) const {
    if (guardian < 0 || guardian >= n_guardians_)
        throw Error("guardian index out of range: " + std::to_string(guardian));
    auto g = static_cast<std::size_t>(guardian);
    return {cols_.data() + row_ptr_[g], row_ptr_[g + 1] - row_ptr_[g]};
}

std::span<const std::int64_t> InteractionMatrix::row_timestamps(Index guardian) const {
    if (guardian < 0 || guardian >= n_guardians_)
        throw Error("guardian index out of range: " + std::to_string(guardian));
    auto g = static_cast<std::size_t>(guardian);
    return {ts_.data() + row_ptr_[g], row_ptr_[g + 1] - row_ptr_[g]};
}

bool InteractionMatrix::contains(Index guardian, Index url) const {
    auto r = row(guardian);
    return std::binary_search(r.begin(), r.end(), url);
}

Eigen::SparseMatrix<double> InteractionMatrix::to_sparse() const {
    Eigen::SparseMatrix<double> m(n_guardians_, n_urls_);
    std::vector<Eigen::Triplet<double>> trips;
    trips.reserve(nnz());
    for (Index g = 0; g < n_guardians_; ++g)
        for (Index u : row(g)) trips.emplace_back(g, u, 1.0);
    m.setFromTriplets(trips.begin(), trips.end());
    return m;
}

std::vector<InteractionTriplet> InteractionMatrix::triplets() const {
    std::vector<InteractionTriplet> out;
    out.reserve(nnz());
    for (Index g = 0; g < n_guardians_; ++g) {
        auto r = row(g);
        auto t = row_timestamps(g);
        for (std::size_t i = 0; i < r.size(); ++i) out.push_back({g, r[i], t[i]});
    }
    return out;
}

bool InteractionMatrix::operator==(const InteractionMatrix& other) const {
    return n_guardians_ == other.n_guardians_ && n_urls_ == other.n_urls_ &&
           row_ptr_ == other.row_ptr_ && cols_ == other.cols_ && ts_ == other.ts_ &&
           guardian_ids_ == other.guardian_ids_ && url_ids_ == other.url_ids_;
}

SocialGraph::SocialGraph(Index n, std::vector<std::pair<Index, Index>> edges) : n_(n) {
    std::vector<std::pair<Index, Index>> sym;
    sym.reserve(edges.size() * 2);
    for (auto [a, b] : edges) {
        if (a < 0 || a >= n_ || b < 0 || b >= n_)
            throw Error("social edge index out of range");
        if (a == b) continue;
        sym.emplace_back(a, b);
        sym.emplace_back(b, a);
    }
    std::sort(sym.begin(), sym.end());
    sym.erase(std::unique(sym.begin(), sym.end()), sym.end());
    row_ptr_.assign(static_cast<std::size_t>(n_) + 1, 0);
    cols_.reserve(sym.size());
    for (auto [a, b] : sym) {
        cols_.push_back(b);
        ++row_ptr_[static_cast<std::size_t>(a) + 1];
    }
    for (std::size_t i = 1; i < row_ptr_.size(); ++i) row_ptr_[i] += row_ptr_[i - 1];
    edge_count_ = cols_.size() / 2;
}

std::span<const Index> SocialGraph::neighbors(Index i) const {
    if (i < 0 || i >= n_) throw Error("guardian index out of range: " + std::to_string(i));
    auto g = static_cast<std::size_t>(i);
    return {cols_.data() + row_ptr_[g], row_ptr_[g + 1] - row_ptr_[g]};
}

double SocialGraph::offdiag_density() const {
    if (n_ < 2) return 0.0;
    return static_cast<double>(2 * edge_count_) /
           (static_cast<double>(n_) * (static_cast<double>(n_) - 1.0));
}

Eigen::SparseMatrix<double> SocialGraph::to_sparse() const {
    Eigen::SparseMatrix<double> m(n_, n_);
    std::vector<Eigen::Triplet<double>> trips;
    trips.reserve(cols_.size());
    for (Index i = 0; i < n_; ++i)
        for (Index j : neighbors(i)) trips.emplace_back(i, j, 1.0);
    m.setFromTriplets(trips.begin(), trips.end());
    return m;
}

bool SocialGraph::operator==(const SocialGraph& other) const {
    return n_ == other.n_ && row_ptr_ == other.row_ptr_ && cols_ == other.cols_;
}

namespace {

std::vector<std::string> split_tabs(const std::string& line) {
    std::vector<std::string> fields;
    std::size_t start = 0;
    while (true) {
        std::size_t pos = line.find('\t', start);
        if (pos == std::string::npos) {
            fields.push_back(line.substr(start));
            break;
        }
        fields.push_back(line.substr(start, pos - start));
        start = pos + 1;
    }
    return fields;
}

std::string strip_cr(std::string s) {
    if (!s.empty() && s.back() == '\r') s.pop_back();
    return s;
}

std::int64_t parse_ts(const std::string& s, const std::string& path, std::size_t line_no) {
    try {
        std::size_t used = 0;
        std::int64_t v = std::stoll(s, &used);
        if (used != s.size()) throw std::invalid_argument("trailing");
        return v;
    } catch (const std::exception&) {
        throw ParseError(path, line_no, "bad timestamp '" + s + "'");
    }
}

}  // namespace

InteractionMatrix load_interactions(const std::string& path, InteractionFormat format) {
    std::ifstream in(path);
    if (!in) throw Error("cannot open " + path);
    IdIndex guardians, urls;
    std::vector<InteractionTriplet> triplets;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        line = strip_cr(line);
        if (line.empty()) continue;
        std::string gid, uid;
        std::int64_t ts = InteractionTriplet::kNoTimestamp;
        if (format == InteractionFormat::tsv) {
            auto fields = split_tabs(line);
            if (fields.size() < 2 || fields.size() > 3 || fields[0].empty() || fields[1].empty())
                throw ParseError(path, line_no, "expected guardian<TAB>url[<TAB>ts]");
            gid = fields[0];
            uid = fields[1];
            if (fields.size() == 3 && !fields[2].empty()) ts = parse_ts(fields[2], path, line_no);
        } else {
            nlohmann::json j;
            try {
                j = nlohmann::json::parse(line);
            } catch (const nlohmann::json::exception& e) {
                throw ParseError(path, line_no, e.what());
            }
            if (!j.contains("guardian") || !j.contains("url"))
                throw ParseError(path, line_no, "missing 'guardian' or 'url'");
            gid = j["guardian"].get<std::string>();
            uid = j["url"].get<std::string>();
            if (gid.empty() || uid.empty()) throw ParseError(path, line_no, "empty id");
            if (j.contains("ts")) ts = j["ts"].get<std::int64_t>();
        }
        triplets.push_back({guardians.add(gid), urls.add(uid), ts});
    }
    if (triplets.empty()) throw Error(path + ": no interactions");
    const Index n = guardians.size(), m = urls.size();
    return InteractionMatrix(n, m, std::move(triplets), std::move(guardians), std::move(urls));
}

void save_interactions(const InteractionMatrix& m, const std::string& path,
                       InteractionFormat format) {
    if (m.guardian_ids().empty() || m.url_ids().empty())
        throw Error("cannot save a matrix without id maps");
    std::ofstream out(path);
    if (!out) throw Error("cannot write " + path);
    for (const auto& t : m.triplets()) {
        const std::string& gid = m.guardian_ids().id(t.guardian);
        const std::string& uid = m.url_ids().id(t.url);
        if (format == InteractionFormat::tsv) {
            out << gid << '\t' << uid;
            if (t.ts != InteractionTriplet::kNoTimestamp) out << '\t' << t.ts;
            out << '\n';
        } else {
            nlohmann::ordered_json j;
            j["guardian"] = gid;
            j["url"] = uid;
            if (t.ts != InteractionTriplet::kNoTimestamp) j["ts"] = t.ts;
            out << j.dump() << '\n';
        }
    }
}

InteractionMatrix filter_min_urls(const InteractionMatrix& m, Index min_distinct) {
    if (min_distinct < 1) throw Error("min_distinct must be >= 1");
    std::vector<Index> keep_guardian;
    for (Index g = 0; g < m.n_guardians(); ++g)
        if (static_cast<Index>(m.row(g).size()) >= min_distinct) keep_guardian.push_back(g);
    if (keep_guardian.empty()) throw Error("filter_min_urls removed every guardian");

    std::vector<Index> url_map(static_cast<std::size_t>(m.n_urls()), -1);
    Index next_url = 0;
    // URL re-index preserves original index order among surviving URLs.
    std::vector<bool> url_seen(static_cast<std::size_t>(m.n_urls()), false);
    for (Index g : keep_guardian)
        for (Index u : m.row(g)) url_seen[static_cast<std::size_t>(u)] = true;
    for (Index u = 0; u < m.n_urls(); ++u)
        if (url_seen[static_cast<std::size_t>(u)]) url_map[static_cast<std::size_t>(u)] = next_url++;

    IdIndex guardians, urls;
    const bool has_ids = !m.guardian_ids().empty();
    if (has_ids) {
        for (Index g : keep_guardian) guardians.add(m.guardian_ids().id(g));
        for (Index u = 0; u < m.n_urls(); ++u)
            if (url_map[static_cast<std::size_t>(u)] >= 0) urls.add(m.url_ids().id(u));
    }

    std::vector<InteractionTriplet> triplets;
    triplets.reserve(m.nnz());
    for (std::size_t gi = 0; gi < keep_guardian.size(); ++gi) {
        Index g = keep_guardian[gi];
        auto r = m.row(g);
        auto t = m.row_timestamps(g);
        for (std::size_t i = 0; i < r.size(); ++i)
            triplets.push_back({static_cast<Index>(gi), url_map[static_cast<std::size_t>(r[i])],
                                t[i]});
    }
    return InteractionMatrix(static_cast<Index>(keep_guardian.size()), next_url,
                             std::move(triplets), std::move(guardians), std::move(urls));
}

SplitTriple split_per_guardian(const InteractionMatrix& m, const SplitRatios& ratios,
                               std::uint64_t seed) {
    std::vector<InteractionTriplet> train, val, test;
    std::mt19937_64 rng(mix_seed(seed, "split-per-guardian"));
    for (Index g = 0; g < m.n_guardians(); ++g) {
        auto r = m.row(g);
        auto t = m.row_timestamps(g);
        const auto n = r.size();
        if (n < 3)
            throw Error("guardian " + std::to_string(g) + " has " + std::to_string(n) +
                        " entries; need >= 3 (run filter_min_urls first)");
        std::vector<std::size_t> order(n);
        for (std::size_t i = 0; i < n; ++i) order[i] = i;
        std::shuffle(order.begin(), order.end(), rng);
        auto n_train = static_cast<std::size_t>(
            std::max<long>(1, std::lround(ratios.train * static_cast<double>(n))));
        auto n_test = static_cast<std::size_t>(
            std::max<long>(1, std::lround(ratios.test * static_cast<double>(n))));
        if (n_train + n_test > n) n_train = n - n_test;  // keeps test >= 1, train >= 1 for n >= 3
        for (std::size_t i = 0; i < n; ++i) {
            InteractionTriplet trip{g, r[order[i]], t[order[i]]};
            if (i < n_train)
                train.push_back(trip);
            else if (i < n_train + n_test)
                test.push_back(trip);
            else
                val.push_back(trip);
        }
    }
    SplitTriple out;
    out.seed = seed;
    out.train = InteractionMatrix(m.n_guardians(), m.n_urls(), std::move(train), m.guardian_ids(),
                                  m.url_ids());
    out.validation = InteractionMatrix(m.n_guardians(), m.n_urls(), std::move(val),
                                       m.guardian_ids(), m.url_ids());
    out.test = InteractionMatrix(m.n_guardians(), m.n_urls(), std::move(test), m.guardian_ids(),
                                 m.url_ids());
    return out;
}

SocialLoadResult load_social_edges(const std::string& path, const IdIndex& guardians) {
    std::ifstream in(path);
    if (!in) throw Error("cannot open " + path);
    SocialLoadResult res;
    std::vector<std::pair<Index, Index>> edges;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        line = strip_cr(line);
        if (line.empty()) continue;
        auto fields = split_tabs(line);
        if (fields.size() != 2 || fields[0].empty() || fields[1].empty())
            throw ParseError(path, line_no, "expected guardian<TAB>guardian");
        auto a = guardians.find(fields[0]);
        auto b = guardians.find(fields[1]);
        if (!a || !b) {
            ++res.skipped_unknown;
            continue;
        }
        if (*a == *b) {
            ++res.dropped_self;
            continue;
        }
        edges.emplace_back(*a, *b);
    }
    res.graph = SocialGraph(guardians.size(), std::move(edges));
    if (res.skipped_unknown > 0)
        log_info("load_social_edges: skipped " + std::to_string(res.skipped_unknown) +
                 " edges with unknown ids");
    return res;
}

void save_social_edges(const SocialGraph& g, const IdIndex& guardians, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw Error("cannot write " + path);
    for (Index i = 0; i < g.size(); ++i)
        for (Index j : g.neighbors(i))
            if (i < j) out << guardians.id(i) << '\t' << guardians.id(j) << '\n';
}

namespace {

std::string block_token(int block, int term) {
    return "block" + std::to_string(block) + "term" + std::to_string(term);
}

std::string synth_doc(std::mt19937_64& rng, int block, const SyntheticConfig& cfg) {
    std::uniform_int_distribution<int> pick_block_term(0, cfg.block_vocab - 1);
    std::uniform_int_distribution<int> pick_shared_term(0, cfg.shared_vocab - 1);
    std::bernoulli_distribution use_shared(0.2);
    std::string text;
    for (int t = 0; t < cfg.doc_tokens; ++t) {
        if (!text.empty()) text += ' ';
        if (use_shared(rng))
            text += "common" + std::to_string(pick_shared_term(rng));
        else
            text += block_token(block, pick_block_term(rng));
    }
    return text;
}

}  // namespace

SyntheticBundle generate_synthetic(const SyntheticConfig& cfg, std::uint64_t seed) {
    if (cfg.n_guardians < 1 || cfg.n_urls < 1 || cfg.n_blocks < 1) throw Error("bad synthetic dims");
    if (cfg.in_block_rate < 0 || cfg.in_block_rate > 1 || cfg.cross_block_rate < 0 ||
        cfg.cross_block_rate > 1)
        throw Error("rates must lie in [0,1]");
    if (cfg.in_block_rate <= cfg.cross_block_rate)
        throw Error("in_block_rate must exceed cross_block_rate");

    SyntheticBundle out;
    out.guardian_block.resize(static_cast<std::size_t>(cfg.n_guardians));
    out.url_block.resize(static_cast<std::size_t>(cfg.n_urls));
    for (Index g = 0; g < cfg.n_guardians; ++g)
        out.guardian_block[static_cast<std::size_t>(g)] = static_cast<int>(g % cfg.n_blocks);
    for (Index u = 0; u < cfg.n_urls; ++u)
        out.url_block[static_cast<std::size_t>(u)] = static_cast<int>(u % cfg.n_blocks);

    IdIndex guardians, urls;
    for (Index g = 0; g < cfg.n_guardians; ++g) guardians.add("g" + std::to_string(g));
    for (Index u = 0; u < cfg.n_urls; ++u) urls.add("u" + std::to_string(u));

    std::mt19937_64 rng(mix_seed(seed, "synthetic-interactions"));
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    std::vector<InteractionTriplet> triplets;
    std::size_t within = 0;
    for (Index g = 0; g < cfg.n_guardians; ++g) {
        std::vector<Index> row;
        for (int attempt = 0;; ++attempt) {
            row.clear();
            for (Index u = 0; u < cfg.n_urls; ++u) {
                bool same = out.guardian_block[static_cast<std::size_t>(g)] ==
                            out.url_block[static_cast<std::size_t>(u)];
                double rate = same ? cfg.in_block_rate : cfg.cross_block_rate;
                if (unit(rng) < rate) row.push_back(u);
            }
            if (!row.empty()) break;
            if (attempt >= cfg.max_row_retries)
                throw Error("guardian " + std::to_string(g) + " drew an empty row " +
                            std::to_string(cfg.max_row_retries + 1) + " times; raise the rates");
        }
        for (Index u : row) {
            triplets.push_back({g, u, InteractionTriplet::kNoTimestamp});
            if (out.guardian_block[static_cast<std::size_t>(g)] ==
                out.url_block[static_cast<std::size_t>(u)])
                ++within;
        }
    }
    const std::size_t total = triplets.size();
    out.interactions = InteractionMatrix(cfg.n_guardians, cfg.n_urls, std::move(triplets),
                                         std::move(guardians), std::move(urls));
    out.empirical_within_fraction = total ? static_cast<double>(within) / static_cast<double>(total) : 0.0;

    // Expected within share from the rates and round-robin block sizes.
    double within_pairs = 0.0, cross_pairs = 0.0;
    for (Index g = 0; g < cfg.n_guardians; ++g)
        for (Index u = 0; u < cfg.n_urls; ++u)
            (out.guardian_block[static_cast<std::size_t>(g)] ==
                     out.url_block[static_cast<std::size_t>(u)]
                 ? within_pairs
                 : cross_pairs) += 1.0;
    double expected_within = within_pairs * cfg.in_block_rate;
    double expected_total = expected_within + cross_pairs * cfg.cross_block_rate;
    out.planted_within_fraction = expected_total > 0 ? expected_within / expected_total : 0.0;

    std::mt19937_64 social_rng(mix_seed(seed, "synthetic-social"));
    std::vector<std::pair<Index, Index>> edges;
    for (Index a = 0; a < cfg.n_guardians; ++a)
        for (Index b = a + 1; b < cfg.n_guardians; ++b) {
            bool same = out.guardian_block[static_cast<std::size_t>(a)] ==
                        out.guardian_block[static_cast<std::size_t>(b)];
            double rate = same ? cfg.social_in_rate : cfg.social_cross_rate;
            if (unit(social_rng) < rate) edges.emplace_back(a, b);
        }
    out.social = SocialGraph(cfg.n_guardians, std::move(edges));

    std::mt19937_64 doc_rng(mix_seed(seed, "synthetic-docs"));
    for (Index g = 0; g < cfg.n_guardians; ++g)
        out.guardian_docs.push_back({out.interactions.guardian_ids().id(g),
                                     synth_doc(doc_rng, out.guardian_block[static_cast<std::size_t>(g)], cfg)});
    for (Index u = 0; u < cfg.n_urls; ++u)
        out.url_docs.push_back({out.interactions.url_ids().id(u),
                                synth_doc(doc_rng, out.url_block[static_cast<std::size_t>(u)], cfg)});
    return out;
}

std::vector<Document> load_documents(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw Error("cannot open " + path);
    std::vector<Document> docs;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        line = strip_cr(line);
        if (line.empty()) continue;
        nlohmann::json j;
        try {
            j = nlohmann::json::parse(line);
        } catch (const nlohmann::json::exception& e) {
            throw ParseError(path, line_no, e.what());
        }
        if (!j.contains("id") || !j.contains("text"))
            throw ParseError(path, line_no, "missing 'id' or 'text'");
        std::string id = j["id"].is_string() ? j["id"].get<std::string>() : j["id"].dump();
        docs.push_back({std::move(id), j["text"].get<std::string>()});
    }
    return docs;
}

void save_documents(const std::vector<Document>& docs, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw Error("cannot write " + path);
    for (const auto& d : docs) {
        nlohmann::ordered_json j;
        j["id"] = d.id;
        j["text"] = d.text;
        out << j.dump() << '\n';
    }
}

}  // namespace guardrec
